#include "ibridge/reproduce.hpp"

#include "ibridge/io.hpp"

#include <cmath>
#include <ostream>

namespace ibridge {

std::vector<MethodSpec> published_methods()
{
    std::vector<MethodSpec> methods{MethodSpec::glasso()};
    for (double gamma : kPublishedGammas) {
        methods.push_back(MethodSpec::proposed(gamma));
    }
    return methods;
}

TableReproduction reproduce_table(int table_id, std::size_t replicates, std::uint64_t seed, const FitConfig& config,
                                  const std::function<void(std::size_t)>& on_row)
{
    const auto table = published_table(table_id);
    if (!table) {
        throw ConfigError("unknown table: " + std::to_string(table_id));
    }
    TableReproduction out;
    out.table = *table;
    out.replicates = replicates;
    out.seed = seed;
    const std::vector<MethodSpec> methods = published_methods();
    for (std::size_t i = 0; i < table->rows.size(); ++i) {
        const SimDesign design = table_design(*table, table->rows[i].correlation, seed);
        out.rows.push_back(run_table(design, replicates, methods, config));
        if (on_row) {
            on_row(i);
        }
    }
    return out;
}

namespace {

std::string field(double value)
{
    return std::isfinite(value) ? format_double(value) : std::string();
}

} // namespace

void write_reproduction_csv(std::ostream& os, const TableReproduction& result)
{
    os << "table,row,method,replicates,failures,tp_mean,tp_sd,size_mean,size_sd,"
          "published_tp_mean,published_tp_sd,published_size_mean,published_size_sd\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const PublishedRow& published = result.table.rows.at(i);
        const TableRun& run = result.rows[i];
        for (std::size_t k = 0; k < run.cells.size(); ++k) {
            const CellSummary& c = run.cells[k];
            const PublishedCell& p = published.cells.at(k);
            os << result.table.id << ',' << c.row << ',' << c.method << ',' << c.replicates << ',' << c.failures
               << ',' << field(c.tp_mean) << ',' << field(c.tp_sd) << ',' << field(c.size_mean) << ','
               << field(c.size_sd) << ',' << format_double(p.tp_mean) << ',' << format_double(p.tp_sd) << ','
               << format_double(p.size_mean) << ',' << format_double(p.size_sd) << '\n';
        }
    }
}

} // namespace ibridge
