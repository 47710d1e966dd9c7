#include "ibridge/eval.hpp"
#include "ibridge/io.hpp"
#include "ibridge/parallel.hpp"
#include "ibridge/presets.hpp"
#include "ibridge/reproduce.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ibridge;

namespace {

constexpr int kRuntimeError = 1;
constexpr int kConfigError = 2;

struct Common {
    std::uint64_t seed = 1;
    std::optional<std::size_t> threads;
    std::string out = ".";
    std::vector<double> gammas{0.5, 0.7, 0.9};
    std::size_t grid_size = 50;
    double grid_ratio = kDefaultGridRatio;
    std::string pca = "off";
};

struct Source {
    std::string data;
    std::string preset;
    std::uint64_t replicate = 0;
};

FitConfig fit_config(const Common& c)
{
    FitConfig config;
    config.gammas = c.gammas;
    config.grid_size = c.grid_size;
    config.grid_ratio = c.grid_ratio;
    config.threads = resolve_threads(c.threads);
    if (c.pca == "on") {
        config.stack.pca = PcaMode::on;
    } else if (c.pca == "auto") {
        config.stack.pca = PcaMode::automatic;
    }
    return config;
}

json common_json(const Common& c)
{
    return {{"seed", c.seed},
            {"threads", resolve_threads(c.threads)},
            {"gammas", c.gammas},
            {"lambda_grid", c.grid_size},
            {"lambda_ratio", c.grid_ratio},
            {"pca", c.pca}};
}

fs::path prepare_out(const std::string& out)
{
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw DataError("cannot write " + path.string());
    }
    os << text;
}

void write_json(const fs::path& path, const json& value)
{
    write_text(path, value.dump(2) + "\n");
}

void write_manifest(const fs::path& dir, const std::string& command, json config)
{
    write_json(dir / "manifest.json",
               {{"tool", "ibridge"}, {"version", IBRIDGE_VERSION}, {"command", command}, {"config", std::move(config)}});
}

std::vector<std::string> subtype_ids(const MultiStudy& ms)
{
    std::vector<std::string> ids;
    for (const auto& c : ms.cohorts) {
        ids.push_back(c.id);
    }
    return ids;
}

// Loads --data, or simulates replicate --replicate of --preset.
MultiStudy load_source(const Source& src, std::uint64_t seed, std::optional<Simulator>* sim = nullptr)
{
    if (src.data.empty() == src.preset.empty()) {
        throw ConfigError("exactly one of --data and --preset is required");
    }
    if (!src.preset.empty()) {
        Simulator simulator(preset_design(src.preset, seed));
        MultiStudy ms = simulator.replicate(src.replicate);
        if (sim != nullptr) {
            sim->emplace(std::move(simulator));
        }
        return ms;
    }
    const CsvPaths paths = CsvPaths::in_directory(src.data);
    for (const fs::path& p : {paths.genotype, paths.survival, paths.gene_map}) {
        if (!fs::is_regular_file(p)) {
            throw ConfigError("dataset file not found: " + p.string());
        }
    }
    MultiStudy ms = load_csv(paths);
    return ms.has_missing() ? filter_missing(ms) : ms;
}

json source_json(const Source& src)
{
    if (!src.preset.empty()) {
        return {{"preset", src.preset}, {"replicate", src.replicate}};
    }
    return {{"data", fs::absolute(src.data).lexically_normal().string()}};
}

// Gene rows, subtype columns, block L2 norms of the selected blocks.
void print_norm_table(std::ostream& os, const FitResult& fit, const GeneStructure& structure,
                      const std::vector<std::string>& subtypes)
{
    std::map<std::size_t, std::vector<double>> rows;
    for (const auto& pair : fit.selected) {
        auto& row = rows[pair.gene];
        row.resize(subtypes.size(), 0.0);
        const auto b = structure.find_block(pair.gene, pair.subtype);
        row[pair.subtype] = b ? fit.beta.norm(*b) : 0.0;
    }
    os << std::left << std::setw(12) << "gene";
    for (const auto& s : subtypes) {
        os << std::right << std::setw(12) << s;
    }
    os << '\n';
    for (const auto& [gene, norms] : rows) {
        os << std::left << std::setw(12) << structure.gene_id(gene);
        for (double v : norms) {
            std::ostringstream cell;
            if (v > 0.0) {
                cell << std::fixed << std::setprecision(3) << v;
            }
            os << std::right << std::setw(12) << cell.str();
        }
        os << '\n';
    }
}

int cmd_simulate(const Common& c, const std::string& preset, std::uint64_t replicate)
{
    const SimDesign design = preset_design(preset, c.seed);
    const Simulator sim(design);
    const MultiStudy ms = sim.replicate(replicate);
    const fs::path dir = prepare_out(c.out);
    save_csv(ms, CsvPaths::in_directory(dir));
    json truth = to_json(sim.truth(), ms.structure, subtype_ids(ms));
    truth["censor_upper"] = sim.censor_upper();
    write_json(dir / "truth.json", truth);
    write_manifest(dir, "simulate",
                   {{"seed", c.seed}, {"preset", preset}, {"replicate", replicate}, {"design", to_json(design)}});
    std::size_t censored = 0;
    for (const auto& cohort : ms.cohorts) {
        censored += static_cast<std::size_t>((cohort.event.array() == 0).count());
    }
    std::cout << "simulated " << ms.num_subtypes() << " subtypes, " << ms.n() << " subjects, "
              << ms.structure.num_genes() << " genes; censoring "
              << static_cast<double>(censored) / static_cast<double>(ms.n()) << "\n"
              << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_fit(const Common& c, const Source& src, bool tune_only)
{
    std::optional<Simulator> sim;
    const MultiStudy ms = load_source(src, c.seed, &sim);
    const FitConfig config = fit_config(c);
    const TunedModel model = fit_tuned(ms, config);
    const TuningReport& report = model.report;
    const fs::path dir = prepare_out(c.out);
    const auto subtypes = subtype_ids(ms);

    std::ostringstream csv;
    write_tuning_csv(csv, report);
    write_text(dir / "tuning.csv", csv.str());
    if (!tune_only) {
        json per_gamma = json::array();
        for (const auto& fit : report.best_fits) {
            per_gamma.push_back(to_json(fit, ms.structure, subtypes));
        }
        json out = {{"tuning", to_json(report)},
                    {"best", to_json(report.best_fit(), ms.structure, subtypes)},
                    {"per_gamma", std::move(per_gamma)}};
        write_json(dir / "fit.json", out);
    } else {
        write_json(dir / "tune.json", to_json(report));
    }
    json manifest = common_json(c);
    manifest["source"] = source_json(src);
    write_manifest(dir, tune_only ? "tune" : "fit", std::move(manifest));

    for (std::size_t g = 0; g < report.best_fits.size(); ++g) {
        const GridPoint& p = report.grid[report.best_per_gamma[g]];
        std::cout << "gamma " << p.gamma << ": lambda " << p.lambda << ", BIC " << p.bic << ", "
                  << report.best_fits[g].selected.size() << " blocks selected\n";
    }
    const GridPoint& best = report.grid[report.best];
    std::cout << "best: gamma " << best.gamma << ", lambda " << best.lambda << "\n";
    if (!tune_only) {
        print_norm_table(std::cout, report.best_fit(), ms.structure, subtypes);
    }
    if (sim) {
        const ReplicateScore s = score_selection(report.best_fit().selected, sim->truth());
        std::cout << "true positives " << s.true_positives << " of " << sim->truth().pairs.size() << "\n";
    }
    return 0;
}

int cmd_reproduce(const Common& c, int table, std::size_t replicates)
{
    if (replicates == 0) {
        throw ConfigError("--replicates must be positive");
    }
    if (!published_table(table)) {
        throw ConfigError("unknown table: " + std::to_string(table));
    }
    if (replicates == 1) {
        std::cerr << "warning: a single replicate leaves the SD columns empty\n";
    }
    const FitConfig config = fit_config(c);
    const TableReproduction result = reproduce_table(table, replicates, c.seed, config, [&](std::size_t i) {
        std::cerr << "row " << i + 1 << " done\n";
    });
    const fs::path dir = prepare_out(c.out);
    std::ostringstream csv;
    write_reproduction_csv(csv, result);
    const std::string name = "table" + std::to_string(table) + ".csv";
    write_text(dir / name, csv.str());
    json manifest = common_json(c);
    manifest["table"] = table;
    manifest["replicates"] = replicates;
    write_manifest(dir, "reproduce", std::move(manifest));

    FitDiagnostics proposed;
    for (const auto& row : result.rows) {
        proposed += row.diagnostics;
        for (const auto& cell : row.cells) {
            std::cout << std::left << std::setw(12) << cell.row << std::setw(16) << cell.method << " TP "
                      << std::fixed << std::setprecision(1) << cell.tp_mean << "  size " << cell.size_mean << "\n";
        }
    }
    std::cout.unsetf(std::ios::floatfield);
    std::cout << "outer monotone violations " << proposed.outer_monotone_violations << ", KKT failures "
              << proposed.kkt_failures << " of " << proposed.kkt_checked << "\n"
              << "wrote " << (dir / name).string() << "\n";
    return 0;
}

int cmd_stability(const Common& c, const Source& src, std::size_t rounds, double fraction)
{
    const MultiStudy ms = load_source(src, c.seed);
    const StabilityReport report = occurrence_index(ms, fit_config(c), rounds, fraction, c.seed);
    const fs::path dir = prepare_out(c.out);
    std::ostringstream csv;
    write_stability_csv(csv, report);
    write_text(dir / "stability.csv", csv.str());
    json manifest = common_json(c);
    manifest["source"] = source_json(src);
    manifest["rounds"] = rounds;
    manifest["fraction"] = fraction;
    write_manifest(dir, "stability", std::move(manifest));
    std::cout << "rounds used " << report.used << " of " << report.requested << "\n";
    for (std::size_t g = 0; g < report.gene_ids.size(); ++g) {
        for (std::size_t m = 0; m < report.subtype_ids.size(); ++m) {
            if (report.index(g, m) >= 0.5) {
                std::cout << report.gene_ids[g] << ' ' << report.subtype_ids[m] << ' ' << report.index(g, m) << "\n";
            }
        }
    }
    return 0;
}

int cmd_predict(const Common& c, const Source& src, std::size_t rounds, double fraction)
{
    const MultiStudy ms = load_source(src, c.seed);
    const PredictionReport report = predict_evaluate(ms, fit_config(c), rounds, c.seed, fraction);
    const fs::path dir = prepare_out(c.out);
    std::ostringstream csv;
    write_prediction_csv(csv, report);
    write_text(dir / "prediction.csv", csv.str());
    json manifest = common_json(c);
    manifest["source"] = source_json(src);
    manifest["rounds"] = rounds;
    manifest["fraction"] = fraction;
    write_manifest(dir, "predict", std::move(manifest));
    if (!report.informative()) {
        std::cout << "no informative round\n";
        return 0;
    }
    std::cout << "mean logrank statistic " << report.mean_statistic << ", p " << report.p_value << " ("
              << report.statistics.size() << " rounds, " << report.skipped << " skipped)\n";
    return 0;
}

void add_common(CLI::App* cmd, Common& c, bool fitting)
{
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--threads", c.threads, "Worker threads (default: BRIDGE_THREADS, else all cores)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "Output directory");
    if (fitting) {
        cmd->add_option("--gamma", c.gammas, "Bridge exponents, comma separated")
            ->delimiter(',')
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--lambda-grid", c.grid_size, "Lambda grid size")->check(CLI::PositiveNumber);
        cmd->add_option("--lambda-ratio", c.grid_ratio, "lambda_max / lambda_min")->check(CLI::Range(1.0, 1e12));
        cmd->add_option("--pca", c.pca, "Within-gene PCA")->check(CLI::IsMember({"off", "on", "auto"}));
    }
}

void add_source(CLI::App* cmd, Source& src)
{
    auto* data = cmd->add_option("--data", src.data, "Dataset directory (genotype.csv, survival.csv, gene_map.csv)");
    auto* preset = cmd->add_option("--preset", src.preset, "Simulate this preset instead of loading data");
    data->excludes(preset);
    cmd->add_option("--replicate", src.replicate, "Replicate index for --preset");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Integrative bridge selection for multi-subtype survival studies"};
    app.set_version_flag("--version", IBRIDGE_VERSION);
    app.require_subcommand(1);

    Common common;
    Source source;
    std::string preset;
    std::uint64_t replicate = 0;
    int table = 0;
    std::size_t replicates = 100;
    std::size_t rounds = 100;
    double fraction = 0.75;

    auto* simulate = app.add_subcommand("simulate", "Simulate a preset design and write the CSV triple");
    add_common(simulate, common, false);
    simulate->add_option("--preset", preset, "Preset name (see `presets`)")->required();
    simulate->add_option("--replicate", replicate, "Replicate index");

    auto* fit = app.add_subcommand("fit", "BIC-tuned bridge fit");
    add_common(fit, common, true);
    add_source(fit, source);

    auto* tune = app.add_subcommand("tune", "BIC path over the gamma x lambda grid");
    add_common(tune, common, true);
    add_source(tune, source);

    auto* reproduce = app.add_subcommand("reproduce", "Rerun a published simulation table");
    add_common(reproduce, common, true);
    reproduce->add_option("--table", table, "Table id (2, 3, 5, 6, 7, 8)")->required();
    reproduce->add_option("--replicates", replicates, "Replicates per row");

    auto* stability = app.add_subcommand("stability", "Occurrence index over random subsamples");
    add_common(stability, common, true);
    add_source(stability, source);
    stability->add_option("-B,--rounds", rounds, "Subsampling rounds")->check(CLI::PositiveNumber);
    stability->add_option("--fraction", fraction, "Subsample fraction")->check(CLI::Range(0.0, 1.0));

    auto* predict = app.add_subcommand("predict", "Held-out logrank evaluation");
    add_common(predict, common, true);
    add_source(predict, source);
    predict->add_option("-B,--rounds", rounds, "Train/test rounds")->check(CLI::PositiveNumber);
    predict->add_option("--fraction", fraction, "Training fraction")->check(CLI::Range(0.0, 1.0));

    auto* presets = app.add_subcommand("presets", "List preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(common, preset, replicate);
        }
        if (fit->parsed()) {
            return cmd_fit(common, source, false);
        }
        if (tune->parsed()) {
            return cmd_fit(common, source, true);
        }
        if (reproduce->parsed()) {
            return cmd_reproduce(common, table, replicates);
        }
        if (stability->parsed()) {
            return cmd_stability(common, source, rounds, fraction);
        }
        if (predict->parsed()) {
            return cmd_predict(common, source, rounds, fraction);
        }
        if (presets->parsed()) {
            for (const auto& name : preset_names()) {
                std::cout << name << "\n";
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kConfigError;
}
