#include "ibridge/cohort.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

namespace ibridge {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool same_values(const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const double x = a(i, j);
            const double y = b(i, j);
            if (!(x == y || (std::isnan(x) && std::isnan(y)))) {
                return false;
            }
        }
    }
    return true;
}

std::string write_number(double value)
{
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

// Keeps the listed columns of each subtype and rebuilds the structure, dropping
// emptied blocks and genes.
MultiStudy keep_columns(const MultiStudy& ms, const std::vector<std::vector<std::size_t>>& keep)
{
    const GeneStructure& s = ms.structure;
    const std::size_t num_subtypes = ms.num_subtypes();
    std::vector<std::vector<bool>> kept(num_subtypes);
    for (std::size_t m = 0; m < num_subtypes; ++m) {
        kept[m].assign(s.subtype_columns(m), false);
        for (std::size_t col : keep[m]) {
            kept[m].at(col) = true;
        }
    }

    std::vector<std::string> gene_ids;
    std::vector<Block> blocks;
    for (std::size_t j = 0; j < s.num_genes(); ++j) {
        std::vector<Block> gene_blocks;
        for (std::size_t b : s.gene_blocks(j)) {
            const Block& block = s.block(b);
            Block reduced{gene_ids.size(), block.subtype, {}};
            for (std::size_t t = 0; t < block.size(); ++t) {
                if (kept[block.subtype][s.column_offset(b) + t]) {
                    reduced.snp_ids.push_back(block.snp_ids[t]);
                }
            }
            if (reduced.size() > 0) {
                gene_blocks.push_back(std::move(reduced));
            }
        }
        if (!gene_blocks.empty()) {
            gene_ids.push_back(s.gene_id(j));
            for (auto& block : gene_blocks) {
                blocks.push_back(std::move(block));
            }
        }
    }

    MultiStudy out;
    out.structure = GeneStructure(std::move(gene_ids), num_subtypes, std::move(blocks));
    out.cohorts = ms.cohorts;
    for (std::size_t m = 0; m < num_subtypes; ++m) {
        std::vector<Eigen::Index> cols;
        for (std::size_t col = 0; col < kept[m].size(); ++col) {
            if (kept[m][col]) {
                cols.push_back(static_cast<Eigen::Index>(col));
            }
        }
        Matrix g(ms.cohorts[m].genotype.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            g.col(static_cast<Eigen::Index>(c)) = ms.cohorts[m].genotype.col(cols[c]);
        }
        out.cohorts[m].genotype = std::move(g);
    }
    out.validate();
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// GeneStructure

GeneStructure::GeneStructure(std::vector<std::string> gene_ids, std::size_t num_subtypes, std::vector<Block> blocks)
    : gene_ids_(std::move(gene_ids)), blocks_(std::move(blocks))
{
    if (num_subtypes == 0) {
        throw DataError("gene structure needs at least one subtype");
    }
    std::stable_sort(blocks_.begin(), blocks_.end(), [](const Block& a, const Block& b) {
        return a.gene != b.gene ? a.gene < b.gene : a.subtype < b.subtype;
    });

    gene_blocks_.assign(gene_ids_.size(), {});
    subtype_blocks_.assign(num_subtypes, {});
    subtype_columns_.assign(num_subtypes, 0);
    coef_offset_.resize(blocks_.size());
    column_offset_.resize(blocks_.size());

    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const Block& block = blocks_[b];
        if (block.gene >= gene_ids_.size() || block.subtype >= num_subtypes) {
            throw DataError("block refers to an unknown gene or subtype");
        }
        if (block.size() == 0) {
            throw DataError("empty block for gene " + gene_ids_[block.gene]);
        }
        if (!seen.emplace(block.gene, block.subtype).second) {
            throw DataError("duplicate block for gene " + gene_ids_[block.gene]);
        }
        std::set<std::string> ids(block.snp_ids.begin(), block.snp_ids.end());
        if (ids.size() != block.size()) {
            throw DataError("duplicate SNP id inside gene " + gene_ids_[block.gene]);
        }
        gene_blocks_[block.gene].push_back(b);
        coef_offset_[b] = dimension_;
        dimension_ += block.size();
    }
    for (std::size_t j = 0; j < gene_ids_.size(); ++j) {
        if (gene_blocks_[j].empty()) {
            throw DataError("gene " + gene_ids_[j] + " has no measured SNPs");
        }
    }
    // Gene-major block order also gives each subtype's column order.
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const std::size_t m = blocks_[b].subtype;
        column_offset_[b] = subtype_columns_[m];
        subtype_columns_[m] += blocks_[b].size();
        subtype_blocks_[m].push_back(b);
    }
}

std::optional<std::size_t> GeneStructure::find_block(std::size_t gene, std::size_t subtype) const
{
    for (std::size_t b : gene_blocks_.at(gene)) {
        if (blocks_[b].subtype == subtype) {
            return b;
        }
    }
    return std::nullopt;
}

bool operator==(const GeneStructure& a, const GeneStructure& b)
{
    if (a.gene_ids_ != b.gene_ids_ || a.num_subtypes() != b.num_subtypes() || a.blocks_.size() != b.blocks_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
        const Block& x = a.blocks_[i];
        const Block& y = b.blocks_[i];
        if (x.gene != y.gene || x.subtype != y.subtype || x.snp_ids != y.snp_ids) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Cohorts

bool operator==(const SubtypeCohort& a, const SubtypeCohort& b)
{
    return a.id == b.id && a.subject_ids == b.subject_ids && a.time.size() == b.time.size() && a.time == b.time &&
           a.event.size() == b.event.size() && a.event == b.event && same_values(a.genotype, b.genotype);
}

std::size_t MultiStudy::n() const noexcept
{
    std::size_t total = 0;
    for (const auto& c : cohorts) {
        total += c.size();
    }
    return total;
}

bool MultiStudy::has_missing() const
{
    return std::any_of(cohorts.begin(), cohorts.end(), [](const SubtypeCohort& c) { return c.genotype.hasNaN(); });
}

void MultiStudy::validate() const
{
    if (cohorts.size() != structure.num_subtypes()) {
        throw DataError("cohort count does not match the gene structure");
    }
    for (std::size_t m = 0; m < cohorts.size(); ++m) {
        const SubtypeCohort& c = cohorts[m];
        const auto rows = static_cast<Eigen::Index>(c.size());
        if (c.event.size() != rows || c.genotype.rows() != rows ||
            (!c.subject_ids.empty() && c.subject_ids.size() != c.size())) {
            throw DataError("subtype " + c.id + ": row counts disagree");
        }
        if (static_cast<std::size_t>(c.genotype.cols()) != structure.subtype_columns(m)) {
            throw DataError("subtype " + c.id + ": genotype columns do not match the gene structure");
        }
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (c.event(i) != 0 && c.event(i) != 1) {
                throw DataError("subtype " + c.id + ": event indicator must be 0 or 1");
            }
            if (!(c.time(i) > 0.0)) {
                throw DataError("non-positive time in subtype " + c.id);
            }
        }
    }
}

bool operator==(const MultiStudy& a, const MultiStudy& b)
{
    return a.structure == b.structure && a.cohorts == b.cohorts;
}

CsvPaths CsvPaths::in_directory(const std::filesystem::path& dir)
{
    return {dir / "genotype.csv", dir / "survival.csv", dir / "gene_map.csv"};
}

// ---------------------------------------------------------------------------
// CSV ingestion

MultiStudy load_csv(const CsvPaths& paths)
{
    // Gene map: row order fixes gene order and SNP order within genes.
    const csv::Table map_table = csv::read(paths.gene_map);
    if (map_table.header.size() != 2 || map_table.header[0] != "snp_id" || map_table.header[1] != "gene_id") {
        throw DataError("parse error: gene map header must be snp_id,gene_id");
    }
    std::vector<std::string> gene_order;
    std::unordered_map<std::string, std::size_t> gene_index;
    std::vector<std::vector<std::string>> gene_snps;
    std::unordered_map<std::string, std::size_t> snp_gene;
    for (const auto& row : map_table.rows) {
        auto [it, inserted] = gene_index.try_emplace(row[1], gene_order.size());
        if (inserted) {
            gene_order.push_back(row[1]);
            gene_snps.emplace_back();
        }
        if (!snp_gene.emplace(row[0], it->second).second) {
            throw DataError("duplicate SNP in gene map: " + row[0]);
        }
        gene_snps[it->second].push_back(row[0]);
    }

    // Genotypes.
    const csv::Table geno = csv::read(paths.genotype);
    if (geno.header.size() < 2 || geno.header[0] != "subject_id" || geno.header[1] != "subtype") {
        throw DataError("parse error: genotype header must start with subject_id,subtype");
    }
    std::unordered_map<std::string, std::size_t> snp_column;
    for (std::size_t c = 2; c < geno.header.size(); ++c) {
        const std::string& snp = geno.header[c];
        if (!snp_gene.contains(snp)) {
            throw DataError("unmapped SNP: " + snp);
        }
        if (!snp_column.emplace(snp, c - 2).second) {
            throw DataError("duplicate SNP column: " + snp);
        }
    }
    const std::size_t num_snps = geno.header.size() - 2;

    std::vector<std::string> subtype_ids;
    std::unordered_map<std::string, std::size_t> subtype_index;
    std::vector<std::vector<std::size_t>> subtype_rows;
    std::unordered_map<std::string, std::size_t> subject_row;
    Matrix values(static_cast<Eigen::Index>(geno.rows.size()), static_cast<Eigen::Index>(num_snps));
    for (std::size_t r = 0; r < geno.rows.size(); ++r) {
        const auto& row = geno.rows[r];
        if (!subject_row.emplace(row[0], r).second) {
            throw DataError("duplicate subject in genotype file: " + row[0]);
        }
        auto [it, inserted] = subtype_index.try_emplace(row[1], subtype_ids.size());
        if (inserted) {
            subtype_ids.push_back(row[1]);
            subtype_rows.emplace_back();
        }
        subtype_rows[it->second].push_back(r);
        for (std::size_t c = 0; c < num_snps; ++c) {
            const std::string& cell = row[c + 2];
            double v = 0.0;
            if (cell == "NA" || cell.empty()) {
                v = kMissing;
            } else if (!csv::parse_double(cell, v) || !std::isfinite(v)) {
                throw DataError("parse error: " + paths.genotype.string() + ":" +
                                std::to_string(geno.line_numbers[r]) + ": bad genotype '" + cell + "'");
            }
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    if (subtype_ids.empty()) {
        throw DataError("genotype file has no subjects");
    }

    // Survival.
    const csv::Table surv = csv::read(paths.survival);
    if (surv.header != std::vector<std::string>{"subject_id", "subtype", "time", "event"}) {
        throw DataError("parse error: survival header must be subject_id,subtype,time,event");
    }
    if (surv.rows.size() != geno.rows.size()) {
        throw DataError("subject-id mismatch: genotype and survival files list different subjects");
    }
    std::vector<double> time(geno.rows.size(), 0.0);
    std::vector<int> event(geno.rows.size(), 0);
    std::vector<bool> matched(geno.rows.size(), false);
    for (std::size_t r = 0; r < surv.rows.size(); ++r) {
        const auto& row = surv.rows[r];
        const auto found = subject_row.find(row[0]);
        if (found == subject_row.end() || matched[found->second]) {
            throw DataError("subject-id mismatch: " + row[0]);
        }
        if (geno.rows[found->second][1] != row[1]) {
            throw DataError("subject-id mismatch: subject " + row[0] + " has different subtypes");
        }
        double t = 0.0;
        int e = 0;
        const std::string where = paths.survival.string() + ":" + std::to_string(surv.line_numbers[r]);
        if (!csv::parse_double(row[2], t) || !std::isfinite(t)) {
            throw DataError("parse error: " + where + ": bad time '" + row[2] + "'");
        }
        if (t <= 0.0) {
            throw DataError("non-positive time for subject " + row[0]);
        }
        if (!csv::parse_int(row[3], e) || (e != 0 && e != 1)) {
            throw DataError("parse error: " + where + ": event must be 0 or 1");
        }
        matched[found->second] = true;
        time[found->second] = t;
        event[found->second] = e;
    }

    // Columns: gene-map order restricted to SNPs present; a SNP that is NA for
    // every subject of a subtype is unmeasured there.
    const std::size_t num_subtypes = subtype_ids.size();
    std::vector<std::string> gene_ids;
    std::vector<Block> blocks;
    std::vector<std::vector<std::size_t>> subtype_source(num_subtypes);
    for (std::size_t j = 0; j < gene_order.size(); ++j) {
        std::vector<Block> gene_blocks;
        for (std::size_t m = 0; m < num_subtypes; ++m) {
            Block block{gene_ids.size(), m, {}};
            for (const std::string& snp : gene_snps[j]) {
                const auto col = snp_column.find(snp);
                if (col == snp_column.end()) {
                    continue;
                }
                const bool measured = std::any_of(subtype_rows[m].begin(), subtype_rows[m].end(), [&](std::size_t r) {
                    return !std::isnan(values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col->second)));
                });
                if (measured) {
                    block.snp_ids.push_back(snp);
                    subtype_source[m].push_back(col->second);
                }
            }
            if (block.size() > 0) {
                gene_blocks.push_back(std::move(block));
            }
        }
        if (!gene_blocks.empty()) {
            gene_ids.push_back(gene_order[j]);
            for (auto& block : gene_blocks) {
                blocks.push_back(std::move(block));
            }
        }
    }

    MultiStudy ms;
    ms.structure = GeneStructure(std::move(gene_ids), num_subtypes, std::move(blocks));
    ms.cohorts.resize(num_subtypes);
    for (std::size_t m = 0; m < num_subtypes; ++m) {
        SubtypeCohort& c = ms.cohorts[m];
        const auto& rows = subtype_rows[m];
        const auto n_m = static_cast<Eigen::Index>(rows.size());
        c.id = subtype_ids[m];
        c.time.resize(n_m);
        c.event.resize(n_m);
        c.genotype.resize(n_m, static_cast<Eigen::Index>(subtype_source[m].size()));
        for (Eigen::Index i = 0; i < n_m; ++i) {
            const std::size_t r = rows[static_cast<std::size_t>(i)];
            c.subject_ids.push_back(geno.rows[r][0]);
            c.time(i) = time[r];
            c.event(i) = event[r];
            for (std::size_t k = 0; k < subtype_source[m].size(); ++k) {
                c.genotype(i, static_cast<Eigen::Index>(k)) =
                    values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(subtype_source[m][k]));
            }
        }
    }
    ms.validate();
    return ms;
}

void save_csv(const MultiStudy& ms, const CsvPaths& paths)
{
    ms.validate();
    const GeneStructure& s = ms.structure;

    // Union of SNPs per gene, merged in block order.
    std::vector<std::pair<std::string, std::string>> snps;  // (snp, gene)
    std::map<std::string, std::size_t> snp_index;
    for (std::size_t j = 0; j < s.num_genes(); ++j) {
        for (std::size_t b : s.gene_blocks(j)) {
            for (const auto& snp : s.block(b).snp_ids) {
                if (snp_index.emplace(snp, snps.size()).second) {
                    snps.emplace_back(snp, s.gene_id(j));
                }
            }
        }
    }

    std::ofstream map_out(paths.gene_map);
    std::ofstream geno_out(paths.genotype);
    std::ofstream surv_out(paths.survival);
    if (!map_out || !geno_out || !surv_out) {
        throw DataError("cannot write dataset files next to " + paths.genotype.string());
    }
    map_out << "snp_id,gene_id\n";
    for (const auto& [snp, gene] : snps) {
        map_out << snp << ',' << gene << '\n';
    }

    geno_out << "subject_id,subtype";
    for (const auto& entry : snps) {
        geno_out << ',' << entry.first;
    }
    geno_out << '\n';
    surv_out << "subject_id,subtype,time,event\n";

    std::string line;
    for (std::size_t m = 0; m < ms.num_subtypes(); ++m) {
        const SubtypeCohort& c = ms.cohorts[m];
        // Raw column of each SNP in this subtype, or -1 when unmeasured.
        std::vector<long> column(snps.size(), -1);
        for (std::size_t b : s.subtype_blocks(m)) {
            const Block& block = s.block(b);
            for (std::size_t t = 0; t < block.size(); ++t) {
                column[snp_index.at(block.snp_ids[t])] = static_cast<long>(s.column_offset(b) + t);
            }
        }
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            const std::string subject =
                c.subject_ids.empty() ? c.id + "_" + std::to_string(i + 1) : c.subject_ids[i];
            line = subject + ',' + c.id;
            for (long col : column) {
                line += ',';
                const double v = col < 0 ? kMissing : c.genotype(row, col);
                line += std::isnan(v) ? std::string("NA") : write_number(v);
            }
            geno_out << line << '\n';
            surv_out << subject << ',' << c.id << ',' << write_number(c.time(row)) << ',' << c.event(row) << '\n';
        }
    }
    if (!map_out || !geno_out || !surv_out) {
        throw DataError("failed writing dataset files");
    }
}

// ---------------------------------------------------------------------------
// Missing data

MultiStudy filter_missing(const MultiStudy& raw, double subject_threshold, double snp_threshold)
{
    if (!(subject_threshold > 0.0 && subject_threshold < 1.0) || !(snp_threshold > 0.0 && snp_threshold < 1.0)) {
        throw ConfigError("missingness thresholds must lie in (0, 1)");
    }
    raw.validate();

    // Subjects first.
    MultiStudy trimmed = raw;
    for (auto& c : trimmed.cohorts) {
        const Eigen::Index cols = c.genotype.cols();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < c.genotype.rows(); ++i) {
            const double missing = cols == 0 ? 0.0 : static_cast<double>(c.genotype.row(i).array().isNaN().count()) /
                                                     static_cast<double>(cols);
            if (missing <= subject_threshold) {
                keep.push_back(i);
            }
        }
        if (keep.empty()) {
            throw DataError("subtype " + c.id + " loses all subjects to the missingness filter");
        }
        SubtypeCohort kept;
        kept.id = c.id;
        const auto n_kept = static_cast<Eigen::Index>(keep.size());
        kept.time.resize(n_kept);
        kept.event.resize(n_kept);
        kept.genotype.resize(n_kept, cols);
        for (Eigen::Index r = 0; r < n_kept; ++r) {
            const Eigen::Index i = keep[static_cast<std::size_t>(r)];
            if (!c.subject_ids.empty()) {
                kept.subject_ids.push_back(c.subject_ids[static_cast<std::size_t>(i)]);
            }
            kept.time(r) = c.time(i);
            kept.event(r) = c.event(i);
            kept.genotype.row(r) = c.genotype.row(i);
        }
        c = std::move(kept);
    }

    // Then SNPs, per subtype.
    std::vector<std::vector<std::size_t>> keep_cols(trimmed.num_subtypes());
    for (std::size_t m = 0; m < trimmed.num_subtypes(); ++m) {
        const Matrix& g = trimmed.cohorts[m].genotype;
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            const double missing = static_cast<double>(g.col(j).array().isNaN().count()) / static_cast<double>(g.rows());
            if (missing <= snp_threshold) {
                keep_cols[m].push_back(static_cast<std::size_t>(j));
            }
        }
        if (keep_cols[m].empty()) {
            throw DataError("subtype " + trimmed.cohorts[m].id + " loses all SNPs to the missingness filter");
        }
    }
    MultiStudy out = keep_columns(trimmed, keep_cols);

    // Mode imputation of whatever is still missing.
    for (auto& c : out.cohorts) {
        for (Eigen::Index j = 0; j < c.genotype.cols(); ++j) {
            auto col = c.genotype.col(j);
            if (!col.hasNaN()) {
                continue;
            }
            std::map<double, std::size_t> counts;
            for (Eigen::Index i = 0; i < col.size(); ++i) {
                if (!std::isnan(col(i))) {
                    ++counts[col(i)];
                }
            }
            double mode = 0.0;
            std::size_t best = 0;
            for (const auto& [value, count] : counts) {  // ascending: ties keep the smaller value
                if (count > best) {
                    best = count;
                    mode = value;
                }
            }
            for (Eigen::Index i = 0; i < col.size(); ++i) {
                if (std::isnan(col(i))) {
                    col(i) = mode;
                }
            }
        }
    }
    return out;
}

MultiStudy subset_subjects(const MultiStudy& ms, const std::vector<std::vector<std::size_t>>& rows)
{
    if (rows.size() != ms.num_subtypes()) {
        throw ConfigError("subset needs one row list per subtype");
    }
    MultiStudy out;
    out.structure = ms.structure;
    out.cohorts.resize(ms.num_subtypes());
    for (std::size_t m = 0; m < ms.num_subtypes(); ++m) {
        const SubtypeCohort& c = ms.cohorts[m];
        SubtypeCohort& s = out.cohorts[m];
        const auto n = static_cast<Eigen::Index>(rows[m].size());
        s.id = c.id;
        s.time.resize(n);
        s.event.resize(n);
        s.genotype.resize(n, c.genotype.cols());
        for (Eigen::Index r = 0; r < n; ++r) {
            const auto i = static_cast<Eigen::Index>(rows[m][static_cast<std::size_t>(r)]);
            if (i >= static_cast<Eigen::Index>(c.size())) {
                throw ConfigError("subset row out of range");
            }
            if (!c.subject_ids.empty()) {
                s.subject_ids.push_back(c.subject_ids[static_cast<std::size_t>(i)]);
            }
            s.time(r) = c.time(i);
            s.event(r) = c.event(i);
            s.genotype.row(r) = c.genotype.row(i);
        }
    }
    return out;
}

} // namespace ibridge
