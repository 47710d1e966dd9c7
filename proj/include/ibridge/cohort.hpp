#pragma once

#include "ibridge/common.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ibridge {

/// One (gene, subtype) coefficient block: the SNPs of `gene` measured in
/// `subtype`, in column order.
struct Block {
    std::size_t gene = 0;
    std::size_t subtype = 0;
    std::vector<std::string> snp_ids;

    std::size_t size() const noexcept { return snp_ids.size(); }
};

/// Gene -> subtype -> SNP hierarchy.
///
/// Blocks are stored gene-major (gene, then subtype). Within each subtype the
/// genotype columns are laid out gene by gene in gene order, so every block
/// owns a contiguous column range of exactly one subtype's genotype matrix.
/// Genes without any measured block are not representable.
class GeneStructure {
public:
    GeneStructure() = default;
    GeneStructure(std::vector<std::string> gene_ids, std::size_t num_subtypes, std::vector<Block> blocks);

    std::size_t num_genes() const noexcept { return gene_ids_.size(); }
    std::size_t num_subtypes() const noexcept { return subtype_columns_.size(); }
    std::size_t num_blocks() const noexcept { return blocks_.size(); }

    const std::string& gene_id(std::size_t gene) const { return gene_ids_.at(gene); }
    const std::vector<std::string>& gene_ids() const noexcept { return gene_ids_; }
    const Block& block(std::size_t b) const { return blocks_.at(b); }
    std::span<const Block> blocks() const noexcept { return blocks_; }

    /// Block indices of gene j, in subtype order.
    std::span<const std::size_t> gene_blocks(std::size_t gene) const { return gene_blocks_.at(gene); }
    /// M_j: number of subtypes measuring gene j.
    std::size_t measured_subtypes(std::size_t gene) const { return gene_blocks_.at(gene).size(); }
    std::optional<std::size_t> find_block(std::size_t gene, std::size_t subtype) const;

    /// Total coefficient dimension, sum of all d_jk.
    std::size_t dimension() const noexcept { return dimension_; }
    /// Offset of block b in the flattened gene-major coefficient vector.
    std::size_t coef_offset(std::size_t b) const { return coef_offset_.at(b); }
    /// First column of block b inside its subtype's genotype matrix.
    std::size_t column_offset(std::size_t b) const { return column_offset_.at(b); }
    /// Number of genotype columns of subtype m.
    std::size_t subtype_columns(std::size_t m) const { return subtype_columns_.at(m); }
    /// Blocks owned by subtype m, in column order.
    std::span<const std::size_t> subtype_blocks(std::size_t m) const { return subtype_blocks_.at(m); }

    friend bool operator==(const GeneStructure& a, const GeneStructure& b);

private:
    std::vector<std::string> gene_ids_;
    std::vector<Block> blocks_;
    std::vector<std::vector<std::size_t>> gene_blocks_;
    std::vector<std::vector<std::size_t>> subtype_blocks_;
    std::vector<std::size_t> coef_offset_;
    std::vector<std::size_t> column_offset_;
    std::vector<std::size_t> subtype_columns_;
    std::size_t dimension_ = 0;
};

/// Observations of one subtype. Missing genotypes are NaN.
struct SubtypeCohort {
    std::string id;
    std::vector<std::string> subject_ids;
    Vector time;       // follow-up in years, > 0
    IntVector event;   // 1 = death observed
    Matrix genotype;   // subjects x subtype columns of the GeneStructure

    std::size_t size() const noexcept { return static_cast<std::size_t>(time.size()); }
    Vector log_time() const { return time.array().log().matrix(); }

    friend bool operator==(const SubtypeCohort& a, const SubtypeCohort& b);
};

struct MultiStudy {
    std::vector<SubtypeCohort> cohorts;
    GeneStructure structure;

    std::size_t n() const noexcept;
    std::size_t num_subtypes() const noexcept { return cohorts.size(); }
    bool has_missing() const;
    /// Throws DataError when shapes disagree with the structure.
    void validate() const;

    friend bool operator==(const MultiStudy& a, const MultiStudy& b);
};

struct CsvPaths {
    std::filesystem::path genotype;
    std::filesystem::path survival;
    std::filesystem::path gene_map;

    /// genotype.csv, survival.csv and gene_map.csv inside `dir`.
    static CsvPaths in_directory(const std::filesystem::path& dir);
};

/// Reads the CSV triple. Genes and SNPs follow gene-map row order; subtypes and
/// subjects follow their first appearance in the genotype file. A SNP that is
/// `NA` for every subject of a subtype is treated as unmeasured there.
MultiStudy load_csv(const CsvPaths& paths);

/// Writes the CSV triple; load_csv(save_csv(ms)) reproduces `ms` exactly.
void save_csv(const MultiStudy& ms, const CsvPaths& paths);

/// Drops subjects whose missing fraction exceeds `subject_threshold`, then SNPs
/// (per subtype) whose missing fraction exceeds `snp_threshold`, then imputes
/// what is left with the per-subtype column mode (smallest value on ties).
MultiStudy filter_missing(const MultiStudy& raw, double subject_threshold = 0.2, double snp_threshold = 0.2);

/// Restriction of `ms` to the given subject rows of each subtype.
MultiStudy subset_subjects(const MultiStudy& ms, const std::vector<std::vector<std::size_t>>& rows);

} // namespace ibridge
