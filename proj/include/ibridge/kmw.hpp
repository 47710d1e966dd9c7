#pragma once

#include "ibridge/cohort.hpp"
#include "ibridge/common.hpp"

#include <cstddef>
#include <vector>

namespace ibridge {

/// Kaplan-Meier (Stute) weights of one subtype.
///
/// `order[i]` is the input index of the i-th smallest observed time; ties put
/// events before censored observations and are otherwise stable.
/// `weights[i]` is the weight of that sorted observation.
struct KmWeights {
    std::vector<std::size_t> order;
    Vector weights;
};

KmWeights km_weights(const Vector& log_time, const IntVector& event);

/// Weighted-centered responses and covariates, rows in KmWeights order.
struct WeightedCohort {
    Vector y;
    Matrix x;
    Vector x_center;   // weighted covariate means
    double y_center = 0.0;
};

/// X_w(i) = sqrt(w_i) (X_(i) - xbar_w), likewise for the log times.
/// Throws DataError when every weight is zero.
WeightedCohort center_and_weight(const SubtypeCohort& cohort, const KmWeights& w);

struct PcaBlock {
    Matrix scores;     // n x r
    Matrix loadings;   // d x r, orthonormal columns
    Vector explained;  // variance fraction per retained component
};

/// Leading principal components of a column-centered block, keeping the
/// fewest components whose cumulative explained variance reaches
/// `variance_fraction`. Throws DataError for a zero-variance block.
PcaBlock pca_within_gene(const Matrix& block, double variance_fraction);

enum class PcaMode {
    off,
    on,
    /// Reduce only blocks whose covariance is near singular.
    automatic,
};

/// Smallest-to-largest covariance eigenvalue ratio that triggers PCA in
/// automatic mode.
inline constexpr double kPcaTriggerRatio = 1e-8;

struct StackedBlock {
    std::size_t gene = 0;
    std::size_t subtype = 0;
    Matrix x;                  // rows of the owning subtype only, already scaled
    Matrix gram;               // x' x / n
    double lipschitz = 0.0;    // largest eigenvalue of gram
    Vector eigenvalues;        // of gram, ascending; tiny values clamped to 0
    Matrix eigenvectors;
    Matrix loadings;           // original SNP columns -> design columns; empty = identity
    std::size_t source_column = 0;  // first genotype column in the raw cohort
    std::size_t source_size = 0;
};

/// The stacked block-diagonal least-squares problem
/// (1/2n) || Y - sum_b X_b beta_b ||^2.
///
/// Only the owning subtype's rows of each block are stored; all other rows
/// are zero. Subtype m occupies rows [row_offset(m), row_offset(m+1)).
class StackedDesign {
public:
    StackedDesign() = default;

    /// Assembles a design from already weighted data. `subtype_rows[m]` is the
    /// row count of subtype m, `blocks` follow `structure` block order and hold
    /// subtype-local rows. Gram matrices and Lipschitz constants are computed
    /// here.
    StackedDesign(GeneStructure structure, std::vector<std::size_t> subtype_rows, Vector y,
                  std::vector<StackedBlock> blocks);

    const GeneStructure& structure() const noexcept { return structure_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(y_.size()); }
    const Vector& y() const noexcept { return y_; }
    std::size_t num_blocks() const noexcept { return blocks_.size(); }
    const StackedBlock& block(std::size_t b) const { return blocks_.at(b); }
    std::size_t row_offset(std::size_t m) const { return row_offset_.at(m); }
    std::size_t subtype_rows(std::size_t m) const { return row_offset_.at(m + 1) - row_offset_.at(m); }

    /// Rows of Y belonging to subtype m.
    auto subtype_y(std::size_t m) const
    {
        return y_.segment(static_cast<Eigen::Index>(row_offset(m)), static_cast<Eigen::Index>(subtype_rows(m)));
    }

    // Per-subtype quantities needed to score new subjects.
    std::vector<double> scale;            // sqrt(n / n_m)
    std::vector<Vector> x_center;         // weighted genotype means (raw columns)
    std::vector<double> y_center;
    std::vector<std::size_t> raw_columns; // genotype columns of each raw cohort

private:
    GeneStructure structure_;
    std::vector<std::size_t> row_offset_;
    Vector y_;
    std::vector<StackedBlock> blocks_;
};

struct StackOptions {
    PcaMode pca = PcaMode::off;
    double variance_fraction = 0.9;
};

/// Weights, centers and rescales each subtype by sqrt(n / n_m), then stacks
/// them. Throws DataError when a subtype has no positive weight.
StackedDesign build_stacked(const MultiStudy& ms, const StackOptions& options = {});

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration(const Matrix& gram, double tol = 1e-10, int max_iter = 1000);

} // namespace ibridge
