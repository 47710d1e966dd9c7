#pragma once

#include "ibridge/common.hpp"
#include "ibridge/kmw.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace ibridge {

inline constexpr double kLockedWeight = std::numeric_limits<double>::infinity();

/// Relative slack allowed when checking that an objective did not increase.
inline constexpr double kMonotoneSlack = 1e-12;

/// Penalty weight per (gene, subtype) block, in GeneStructure block order.
/// +inf locks a block at zero.
struct GroupWeights {
    std::vector<double> w;
};

/// beta nested gene -> subtype -> SNP vector, stored per block in
/// GeneStructure block order. A block is selected iff its norm is positive.
class CoefficientSet {
public:
    CoefficientSet() = default;
    explicit CoefficientSet(const GeneStructure& structure, double fill = 0.0);

    std::size_t num_blocks() const noexcept { return blocks_.size(); }
    Vector& block(std::size_t b) { return blocks_.at(b); }
    const Vector& block(std::size_t b) const { return blocks_.at(b); }
    double norm(std::size_t b) const { return blocks_.at(b).norm(); }
    bool selected(std::size_t b) const { return norm(b) > 0.0; }

    /// Selected (gene, subtype) pairs in block order.
    std::vector<GeneSubtype> selected_pairs(const GeneStructure& structure) const;
    std::size_t num_selected() const;
    /// Sum of d_jk over selected blocks.
    std::size_t active_coordinates() const;

    Vector flatten() const;
    /// Euclidean distance between two sets with the same layout.
    double distance(const CoefficientSet& other) const;
    bool all_zero() const;
    /// Checks the layout against `structure`; throws ConfigError on mismatch.
    void check_layout(const GeneStructure& structure) const;

private:
    std::vector<Vector> blocks_;
};

/// One majorize-minimize group soft-threshold step for a block:
/// z = beta + block' residual / (n L), beta <- (1 - w / (L ||z||))_+ z.
Vector block_update(const Eigen::Ref<const Vector>& residual, const Eigen::Ref<const Matrix>& block,
                    const Vector& beta, double weight, double lipschitz, double n);

/// Y - X beta over all stacked rows.
Vector residual(const StackedDesign& design, const CoefficientSet& beta);
/// (1/2n) ||Y - X beta||^2.
double loss(const StackedDesign& design, const CoefficientSet& beta);
/// loss + sum_b w_b ||beta_b||, with 0 * inf = 0.
double glasso_objective(const StackedDesign& design, const GroupWeights& weights, const CoefficientSet& beta);

/// exact: minimize the block subproblem exactly through the eigen
/// decomposition of its Gram matrix. mm: a single block_update step per visit.
enum class BlockRule { exact, mm };

/// Exact minimizer of 0.5 b'Gb - a'b + w ||b|| given G = V diag(values) V'.
Vector block_minimizer(const Vector& a, const Vector& values, const Matrix& vectors, double weight);

struct SolverOptions {
    double tol = 1e-7;
    int max_sweeps = 10000;
    /// Full residual recomputation period, in sweeps.
    int refresh_every = 50;
    BlockRule rule = BlockRule::exact;
    /// Evaluate the objective after every sweep and count increases.
    bool check_monotone = true;
};

struct SolveStats {
    bool converged = false;
    int sweeps = 0;
    double max_change = 0.0;
    std::size_t monotone_violations = 0;
};

struct GlassoSolution {
    CoefficientSet beta;
    SolveStats stats;
};

/// Weighted group Lasso by cyclic group coordinate descent. Full sweeps
/// alternate with sweeps over the active blocks; the solve stops after a full
/// sweep whose largest block change is below `tol`. On hitting max_sweeps the
/// last iterate is returned with converged = false.
GlassoSolution solve_weighted_glasso(const StackedDesign& design, const GroupWeights& weights,
                                     CoefficientSet beta0, const SolverOptions& options = {});

struct KktReport {
    double active_violation = 0.0;    // max || g_b - w_b beta_b / ||beta_b|| ||
    double inactive_violation = 0.0;  // max (||g_b|| - w_b)_+
    bool passes(double threshold) const
    {
        return active_violation <= threshold && inactive_violation <= threshold;
    }
};

/// Stationarity residuals of the weighted group Lasso at `beta`, where
/// g_b = X_b' r / n.
KktReport kkt_check(const StackedDesign& design, const GroupWeights& weights, const CoefficientSet& beta);

} // namespace ibridge
