#pragma once

#include "ibridge/bridge.hpp"
#include "ibridge/common.hpp"
#include "ibridge/gcd.hpp"
#include "ibridge/kmw.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace ibridge {

/// Per-block norms of the single-block least-squares fits.
struct LsNorms {
    std::vector<double> norm;
    std::vector<bool> ridge;   // true where the Gram matrix was singular

    bool any_ridge() const;
};

/// Least squares of the owning subtype's weighted response on each block
/// alone. A singular Gram matrix gets a ridge of 1e-6 * trace / d_jk.
LsNorms ls_block_norms(const StackedDesign& design);

/// Grouped degrees of freedom:
/// sum I(||b_jk|| > 0) + sum ||b_jk|| / ||b_jk^LS|| (d_jk - 1).
/// A zero LS norm under an active block counts the ratio as 1.
double df_approx(const CoefficientSet& beta, const std::vector<double>& ls_norms, const GeneStructure& structure);

/// log(rss / n) + log(n) df / n, with rss floored at 1e-12.
double bic(double rss, std::size_t n, double df);

/// Default lambda_max / lambda_min.
inline constexpr double kDefaultGridRatio = 7.0;

struct TuneOptions {
    std::vector<double> gammas{0.5, 0.7, 0.9};
    std::size_t grid_size = 50;
    /// lambda_max / lambda_min.
    double grid_ratio = kDefaultGridRatio;
    /// Relative width at which the lambda_max bisection stops.
    double bisection_precision = 0.01;
    BridgeConfig base;   // tolerances and solver options; gamma/lambda ignored
    std::size_t threads = 1;
    /// Keep every grid fit (otherwise only the per-gamma best fits).
    bool keep_fits = false;
};

struct GridPoint {
    double gamma = 0.0;
    double lambda = 0.0;
    double bic = 0.0;
    double df = 0.0;
    double rss = 0.0;
    std::size_t model_size = 0;
    int outer_iterations = 0;
    bool converged = false;
};

struct TuningReport {
    std::vector<GridPoint> grid;
    std::vector<double> lambda_max;         // per gamma
    std::vector<std::size_t> best_per_gamma;  // index into grid
    std::vector<FitResult> best_fits;        // per gamma
    std::size_t best = 0;                    // index into grid
    std::size_t best_gamma_index = 0;
    bool ls_ridge_used = false;
    FitDiagnostics diagnostics;              // summed over every fit
    std::vector<FitResult> fits;             // every grid point when keep_fits

    const FitResult& best_fit() const { return best_fits.at(best_gamma_index); }
};

/// Log-spaced grid from `top` down to top / ratio.
std::vector<double> log_grid(double top, double ratio, std::size_t size);

/// Smallest lambda (to the requested relative precision) whose bridge fit is
/// empty, found by bisection. The returned lambda gives an empty model.
double bridge_lambda_max(const StackedDesign& design, double gamma, const BridgeConfig& base,
                         double precision, FitDiagnostics* diagnostics = nullptr);

/// BIC tuning over gamma x lambda. Ties prefer the larger lambda.
TuningReport tune_fit(const StackedDesign& design, const TuneOptions& options);

void write_tuning_csv(std::ostream& os, const TuningReport& report);

/// Group-Lasso comparator on a single-subtype design: weights lambda sqrt(d_jk)
/// along a decreasing grid with warm starts, lambda chosen by BIC.
struct GlassoTuning {
    std::vector<double> lambdas;
    std::vector<double> bics;
    std::vector<double> dfs;
    std::vector<std::size_t> sizes;
    std::size_t best = 0;
    CoefficientSet beta;
    std::vector<GeneSubtype> selected;
    FitDiagnostics diagnostics;
};

/// max_b ||X_b' Y / n|| / sqrt(d_b): the smallest lambda with an empty group Lasso.
double glasso_lambda_max(const StackedDesign& design);

GlassoTuning fit_glasso_bic(const StackedDesign& design, const std::vector<double>& lambda_grid,
                            const SolverOptions& solver = {});

} // namespace ibridge
