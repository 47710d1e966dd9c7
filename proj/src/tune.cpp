#include "ibridge/tune.hpp"

#include "ibridge/io.hpp"
#include "ibridge/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace ibridge {

bool LsNorms::any_ridge() const
{
    return std::find(ridge.begin(), ridge.end(), true) != ridge.end();
}

LsNorms ls_block_norms(const StackedDesign& design)
{
    LsNorms out;
    out.norm.assign(design.num_blocks(), 0.0);
    out.ridge.assign(design.num_blocks(), false);
    for (std::size_t b = 0; b < design.num_blocks(); ++b) {
        const StackedBlock& block = design.block(b);
        const Matrix gram = block.x.transpose() * block.x;
        const Vector rhs = block.x.transpose() * design.subtype_y(block.subtype);
        const auto d = gram.rows();
        const double trace = gram.trace();
        if (!(trace > 0.0)) {
            out.ridge[b] = true;
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        Matrix system = gram;
        if (lo <= 1e-10 * hi) {
            out.ridge[b] = true;
            system.diagonal().array() += 1e-6 * trace / static_cast<double>(d);
        }
        out.norm[b] = system.llt().solve(rhs).norm();
    }
    return out;
}

double df_approx(const CoefficientSet& beta, const std::vector<double>& ls_norms, const GeneStructure& structure)
{
    beta.check_layout(structure);
    if (ls_norms.size() != structure.num_blocks()) {
        throw ConfigError("one least-squares norm per block is required");
    }
    double df = 0.0;
    for (std::size_t b = 0; b < structure.num_blocks(); ++b) {
        const double norm = beta.norm(b);
        if (norm <= 0.0) {
            continue;
        }
        const double ratio = ls_norms[b] > 0.0 ? norm / ls_norms[b] : 1.0;
        df += 1.0 + ratio * (static_cast<double>(structure.block(b).size()) - 1.0);
    }
    return df;
}

double bic(double rss, std::size_t n, double df)
{
    if (n == 0) {
        throw ConfigError("BIC needs n > 0");
    }
    const double nd = static_cast<double>(n);
    return std::log(std::max(rss, 1e-12) / nd) + std::log(nd) * df / nd;
}

std::vector<double> log_grid(double top, double ratio, std::size_t size)
{
    if (!(top > 0.0) || !(ratio >= 1.0) || size == 0) {
        throw ConfigError("lambda grid needs top > 0, ratio >= 1 and size >= 1");
    }
    std::vector<double> grid(size, top);
    for (std::size_t i = 1; i < size; ++i) {
        grid[i] = top * std::pow(ratio, -static_cast<double>(i) / static_cast<double>(size - 1));
    }
    return grid;
}

namespace {

BridgeConfig config_for(const BridgeConfig& base, double gamma, double lambda, const GeneStructure& structure)
{
    BridgeConfig config = BridgeConfig::make(gamma, lambda, structure);
    config.tol_outer = base.tol_outer;
    config.max_outer = base.max_outer;
    config.inner = base.inner;
    config.multi_start = base.multi_start;
    return config;
}

} // namespace

double bridge_lambda_max(const StackedDesign& design, double gamma, const BridgeConfig& base, double precision,
                         FitDiagnostics* diagnostics)
{
    if (!(precision > 0.0 && precision < 1.0)) {
        throw ConfigError("bisection precision must lie in (0, 1)");
    }
    const GeneStructure& structure = design.structure();
    const BridgeConfig unit = config_for(base, gamma, 1.0, structure);
    const double n = static_cast<double>(design.n());

    // At the all-ones start s_j = sum_k d_jk; the first beta-step is empty
    // once every block gradient is inside its weight.
    double upper = 0.0;
    for (std::size_t b = 0; b < design.num_blocks(); ++b) {
        const StackedBlock& block = design.block(b);
        const std::size_t gene = block.gene;
        double s = 0.0;
        for (std::size_t k : structure.gene_blocks(gene)) {
            s += static_cast<double>(structure.block(k).size());
        }
        const double d = static_cast<double>(structure.block(b).size());
        const double unit_weight = gamma * unit.c[gene] * std::sqrt(d) * std::pow(s, gamma - 1.0);
        const double grad = (block.x.transpose() * design.subtype_y(block.subtype)).norm() / n;
        upper = std::max(upper, grad / unit_weight);
    }
    if (!(upper > 0.0)) {
        throw DataError("the response is orthogonal to every block");
    }

    auto empty_at = [&](double lambda) {
        FitResult fit = fit_bridge(design, config_for(base, gamma, lambda, structure));
        if (diagnostics != nullptr) {
            *diagnostics += fit.diagnostics;
        }
        return fit.selected.empty();
    };

    double hi = upper * (1.0 + 1e-9);
    for (int i = 0; i < 60 && !empty_at(hi); ++i) {
        hi *= 2.0;
    }
    double lo = hi / 2.0;
    for (int i = 0; i < 60 && empty_at(lo); ++i) {
        hi = lo;
        lo /= 2.0;
    }
    while ((hi - lo) / hi > precision) {
        const double mid = std::sqrt(lo * hi);
        if (empty_at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

TuningReport tune_fit(const StackedDesign& design, const TuneOptions& options)
{
    if (options.gammas.empty()) {
        throw ConfigError("at least one gamma is required");
    }
    const GeneStructure& structure = design.structure();
    const LsNorms ls = ls_block_norms(design);
    const std::size_t num_gammas = options.gammas.size();
    const std::size_t size = options.grid_size;

    TuningReport report;
    report.ls_ridge_used = ls.any_ridge();
    report.lambda_max.assign(num_gammas, 0.0);
    std::vector<FitDiagnostics> bisection(num_gammas);
    parallel_for(num_gammas, options.threads, [&](std::size_t g) {
        report.lambda_max[g] = bridge_lambda_max(design, options.gammas[g], options.base,
                                                 options.bisection_precision, &bisection[g]);
    });
    for (const auto& d : bisection) {
        report.diagnostics += d;
    }

    report.grid.resize(num_gammas * size);
    std::vector<FitResult> fits(num_gammas * size);
    // Each gamma walks its grid downward so the first beta-step can be warm started.
    parallel_for(num_gammas, options.threads, [&](std::size_t g) {
        const double gamma = options.gammas[g];
        const std::vector<double> lambdas = log_grid(report.lambda_max[g], options.grid_ratio, size);
        PathState path;
        for (std::size_t k = 0; k < size; ++k) {
            const std::size_t i = g * size + k;
            FitResult fit = fit_bridge(design, config_for(options.base, gamma, lambdas[k], structure), &path);
            GridPoint& point = report.grid[i];
            point.gamma = gamma;
            point.lambda = lambdas[k];
            point.rss = residual(design, fit.beta).squaredNorm();
            point.df = df_approx(fit.beta, ls.norm, structure);
            point.bic = bic(point.rss, design.n(), point.df);
            point.model_size = fit.selected.size();
            point.outer_iterations = fit.outer_iterations;
            point.converged = fit.converged;
            fits[i] = std::move(fit);
        }
    });

    report.best_per_gamma.assign(num_gammas, 0);
    report.best_fits.resize(num_gammas);
    double overall = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < num_gammas; ++g) {
        std::size_t best = g * size;
        // The grid descends, so a strict comparison keeps the larger lambda on ties.
        for (std::size_t i = g * size; i < (g + 1) * size; ++i) {
            report.diagnostics += fits[i].diagnostics;
            if (report.grid[i].bic < report.grid[best].bic) {
                best = i;
            }
        }
        report.best_per_gamma[g] = best;
        report.best_fits[g] = fits[best];
        const GridPoint& point = report.grid[best];
        if (point.bic < overall ||
            (point.bic == overall && point.lambda > report.grid[report.best].lambda)) {
            overall = point.bic;
            report.best = best;
            report.best_gamma_index = g;
        }
    }
    if (options.keep_fits) {
        report.fits = std::move(fits);
    }
    return report;
}

void write_tuning_csv(std::ostream& os, const TuningReport& report)
{
    os << "gamma,lambda,bic,df,rss,model_size,outer_iterations,converged,best\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        const GridPoint& p = report.grid[i];
        os << format_double(p.gamma) << ',' << format_double(p.lambda) << ',' << format_double(p.bic) << ','
           << format_double(p.df) << ',' << format_double(p.rss) << ',' << p.model_size << ',' << p.outer_iterations
           << ',' << (p.converged ? 1 : 0) << ',' << (i == report.best ? 1 : 0) << '\n';
    }
}

double glasso_lambda_max(const StackedDesign& design)
{
    const double n = static_cast<double>(design.n());
    double top = 0.0;
    for (std::size_t b = 0; b < design.num_blocks(); ++b) {
        const StackedBlock& block = design.block(b);
        const double grad = (block.x.transpose() * design.subtype_y(block.subtype)).norm() / n;
        top = std::max(top, grad / std::sqrt(static_cast<double>(block.x.cols())));
    }
    return top;
}

GlassoTuning fit_glasso_bic(const StackedDesign& design, const std::vector<double>& lambda_grid,
                            const SolverOptions& solver)
{
    if (lambda_grid.empty()) {
        throw ConfigError("group-Lasso grid is empty");
    }
    const GeneStructure& structure = design.structure();
    const LsNorms ls = ls_block_norms(design);

    GlassoTuning out;
    out.lambdas = lambda_grid;
    std::sort(out.lambdas.begin(), out.lambdas.end(), std::greater<>());
    CoefficientSet beta(structure, 0.0);
    double best_bic = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.lambdas.size(); ++i) {
        GroupWeights weights;
        weights.w.resize(design.num_blocks());
        for (std::size_t b = 0; b < design.num_blocks(); ++b) {
            weights.w[b] = out.lambdas[i] * std::sqrt(static_cast<double>(structure.block(b).size()));
        }
        GlassoSolution sol = solve_weighted_glasso(design, weights, beta, solver);
        FitDiagnostics& d = out.diagnostics;
        ++d.inner_solves;
        d.inner_sweeps += static_cast<std::size_t>(sol.stats.sweeps);
        d.sweep_monotone_violations += sol.stats.monotone_violations;
        if (sol.stats.converged) {
            ++d.kkt_checked;
            if (!kkt_check(design, weights, sol.beta).passes(10.0 * solver.tol)) {
                ++d.kkt_failures;
            }
        } else {
            ++d.inner_nonconverged;
        }
        beta = std::move(sol.beta);
        const double rss = residual(design, beta).squaredNorm();
        const double df = df_approx(beta, ls.norm, structure);
        const double score = bic(rss, design.n(), df);
        out.bics.push_back(score);
        out.dfs.push_back(df);
        out.sizes.push_back(beta.num_selected());
        if (score < best_bic) {
            best_bic = score;
            out.best = i;
            out.beta = beta;
        }
    }
    out.selected = out.beta.selected_pairs(structure);
    return out;
}

} // namespace ibridge
