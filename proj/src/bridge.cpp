#include "ibridge/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ibridge {

namespace {

void check_gamma(double gamma)
{
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ConfigError("gamma must lie in (0, 1)");
    }
}

// log of ((1 - gamma) / (gamma tau))^gamma, the gene-independent factor of theta.
double log_theta_factor(const BridgeConfig& config)
{
    const double g = config.gamma;
    return g * (std::log1p(-g) - std::log(g) - config.log_tau);
}

} // namespace

double BridgeConfig::tau() const { return std::exp(log_tau); }

BridgeConfig BridgeConfig::make(double gamma, double lambda, const GeneStructure& structure)
{
    check_gamma(gamma);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("lambda must be positive and finite");
    }
    BridgeConfig config;
    config.gamma = gamma;
    config.lambda = lambda;
    config.log_tau = log_lambda_to_log_tau(std::log(lambda), gamma);
    config.c.resize(structure.num_genes());
    for (std::size_t j = 0; j < structure.num_genes(); ++j) {
        config.c[j] = std::pow(static_cast<double>(structure.measured_subtypes(j)), 1.0 - gamma);
    }
    return config;
}

double log_lambda_to_log_tau(double log_lambda, double gamma)
{
    check_gamma(gamma);
    return (log_lambda + gamma * std::log(gamma) + (1.0 - gamma) * std::log1p(-gamma)) / (1.0 - gamma);
}

double lambda_to_tau(double lambda, double gamma)
{
    if (!(lambda > 0.0)) {
        throw ConfigError("lambda must be positive");
    }
    return std::exp(log_lambda_to_log_tau(std::log(lambda), gamma));
}

double tau_to_lambda(double tau, double gamma)
{
    check_gamma(gamma);
    if (!(tau > 0.0)) {
        throw ConfigError("tau must be positive");
    }
    return std::exp((1.0 - gamma) * std::log(tau) - gamma * std::log(gamma) + (gamma - 1.0) * std::log1p(-gamma));
}

std::vector<double> gene_norm_sums(const CoefficientSet& beta, const GeneStructure& structure)
{
    beta.check_layout(structure);
    std::vector<double> sums(structure.num_genes(), 0.0);
    for (std::size_t b = 0; b < structure.num_blocks(); ++b) {
        const Block& block = structure.block(b);
        sums[block.gene] += std::sqrt(static_cast<double>(block.size())) * beta.norm(b);
    }
    return sums;
}

std::vector<double> theta_update(const CoefficientSet& beta, const BridgeConfig& config, const GeneStructure& structure)
{
    check_gamma(config.gamma);
    const std::vector<double> sums = gene_norm_sums(beta, structure);
    const double factor = log_theta_factor(config);
    std::vector<double> theta(sums.size(), 0.0);
    for (std::size_t j = 0; j < sums.size(); ++j) {
        if (sums[j] > 0.0) {
            theta[j] = std::exp(std::log(config.c.at(j)) + factor + config.gamma * std::log(sums[j]));
        }
    }
    return theta;
}

GroupWeights theta_to_group_weights(const std::vector<double>& theta, const BridgeConfig& config,
                                    const GeneStructure& structure)
{
    check_gamma(config.gamma);
    if (theta.size() != structure.num_genes()) {
        throw ConfigError("theta needs one entry per gene");
    }
    const double g = config.gamma;
    GroupWeights weights;
    weights.w.resize(structure.num_blocks());
    for (std::size_t b = 0; b < structure.num_blocks(); ++b) {
        const Block& block = structure.block(b);
        const double t = theta[block.gene];
        if (!(t >= 0.0)) {
            throw ConfigError("theta must be nonnegative");
        }
        weights.w[b] = t == 0.0 ? kLockedWeight
                                : std::exp((1.0 - 1.0 / g) * std::log(t) + std::log(config.c.at(block.gene)) / g +
                                           0.5 * std::log(static_cast<double>(block.size())));
    }
    return weights;
}

GroupWeights bridge_group_weights(const CoefficientSet& beta, const BridgeConfig& config, const GeneStructure& structure)
{
    check_gamma(config.gamma);
    const double g = config.gamma;
    const std::vector<double> sums = gene_norm_sums(beta, structure);
    const double factor = log_theta_factor(config);
    GroupWeights weights;
    weights.w.resize(structure.num_blocks());
    for (std::size_t b = 0; b < structure.num_blocks(); ++b) {
        const Block& block = structure.block(b);
        const double s = sums[block.gene];
        if (s == 0.0) {
            weights.w[b] = kLockedWeight;
            continue;
        }
        const double log_c = std::log(config.c.at(block.gene));
        const double log_theta = log_c + factor + g * std::log(s);
        weights.w[b] =
            std::exp((1.0 - 1.0 / g) * log_theta + log_c / g + 0.5 * std::log(static_cast<double>(block.size())));
    }
    return weights;
}

double composite_objective(const CoefficientSet& beta, const StackedDesign& design, const BridgeConfig& config)
{
    const std::vector<double> sums = gene_norm_sums(beta, design.structure());
    double penalty = 0.0;
    for (std::size_t j = 0; j < sums.size(); ++j) {
        if (sums[j] > 0.0) {
            penalty += config.c.at(j) * std::pow(sums[j], config.gamma);
        }
    }
    return loss(design, beta) + config.lambda * penalty;
}

double surrogate_objective(const CoefficientSet& beta, const std::vector<double>& theta, const StackedDesign& design,
                           const BridgeConfig& config)
{
    const std::vector<double> sums = gene_norm_sums(beta, design.structure());
    if (theta.size() != sums.size()) {
        throw ConfigError("theta needs one entry per gene");
    }
    const double g = config.gamma;
    double penalty = 0.0;
    double theta_sum = 0.0;
    for (std::size_t j = 0; j < sums.size(); ++j) {
        theta_sum += theta[j];
        if (sums[j] == 0.0) {
            continue;
        }
        if (theta[j] == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        penalty += std::pow(theta[j], 1.0 - 1.0 / g) * std::pow(config.c.at(j), 1.0 / g) * sums[j];
    }
    return loss(design, beta) + penalty + config.tau() * theta_sum;
}

FitDiagnostics& FitDiagnostics::operator+=(const FitDiagnostics& other)
{
    inner_solves += other.inner_solves;
    inner_nonconverged += other.inner_nonconverged;
    inner_sweeps += other.inner_sweeps;
    sweep_monotone_violations += other.sweep_monotone_violations;
    outer_monotone_violations += other.outer_monotone_violations;
    kkt_checked += other.kkt_checked;
    kkt_failures += other.kkt_failures;
    return *this;
}

namespace {

FitResult fit_from(const StackedDesign& design, const BridgeConfig& config, double start, PathState* path)
{
    const GeneStructure& structure = design.structure();
    FitResult fit;
    fit.config = config;
    CoefficientSet beta(structure, start);
    fit.objective_trace.push_back(composite_objective(beta, design, config));

    for (int s = 1; s <= config.max_outer; ++s) {
        const GroupWeights weights = bridge_group_weights(beta, config, structure);
        // The first step is convex, so its solver start is free.
        CoefficientSet initial = beta;
        if (s == 1) {
            initial = path != nullptr && path->valid ? path->first_step : CoefficientSet(structure, 0.0);
        }
        GlassoSolution step = solve_weighted_glasso(design, weights, std::move(initial), config.inner);
        if (s == 1 && path != nullptr) {
            path->first_step = step.beta;
            path->valid = true;
        }

        FitDiagnostics& d = fit.diagnostics;
        ++d.inner_solves;
        d.inner_sweeps += static_cast<std::size_t>(step.stats.sweeps);
        d.sweep_monotone_violations += step.stats.monotone_violations;
        if (step.stats.converged) {
            ++d.kkt_checked;
            if (!kkt_check(design, weights, step.beta).passes(10.0 * config.inner.tol)) {
                ++d.kkt_failures;
            }
        } else {
            ++d.inner_nonconverged;
        }

        const double objective = composite_objective(step.beta, design, config);
        const double previous = fit.objective_trace.back();
        if (objective > previous + kMonotoneSlack * std::max(std::abs(previous), 1e-300)) {
            ++d.outer_monotone_violations;
        }
        fit.objective_trace.push_back(objective);

        const double change = step.beta.distance(beta);
        beta = std::move(step.beta);
        fit.outer_iterations = s;
        if (change < config.tol_outer) {
            fit.converged = true;
            break;
        }
    }
    fit.beta = std::move(beta);
    fit.selected = fit.beta.selected_pairs(structure);
    return fit;
}

} // namespace

FitResult fit_bridge(const StackedDesign& design, const BridgeConfig& config, PathState* path)
{
    check_gamma(config.gamma);
    if (config.c.size() != design.structure().num_genes()) {
        throw ConfigError("bridge config does not match the design's genes");
    }
    if (!(config.tol_outer > 0.0) || config.max_outer < 1) {
        throw ConfigError("outer tolerance and iteration cap must be positive");
    }
    FitResult best = fit_from(design, config, 1.0, path);
    if (!config.multi_start) {
        return best;
    }
    FitDiagnostics total = best.diagnostics;
    for (double start : {0.1, 10.0}) {
        FitResult alt = fit_from(design, config, start, nullptr);
        total += alt.diagnostics;
        if (alt.objective_trace.back() < best.objective_trace.back()) {
            best = std::move(alt);
        }
    }
    best.diagnostics = total;
    return best;
}

} // namespace ibridge
