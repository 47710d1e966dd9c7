#pragma once

#include "ibridge/common.hpp"
#include "ibridge/gcd.hpp"
#include "ibridge/kmw.hpp"

#include <cstddef>
#include <vector>

namespace ibridge {

/// Tuning of the composite bridge / group-Lasso penalty
/// lambda * sum_j c_j (sum_k sqrt(d_jk) ||beta_jk||)^gamma.
///
/// lambda is user facing; tau is the matching surrogate parameter and is
/// kept in log form because it under/overflows as gamma approaches 1.
struct BridgeConfig {
    double gamma = 0.5;
    double lambda = 1.0;
    double log_tau = 0.0;
    std::vector<double> c;     // per gene, M_j^(1 - gamma)
    double tol_outer = 1e-3;
    int max_outer = 500;
    SolverOptions inner;
    /// Also start from 0.1 and 10 times the all-ones vector and keep the best
    /// objective. Diagnostic only.
    bool multi_start = false;

    double tau() const;

    /// Builds a validated config; throws ConfigError for gamma outside (0,1)
    /// or lambda <= 0.
    static BridgeConfig make(double gamma, double lambda, const GeneStructure& structure);
};

/// tau = (lambda gamma^gamma (1-gamma)^(1-gamma))^(1/(1-gamma)).
double lambda_to_tau(double lambda, double gamma);
/// lambda = tau^(1-gamma) gamma^-gamma (1-gamma)^(gamma-1).
double tau_to_lambda(double tau, double gamma);
double log_lambda_to_log_tau(double log_lambda, double gamma);

/// sum_k sqrt(d_jk) ||beta_jk|| for every gene.
std::vector<double> gene_norm_sums(const CoefficientSet& beta, const GeneStructure& structure);

/// theta_j = c_j ((1-gamma)/(gamma tau))^gamma (sum_k sqrt(d_jk) ||beta_jk||)^gamma.
std::vector<double> theta_update(const CoefficientSet& beta, const BridgeConfig& config,
                                 const GeneStructure& structure);

/// w_jk = theta_j^(1-1/gamma) c_j^(1/gamma) sqrt(d_jk); theta_j = 0 locks the
/// gene (w = +inf).
GroupWeights theta_to_group_weights(const std::vector<double>& theta, const BridgeConfig& config,
                                    const GeneStructure& structure);

/// Group weights at theta = theta_update(beta), evaluated in log space so the
/// result stays finite when theta itself is not representable.
GroupWeights bridge_group_weights(const CoefficientSet& beta, const BridgeConfig& config,
                                  const GeneStructure& structure);

/// Penalized objective: loss + lambda sum_j c_j s_j^gamma.
double composite_objective(const CoefficientSet& beta, const StackedDesign& design, const BridgeConfig& config);

/// Surrogate S(beta, theta) = loss + sum_j theta_j^(1-1/gamma) c_j^(1/gamma) s_j + tau sum_j theta_j.
double surrogate_objective(const CoefficientSet& beta, const std::vector<double>& theta,
                           const StackedDesign& design, const BridgeConfig& config);

struct FitDiagnostics {
    std::size_t inner_solves = 0;
    std::size_t inner_nonconverged = 0;
    std::size_t inner_sweeps = 0;
    std::size_t sweep_monotone_violations = 0;
    std::size_t outer_monotone_violations = 0;
    std::size_t kkt_checked = 0;
    std::size_t kkt_failures = 0;

    FitDiagnostics& operator+=(const FitDiagnostics& other);
};

struct FitResult {
    CoefficientSet beta;
    std::vector<GeneSubtype> selected;
    /// Composite objective at beta^(0), beta^(1), ...
    std::vector<double> objective_trace;
    bool converged = false;
    int outer_iterations = 0;
    BridgeConfig config;
    FitDiagnostics diagnostics;
};

/// Carries the first beta-step along a decreasing lambda grid. From the
/// all-ones start that step is a plain convex group Lasso, so the previous
/// grid point's solution is a valid warm start for it.
struct PathState {
    CoefficientSet first_step;
    bool valid = false;
};

/// Alternates theta_update and the weighted group-Lasso beta-step from the
/// all-ones start until ||beta^(s) - beta^(s-1)|| < tol_outer.
FitResult fit_bridge(const StackedDesign& design, const BridgeConfig& config, PathState* path = nullptr);

} // namespace ibridge
