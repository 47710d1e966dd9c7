#include "ibridge/io.hpp"

#include <charconv>
#include <cmath>

namespace ibridge {

using nlohmann::json;

std::string format_double(double value)
{
    if (std::isnan(value)) {
        return "NaN";
    }
    if (std::isinf(value)) {
        return value > 0 ? "Inf" : "-Inf";
    }
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

namespace {

// JSON has no NaN or infinity; those become null.
json number(double value)
{
    return std::isfinite(value) ? json(value) : json(nullptr);
}

json pair_json(const GeneSubtype& pair, const GeneStructure& structure, const std::vector<std::string>& subtype_ids)
{
    return {{"gene", structure.gene_id(pair.gene)}, {"subtype", subtype_ids.at(pair.subtype)}};
}

} // namespace

json to_json(const BridgeConfig& config)
{
    return {{"gamma", config.gamma},
            {"lambda", config.lambda},
            {"log_tau", config.log_tau},
            {"tol_outer", config.tol_outer},
            {"max_outer", config.max_outer},
            {"inner_tol", config.inner.tol},
            {"inner_max_sweeps", config.inner.max_sweeps},
            {"multi_start", config.multi_start}};
}

json to_json(const FitDiagnostics& d)
{
    return {{"inner_solves", d.inner_solves},
            {"inner_nonconverged", d.inner_nonconverged},
            {"inner_sweeps", d.inner_sweeps},
            {"sweep_monotone_violations", d.sweep_monotone_violations},
            {"outer_monotone_violations", d.outer_monotone_violations},
            {"kkt_checked", d.kkt_checked},
            {"kkt_failures", d.kkt_failures}};
}

json to_json(const FitResult& fit, const GeneStructure& structure, const std::vector<std::string>& subtype_ids)
{
    json selected = json::array();
    for (const auto& pair : fit.selected) {
        selected.push_back(pair_json(pair, structure, subtype_ids));
    }
    json blocks = json::array();
    for (std::size_t b = 0; b < structure.num_blocks(); ++b) {
        const Block& block = structure.block(b);
        json coef = json::object();
        const Vector& beta = fit.beta.block(b);
        for (std::size_t k = 0; k < block.size(); ++k) {
            coef[block.snp_ids[k]] = beta(static_cast<Eigen::Index>(k));
        }
        blocks.push_back({{"gene", structure.gene_id(block.gene)},
                          {"subtype", subtype_ids.at(block.subtype)},
                          {"norm", fit.beta.norm(b)},
                          {"coefficients", std::move(coef)}});
    }
    json trace = json::array();
    for (double v : fit.objective_trace) {
        trace.push_back(number(v));
    }
    return {{"config", to_json(fit.config)},
            {"converged", fit.converged},
            {"outer_iterations", fit.outer_iterations},
            {"selected", std::move(selected)},
            {"blocks", std::move(blocks)},
            {"objective_trace", std::move(trace)},
            {"diagnostics", to_json(fit.diagnostics)}};
}

json to_json(const TuningReport& report)
{
    json grid = json::array();
    for (const auto& p : report.grid) {
        grid.push_back({{"gamma", p.gamma},
                        {"lambda", p.lambda},
                        {"bic", number(p.bic)},
                        {"df", p.df},
                        {"rss", p.rss},
                        {"model_size", p.model_size},
                        {"outer_iterations", p.outer_iterations},
                        {"converged", p.converged}});
    }
    const GridPoint& best = report.grid.at(report.best);
    return {{"lambda_max", report.lambda_max},
            {"best", {{"gamma", best.gamma}, {"lambda", best.lambda}, {"bic", number(best.bic)}}},
            {"ls_ridge_used", report.ls_ridge_used},
            {"grid", std::move(grid)},
            {"diagnostics", to_json(report.diagnostics)}};
}

json to_json(const SimDesign& design)
{
    json correlation = {{"kind", design.correlation.kind == CorrelationKind::ar ? "ar" : "banded"}};
    if (design.correlation.kind == CorrelationKind::ar) {
        correlation["rho"] = design.correlation.rho;
    } else {
        correlation["scenario"] = design.correlation.scenario;
    }
    return {{"n_per_subtype", design.n_per_subtype},
            {"gene_sizes", design.sizes_of_genes()},
            {"correlation", std::move(correlation)},
            {"coeff_case", design.coeff_case},
            {"sharing", sharing_tag(design.sharing)},
            {"intercept", design.intercept},
            {"target_censoring", design.target_censoring},
            {"sigma", design.sigma},
            {"coef_scale", design.coef_scale},
            {"between_gene_base", design.between_gene_base},
            {"pilot_size", design.pilot_size},
            {"seed", design.seed}};
}

json to_json(const TruthSet& truth, const GeneStructure& structure, const std::vector<std::string>& subtype_ids)
{
    json pairs = json::array();
    for (const auto& pair : truth.pairs) {
        pairs.push_back(pair_json(pair, structure, subtype_ids));
    }
    json coefficients = json::array();
    for (std::size_t m = 0; m < truth.beta.size(); ++m) {
        for (std::size_t b : structure.subtype_blocks(m)) {
            const Block& block = structure.block(b);
            const auto offset = static_cast<Eigen::Index>(structure.column_offset(b));
            for (std::size_t k = 0; k < block.size(); ++k) {
                const double v = truth.beta[m](offset + static_cast<Eigen::Index>(k));
                if (v != 0.0) {
                    coefficients.push_back({{"subtype", subtype_ids.at(m)},
                                            {"gene", structure.gene_id(block.gene)},
                                            {"snp", block.snp_ids[k]},
                                            {"beta", v}});
                }
            }
        }
    }
    return {{"pairs", std::move(pairs)}, {"coefficients", std::move(coefficients)}};
}

} // namespace ibridge
