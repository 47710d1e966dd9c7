#pragma once

#include "ibridge/bridge.hpp"
#include "ibridge/cohort.hpp"
#include "ibridge/common.hpp"
#include "ibridge/kmw.hpp"
#include "ibridge/simgen.hpp"
#include "ibridge/tune.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ibridge {

struct ReplicateScore {
    std::size_t true_positives = 0;
    std::size_t model_size = 0;
    std::size_t replicate = 0;
    std::string method;
};

ReplicateScore score_selection(const std::vector<GeneSubtype>& selected, const TruthSet& truth);

struct MethodSpec {
    enum class Kind { proposed, glasso };
    Kind kind = Kind::proposed;
    double gamma = 0.5;

    static MethodSpec proposed(double gamma) { return {Kind::proposed, gamma}; }
    static MethodSpec glasso() { return {Kind::glasso, 0.0}; }
    /// "GLasso", "Proposed g=0.5".
    std::string label() const;
};

/// Settings shared by every fit in an evaluation run.
struct FitConfig {
    std::vector<double> gammas{0.5, 0.7, 0.9};
    std::size_t grid_size = 50;
    double grid_ratio = kDefaultGridRatio;
    StackOptions stack;
    BridgeConfig base;
    std::size_t threads = 1;
};

struct CellSummary {
    std::string row;       // correlation label
    std::string method;
    double tp_mean = 0.0;
    double tp_sd = 0.0;    // NaN for a single replicate
    double size_mean = 0.0;
    double size_sd = 0.0;
    std::size_t replicates = 0;
    std::size_t failures = 0;
};

struct TableRun {
    std::vector<CellSummary> cells;          // one per method
    std::vector<ReplicateScore> scores;      // replicate-major, then method
    FitDiagnostics diagnostics;              // proposed-method fits only
    FitDiagnostics glasso_diagnostics;
    double mean_censoring = 0.0;
};

/// Simulates `replicates` datasets of one design and scores each method.
/// Replicate r uses stream r of design.seed, so results do not depend on the
/// thread count.
TableRun run_table(const SimDesign& design, std::size_t replicates, const std::vector<MethodSpec>& methods,
                   const FitConfig& config);

/// Mean and sample SD; SD is NaN with fewer than two values.
std::pair<double, double> mean_sd(const std::vector<double>& values);

/// Fits the proposed approach with BIC tuning and returns the chosen fit.
struct TunedModel {
    StackedDesign design;
    TuningReport report;
};

TunedModel fit_tuned(const MultiStudy& ms, const FitConfig& config);

/// Selected groups of a single-subtype group-Lasso run per subtype, combined.
std::vector<GeneSubtype> glasso_meta_selection(const MultiStudy& ms, const FitConfig& config,
                                               FitDiagnostics* diagnostics = nullptr);

struct StabilityReport {
    std::vector<std::string> gene_ids;
    std::vector<std::string> subtype_ids;
    /// occurrence[gene][subtype] in [0, 1].
    std::vector<std::vector<double>> occurrence;
    std::size_t requested = 0;
    std::size_t used = 0;
    double fraction = 0.75;

    double index(std::size_t gene, std::size_t subtype) const { return occurrence.at(gene).at(subtype); }
};

/// Stratified subsample of floor(fraction * n_m) subjects per subtype, without
/// replacement. Rows are returned sorted.
std::vector<std::vector<std::size_t>> stratified_subsample(const MultiStudy& ms, double fraction, Philox4x32& rng);

/// Selection frequency of every (gene, subtype) pair over B subsamples. Round b
/// draws from stream streams::subsample_base + b; degenerate rounds are skipped.
StabilityReport occurrence_index(const MultiStudy& ms, const FitConfig& config, std::size_t rounds,
                                 double fraction, std::uint64_t seed);

void write_stability_csv(std::ostream& os, const StabilityReport& report);

struct LogrankResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample logrank chi-square (1 df). `group` holds 0/1 labels.
LogrankResult logrank_two_group(const Vector& times, const IntVector& events, const IntVector& group);

/// Upper-tail chi-square(1) probability.
double chi_square1_upper(double statistic);

struct PredictionReport {
    std::vector<double> statistics;             // one per informative round
    std::vector<std::vector<double>> per_subtype;  // per informative round, per subtype (NaN if degenerate)
    std::size_t requested = 0;
    std::size_t skipped = 0;
    double mean_statistic = 0.0;
    double p_value = 1.0;
    bool informative() const { return !statistics.empty(); }
};

/// Linear predictor (x - xbar_w)' beta for every subject of `cohort`, with
/// beta mapped back to the raw SNP columns of subtype m.
Vector linear_predictor(const StackedDesign& design, const CoefficientSet& beta, std::size_t subtype,
                        const Matrix& genotype);

/// Train on 3/4 (stratified), score the held-out subjects, split at the median
/// pooled predictor and compute the logrank statistic; repeated `rounds` times.
PredictionReport predict_evaluate(const MultiStudy& ms, const FitConfig& config, std::size_t rounds,
                                  std::uint64_t seed, double fraction = 0.75);

void write_prediction_csv(std::ostream& os, const PredictionReport& report);

} // namespace ibridge
