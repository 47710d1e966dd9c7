#include "ibridge/eval.hpp"

#include "ibridge/io.hpp"
#include "ibridge/parallel.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ibridge {

ReplicateScore score_selection(const std::vector<GeneSubtype>& selected, const TruthSet& truth)
{
    const std::set<GeneSubtype> unique(selected.begin(), selected.end());
    ReplicateScore score;
    score.model_size = unique.size();
    for (const auto& pair : unique) {
        score.true_positives += truth.pairs.count(pair);
    }
    return score;
}

std::string MethodSpec::label() const
{
    if (kind == Kind::glasso) {
        return "GLasso";
    }
    std::ostringstream os;
    os << "Proposed g=" << gamma;
    return os.str();
}

std::pair<double, double> mean_sd(const std::vector<double>& values)
{
    if (values.empty()) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) {
        return {mean, std::numeric_limits<double>::quiet_NaN()};
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / (n - 1.0))};
}

namespace {

TuneOptions tune_options(const FitConfig& config, std::size_t threads)
{
    TuneOptions options;
    options.gammas = config.gammas;
    options.grid_size = config.grid_size;
    options.grid_ratio = config.grid_ratio;
    options.base = config.base;
    options.threads = threads;
    return options;
}

// One subtype as a standalone study; `genes` maps its gene indices back.
struct SingleSubtype {
    MultiStudy ms;
    std::vector<std::size_t> genes;
};

SingleSubtype restrict_to_subtype(const MultiStudy& ms, std::size_t m)
{
    const GeneStructure& s = ms.structure;
    SingleSubtype out;
    std::vector<std::string> gene_ids;
    std::vector<Block> blocks;
    for (std::size_t b : s.subtype_blocks(m)) {
        Block block = s.block(b);
        out.genes.push_back(block.gene);
        gene_ids.push_back(s.gene_id(block.gene));
        block.gene = gene_ids.size() - 1;
        block.subtype = 0;
        blocks.push_back(std::move(block));
    }
    out.ms.structure = GeneStructure(std::move(gene_ids), 1, std::move(blocks));
    out.ms.cohorts.push_back(ms.cohorts.at(m));
    return out;
}

double censoring_fraction(const MultiStudy& ms)
{
    double censored = 0.0;
    for (const auto& c : ms.cohorts) {
        censored += static_cast<double>((c.event.array() == 0).count());
    }
    return censored / static_cast<double>(ms.n());
}

} // namespace

TunedModel fit_tuned(const MultiStudy& ms, const FitConfig& config)
{
    TunedModel model;
    model.design = build_stacked(ms, config.stack);
    model.report = tune_fit(model.design, tune_options(config, config.threads));
    return model;
}

std::vector<GeneSubtype> glasso_meta_selection(const MultiStudy& ms, const FitConfig& config,
                                               FitDiagnostics* diagnostics)
{
    std::vector<GeneSubtype> selected;
    for (std::size_t m = 0; m < ms.num_subtypes(); ++m) {
        const SingleSubtype single = restrict_to_subtype(ms, m);
        const StackedDesign design = build_stacked(single.ms, config.stack);
        const double top = glasso_lambda_max(design);
        if (!(top > 0.0)) {
            continue;
        }
        const GlassoTuning tuned =
            fit_glasso_bic(design, log_grid(top, config.grid_ratio, config.grid_size), config.base.inner);
        if (diagnostics != nullptr) {
            *diagnostics += tuned.diagnostics;
        }
        for (const auto& pair : tuned.selected) {
            selected.push_back({single.genes[pair.gene], m});
        }
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

TableRun run_table(const SimDesign& design, std::size_t replicates, const std::vector<MethodSpec>& methods,
                   const FitConfig& config)
{
    if (replicates == 0) {
        throw ConfigError("at least one replicate is required");
    }
    if (methods.empty()) {
        throw ConfigError("at least one method is required");
    }
    const Simulator sim(design);
    std::vector<double> gammas;
    for (const auto& method : methods) {
        if (method.kind == MethodSpec::Kind::proposed &&
            std::find(gammas.begin(), gammas.end(), method.gamma) == gammas.end()) {
            gammas.push_back(method.gamma);
        }
    }
    const bool want_glasso = std::any_of(methods.begin(), methods.end(),
                                         [](const MethodSpec& m) { return m.kind == MethodSpec::Kind::glasso; });
    FitConfig per_rep = config;
    per_rep.gammas = gammas;

    struct Outcome {
        std::vector<std::optional<ReplicateScore>> scores;
        FitDiagnostics proposed;
        FitDiagnostics glasso;
        double censoring = 0.0;
    };
    std::vector<Outcome> outcomes(replicates);
    parallel_for(replicates, config.threads, [&](std::size_t r) {
        Outcome& out = outcomes[r];
        out.scores.resize(methods.size());
        const MultiStudy ms = sim.replicate(r);
        out.censoring = censoring_fraction(ms);

        std::optional<TunedModel> tuned;
        if (!gammas.empty()) {
            try {
                tuned.emplace();
                tuned->design = build_stacked(ms, per_rep.stack);
                tuned->report = tune_fit(tuned->design, tune_options(per_rep, 1));
                out.proposed += tuned->report.diagnostics;
            } catch (const DataError&) {
                tuned.reset();
            }
        }
        std::optional<std::vector<GeneSubtype>> glasso;
        if (want_glasso) {
            try {
                glasso = glasso_meta_selection(ms, per_rep, &out.glasso);
            } catch (const DataError&) {
                glasso.reset();
            }
        }
        for (std::size_t k = 0; k < methods.size(); ++k) {
            const MethodSpec& method = methods[k];
            std::optional<std::vector<GeneSubtype>> selected;
            if (method.kind == MethodSpec::Kind::glasso) {
                selected = glasso;
            } else if (tuned) {
                const auto g = static_cast<std::size_t>(
                    std::find(gammas.begin(), gammas.end(), method.gamma) - gammas.begin());
                selected = tuned->report.best_fits.at(g).selected;
            }
            if (selected) {
                ReplicateScore score = score_selection(*selected, sim.truth());
                score.replicate = r;
                score.method = method.label();
                out.scores[k] = score;
            }
        }
    });

    TableRun run;
    std::vector<std::vector<double>> tp(methods.size()), size(methods.size());
    std::vector<std::size_t> failures(methods.size(), 0);
    for (const Outcome& out : outcomes) {
        run.diagnostics += out.proposed;
        run.glasso_diagnostics += out.glasso;
        run.mean_censoring += out.censoring / static_cast<double>(replicates);
        for (std::size_t k = 0; k < methods.size(); ++k) {
            if (!out.scores[k]) {
                ++failures[k];
                continue;
            }
            tp[k].push_back(static_cast<double>(out.scores[k]->true_positives));
            size[k].push_back(static_cast<double>(out.scores[k]->model_size));
            run.scores.push_back(*out.scores[k]);
        }
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
        CellSummary cell;
        cell.row = design.correlation.label();
        cell.method = methods[k].label();
        std::tie(cell.tp_mean, cell.tp_sd) = mean_sd(tp[k]);
        std::tie(cell.size_mean, cell.size_sd) = mean_sd(size[k]);
        cell.replicates = tp[k].size();
        cell.failures = failures[k];
        run.cells.push_back(cell);
    }
    return run;
}

std::vector<std::vector<std::size_t>> stratified_subsample(const MultiStudy& ms, double fraction, Philox4x32& rng)
{
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("subsample fraction must lie in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> rows;
    for (const auto& cohort : ms.cohorts) {
        const std::size_t n = cohort.size();
        const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) {
            boost::random::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(perm[i], perm[pick(rng)]);
        }
        perm.resize(k);
        std::sort(perm.begin(), perm.end());
        rows.push_back(std::move(perm));
    }
    return rows;
}

StabilityReport occurrence_index(const MultiStudy& ms, const FitConfig& config, std::size_t rounds,
                                 double fraction, std::uint64_t seed)
{
    if (rounds == 0) {
        throw ConfigError("at least one subsample round is required");
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("subsample fraction must lie in (0, 1)");
    }
    const std::size_t genes = ms.structure.num_genes();
    const std::size_t subtypes = ms.num_subtypes();
    std::vector<std::optional<std::vector<GeneSubtype>>> picks(rounds);
    FitConfig inner = config;
    inner.threads = 1;
    parallel_for(rounds, config.threads, [&](std::size_t b) {
        Philox4x32 rng(seed, streams::subsample_base + b);
        const MultiStudy sub = subset_subjects(ms, stratified_subsample(ms, fraction, rng));
        try {
            const TunedModel model = fit_tuned(sub, inner);
            picks[b] = model.report.best_fit().selected;
        } catch (const DataError&) {
            picks[b].reset();
        }
    });

    StabilityReport report;
    report.gene_ids = ms.structure.gene_ids();
    for (const auto& c : ms.cohorts) {
        report.subtype_ids.push_back(c.id);
    }
    report.requested = rounds;
    report.fraction = fraction;
    report.occurrence.assign(genes, std::vector<double>(subtypes, 0.0));
    for (const auto& pick : picks) {
        if (!pick) {
            continue;
        }
        ++report.used;
        for (const auto& pair : *pick) {
            report.occurrence[pair.gene][pair.subtype] += 1.0;
        }
    }
    if (report.used > 0) {
        for (auto& row : report.occurrence) {
            for (double& v : row) {
                v /= static_cast<double>(report.used);
            }
        }
    }
    return report;
}

void write_stability_csv(std::ostream& os, const StabilityReport& report)
{
    os << "gene,subtype,occurrence_index\n";
    for (std::size_t j = 0; j < report.gene_ids.size(); ++j) {
        for (std::size_t m = 0; m < report.subtype_ids.size(); ++m) {
            os << report.gene_ids[j] << ',' << report.subtype_ids[m] << ',' << format_double(report.occurrence[j][m])
               << '\n';
        }
    }
}

double chi_square1_upper(double statistic)
{
    if (!(statistic > 0.0)) {
        return 1.0;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(1.0), statistic));
}

LogrankResult logrank_two_group(const Vector& times, const IntVector& events, const IntVector& group)
{
    const auto n = times.size();
    if (events.size() != n || group.size() != n) {
        throw DataError("logrank inputs differ in length");
    }
    const auto ones = (group.array() == 1).count();
    if (ones == 0 || ones == n) {
        throw DataError("logrank needs two non-empty groups");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return times(a) < times(b); });

    double at_risk = static_cast<double>(n);
    double at_risk1 = static_cast<double>(ones);
    double diff = 0.0;
    double var = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double d = 0.0, d1 = 0.0, leaving = 0.0, leaving1 = 0.0;
        while (j < order.size() && times(order[j]) == times(order[i])) {
            const Eigen::Index k = order[j];
            const bool in1 = group(k) == 1;
            if (events(k) == 1) {
                d += 1.0;
                d1 += in1 ? 1.0 : 0.0;
            }
            leaving += 1.0;
            leaving1 += in1 ? 1.0 : 0.0;
            ++j;
        }
        if (d > 0.0) {
            const double p1 = at_risk1 / at_risk;
            diff += d1 - d * p1;
            if (at_risk > 1.0) {
                var += d * p1 * (1.0 - p1) * (at_risk - d) / (at_risk - 1.0);
            }
        }
        at_risk -= leaving;
        at_risk1 -= leaving1;
        i = j;
    }
    LogrankResult result;
    if (var > 0.0) {
        result.statistic = diff * diff / var;
        result.p_value = chi_square1_upper(result.statistic);
    }
    return result;
}

Vector linear_predictor(const StackedDesign& design, const CoefficientSet& beta, std::size_t subtype,
                        const Matrix& genotype)
{
    const GeneStructure& s = design.structure();
    beta.check_layout(s);
    const auto p = static_cast<Eigen::Index>(design.raw_columns.at(subtype));
    if (genotype.cols() != p) {
        throw DataError("genotype width does not match the fitted subtype");
    }
    Vector raw = Vector::Zero(p);
    for (std::size_t b : s.subtype_blocks(subtype)) {
        const StackedBlock& block = design.block(b);
        const auto col = static_cast<Eigen::Index>(block.source_column);
        const auto width = static_cast<Eigen::Index>(block.source_size);
        raw.segment(col, width) = block.loadings.size() == 0 ? beta.block(b) : Vector(block.loadings * beta.block(b));
    }
    return (genotype.rowwise() - design.x_center.at(subtype).transpose()) * raw;
}

PredictionReport predict_evaluate(const MultiStudy& ms, const FitConfig& config, std::size_t rounds,
                                  std::uint64_t seed, double fraction)
{
    if (rounds == 0) {
        throw ConfigError("at least one prediction round is required");
    }
    const std::size_t subtypes = ms.num_subtypes();
    FitConfig inner = config;
    inner.threads = 1;

    struct Round {
        bool informative = false;
        double statistic = 0.0;
        std::vector<double> per_subtype;
    };
    std::vector<Round> results(rounds);
    parallel_for(rounds, config.threads, [&](std::size_t b) {
        Philox4x32 rng(seed, streams::subsample_base + b);
        const auto train_rows = stratified_subsample(ms, fraction, rng);
        std::vector<std::vector<std::size_t>> test_rows(subtypes);
        for (std::size_t m = 0; m < subtypes; ++m) {
            std::vector<bool> in_train(ms.cohorts[m].size(), false);
            for (std::size_t i : train_rows[m]) {
                in_train[i] = true;
            }
            for (std::size_t i = 0; i < in_train.size(); ++i) {
                if (!in_train[i]) {
                    test_rows[m].push_back(i);
                }
            }
        }
        TunedModel model;
        try {
            model = fit_tuned(subset_subjects(ms, train_rows), inner);
        } catch (const DataError&) {
            return;
        }
        const MultiStudy test = subset_subjects(ms, test_rows);
        const CoefficientSet& beta = model.report.best_fit().beta;

        std::vector<Vector> lps;
        Eigen::Index total = 0;
        for (std::size_t m = 0; m < subtypes; ++m) {
            lps.push_back(linear_predictor(model.design, beta, m, test.cohorts[m].genotype));
            total += lps.back().size();
        }
        Vector lp(total), time(total);
        IntVector event(total);
        Eigen::Index offset = 0;
        for (std::size_t m = 0; m < subtypes; ++m) {
            const auto k = lps[m].size();
            lp.segment(offset, k) = lps[m];
            time.segment(offset, k) = test.cohorts[m].time;
            event.segment(offset, k) = test.cohorts[m].event;
            offset += k;
        }

        auto split = [](const Vector& v) {
            std::vector<double> sorted(v.data(), v.data() + v.size());
            std::sort(sorted.begin(), sorted.end());
            const std::size_t h = sorted.size() / 2;
            const double median = sorted.size() % 2 == 1 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
            return IntVector((v.array() > median).cast<int>());
        };
        auto score = [&](const Vector& v, const Vector& t, const IntVector& e) -> std::optional<double> {
            if (v.size() < 2) {
                return std::nullopt;
            }
            const IntVector group = split(v);
            const auto ones = group.sum();
            if (ones == 0 || ones == group.size()) {
                return std::nullopt;
            }
            return logrank_two_group(t, e, group).statistic;
        };

        Round& round = results[b];
        const auto pooled = score(lp, time, event);
        if (!pooled) {
            return;
        }
        round.informative = true;
        round.statistic = *pooled;
        for (std::size_t m = 0; m < subtypes; ++m) {
            const auto stat = score(lps[m], test.cohorts[m].time, test.cohorts[m].event);
            round.per_subtype.push_back(stat ? *stat : std::numeric_limits<double>::quiet_NaN());
        }
    });

    PredictionReport report;
    report.requested = rounds;
    for (const Round& round : results) {
        if (!round.informative) {
            ++report.skipped;
            continue;
        }
        report.statistics.push_back(round.statistic);
        report.per_subtype.push_back(round.per_subtype);
    }
    if (report.informative()) {
        report.mean_statistic = mean_sd(report.statistics).first;
        report.p_value = chi_square1_upper(report.mean_statistic);
    }
    return report;
}

void write_prediction_csv(std::ostream& os, const PredictionReport& report)
{
    const std::size_t subtypes = report.per_subtype.empty() ? 0 : report.per_subtype.front().size();
    os << "round,statistic,p_value";
    for (std::size_t m = 0; m < subtypes; ++m) {
        os << ",subtype" << m + 1;
    }
    os << '\n';
    for (std::size_t r = 0; r < report.statistics.size(); ++r) {
        os << r + 1 << ',' << format_double(report.statistics[r]) << ','
           << format_double(chi_square1_upper(report.statistics[r]));
        for (double v : report.per_subtype[r]) {
            os << ',';
            if (!std::isnan(v)) {
                os << format_double(v);
            }
        }
        os << '\n';
    }
    os << "mean," << format_double(report.mean_statistic) << ',' << format_double(report.p_value) << '\n';
}

} // namespace ibridge
