#include "ibridge/eval.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ibridge;

namespace {

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> column(std::initializer_list<T> v)
{
    Eigen::Matrix<T, Eigen::Dynamic, 1> out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (T x : v) {
        out(i++) = x;
    }
    return out;
}

// Direct tally over distinct event times with a hypergeometric variance.
double logrank_tally(const Vector& t, const IntVector& e, const IntVector& g)
{
    std::vector<double> times;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (e(i) == 1 && std::find(times.begin(), times.end(), t(i)) == times.end()) {
            times.push_back(t(i));
        }
    }
    double o_minus_e = 0.0;
    double v = 0.0;
    for (double u : times) {
        double n = 0, n1 = 0, d = 0, d1 = 0;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            if (t(i) >= u) {
                n += 1;
                n1 += g(i);
            }
            if (t(i) == u && e(i) == 1) {
                d += 1;
                d1 += g(i);
            }
        }
        o_minus_e += d1 - d * n1 / n;
        if (n > 1) {
            v += d * (n1 / n) * (1 - n1 / n) * (n - d) / (n - 1);
        }
    }
    return o_minus_e * o_minus_e / v;
}

SimDesign easy_design(std::uint64_t seed)
{
    SimDesign d;
    d.n_per_subtype = {120, 120};
    d.n_genes = 12;
    d.sharing = Sharing::homogeneous;
    d.coef_scale = 10.0;
    d.pilot_size = 20000;
    d.seed = seed;
    return d;
}

FitConfig quick_config()
{
    FitConfig cfg;
    cfg.gammas = {0.5};
    cfg.grid_size = 12;
    cfg.threads = 2;
    return cfg;
}

} // namespace

TEST_CASE("selection scoring")
{
    SimDesign d;
    const TruthSet truth = gen_truth(d);
    std::vector<GeneSubtype> exact(truth.pairs.begin(), truth.pairs.end());
    ReplicateScore s = score_selection(exact, truth);
    CHECK(s.true_positives == 12);
    CHECK(s.model_size == 12);
    s = score_selection({}, truth);
    CHECK(s.true_positives == 0);
    CHECK(s.model_size == 0);
    auto more = exact;
    more.push_back({100, 0});
    more.push_back({101, 1});
    more.push_back({3, 1});
    more.push_back({3, 1});
    s = score_selection(more, truth);
    CHECK(s.true_positives == 12);
    CHECK(s.model_size == 15);
}

TEST_CASE("mean and sd")
{
    const auto [m, sd] = mean_sd({3.0, 3.0});
    CHECK(m == 3.0);
    CHECK(sd == 0.0);
    CHECK(std::isnan(mean_sd({1.0}).second));
    CHECK(mean_sd({1.0, 2.0, 3.0, 4.0}).second == doctest::Approx(1.2909944487358056));
    CHECK(MethodSpec::glasso().label() == "GLasso");
    CHECK(MethodSpec::proposed(0.7).label() == "Proposed g=0.7");
}

TEST_CASE("logrank")
{
    SUBCASE("identical groups")
    {
        const Vector t = column<double>({1, 1, 2, 2, 5, 5});
        const IntVector e = column<int>({1, 1, 0, 0, 1, 1});
        const IntVector g = column<int>({0, 1, 0, 1, 0, 1});
        const LogrankResult r = logrank_two_group(t, e, g);
        CHECK(r.statistic == doctest::Approx(0.0));
        CHECK(r.p_value == doctest::Approx(1.0));
    }
    SUBCASE("separated groups against a direct tally")
    {
        const Vector t = column<double>({1, 2, 3, 4, 5, 6});
        const IntVector e = IntVector::Ones(6);
        const IntVector g = column<int>({1, 1, 1, 0, 0, 0});
        const LogrankResult r = logrank_two_group(t, e, g);
        CHECK(r.statistic == doctest::Approx(logrank_tally(t, e, g)).epsilon(1e-12));
        CHECK(r.statistic == doctest::Approx(5.051660516605167).epsilon(1e-12));
        CHECK(r.p_value == doctest::Approx(0.024602349953641744).epsilon(1e-10));
    }
    SUBCASE("censoring and ties, reference values")
    {
        const Vector t = column<double>({2, 3, 3, 5, 6, 7, 7, 8, 10, 12, 13, 15, 16, 18, 20});
        const IntVector e = column<int>({1, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0});
        const IntVector g = column<int>({0, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1});
        const LogrankResult r = logrank_two_group(t, e, g);
        CHECK(r.statistic == doctest::Approx(1.1490608722988496).epsilon(1e-12));
        CHECK(r.p_value == doctest::Approx(0.28374582823179006).epsilon(1e-10));
        CHECK(r.statistic == doctest::Approx(logrank_tally(t, e, g)).epsilon(1e-12));
    }
    SUBCASE("random data against the tally")
    {
        Philox4x32 rng(81, 0);
        for (int rep = 0; rep < 20; ++rep) {
            const int n = oracle::uniform_int(rng, 6, 40);
            Vector t(n);
            IntVector e(n), g(n);
            for (int i = 0; i < n; ++i) {
                t(i) = std::round(oracle::uniform(rng, 0.0, 10.0));
                e(i) = oracle::uniform(rng) < 0.7 ? 1 : 0;
                g(i) = i % 2;
            }
            e(0) = 1;
            const double expected = logrank_tally(t, e, g);
            CHECK(logrank_two_group(t, e, g).statistic == doctest::Approx(expected).epsilon(1e-10));
        }
    }
    CHECK(chi_square1_upper(3.841458820694124) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(chi_square1_upper(3.841) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(chi_square1_upper(0.0) == 1.0);
    CHECK_THROWS_AS(logrank_two_group(column<double>({1, 2}), column<int>({1, 1}), column<int>({0, 0})), DataError);
}

TEST_CASE("stratified subsample")
{
    Philox4x32 data_rng(82, 0);
    const MultiStudy ms = oracle::random_study(data_rng, 3, 13, {2});
    Philox4x32 a(1, 5);
    Philox4x32 b(1, 5);
    const auto rows = stratified_subsample(ms, 0.75, a);
    CHECK(rows == stratified_subsample(ms, 0.75, b));
    for (const auto& r : rows) {
        CHECK(r.size() == 9);
        CHECK(std::is_sorted(r.begin(), r.end()));
        CHECK(std::adjacent_find(r.begin(), r.end()) == r.end());
        CHECK(r.back() < 13);
    }
    CHECK_THROWS_AS(stratified_subsample(ms, 1.0, a), ConfigError);
}

TEST_CASE("stability")
{
    const Simulator sim(easy_design(5));
    const MultiStudy ms = sim.replicate(0);
    SUBCASE("one round gives 0/1 indices")
    {
        const StabilityReport r = occurrence_index(ms, quick_config(), 1, 0.75, 3);
        CHECK(r.used == 1);
        for (const auto& row : r.occurrence) {
            for (double v : row) {
                CHECK((v == 0.0 || v == 1.0));
            }
        }
    }
    SUBCASE("strong signal gives high indices, reproducibly")
    {
        const StabilityReport r = occurrence_index(ms, quick_config(), 5, 0.75, 3);
        for (const auto& p : sim.truth().pairs) {
            CHECK(r.index(p.gene, p.subtype) >= 0.9);
        }
        FitConfig serial = quick_config();
        serial.threads = 1;
        const StabilityReport again = occurrence_index(ms, serial, 5, 0.75, 3);
        CHECK(again.occurrence == r.occurrence);
        std::ostringstream os;
        write_stability_csv(os, r);
        CHECK(os.str().rfind("gene,subtype,occurrence_index\nG001,subtype1,", 0) == 0);
    }
    CHECK_THROWS_AS(occurrence_index(ms, quick_config(), 0, 0.75, 1), ConfigError);
}

TEST_CASE("prediction")
{
    const Simulator sim(easy_design(6));
    const MultiStudy ms = sim.replicate(0);
    SUBCASE("empty models are non-informative")
    {
        FitConfig cfg = quick_config();
        cfg.grid_size = 1;
        const PredictionReport r = predict_evaluate(ms, cfg, 2, 1);
        CHECK_FALSE(r.informative());
        CHECK(r.skipped == 2);
    }
    SUBCASE("strong signal separates risk groups")
    {
        const PredictionReport r = predict_evaluate(ms, quick_config(), 3, 1);
        REQUIRE(r.informative());
        CHECK(r.mean_statistic > 3.84);
        CHECK(r.p_value < 0.05);
        std::ostringstream os;
        write_prediction_csv(os, r);
        CHECK_FALSE(os.str().empty());
    }
}

TEST_CASE("linear predictor uses the raw SNP columns")
{
    Philox4x32 rng(83, 0);
    const MultiStudy ms = oracle::random_study(rng, 2, 30, {2, 3});
    const StackedDesign d = build_stacked(ms);
    CoefficientSet beta(d.structure());
    const auto b = *d.structure().find_block(1, 1);
    beta.block(b) << 1.0, -2.0, 0.5;
    const Matrix& x = ms.cohorts[1].genotype;
    const Vector lp = linear_predictor(d, beta, 1, x);
    Vector raw = Vector::Zero(5);
    raw.tail(3) = beta.block(b);
    const Vector expected = (x.rowwise() - d.x_center[1].transpose()) * raw;
    CHECK((lp - expected).norm() <= 1e-12);
    CHECK_THROWS_AS(linear_predictor(d, beta, 1, Matrix::Zero(3, 2)), DataError);
}

TEST_CASE("run_table")
{
    SimDesign d = easy_design(7);
    d.coef_scale = 1.0;
    d.n_genes = 20;
    const std::vector<MethodSpec> methods{MethodSpec::glasso(), MethodSpec::proposed(0.5)};
    const TableRun run = run_table(d, 3, methods, quick_config());
    REQUIRE(run.cells.size() == 2);
    CHECK(run.cells[0].method == "GLasso");
    CHECK(run.cells[0].replicates + run.cells[0].failures == 3);
    CHECK(run.scores.size() == 6);
    CHECK(run.cells[1].tp_mean <= 12.0);
    CHECK(run.cells[1].size_mean >= run.cells[1].tp_mean);
    CHECK(run.mean_censoring > 0.1);
    CHECK(run.diagnostics.outer_monotone_violations == 0);
    FitConfig serial = quick_config();
    serial.threads = 1;
    const TableRun again = run_table(d, 3, methods, serial);
    CHECK(again.cells[1].tp_mean == run.cells[1].tp_mean);
    CHECK(again.cells[0].size_mean == run.cells[0].size_mean);
    CHECK_THROWS_AS(run_table(d, 0, methods, serial), ConfigError);
    CHECK_THROWS_AS(run_table(d, 1, {}, serial), ConfigError);
}
