#include "ibridge/tune.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ibridge;

TEST_CASE("grouped degrees of freedom")
{
    const GeneStructure s({"G1", "G2"}, 1, {{0, 0, {"a", "b", "c"}}, {1, 0, {"d"}}});
    CoefficientSet beta(s);
    CHECK(df_approx(beta, {1.0, 1.0}, s) == 0.0);
    beta.block(1)(0) = 0.01;
    CHECK(df_approx(beta, {1.0, 5.0}, s) == 1.0);
    beta.block(1)(0) = 0.0;
    beta.block(0) << 0.3, 0.4, 0.0;   // norm 0.5
    CHECK(df_approx(beta, {1.0, 1.0}, s) == doctest::Approx(2.0));
    CHECK(df_approx(beta, {0.0, 1.0}, s) == doctest::Approx(3.0));
    CHECK_THROWS_AS(df_approx(beta, {1.0}, s), ConfigError);
}

TEST_CASE("BIC")
{
    CHECK(bic(50.0, 100, 0.0) == doctest::Approx(std::log(0.5)));
    CHECK(bic(50.0, 100, 1.0) - bic(50.0, 100, 0.0) == doctest::Approx(0.04605).epsilon(1e-4));
    CHECK(bic(60.0, 100, 2.0) > bic(50.0, 100, 2.0));
    CHECK(std::isfinite(bic(0.0, 10, 1.0)));
    CHECK_THROWS_AS(bic(1.0, 0, 0.0), ConfigError);
}

TEST_CASE("log grid")
{
    const auto g = log_grid(2.0, 10.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 2.0);
    CHECK(g.back() == doctest::Approx(0.2));
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
    }
    CHECK(log_grid(3.0, 10.0, 1) == std::vector<double>{3.0});
    CHECK_THROWS_AS(log_grid(0.0, 10.0, 3), ConfigError);
    CHECK_THROWS_AS(log_grid(1.0, 10.0, 0), ConfigError);
}

TEST_CASE("single-block least-squares norms")
{
    SUBCASE("orthonormal block")
    {
        const std::size_t n = 8;
        Matrix x = Matrix::Zero(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i % 2)) = (i / 2) % 2 == 0 ? 1.0 : -1.0;
        }
        Philox4x32 rng(61, 0);
        Vector y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y(static_cast<Eigen::Index>(i)) = oracle::normal(rng);
        }
        StackedBlock blk;
        blk.x = x;
        const StackedDesign d(GeneStructure({"G"}, 1, {{0, 0, {"a", "b"}}}), {n}, y, {blk});
        const LsNorms ls = ls_block_norms(d);
        // X'X = (n/2) I.
        CHECK(ls.norm[0] == doctest::Approx((x.transpose() * y / (n / 2.0)).norm()).epsilon(1e-12));
        CHECK_FALSE(ls.any_ridge());
    }
    SUBCASE("collinear block takes the ridge path")
    {
        Philox4x32 rng(62, 0);
        MultiStudy ms = oracle::random_study(rng, 1, 30, {2, 1});
        ms.cohorts[0].genotype.col(1) = ms.cohorts[0].genotype.col(0);
        const LsNorms ls = ls_block_norms(build_stacked(ms));
        CHECK(ls.ridge[0]);
        CHECK_FALSE(ls.ridge[1]);
        CHECK(std::isfinite(ls.norm[0]));
        CHECK(ls.any_ridge());
    }
    SUBCASE("null block has a small norm at large n")
    {
        Philox4x32 rng(63, 0);
        const LsNorms ls = ls_block_norms(build_stacked(oracle::random_study(rng, 1, 2000, {2, 2})));
        CHECK(ls.norm[0] > 0.5);
        CHECK(ls.norm[1] < 0.1);
    }
}

TEST_CASE("bridge lambda max and tuning")
{
    Philox4x32 rng(64, 0);
    const StackedDesign d = build_stacked(oracle::random_study(rng, 2, 40, {3, 2, 2, 1}));
    const BridgeConfig base;
    SUBCASE("top of the grid is empty and a bit below is not")
    {
        for (double gamma : {0.5, 0.9}) {
            const double top = bridge_lambda_max(d, gamma, base, 0.01);
            BridgeConfig cfg = BridgeConfig::make(gamma, top, d.structure());
            CHECK(fit_bridge(d, cfg).beta.all_zero());
            cfg = BridgeConfig::make(gamma, top * 0.9, d.structure());
            CHECK_FALSE(fit_bridge(d, cfg).beta.all_zero());
        }
    }
    SUBCASE("default gammas give three per-gamma fits")
    {
        TuneOptions opt;
        opt.grid_size = 8;
        opt.threads = 2;
        const TuningReport r = tune_fit(d, opt);
        CHECK(r.grid.size() == 24);
        CHECK(r.best_fits.size() == 3);
        CHECK(r.lambda_max.size() == 3);
        CHECK(r.grid[r.best].bic <= r.grid[r.best_per_gamma[0]].bic);
        CHECK(r.grid[r.best_per_gamma[r.best_gamma_index]].bic == r.grid[r.best].bic);
        for (std::size_t g = 0; g < 3; ++g) {
            CHECK(r.grid[g * 8].model_size == 0);
        }
        CHECK(r.diagnostics.outer_monotone_violations == 0);
        CHECK(r.diagnostics.kkt_failures == 0);
        std::ostringstream os;
        write_tuning_csv(os, r);
        CHECK(os.str().rfind("gamma,lambda,bic,df,rss,model_size", 0) == 0);

        opt.threads = 1;
        const TuningReport serial = tune_fit(d, opt);
        CHECK(serial.best == r.best);
        CHECK(serial.best_fit().selected == r.best_fit().selected);
    }
    SUBCASE("grid of size one")
    {
        TuneOptions opt;
        opt.gammas = {0.7};
        opt.grid_size = 1;
        const TuningReport r = tune_fit(d, opt);
        CHECK(r.grid.size() == 1);
        CHECK(r.best == 0);
    }
}

TEST_CASE("group lasso comparator")
{
    Philox4x32 rng(65, 0);
    const StackedDesign d = build_stacked(oracle::random_study(rng, 1, 60, {3, 2, 2}));
    const double top = glasso_lambda_max(d);
    const GlassoTuning above = fit_glasso_bic(d, {top * 1.001});
    CHECK(above.beta.all_zero());
    const GlassoTuning below = fit_glasso_bic(d, {top * 0.95});
    CHECK_FALSE(below.beta.all_zero());
    const GlassoTuning path = fit_glasso_bic(d, log_grid(top, 100.0, 20));
    CHECK(path.sizes.front() == 0);
    CHECK(path.bics[path.best] == doctest::Approx(*std::min_element(path.bics.begin(), path.bics.end())));
    CHECK(path.diagnostics.kkt_failures == 0);
    CHECK(path.selected.size() == path.beta.num_selected());
    CHECK_THROWS_AS(fit_glasso_bic(d, {}), ConfigError);
}
