#include "ibridge/io.hpp"
#include "ibridge/reproduce.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <limits>
#include <sstream>

using namespace ibridge;

TEST_CASE("shortest round-trip doubles")
{
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(12.0) == "12");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "NaN");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-Inf");
    Philox4x32 rng(91, 0);
    for (int i = 0; i < 200; ++i) {
        const double v = oracle::normal(rng) * std::exp(oracle::uniform(rng, -30.0, 30.0));
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("fit and truth serialization")
{
    Philox4x32 rng(92, 0);
    const MultiStudy ms = oracle::random_study(rng, 2, 30, {2, 1});
    const StackedDesign d = build_stacked(ms);
    const FitResult fit = fit_bridge(d, BridgeConfig::make(0.5, 0.05, d.structure()));
    const nlohmann::json j = to_json(fit, d.structure(), {"A", "B"});
    CHECK(j["blocks"].size() == 4);
    CHECK(j["selected"].size() == fit.selected.size());
    CHECK(j["config"]["gamma"] == 0.5);
    CHECK(j["objective_trace"].size() == fit.objective_trace.size());
    CHECK(j["blocks"][1]["subtype"] == "B");

    SimDesign design;
    const TruthSet truth = gen_truth(design);
    const GeneStructure s = simulated_structure(design);
    const nlohmann::json t = to_json(truth, s, {"s1", "s2", "s3"});
    CHECK(t["pairs"].size() == 12);
    CHECK(t["coefficients"].size() == 60);
    CHECK(to_json(design)["sharing"] == "h25");
}

TEST_CASE("reproduction csv layout")
{
    CHECK(published_methods().size() == 4);
    CHECK_THROWS_AS(reproduce_table(4, 1, 1, FitConfig{}), ConfigError);
    TableReproduction r;
    r.table = *published_table(2);
    r.replicates = 1;
    TableRun run;
    for (const auto& m : published_methods()) {
        CellSummary c;
        c.method = m.label();
        c.row = "AR rho=0.2";
        c.tp_mean = 3;
        c.tp_sd = std::numeric_limits<double>::quiet_NaN();
        c.size_mean = 4;
        c.size_sd = std::numeric_limits<double>::quiet_NaN();
        c.replicates = 1;
        run.cells.push_back(c);
    }
    r.rows.push_back(run);
    std::ostringstream os;
    write_reproduction_csv(os, r);
    const std::string text = os.str();
    CHECK(text.rfind("table,row,method,replicates,failures,tp_mean,tp_sd,size_mean,size_sd,published_tp_mean", 0) == 0);
    CHECK(text.find("2,AR rho=0.2,GLasso,1,0,3,,4,,5.7,2.4,36.4,16.5\n") != std::string::npos);
}
