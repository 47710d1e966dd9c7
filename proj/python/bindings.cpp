#include "ibridge/eval.hpp"
#include "ibridge/parallel.hpp"
#include "ibridge/presets.hpp"
#include "ibridge/reproduce.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ibridge;

namespace {

struct Dataset {
    MultiStudy ms;
    std::optional<TruthSet> truth;
};

std::vector<std::string> subtype_ids(const MultiStudy& ms)
{
    std::vector<std::string> ids;
    for (const auto& c : ms.cohorts) {
        ids.push_back(c.id);
    }
    return ids;
}

py::list pairs_list(const std::vector<GeneSubtype>& pairs, const MultiStudy& ms)
{
    py::list out;
    for (const auto& p : pairs) {
        out.append(py::make_tuple(ms.structure.gene_id(p.gene), ms.cohorts.at(p.subtype).id));
    }
    return out;
}

FitConfig make_config(const std::vector<double>& gammas, std::size_t grid_size, double grid_ratio, std::size_t threads)
{
    FitConfig config;
    config.gammas = gammas;
    config.grid_size = grid_size;
    config.grid_ratio = grid_ratio;
    config.threads = resolve_threads(threads == 0 ? std::nullopt : std::optional<std::size_t>(threads));
    return config;
}

Dataset simulate(const std::string& preset, std::uint64_t seed, std::uint64_t replicate)
{
    const Simulator sim(preset_design(preset, seed));
    return {sim.replicate(replicate), sim.truth()};
}

py::dict fit(const Dataset& data, const std::vector<double>& gammas, std::size_t grid_size, double grid_ratio,
             std::size_t threads)
{
    const TunedModel tuned = fit_tuned(data.ms, make_config(gammas, grid_size, grid_ratio, threads));
    const TuningReport& report = tuned.report;
    const FitResult& best = report.best_fit();
    const GridPoint& point = report.grid.at(report.best);

    py::dict norms;
    for (const auto& p : best.selected) {
        const auto b = data.ms.structure.find_block(p.gene, p.subtype);
        norms[py::make_tuple(data.ms.structure.gene_id(p.gene), data.ms.cohorts.at(p.subtype).id)] =
            b ? best.beta.norm(*b) : 0.0;
    }
    py::list grid;
    for (const auto& g : report.grid) {
        py::dict row;
        row["gamma"] = g.gamma;
        row["lambda"] = g.lambda;
        row["bic"] = g.bic;
        row["df"] = g.df;
        row["model_size"] = g.model_size;
        grid.append(row);
    }
    py::dict out;
    out["gamma"] = point.gamma;
    out["lambda"] = point.lambda;
    out["bic"] = point.bic;
    out["selected"] = pairs_list(best.selected, data.ms);
    out["norms"] = norms;
    out["objective_trace"] = best.objective_trace;
    out["grid"] = grid;
    out["outer_monotone_violations"] = report.diagnostics.outer_monotone_violations;
    out["kkt_failures"] = report.diagnostics.kkt_failures;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Integrative bridge selection for multi-subtype survival studies";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    py::class_<Dataset>(m, "Dataset")
        .def_static("load_csv", [](const std::string& dir) { return Dataset{load_csv(CsvPaths::in_directory(dir)), {}}; },
                    py::arg("directory"))
        .def("save_csv", [](const Dataset& d, const std::string& dir) { save_csv(d.ms, CsvPaths::in_directory(dir)); },
             py::arg("directory"))
        .def_property_readonly("n", [](const Dataset& d) { return d.ms.n(); })
        .def_property_readonly("subtype_ids", [](const Dataset& d) { return subtype_ids(d.ms); })
        .def_property_readonly("gene_ids", [](const Dataset& d) { return d.ms.structure.gene_ids(); })
        .def_property_readonly("censoring",
                               [](const Dataset& d) {
                                   double censored = 0.0;
                                   for (const auto& c : d.ms.cohorts) {
                                       censored += static_cast<double>((c.event.array() == 0).count());
                                   }
                                   return censored / static_cast<double>(d.ms.n());
                               })
        .def("times", [](const Dataset& d, std::size_t m) { return d.ms.cohorts.at(m).time; }, py::arg("subtype"))
        .def("events", [](const Dataset& d, std::size_t m) { return d.ms.cohorts.at(m).event; }, py::arg("subtype"))
        .def("genotype", [](const Dataset& d, std::size_t m) { return d.ms.cohorts.at(m).genotype; },
             py::arg("subtype"))
        .def_property_readonly("truth", [](const Dataset& d) -> py::object {
            if (!d.truth) {
                return py::none();
            }
            return pairs_list({d.truth->pairs.begin(), d.truth->pairs.end()}, d.ms);
        });

    m.def("presets", &preset_names);
    m.def("simulate", &simulate, py::arg("preset"), py::arg("seed") = 1, py::arg("replicate") = 0);
    m.def("fit", &fit, py::arg("data"), py::arg("gammas") = std::vector<double>{0.5, 0.7, 0.9},
          py::arg("grid_size") = 50, py::arg("grid_ratio") = kDefaultGridRatio, py::arg("threads") = 0);

    m.def(
        "stability",
        [](const Dataset& d, std::size_t rounds, double fraction, std::uint64_t seed, const std::vector<double>& gammas) {
            const StabilityReport r = occurrence_index(d.ms, make_config(gammas, 50, kDefaultGridRatio, 0), rounds, fraction, seed);
            py::dict out;
            for (std::size_t g = 0; g < r.gene_ids.size(); ++g) {
                for (std::size_t s = 0; s < r.subtype_ids.size(); ++s) {
                    if (r.index(g, s) > 0.0) {
                        out[py::make_tuple(r.gene_ids[g], r.subtype_ids[s])] = r.index(g, s);
                    }
                }
            }
            return out;
        },
        py::arg("data"), py::arg("rounds") = 100, py::arg("fraction") = 0.75, py::arg("seed") = 1,
        py::arg("gammas") = std::vector<double>{0.5, 0.7, 0.9});

    m.def(
        "predict",
        [](const Dataset& d, std::size_t rounds, double fraction, std::uint64_t seed, const std::vector<double>& gammas) {
            const PredictionReport r = predict_evaluate(d.ms, make_config(gammas, 50, kDefaultGridRatio, 0), rounds, seed, fraction);
            py::dict out;
            out["statistics"] = r.statistics;
            out["mean_statistic"] = r.mean_statistic;
            out["p_value"] = r.p_value;
            out["skipped"] = r.skipped;
            return out;
        },
        py::arg("data"), py::arg("rounds") = 100, py::arg("fraction") = 0.75, py::arg("seed") = 1,
        py::arg("gammas") = std::vector<double>{0.5, 0.7, 0.9});

    m.def(
        "km_weights",
        [](const Eigen::VectorXd& log_time, const Eigen::VectorXi& event) {
            const KmWeights w = km_weights(log_time, event);
            return py::make_tuple(w.order, w.weights);
        },
        py::arg("log_time"), py::arg("event"),
        "Stute weights; returns (sort order, weights of the sorted observations).");

    m.def(
        "logrank",
        [](const Eigen::VectorXd& times, const Eigen::VectorXi& events, const Eigen::VectorXi& group) {
            const LogrankResult r = logrank_two_group(times, events, group);
            return py::make_tuple(r.statistic, r.p_value);
        },
        py::arg("times"), py::arg("events"), py::arg("group"));

    m.def("lambda_to_tau", &lambda_to_tau, py::arg("lam"), py::arg("gamma"));
    m.def("tau_to_lambda", &tau_to_lambda, py::arg("tau"), py::arg("gamma"));

    m.def(
        "reproduce",
        [](int table, std::size_t replicates, std::uint64_t seed, std::size_t threads) {
            const TableReproduction r =
                reproduce_table(table, replicates, seed, make_config({0.5, 0.7, 0.9}, 50, kDefaultGridRatio, threads));
            std::ostringstream os;
            write_reproduction_csv(os, r);
            return os.str();
        },
        py::arg("table"), py::arg("replicates"), py::arg("seed") = 1, py::arg("threads") = 0,
        "Runs every row of a published table; returns the CSV text.");

    m.attr("__version__") = IBRIDGE_VERSION;
}
