#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "invmc/benchmarks.hpp"
#include "invmc/error.hpp"
#include "invmc/evaluation.hpp"
#include "invmc/experiment.hpp"
#include "invmc/parallel.hpp"
#include "invmc/regression.hpp"
#include "invmc/solvers.hpp"

namespace py = pybind11;
using namespace invmc;

namespace {

py::array_t<double> paths_array(const PathSet& paths) {
    py::array_t<double> out({paths.paths(), paths.steps() + 1, paths.dim()});
    std::copy(paths.values().begin(), paths.values().end(), out.mutable_data());
    return out;
}

PathSet paths_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, std::uint64_t seed) {
    if (a.ndim() != 3) throw DimensionMismatch("paths array must have shape (M, N + 1, p)");
    PathSet paths(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)) - 1, static_cast<int>(a.shape(2)), seed);
    std::copy(a.data(), a.data() + a.size(), paths.values().begin());
    return paths;
}

py::dict row_dict(const RunRow& r) {
    py::dict d;
    d["run_id"] = r.run_id;
    d["algorithm"] = r.algorithm;
    d["mode"] = r.mode;
    d["M"] = r.m_paths;
    d["K_or_L"] = r.k_or_l;
    d["seed"] = r.seed;
    d["solve_wall_ms"] = r.solve_wall_ms;
    d["eval_mean"] = r.eval_mean;
    d["eval_se"] = r.eval_se;
    d["broken_path_frac"] = r.broken_path_frac;
    d["uplift"] = r.has_uplift ? py::object(py::float_(r.uplift)) : py::object(py::none());
    return d;
}

}  // namespace

PYBIND11_MODULE(_invmc, m) {
    m.doc() = "Regression Monte Carlo for controlled inventories";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const UnknownBenchmark& e) {
            PyErr_SetString(PyExc_KeyError, e.what());
        } catch (const DimensionMismatch& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::enum_<Algorithm>(m, "Algorithm")
        .value("RegressLater", Algorithm::RegressLater)
        .value("GridDiscretisation", Algorithm::GridDiscretisation)
        .value("ControlRandomisation", Algorithm::ControlRandomisation)
        .value("Myopic", Algorithm::Myopic);
    py::enum_<Mode>(m, "Mode")
        .value("ValueIteration", Mode::ValueIteration)
        .value("PerformanceIteration", Mode::PerformanceIteration);

    py::class_<PathSet>(m, "PathSet")
        .def_property_readonly("paths", &PathSet::paths)
        .def_property_readonly("steps", &PathSet::steps)
        .def_property_readonly("dim", &PathSet::dim)
        .def_property_readonly("seed", &PathSet::seed)
        .def("to_numpy", &paths_array, "Array of shape (M, N + 1, p)")
        .def_static("from_numpy", &paths_from_array, py::arg("array"), py::arg("seed") = 0);

    py::class_<BenchmarkBundle>(m, "Benchmark")
        .def(py::init([](const std::string& name, const std::string& overrides) {
                 return build_benchmark(name, overrides);
             }),
             py::arg("name"), py::arg("overrides") = "{}")
        .def_readonly("name", &BenchmarkBundle::name)
        .def_readonly("x0", &BenchmarkBundle::x0)
        .def_readonly("i0", &BenchmarkBundle::i0)
        .def_readonly("grid_levels", &BenchmarkBundle::grid_levels)
        .def_property_readonly("horizon", [](const BenchmarkBundle& b) { return b.problem->horizon(); })
        .def_property_readonly("exo_dim", [](const BenchmarkBundle& b) { return b.problem->exo_dim(); })
        .def_property_readonly("inv_dim", [](const BenchmarkBundle& b) { return b.problem->inv_dim(); })
        .def_property_readonly("inv_max", [](const BenchmarkBundle& b) { return b.problem->inv_max(); })
        .def(
            "simulate",
            [](const BenchmarkBundle& b, int m_paths, std::uint64_t seed) {
                py::gil_scoped_release release;
                return simulate_paths(b.process, m_paths, b.problem->horizon(), b.x0, seed);
            },
            py::arg("paths"), py::arg("seed"));

    py::class_<Policy>(m, "Policy")
        .def_readonly("algorithm", &Policy::algorithm)
        .def_readonly("mode", &Policy::mode)
        .def_readonly("horizon", &Policy::horizon)
        .def("to_json", &policy_to_json)
        .def_static("from_json", &policy_from_json)
        .def(
            "decide",
            [](const Policy& p, const BenchmarkBundle& b, int n, const std::vector<double>& x,
               const std::vector<double>& i) {
                const ArgmaxResult r = p.decide(*b.problem, n, x, i);
                py::dict d;
                d["control"] = std::vector<double>(r.u.begin(), r.u.begin() + r.control_dim);
                d["next_inventory"] = std::vector<double>(r.next.begin(), r.next.begin() + r.inv_dim);
                d["value"] = r.value;
                return d;
            },
            py::arg("benchmark"), py::arg("n"), py::arg("x"), py::arg("i"));

    py::class_<SolveResult>(m, "SolveResult")
        .def_readonly("policy", &SolveResult::policy)
        .def_readonly("broken_fraction", &SolveResult::broken_fraction)
        .def_readonly("mean_broken_fraction", &SolveResult::mean_broken_fraction)
        .def_readonly("ever_broken_fraction", &SolveResult::ever_broken_fraction)
        .def_readonly("solve_wall_ms", &SolveResult::solve_wall_ms);

    py::class_<EvaluationReport>(m, "EvaluationReport")
        .def_readonly("mean_value", &EvaluationReport::mean_value)
        .def_readonly("std_error", &EvaluationReport::std_error)
        .def_readonly("per_path_values", &EvaluationReport::per_path_values)
        .def_readonly("constraint_violations", &EvaluationReport::constraint_violations)
        .def_readonly("wall_ms", &EvaluationReport::wall_ms)
        .def("to_json", [](const EvaluationReport& r, bool per_path) { return report_to_json(r, per_path); },
             py::arg("include_per_path") = false);

    m.def(
        "solve",
        [](const BenchmarkBundle& b, const PathSet& paths, const std::string& algorithm, const std::string& mode,
           int grid_levels, bool backward_paths, int cr_sweeps, std::uint64_t seed) {
            SolverConfig config = b.config(algorithm_from_string(algorithm), mode_from_string(mode));
            config.m_paths = paths.paths();
            if (grid_levels > 0) config.grid_levels = grid_levels;
            config.rl_backward_paths = backward_paths;
            config.cr_sweeps = cr_sweeps;
            config.seed = seed;
            py::gil_scoped_release release;
            return solve(*b.problem, paths, config);
        },
        py::arg("benchmark"), py::arg("paths"), py::arg("algorithm") = "RL", py::arg("mode") = "value",
        py::arg("grid_levels") = 0, py::arg("backward_paths") = false, py::arg("cr_sweeps") = 1,
        py::arg("seed") = 1, "Fits a policy on the training paths with the benchmark's default basis.");

    m.def(
        "evaluate",
        [](const Policy& policy, const BenchmarkBundle& b, const PathSet& paths) {
            py::gil_scoped_release release;
            return evaluate_policy(policy, *b.problem, paths, b.x0, b.i0);
        },
        py::arg("policy"), py::arg("benchmark"), py::arg("paths"));

    m.def(
        "myopic",
        [](const BenchmarkBundle& b, const PathSet& paths) {
            py::gil_scoped_release release;
            return myopic_policy_value(*b.problem, paths, b.x0, b.i0, b.argmax);
        },
        py::arg("benchmark"), py::arg("paths"));

    m.def(
        "fit_least_squares",
        [](const Eigen::MatrixXd& design, const Eigen::VectorXd& responses) {
            const FitResult r = fit_least_squares(design, responses);
            return py::make_tuple(r.coefficients, r.diagnostics.rank);
        },
        py::arg("design"), py::arg("responses"), "Returns (coefficients, rank).");

    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::string& out_dir) {
            const ExperimentConfig config = parse_experiment_config(config_json);
            std::vector<RunRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_experiment(config, out_dir);
            }
            py::list out;
            for (const auto& r : rows) out.append(row_dict(r));
            return out;
        },
        py::arg("config_json"), py::arg("out_dir"));

    m.def("benchmark_names", &benchmark_names);
    m.def("set_num_threads", &set_num_threads);
    m.def("version", &library_version);
}
