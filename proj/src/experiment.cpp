#include "invmc/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "invmc/benchmarks.hpp"
#include "invmc/error.hpp"
#include "invmc/evaluation.hpp"
#include "invmc/solvers.hpp"

#ifndef INVMC_VERSION
#define INVMC_VERSION "0.0.0"
#endif

namespace invmc {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T field(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": field '" + key + "' is missing or has the wrong type");
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string merged_overrides(const std::string& base, const std::string& run) {
    json b = json::parse(base);
    b.update(json::parse(run));
    return b.dump();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + file.string());
}

void write_trajectories(const std::filesystem::path& file, const PathSet& paths, const EvaluationReport& report,
                        Vec x0, int count) {
    const int n_steps = paths.steps();
    const int p = paths.dim();
    const int q = report.inv_dim;
    const int r = report.control_dim;
    std::ostringstream out;
    out << "path,step";
    for (int d = 0; d < p; ++d) out << ",x" << d + 1;
    for (int d = 0; d < q; ++d) out << ",i" << d + 1;
    for (int d = 0; d < r; ++d) out << ",u" << d + 1;
    out << ",reward\n";
    count = std::min(count, paths.paths());
    for (int m = 0; m < count; ++m) {
        for (int n = 0; n <= n_steps; ++n) {
            out << m << ',' << n;
            const Vec x = n == 0 ? x0 : paths.state(m, n);
            for (int d = 0; d < p; ++d) out << ',' << num(x[d]);
            for (int d = 0; d < q; ++d) {
                out << ',' << num(report.inventory_paths[(static_cast<std::size_t>(m) * (n_steps + 1) + n) * q + d]);
            }
            for (int d = 0; d < r; ++d) {
                out << ',';
                if (n < n_steps) out << num(report.control_paths[(static_cast<std::size_t>(m) * n_steps + n) * r + d]);
            }
            out << ',';
            if (n < n_steps) out << num(report.reward_paths[static_cast<std::size_t>(m) * n_steps + n]);
            out << '\n';
        }
    }
    write_text(file, out.str());
}

}  // namespace

std::string library_version() { return INVMC_VERSION; }

ExperimentConfig parse_experiment_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    reject_unknown(j, {"benchmark", "overrides", "eval", "runs", "output"}, "config");
    ExperimentConfig c;
    c.benchmark = field<std::string>(j, "benchmark", "config");
    if (j.contains("overrides")) {
        if (!j["overrides"].is_object()) throw ConfigError("config: overrides must be an object");
        c.overrides = j["overrides"].dump();
    }
    if (j.contains("eval")) {
        const json& e = j["eval"];
        reject_unknown(e, {"paths", "seed"}, "eval");
        if (e.contains("paths")) c.eval_paths = field<int>(e, "paths", "eval");
        if (e.contains("seed")) c.eval_seed = field<std::uint64_t>(e, "seed", "eval");
    }
    if (c.eval_paths < 1) throw ConfigError("eval: paths must be positive");
    if (j.contains("output")) c.output = field<std::string>(j, "output", "config");
    if (j.contains("runs")) {
        if (!j["runs"].is_array()) throw ConfigError("config: runs must be an array");
        int index = 0;
        for (const json& r : j["runs"]) {
            const std::string where = "runs[" + std::to_string(index) + "]";
            reject_unknown(r,
                           {"id", "algorithm", "mode", "M", "grid_levels", "seed", "backward_paths", "cr_sweeps",
                            "overrides", "baseline", "trajectory_paths"},
                           where);
            RunSpec s;
            s.id = r.contains("id") ? field<std::string>(r, "id", where) : "run" + std::to_string(index);
            try {
                s.algorithm = algorithm_from_string(field<std::string>(r, "algorithm", where));
                if (r.contains("mode")) s.mode = mode_from_string(field<std::string>(r, "mode", where));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(where + ": " + e.what());
            }
            if (r.contains("M")) s.m_paths = field<int>(r, "M", where);
            if (r.contains("grid_levels")) s.grid_levels = field<int>(r, "grid_levels", where);
            if (r.contains("seed")) s.seed = field<std::uint64_t>(r, "seed", where);
            if (r.contains("backward_paths")) s.backward_paths = field<bool>(r, "backward_paths", where);
            if (r.contains("cr_sweeps")) s.cr_sweeps = field<int>(r, "cr_sweeps", where);
            if (r.contains("overrides")) {
                if (!r["overrides"].is_object()) throw ConfigError(where + ": overrides must be an object");
                s.overrides = r["overrides"].dump();
            }
            if (r.contains("baseline")) s.baseline = field<std::string>(r, "baseline", where);
            if (r.contains("trajectory_paths")) s.trajectory_paths = field<int>(r, "trajectory_paths", where);
            if (s.m_paths < 1 && s.algorithm != Algorithm::Myopic) throw ConfigError(where + ": M must be positive");
            if (s.backward_paths && !(s.algorithm == Algorithm::RegressLater && s.mode == Mode::PerformanceIteration)) {
                throw ConfigError(where + ": backward_paths needs the regress-later algorithm in performance mode");
            }
            if (s.grid_levels < 0 || s.cr_sweeps < 1 || s.trajectory_paths < 0) {
                throw ConfigError(where + ": grid_levels, cr_sweeps or trajectory_paths out of range");
            }
            for (const RunSpec& other : c.runs) {
                if (other.id == s.id) throw ConfigError(where + ": duplicate run id '" + s.id + "'");
            }
            c.runs.push_back(std::move(s));
            ++index;
        }
        for (const RunSpec& s : c.runs) {
            if (s.baseline.empty()) continue;
            const bool known = std::any_of(c.runs.begin(), c.runs.end(), [&](const RunSpec& o) { return o.id == s.baseline; });
            if (!known) throw ConfigError("run '" + s.id + "': unknown baseline '" + s.baseline + "'");
        }
    }
    // Benchmark name and overrides are checked up front so errors surface as configuration errors.
    build_benchmark(c.benchmark, c.overrides);
    for (const RunSpec& s : c.runs) build_benchmark(c.benchmark, merged_overrides(c.overrides, s.overrides));
    c.echo = j.dump();
    return c;
}

std::string results_csv(const std::vector<RunRow>& rows) {
    std::ostringstream out;
    out << "run_id,algorithm,mode,M,K_or_L,seed,solve_wall_ms,eval_mean,eval_se,broken_path_frac,uplift\n";
    for (const RunRow& r : rows) {
        out << r.run_id << ',' << r.algorithm << ',' << r.mode << ',' << r.m_paths << ',' << r.k_or_l << ','
            << r.seed << ',' << num(r.solve_wall_ms) << ',' << num(r.eval_mean) << ',' << num(r.eval_se) << ','
            << num(r.broken_path_frac) << ',';
        if (r.has_uplift) out << num(r.uplift);
        out << '\n';
    }
    return out.str();
}

std::vector<RunRow> run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                   const ExperimentOptions& options) {
    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);

    std::vector<RunRow> rows;
    std::map<std::string, std::vector<double>> per_path;
    json runs = json::array();
    for (const RunSpec& spec : config.runs) {
        const BenchmarkBundle bundle = build_benchmark(config.benchmark, merged_overrides(config.overrides, spec.overrides));
        const ControlProblem& problem = *bundle.problem;
        const PathSet eval_paths = simulate_paths(bundle.process, config.eval_paths, problem.horizon(), bundle.x0,
                                                  config.eval_seed);
        EvaluationOptions eval_options;
        eval_options.record_trajectories = spec.trajectory_paths > 0;

        RunRow row;
        row.run_id = spec.id;
        row.algorithm = to_string(spec.algorithm);
        row.mode = spec.algorithm == Algorithm::Myopic ? "none" : to_string(spec.mode);
        row.seed = spec.seed;
        EvaluationReport report;
        std::vector<double> broken;
        double ever_broken = 0.0;
        if (spec.algorithm == Algorithm::Myopic) {
            row.m_paths = 0;
            report = myopic_policy_value(problem, eval_paths, bundle.x0, bundle.i0, bundle.argmax, eval_options);
        } else {
            SolverConfig sc = bundle.config(spec.algorithm, spec.mode);
            sc.m_paths = spec.m_paths;
            if (spec.grid_levels > 0) sc.grid_levels = spec.grid_levels;
            sc.seed = spec.seed;
            sc.rl_backward_paths = spec.backward_paths;
            sc.cr_sweeps = spec.cr_sweeps;
            const PathSet train = simulate_paths(bundle.process, spec.m_paths, problem.horizon(), bundle.x0, spec.seed);
            if (options.dump_paths) write_paths_csv(train, (out / ("paths_" + spec.id + ".csv")).string());
            const SolveResult solved = solve(problem, train, sc);
            row.m_paths = spec.m_paths;
            row.k_or_l = spec.algorithm == Algorithm::GridDiscretisation ? sc.grid_levels : sc.basis.size();
            row.solve_wall_ms = solved.solve_wall_ms;
            row.broken_path_frac = solved.mean_broken_fraction;
            broken = solved.broken_fraction;
            ever_broken = solved.ever_broken_fraction;
            report = evaluate_policy(solved.policy, problem, eval_paths, bundle.x0, bundle.i0, eval_options);
        }
        if (options.dump_paths) write_paths_csv(eval_paths, (out / ("paths_eval_" + spec.id + ".csv")).string());
        row.eval_mean = report.mean_value;
        row.eval_se = report.std_error;
        row.q25 = quantile(report.per_path_values, 0.25);
        row.q75 = quantile(report.per_path_values, 0.75);
        row.constraint_violations = report.constraint_violations;
        if (spec.trajectory_paths > 0) {
            write_trajectories(out / ("trajectory_" + spec.id + ".csv"), eval_paths, report, bundle.x0,
                               spec.trajectory_paths);
        }
        per_path[spec.id] = report.per_path_values;
        rows.push_back(row);
        runs.push_back({{"run_id", row.run_id},
                        {"algorithm", row.algorithm},
                        {"mode", row.mode},
                        {"M", row.m_paths},
                        {"K_or_L", row.k_or_l},
                        {"seed", row.seed},
                        {"solve_wall_ms", row.solve_wall_ms},
                        {"eval_mean", row.eval_mean},
                        {"eval_se", row.eval_se},
                        {"broken_path_frac", row.broken_path_frac},
                        {"broken_fraction_per_step", broken},
                        {"ever_broken_fraction", ever_broken},
                        {"q25", row.q25},
                        {"q75", row.q75},
                        {"constraint_violations", row.constraint_violations}});
    }

    for (std::size_t k = 0; k < rows.size(); ++k) {
        const RunSpec& spec = config.runs[k];
        if (spec.baseline.empty()) continue;
        const auto it = std::find_if(rows.begin(), rows.end(), [&](const RunRow& r) { return r.run_id == spec.baseline; });
        rows[k].has_uplift = true;
        rows[k].uplift = rows[k].eval_mean - it->eval_mean;
        const auto& with = per_path[spec.id];
        const auto& without = per_path[spec.baseline];
        json up = {{"baseline", spec.baseline},
                   {"mean", rows[k].uplift},
                   {"q25", rows[k].q25 - it->q25},
                   {"q75", rows[k].q75 - it->q75}};
        if (with.size() == without.size() && with.size() > 1) {
            double s = 0.0;
            double ss = 0.0;
            for (std::size_t m = 0; m < with.size(); ++m) s += with[m] - without[m];
            const double mean = s / static_cast<double>(with.size());
            for (std::size_t m = 0; m < with.size(); ++m) {
                const double d = with[m] - without[m] - mean;
                ss += d * d;
            }
            up["paired_se"] = std::sqrt(ss / static_cast<double>(with.size() - 1) / static_cast<double>(with.size()));
        }
        runs[k]["uplift"] = up;
    }

    write_text(out / "results.csv", results_csv(rows));
    const json report = {{"library_version", library_version()},
                         {"benchmark", config.benchmark},
                         {"eval_paths", config.eval_paths},
                         {"eval_seed", config.eval_seed},
                         {"config", json::parse(config.echo.empty() ? std::string("{}") : config.echo)},
                         {"runs", runs}};
    write_text(out / "report.json", report.dump(2) + "\n");
    return rows;
}

int run_experiment_file(const std::string& config_path, const std::string& out_flag, const ExperimentOptions& options) {
    std::string out_dir = out_flag;
    auto fail = [&](int code, const std::string& kind, const std::string& message) {
        std::cerr << "invmc: " << kind << " error: " << message << '\n';
        const json err = {{"status", "error"}, {"kind", kind}, {"exit_code", code}, {"message", message}};
        try {
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                write_text(std::filesystem::path(out_dir) / "error.json", err.dump(2) + "\n");
            }
        } catch (const std::exception&) {
        }
        return code;
    };
    ExperimentConfig config;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot read configuration file " + config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        config = parse_experiment_config(buf.str());
    } catch (const std::exception& e) {
        return fail(2, "config", e.what());
    }
    if (out_dir.empty()) out_dir = config.output.empty() ? std::string("invmc_out") : config.output;
    try {
        run_experiment(config, out_dir, options);
    } catch (const std::exception& e) {
        return fail(3, "runtime", e.what());
    }
    return 0;
}

}  // namespace invmc
