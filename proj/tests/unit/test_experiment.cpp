#include <catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "invmc/error.hpp"
#include "invmc/experiment.hpp"
#include "mc_check.hpp"

using namespace invmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("invmc_exp_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kSmall = R"({
  "benchmark": "arbitrage",
  "overrides": {"dt": 0.02},
  "eval": {"paths": 50, "seed": 3},
  "runs": [
    {"id": "myopic", "algorithm": "myopic"},
    {"id": "rl", "algorithm": "RL", "mode": "value", "M": 100, "seed": 2, "baseline": "myopic", "trajectory_paths": 2},
    {"id": "gd", "algorithm": "GD", "mode": "performance", "M": 100, "grid_levels": 5},
    {"id": "back", "algorithm": "RL", "mode": "performance", "M": 100, "backward_paths": true}
  ]
})";

// results.csv without the wall-time column.
std::string strip_times(const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k != 6) out += cells[k] + ",";
        }
        out += "\n";
    }
    return out;
}

}  // namespace

TEST_CASE("configuration parsing", "[experiment]") {
    const ExperimentConfig c = parse_experiment_config(kSmall);
    CHECK(c.benchmark == "arbitrage");
    CHECK(c.eval_paths == 50);
    REQUIRE(c.runs.size() == 4);
    CHECK(c.runs[0].algorithm == Algorithm::Myopic);
    CHECK(c.runs[1].baseline == "myopic");
    CHECK(c.runs[2].grid_levels == 5);
    CHECK(c.runs[3].backward_paths);

    CHECK_THROWS_AS(parse_experiment_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"benchmark": "arbitrage", "extra": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"benchmark": "moon"})"), UnknownBenchmark);
    CHECK_THROWS_AS(parse_experiment_config(R"({"benchmark": "arbitrage", "runs": [{"id": "a", "algorithm": "RL"},
                                                {"id": "a", "algorithm": "GD"}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"benchmark": "arbitrage",
                                                "runs": [{"id": "a", "algorithm": "GD", "backward_paths": true}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"benchmark": "arbitrage",
                                                "runs": [{"id": "a", "algorithm": "RL", "baseline": "b"}]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"benchmark": "arbitrage",
                                                "runs": [{"id": "a", "algorithm": "RL", "overrides": {"x": 1}}]})"),
                    ConfigError);
}

TEST_CASE("experiments write results, report and trajectories", "[experiment]") {
    const fs::path dir = scratch("run");
    const auto rows = run_experiment(parse_experiment_config(kSmall), dir.string());
    REQUIRE(rows.size() == 4);
    CHECK(rows[1].has_uplift);
    CHECK(rows[1].uplift == rows[1].eval_mean - rows[0].eval_mean);
    CHECK(rows[2].k_or_l == 5);
    for (const auto& r : rows) CHECK(r.constraint_violations == 0);

    const std::string csv = testing::read_file((dir / "results.csv").string());
    CHECK(csv.rfind("run_id,algorithm,mode,M,K_or_L,seed,solve_wall_ms,eval_mean,eval_se,broken_path_frac,uplift\n", 0) ==
          0);
    CHECK(csv == results_csv(rows));
    const auto report = nlohmann::json::parse(testing::read_file((dir / "report.json").string()));
    CHECK(report["library_version"] == library_version());
    CHECK(report["runs"].size() == 4);
    CHECK(report["runs"][3]["broken_fraction_per_step"].size() == 50);
    CHECK(fs::exists(dir / "trajectory_rl.csv"));
    fs::remove_all(dir);
}

TEST_CASE("experiments are reproducible", "[experiment]") {
    const fs::path a = scratch("a");
    const fs::path b = scratch("b");
    const ExperimentConfig c = parse_experiment_config(kSmall);
    run_experiment(c, a.string());
    run_experiment(c, b.string());
    CHECK(strip_times(testing::read_file((a / "results.csv").string())) ==
          strip_times(testing::read_file((b / "results.csv").string())));
    CHECK(testing::read_file((a / "trajectory_rl.csv").string()) ==
          testing::read_file((b / "trajectory_rl.csv").string()));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("configuration without runs yields an empty table", "[experiment]") {
    const fs::path dir = scratch("empty");
    const auto rows = run_experiment(parse_experiment_config(R"({"benchmark": "hydro"})"), dir.string());
    CHECK(rows.empty());
    CHECK(testing::read_file((dir / "results.csv").string()) == results_csv({}));
    fs::remove_all(dir);
}

TEST_CASE("file runner exit codes", "[experiment]") {
    const fs::path dir = scratch("codes");
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({"benchmark": "arbitrage", "runs": [{"id": "x", "algorithm": "warp"}]})";
    CHECK(run_experiment_file(bad.string(), (dir / "out_bad").string()) == 2);
    const auto err = nlohmann::json::parse(testing::read_file((dir / "out_bad" / "error.json").string()));
    CHECK(err["exit_code"] == 2);

    CHECK(run_experiment_file((dir / "missing.json").string(), (dir / "out_missing").string()) == 2);

    const fs::path good = dir / "good.json";
    std::ofstream(good) << R"({"benchmark": "arbitrage", "overrides": {"dt": 0.05}, "eval": {"paths": 5},
                                "runs": [{"id": "m", "algorithm": "myopic"}]})";
    CHECK(run_experiment_file(good.string(), (dir / "out_good").string()) == 0);
    // An output path that is a regular file cannot hold the results.
    std::ofstream(dir / "blocker") << "x";
    CHECK(run_experiment_file(good.string(), (dir / "blocker").string()) == 3);
    fs::remove_all(dir);
}

TEST_CASE("shipped configurations parse", "[experiment]") {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(INVMC_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        INFO(entry.path().string());
        const ExperimentConfig c = parse_experiment_config(testing::read_file(entry.path().string()));
        CHECK_FALSE(c.runs.empty());
        ++count;
    }
    CHECK(count >= 4);
}
