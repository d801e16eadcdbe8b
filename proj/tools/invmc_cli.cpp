#include <CLI11.hpp>
#include <iostream>

#include "invmc/benchmarks.hpp"
#include "invmc/experiment.hpp"
#include "invmc/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Regression Monte Carlo for inventory control problems"};
    std::string config;
    std::string out;
    int threads = 1;
    bool list = false;
    bool dump_paths = false;
    app.add_option("--config", config, "Experiment configuration (JSON)");
    app.add_option("--out", out, "Output directory (overrides the config's output field)");
    app.add_option("--threads", threads, "Worker threads within a run (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--list-benchmarks", list, "Print the available benchmarks and exit");
    app.add_flag("--dump-paths", dump_paths, "Write training and evaluation paths as CSV");
    app.set_version_flag("--version", invmc::library_version());
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (list) {
        for (const auto& name : invmc::benchmark_names()) std::cout << name << '\n';
        return 0;
    }
    if (config.empty()) {
        std::cerr << "invmc: --config is required (or use --list-benchmarks)\n";
        return 2;
    }
    invmc::set_num_threads(threads);
    invmc::ExperimentOptions options;
    options.dump_paths = dump_paths;
    return invmc::run_experiment_file(config, out, options);
}
