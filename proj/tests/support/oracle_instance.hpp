#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "invmc/evaluation.hpp"
#include "invmc/model.hpp"
#include "invmc/processes.hpp"
#include "invmc/solvers.hpp"

namespace invmc::testing {

/// Three-state chain, five inventory nodes, controls {-1, 0, 1}, N = 4.
/// Every chain path from x0 appears with multiplicity proportional to its
/// probability, so sample means equal conditional expectations exactly.
struct OracleInstance {
    FiniteChain chain;
    ProcessSpec process;
    std::shared_ptr<const ControlProblem> problem;
    std::vector<std::vector<double>> nodes;
    double x0 = 2.0;
    int start_state = 1;
    /// One copy of every chain path (256 paths).
    PathSet base_paths;
};

OracleInstance make_oracle_instance();

/// Each base path repeated `copies` times consecutively: path m is base path m / copies.
PathSet replicate_paths(const PathSet& base, int copies);

/// Solver configuration that reproduces the DP exactly on the instance.
SolverConfig oracle_config(const OracleInstance& inst, Algorithm algorithm, Mode mode);

/// Paths matching oracle_config's design for the algorithm.
PathSet oracle_paths(const OracleInstance& inst, Algorithm algorithm);

/// Admissible (node index, control index) pairs in a fixed order.
std::vector<std::pair<int, int>> admissible_pairs(const OracleInstance& inst);

}  // namespace invmc::testing
