#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "invmc/basis.hpp"
#include "invmc/processes.hpp"

namespace invmc::testing {

struct McEstimate {
    Eigen::VectorXd mean;
    Eigen::VectorXd se;
};

/// Sample mean of phi(X_{n+1}, i_next) over `samples` draws of sample_next from x.
McEstimate mc_conditional_basis(const BasisSpec& spec, const ProcessSpec& process, int n, const std::vector<double>& x,
                                const std::vector<double>& i_next, int samples, std::uint64_t seed);

/// Largest |analytic - mc| / se over terms; terms whose se is zero must agree to 1e-12.
double max_standardised_error(const Eigen::VectorXd& analytic, const McEstimate& mc);

/// Reads a whole file.
std::string read_file(const std::string& path);

}  // namespace invmc::testing
