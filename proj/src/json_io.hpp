#pragma once

#include <nlohmann/json.hpp>

#include "invmc/basis.hpp"
#include "invmc/processes.hpp"

namespace invmc {

nlohmann::json basis_to_json(const BasisSpec& spec);
BasisSpec basis_from_json(const nlohmann::json& j);

nlohmann::json process_to_json(const ProcessSpec& spec);
ProcessSpec process_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace invmc
