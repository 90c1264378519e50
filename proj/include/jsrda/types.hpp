#pragma once

#include <Eigen/Dense>

#include <vector>

namespace jsrda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Class ids are 1-based, matching c in {1..C}.
using Labels = std::vector<int>;

}  // namespace jsrda
