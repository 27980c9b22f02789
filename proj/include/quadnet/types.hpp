#pragma once

#include <Eigen/Dense>

namespace quadnet {

// Dense storage throughout; every dimension in this library is small.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace quadnet
