#pragma once

#include <Eigen/Core>

namespace fbsde {

/// M x d sample of states, one trajectory per row.
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Read-only view of one state vector (a row of a StateMatrix or a VectorXd).
using StateRef = Eigen::Ref<const Eigen::VectorXd>;

}  // namespace fbsde
