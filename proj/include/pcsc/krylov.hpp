#pragma once

#include <Eigen/Core>

#include <functional>

namespace pcsc {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with right preconditioning: solves A M y = b, x = M y.
/// Stops when ‖b - A x‖ <= tol·(op_norm·‖x‖ + ‖b‖), op_norm being an upper
/// estimate of ‖A‖ (0 gives the plain relative test), or when a restart cycle
/// stagnates.
KrylovResult gmres(const LinearMap& apply, const LinearMap& precondition,
                   const Eigen::VectorXd& rhs, double tol, int restart = 60,
                   int max_iterations = 1200, double op_norm = 0.0);

/// Dense matrix of a linear map by applying it to unit vectors.
Eigen::MatrixXd assemble_dense(const LinearMap& apply, Eigen::Index size);

}  // namespace pcsc
