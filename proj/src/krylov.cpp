#include "pcsc/krylov.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace pcsc {

KrylovResult gmres(const LinearMap& apply, const LinearMap& precondition,
                   const Eigen::VectorXd& rhs, double tol, int restart,
                   int max_iterations, double op_norm) {
  const Eigen::Index n = rhs.size();
  KrylovResult result;
  result.x = Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }

  Eigen::VectorXd r = rhs;
  double rnorm = bnorm;
  while (result.iterations < max_iterations) {
    const int m = restart;
    std::vector<Eigen::VectorXd> V;
    std::vector<Eigen::VectorXd> Z;
    V.reserve(std::size_t(m + 1));
    Z.reserve(std::size_t(m));
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g[0] = rnorm;
    V.push_back(r / rnorm);

    int k = 0;
    for (; k < m && result.iterations < max_iterations; ++k) {
      ++result.iterations;
      Z.push_back(precondition(V[std::size_t(k)]));
      Eigen::VectorXd w = apply(Z.back());
      // Modified Gram-Schmidt with one re-orthogonalization pass.
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          const double h = V[std::size_t(i)].dot(w);
          H(i, k) += h;
          w -= h * V[std::size_t(i)];
        }
      }
      H(k + 1, k) = w.norm();
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = denom == 0.0 ? 1.0 : H(k, k) / denom;
      sn[k] = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
      const double h_next = H(k + 1, k);
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= tol * bnorm || h_next == 0.0) {
        ++k;
        break;
      }
      V.push_back(w / h_next);
    }

    // Back substitution on the k x k upper-triangular block.
    Eigen::VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) result.x += y[i] * Z[std::size_t(i)];

    r = rhs - apply(result.x);
    const double previous = rnorm;
    rnorm = r.norm();
    result.relative_residual = rnorm / bnorm;
    // Backward-error test: with op_norm = 0 this is ‖r‖ <= tol·‖b‖.
    if (rnorm <= tol * (op_norm * result.x.norm() + bnorm)) {
      result.converged = true;
      return result;
    }
    if (!std::isfinite(rnorm)) return result;
    // A restart cycle that barely moves the true residual is at the roundoff floor.
    if (rnorm > 0.95 * previous) return result;
  }
  return result;
}

Eigen::MatrixXd assemble_dense(const LinearMap& apply, Eigen::Index size) {
  Eigen::MatrixXd A(size, size);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    e[j] = 1.0;
    A.col(j) = apply(e);
    e[j] = 0.0;
  }
  return A;
}

}  // namespace pcsc
