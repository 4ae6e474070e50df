#pragma once

#include <Eigen/Dense>
#include <functional>

namespace odelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace linalg {

using ApplyFn = std::function<Vec(const Vec&)>;

struct PowerIterationResult {
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Largest eigenvalue of a symmetric PSD operator given only matvecs.
// Deterministic start vector, Rayleigh-quotient estimate.
PowerIterationResult power_iteration(const ApplyFn& apply, int dim,
                                     double rel_tol = 1e-10,
                                     int max_iter = 10000);

// Spectral norm of a (possibly rectangular) matrix, via power iteration on
// A^T A. Returns sqrt of the largest eigenvalue.
double spectral_norm(const Mat& A, double rel_tol = 1e-10,
                     int max_iter = 10000);

struct CgResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
  double rel_residual = 0.0;
};

// Conjugate gradient for SPD operators, matrix-free.
CgResult conjugate_gradient(const ApplyFn& apply, const Vec& b, double rel_tol,
                            int max_iter);

// Dense symmetric eigen-range (smallest, largest) via Eigen's solver.
std::pair<double, double> sym_eigen_range(const Mat& A);

}  // namespace linalg
}  // namespace odelab
