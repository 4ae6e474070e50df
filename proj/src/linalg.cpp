#include "odelab/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "odelab/rng.hpp"

namespace odelab::linalg {

PowerIterationResult power_iteration(const ApplyFn& apply, int dim,
                                     double rel_tol, int max_iter) {
  if (dim < 1) throw std::invalid_argument("power_iteration: dim must be >= 1");
  rng::Xoshiro256pp gen(0x706f776572ULL, "power-iteration-start");
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gen.uniform(0.5, 1.5);
  v.normalize();

  PowerIterationResult res;
  double lambda_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vec w = apply(v);
    const double lambda = v.dot(w);
    const double wn = w.norm();
    res.iterations = it;
    res.eigenvalue = lambda;
    if (wn == 0.0) {  // operator annihilates v: eigenvalue 0
      res.converged = true;
      return res;
    }
    v = w / wn;
    if (it > 1 && std::abs(lambda - lambda_prev) <=
                      rel_tol * std::max(std::abs(lambda), 1e-300)) {
      res.converged = true;
      return res;
    }
    lambda_prev = lambda;
  }
  return res;
}

double spectral_norm(const Mat& A, double rel_tol, int max_iter) {
  const int n = static_cast<int>(A.cols());
  auto apply = [&](const Vec& v) -> Vec { return A.transpose() * (A * v); };
  const auto res = power_iteration(apply, n, rel_tol, max_iter);
  return std::sqrt(std::max(res.eigenvalue, 0.0));
}

CgResult conjugate_gradient(const ApplyFn& apply, const Vec& b, double rel_tol,
                            int max_iter) {
  CgResult res;
  res.x = Vec::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Vec r = b;
  Vec p = r;
  double rs = r.squaredNorm();
  for (int it = 1; it <= max_iter; ++it) {
    const Vec ap = apply(p);
    const double pap = p.dot(ap);
    if (pap <= 0.0) throw std::runtime_error("conjugate_gradient: operator not positive definite");
    const double alpha = rs / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    res.iterations = it;
    res.rel_residual = std::sqrt(rs_new) / bnorm;
    if (res.rel_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return res;
}

std::pair<double, double> sym_eigen_range(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_eigen_range: eigensolver failed");
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

}  // namespace odelab::linalg
