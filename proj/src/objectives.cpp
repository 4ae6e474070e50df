#include "odelab/objectives.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "odelab/rng.hpp"

namespace odelab {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Solve Hx = -b with LDLT plus iterative refinement; quadratic minimizers
// must satisfy |grad f(x*)| <= 1e-12 even for ill-conditioned H.
Vec solve_minimizer(const Mat& H, const Vec& b) {
  Eigen::LDLT<Mat> ldlt(H);
  Vec x = ldlt.solve(-b);
  for (int round = 0; round < 3; ++round) {
    const Vec r = -b - H * x;
    if (r.norm() <= 1e-14 * (1.0 + b.norm())) break;
    x += ldlt.solve(r);
  }
  return x;
}

Objective make_quadratic_from_matrix(const Mat& H, const Vec& b, double L,
                                     double mu, const std::string& id) {
  Objective obj;
  obj.dim = static_cast<int>(b.size());
  obj.lipschitz_L = L;
  obj.strong_mu = mu;
  obj.hessian_const = H;
  obj.id = id;

  auto Hp = std::make_shared<Mat>(H);
  auto bp = std::make_shared<Vec>(b);
  obj.value = [Hp, bp](const Vec& x) -> double {
    return 0.5 * x.dot(*Hp * x) + bp->dot(x);
  };
  obj.gradient = [Hp, bp](const Vec& x) -> Vec { return *Hp * x + *bp; };
  obj.hvp = [Hp](const Vec&, const Vec& u) -> Vec { return *Hp * u; };

  // Minimizer exists iff H is positive definite (relative to its scale).
  if (mu > 1e-14 * std::max(L, 1.0)) {
    Vec xs = solve_minimizer(H, b);
    obj.minimizer = xs;
    obj.optimal_value = obj.value(xs);
  }
  return obj;
}

}  // namespace

Objective make_quadratic(const QuadraticSpec& spec) {
  if (spec.hessian_diag.has_value() == spec.hessian.has_value())
    throw std::invalid_argument(
        "make_quadratic: exactly one of hessian_diag/hessian required");

  if (spec.hessian_diag) {
    const Vec& d = *spec.hessian_diag;
    if (d.size() < 1) throw std::invalid_argument("make_quadratic: empty diagonal");
    if (d.size() != spec.linear.size())
      throw std::invalid_argument("make_quadratic: diagonal/linear size mismatch");
    if (d.minCoeff() < 0.0)
      throw std::invalid_argument("make_quadratic: matrix not PSD");
    Mat H = d.asDiagonal();
    std::ostringstream id;
    id << "quadratic:diag[";
    for (int i = 0; i < d.size(); ++i)
      id << (i ? "," : "") << format_double(d[i]);
    id << "]:b[";
    for (int i = 0; i < spec.linear.size(); ++i)
      id << (i ? "," : "") << format_double(spec.linear[i]);
    id << "]";
    return make_quadratic_from_matrix(H, spec.linear, d.maxCoeff(),
                                      d.minCoeff(), id.str());
  }

  const Mat& H = *spec.hessian;
  if (H.rows() != H.cols() || H.rows() != spec.linear.size())
    throw std::invalid_argument("make_quadratic: matrix/linear size mismatch");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("make_quadratic: matrix not symmetric");
  const auto [lo, hi] = linalg::sym_eigen_range(H);
  if (lo < -1e-12 * std::max(hi, 1.0))
    throw std::invalid_argument("make_quadratic: matrix not PSD");
  std::ostringstream id;
  id << "quadratic:dense" << H.rows() << ":h" << std::hex
     << rng::fnv1a64(std::string_view(
            reinterpret_cast<const char*>(H.data()),
            sizeof(double) * static_cast<std::size_t>(H.size())));
  return make_quadratic_from_matrix(H, spec.linear, hi, std::max(lo, 0.0),
                                    id.str());
}

Objective make_random_psd_quadratic(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_random_psd_quadratic: n >= 1 required");
  rng::Xoshiro256pp gen_t(seed, "random-psd-T");
  rng::Xoshiro256pp gen_b(seed, "random-psd-b");
  Mat T(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) T(i, j) = gen_t.uniform01();
  Vec b(n);
  for (int i = 0; i < n; ++i) b[i] = gen_b.uniform01();
  const Mat A = T.transpose() * T;

  // L from power iteration (the dense eigensolver stays a test oracle);
  // the smallest eigenvalue comes from the dense solver, which does not
  // overshoot the way a shifted power iteration can.
  auto apply = [&](const Vec& v) -> Vec { return A * v; };
  const auto pr = linalg::power_iteration(apply, n, 1e-10, 10000);
  const auto [lo, hi] = linalg::sym_eigen_range(A);
  (void)hi;
  std::ostringstream id;
  id << "random-psd:n" << n << ":seed" << seed;
  return make_quadratic_from_matrix(A, b, pr.eigenvalue, std::max(lo, 0.0),
                                    id.str());
}

Objective make_log_sum_exp(const LogSumExpSpec& spec) {
  if (spec.rho <= 0.0)
    throw std::invalid_argument("make_log_sum_exp: rho > 0 required");
  if (spec.A.rows() < 1)
    throw std::invalid_argument("make_log_sum_exp: m >= 1 required");
  if (spec.A.rows() != spec.b.size())
    throw std::invalid_argument("make_log_sum_exp: A/b size mismatch");

  Objective obj;
  obj.dim = static_cast<int>(spec.A.cols());
  obj.strong_mu = 0.0;
  obj.lipschitz_L = std::pow(linalg::spectral_norm(spec.A), 2) / spec.rho;
  {
    std::ostringstream id;
    id << "log-sum-exp:" << spec.A.rows() << "x" << spec.A.cols() << ":rho"
       << format_double(spec.rho) << ":h" << std::hex
       << rng::fnv1a64(std::string_view(
              reinterpret_cast<const char*>(spec.A.data()),
              sizeof(double) * static_cast<std::size_t>(spec.A.size())));
    obj.id = id.str();
  }

  auto Ap = std::make_shared<Mat>(spec.A);
  auto bp = std::make_shared<Vec>(spec.b);
  const double rho = spec.rho;

  // Max-shifted softmax weights; overflow-free by construction.
  auto softmax = [Ap, bp, rho](const Vec& x) -> Vec {
    Vec z = (*Ap * x - *bp) / rho;
    const double zmax = z.maxCoeff();
    Vec p = (z.array() - zmax).exp();
    p /= p.sum();
    return p;
  };

  obj.value = [Ap, bp, rho](const Vec& x) -> double {
    Vec z = (*Ap * x - *bp) / rho;
    const double zmax = z.maxCoeff();
    return rho * (zmax + std::log((z.array() - zmax).exp().sum()));
  };
  obj.gradient = [Ap, softmax](const Vec& x) -> Vec {
    return Ap->transpose() * softmax(x);
  };
  obj.hvp = [Ap, softmax, rho](const Vec& x, const Vec& u) -> Vec {
    const Vec p = softmax(x);
    const Vec z = *Ap * u;
    const Vec w = p.cwiseProduct(z) - p * p.dot(z);
    return (Ap->transpose() * w) / rho;
  };
  return obj;
}

Objective make_log_sum_exp_random(int m, int dim, double rho,
                                  std::uint64_t seed) {
  if (m < 1 || dim < 1)
    throw std::invalid_argument("make_log_sum_exp_random: m, dim >= 1 required");
  rng::Xoshiro256pp gen_a(seed, "lse-A");
  rng::Xoshiro256pp gen_b(seed, "lse-b");
  LogSumExpSpec spec;
  spec.A.resize(m, dim);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < dim; ++j) spec.A(i, j) = gen_a.normal();
  spec.b.resize(m);
  for (int i = 0; i < m; ++i) spec.b[i] = gen_b.normal();
  spec.rho = rho;
  Objective obj = make_log_sum_exp(spec);
  std::ostringstream id;
  id << "log-sum-exp-random:" << m << "x" << dim << ":rho"
     << format_double(rho) << ":seed" << seed;
  obj.id = id.str();
  return obj;
}

bool check_descent_inequality(const Objective& obj, const Vec& x, const Vec& y,
                              double s) {
  if (s > 1.0 / obj.lipschitz_L * (1.0 + 1e-12))
    throw std::invalid_argument(
        "check_descent_inequality: s <= 1/L required");
  const Vec gx = obj.gradient(x);
  const Vec gy = obj.gradient(y);
  const double fx = obj.value(x);
  const double lhs = obj.value(x - s * gx);
  const double rhs = obj.value(y) + gx.dot(x - y) - 0.5 * s * gx.squaredNorm() -
                     0.5 * s * (gx - gy).squaredNorm();
  return lhs <= rhs + 1e-10 * (1.0 + std::abs(fx));
}

}  // namespace odelab
