#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "odelab/linalg.hpp"

namespace odelab {

// A smooth convex test function with analytic derivatives and smoothness
// constants. Immutable after construction; all callables are pure, so one
// instance is safely shared across threads.
struct Objective {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Vec(const Vec&, const Vec&)> hvp;
  double lipschitz_L = 0.0;
  double strong_mu = 0.0;
  std::optional<Vec> minimizer;
  std::optional<double> optimal_value;
  // Present when the Hessian is constant (quadratics); enables dense solves.
  std::optional<Mat> hessian_const;
  std::string id;
};

struct QuadraticSpec {
  std::optional<Vec> hessian_diag;  // exactly one of diag/full must be set
  std::optional<Mat> hessian;
  Vec linear;
};

struct LogSumExpSpec {
  Mat A;  // m x dim
  Vec b;  // m
  double rho = 1.0;
};

// f(x) = 1/2 <Hx, x> + <b, x>. Rejects non-symmetric or non-PSD matrices.
Objective make_quadratic(const QuadraticSpec& spec);

// f(x) = 1/2 <Ax, x> + <b, x> with A = T^T T, entries of T and b iid
// Uniform(0,1) from the seeded generator. L is computed by power iteration.
Objective make_random_psd_quadratic(int n, std::uint64_t seed);

// f(x) = rho * log sum_i exp((<a_i, x> - b_i) / rho), max-shifted.
Objective make_log_sum_exp(const LogSumExpSpec& spec);

// Log-sum-exp with iid standard-normal A and b from the seeded generator.
Objective make_log_sum_exp_random(int m, int dim, double rho,
                                  std::uint64_t seed);

// Tighter descent inequality:
//   f(x - s grad f(x)) <= f(y) + <grad f(x), x - y>
//                         - (s/2)|grad f(x)|^2 - (s/2)|grad f(x) - grad f(y)|^2
// with additive slack 1e-10 * (1 + |f(x)|). Requires s <= 1/L.
bool check_descent_inequality(const Objective& obj, const Vec& x, const Vec& y,
                              double s);

}  // namespace odelab
