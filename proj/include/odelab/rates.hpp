#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odelab/objectives.hpp"
#include "odelab/odes.hpp"
#include "odelab/optimizers.hpp"

namespace odelab {

enum class TheoremId {
  T1,       // NagSc ODE:        f-gap <= 2 D/s * exp(-sqrt(mu) t / 4)
  T2,       // heavy-ball ODE:   f-gap <= 7 D/(2s) * exp(-sqrt(mu) t / 4)
  T3,       // NagSc:            f-gap <= 5 L D / (1 + sqrt(mu/L)/12)^k
  T4,       // heavy-ball:       f-gap <= 5 L D / (1 + mu/(16L))^k
  T5,       // NagC ODE:         inf |grad|^2 <= (12+9sL) D / (2 sqrt(s)(t^3-t0^3))
  T6_grad,  // NagC:             min |grad|^2 <= 8568 D / (s^2 (k+1)^3)
  T6_fval,  // NagC:             f-gap <= 119 D / (s (k+1)^2)
  T7_grad,  // modified NagC:    min |grad f(x)+grad f(y)|^2 <= 882 D / (s^2 (k+1)^3)
  T7_fval,  // modified NagC:    f(y_k)-gap <= 21 D / (s (k+1)^2)
  T8_grad,  // generalized:      scaled grad-norm series stays bounded
  T8_fval,  // generalized:      scaled error series stays bounded
  P9_sum,   // generalized a>3:  partial sums stagnate (summability proxy)
  T10_trend // generalized a>3:  scaled error trends down by 2x per decade
};

std::string theorem_id_name(TheoremId id);
std::optional<TheoremId> theorem_id_from_name(const std::string& name);

struct BoundReport {
  TheoremId id = TheoremId::T1;
  double max_ratio = 0.0;
  std::optional<long> first_violation_index;
  bool pass = false;  // max_ratio <= 1 + 1e-9
  std::string detail;
};

// Theorem checks on discrete trajectories. Throws when the trajectory step
// size violates the theorem's hypothesis (naming the condition).
BoundReport check_bound(TheoremId id, const Trajectory& traj,
                        const Objective& obj, double f_star, const Vec& x_star);

// Theorem checks along ODE trajectories (T1, T2, T5).
BoundReport check_bound_ode(TheoremId id, const OdeTrajectory& ode,
                            const Objective& obj, double f_star,
                            const Vec& x_star);

// Element k: s^2 (k+1)^3 * min_{i<=k} |grad f(x_i)|^2 (running min, O(1)/step).
std::vector<double> scaled_grad_norm_series(const Trajectory& traj, double s);

// Element k: s (k+1)^2 (f(x_k) - f_star).
std::vector<double> scaled_error_series(const Trajectory& traj, double s,
                                        double f_star);

// Proposition-9 proxy: S(k) = sum_i [(i+1)(f(x_i)-f*) + s (i+1)^2 |grad|^2];
// pass when the tail S(end) - S(end/10) <= 0.05 S(end/10).
BoundReport summability_check(const Trajectory& traj, double s, double f_star);

// First index where the cubic gradient bound undercuts the smoothness-based
// quadratic bound 2 L * 119 D / (s (k+1)^2).
long t6_crossover_index(double L, double s);

// Step-size rule backing Theorem 8 (the alpha/beta-dependent c/L bound).
double t8_max_step(double alpha, double beta, double L);

}  // namespace odelab
