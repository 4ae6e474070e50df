#include "odelab/rates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace odelab {

namespace {

constexpr double kPassSlack = 1e-9;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument("check_bound: " + msg);
}

BoundReport ratio_report(TheoremId id, const std::vector<double>& lhs,
                         const std::vector<double>& rhs, long index_offset = 0) {
  BoundReport rep;
  rep.id = id;
  rep.max_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double ratio = lhs[i] / rhs[i];
    if (ratio > rep.max_ratio) rep.max_ratio = ratio;
    if (ratio > 1.0 + kPassSlack && !rep.first_violation_index)
      rep.first_violation_index = static_cast<long>(i) + index_offset;
  }
  if (lhs.empty()) rep.max_ratio = 0.0;
  rep.pass = !rep.first_violation_index.has_value();
  return rep;
}

double window_max(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double m = 0.0;
  for (std::size_t i = lo; i <= hi && i < v.size(); ++i) m = std::max(m, v[i]);
  return m;
}

double window_mean(const std::vector<double>& v, std::size_t lo,
                   std::size_t hi) {
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = lo; i <= hi && i < v.size(); ++i) {
    sum += v[i];
    ++cnt;
  }
  return cnt ? sum / static_cast<double>(cnt) : 0.0;
}

// Ratio check with guarded zero denominators (trajectory already at x*).
BoundReport trend_report(TheoremId id, double measured, double reference,
                         double factor, const std::string& detail) {
  BoundReport rep;
  rep.id = id;
  rep.detail = detail;
  if (reference <= 0.0) {
    rep.max_ratio = measured > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    rep.max_ratio = measured / (factor * reference);
  }
  rep.pass = rep.max_ratio <= 1.0 + kPassSlack;
  if (!rep.pass) rep.first_violation_index = 0;
  return rep;
}

}  // namespace

std::string theorem_id_name(TheoremId id) {
  switch (id) {
    case TheoremId::T1: return "T1";
    case TheoremId::T2: return "T2";
    case TheoremId::T3: return "T3";
    case TheoremId::T4: return "T4";
    case TheoremId::T5: return "T5";
    case TheoremId::T6_grad: return "T6_grad";
    case TheoremId::T6_fval: return "T6_fval";
    case TheoremId::T7_grad: return "T7_grad";
    case TheoremId::T7_fval: return "T7_fval";
    case TheoremId::T8_grad: return "T8_grad";
    case TheoremId::T8_fval: return "T8_fval";
    case TheoremId::P9_sum: return "P9_sum";
    case TheoremId::T10_trend: return "T10_trend";
  }
  return "unknown";
}

std::optional<TheoremId> theorem_id_from_name(const std::string& name) {
  for (TheoremId id :
       {TheoremId::T1, TheoremId::T2, TheoremId::T3, TheoremId::T4,
        TheoremId::T5, TheoremId::T6_grad, TheoremId::T6_fval,
        TheoremId::T7_grad, TheoremId::T7_fval, TheoremId::T8_grad,
        TheoremId::T8_fval, TheoremId::P9_sum, TheoremId::T10_trend})
    if (theorem_id_name(id) == name) return id;
  // Convenience aliases covering both halves of a theorem.
  if (name == "T6") return TheoremId::T6_grad;
  if (name == "T7") return TheoremId::T7_grad;
  if (name == "T8") return TheoremId::T8_grad;
  if (name == "T10") return TheoremId::T10_trend;
  if (name == "P9") return TheoremId::P9_sum;
  return std::nullopt;
}

BoundReport check_bound(TheoremId id, const Trajectory& traj,
                        const Objective& obj, double f_star,
                        const Vec& x_star) {
  const double s = traj.method.step_s;
  const double L = obj.lipschitz_L;
  const double mu = traj.method.mu;
  const double D = (traj.xs.at(0) - x_star).squaredNorm();
  const std::size_t n = traj.size();

  std::vector<double> lhs, rhs;
  lhs.reserve(n);
  rhs.reserve(n);

  switch (id) {
    case TheoremId::T3: {
      require(traj.method.kind == MethodKind::NagSc, "T3 needs a NagSc run");
      require(std::abs(s - 0.25 / L) <= 1e-9 * s, "T3 requires s = 1/(4L)");
      const double rate = 1.0 + std::sqrt(mu / L) / 12.0;
      double denom = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        lhs.push_back(traj.f_values[k] - f_star);
        rhs.push_back(5.0 * L * D / denom);
        denom *= rate;
      }
      return ratio_report(id, lhs, rhs);
    }
    case TheoremId::T4: {
      require(traj.method.kind == MethodKind::HeavyBall,
              "T4 needs a HeavyBall run");
      require(std::abs(s - mu / (16.0 * L * L)) <= 1e-9 * s,
              "T4 requires s = mu/(16 L^2)");
      const double rate = 1.0 + mu / (16.0 * L);
      double denom = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        lhs.push_back(traj.f_values[k] - f_star);
        rhs.push_back(5.0 * L * D / denom);
        denom *= rate;
      }
      return ratio_report(id, lhs, rhs);
    }
    case TheoremId::T6_grad: {
      require(traj.method.kind == MethodKind::NagC, "T6 needs a NagC run");
      require(s <= 1.0 / (3.0 * L) * (1.0 + 1e-12), "T6 requires s <= 1/(3L)");
      double running_min = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) {
        running_min = std::min(running_min, traj.grad_norms[k] * traj.grad_norms[k]);
        const double kk = static_cast<double>(k) + 1.0;
        lhs.push_back(running_min);
        rhs.push_back(8568.0 * D / (s * s * kk * kk * kk));
      }
      return ratio_report(id, lhs, rhs);
    }
    case TheoremId::T6_fval: {
      require(traj.method.kind == MethodKind::NagC, "T6 needs a NagC run");
      require(s <= 1.0 / (3.0 * L) * (1.0 + 1e-12), "T6 requires s <= 1/(3L)");
      for (std::size_t k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k) + 1.0;
        lhs.push_back(traj.f_values[k] - f_star);
        rhs.push_back(119.0 * D / (s * kk * kk));
      }
      return ratio_report(id, lhs, rhs);
    }
    case TheoremId::T7_grad: {
      require(traj.method.kind == MethodKind::ModifiedNagC,
              "T7 needs a ModifiedNagC run");
      require(s <= 1.0 / L * (1.0 + 1e-12), "T7 requires s <= 1/L");
      double running_min = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) {
        const Vec sum = obj.gradient(traj.xs[k]) + obj.gradient(traj.ys[k]);
        running_min = std::min(running_min, sum.squaredNorm());
        const double kk = static_cast<double>(k) + 1.0;
        lhs.push_back(running_min);
        rhs.push_back(882.0 * D / (s * s * kk * kk * kk));
      }
      return ratio_report(id, lhs, rhs);
    }
    case TheoremId::T7_fval: {
      require(traj.method.kind == MethodKind::ModifiedNagC,
              "T7 needs a ModifiedNagC run");
      require(s <= 1.0 / L * (1.0 + 1e-12), "T7 requires s <= 1/L");
      for (std::size_t k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k) + 1.0;
        lhs.push_back(obj.value(traj.ys[k]) - f_star);
        rhs.push_back(21.0 * D / (s * kk * kk));
      }
      return ratio_report(id, lhs, rhs);
    }
    case TheoremId::T8_grad: {
      require(traj.method.kind == MethodKind::GeneralizedNagC,
              "T8 needs a GeneralizedNagC run");
      require(traj.method.beta_param > 0.5, "T8 requires beta > 1/2");
      require(s <= t8_max_step(traj.method.alpha_param, traj.method.beta_param,
                               L) *
                       (1.0 + 1e-12),
              "T8 requires s <= c_{alpha,beta}/L");
      const auto series = scaled_grad_norm_series(traj, s);
      const std::size_t N = series.size() - 1;
      const double late = window_max(series, N / 10, N);
      const double early = window_max(series, N / 100, N / 10);
      return trend_report(id, late, early, 1.2,
                          "scaled grad-norm series boundedness");
    }
    case TheoremId::T8_fval: {
      require(traj.method.kind == MethodKind::GeneralizedNagC,
              "T8 needs a GeneralizedNagC run");
      require(traj.method.beta_param > 0.5, "T8 requires beta > 1/2");
      const auto series = scaled_error_series(traj, s, f_star);
      const std::size_t N = series.size() - 1;
      const double late = window_max(series, N / 10, N);
      const double early = window_max(series, N / 100, N / 10);
      return trend_report(id, late, early, 1.2,
                          "scaled error series boundedness");
    }
    case TheoremId::P9_sum:
      return summability_check(traj, s, f_star);
    case TheoremId::T10_trend: {
      require(traj.method.kind == MethodKind::GeneralizedNagC,
              "T10 needs a GeneralizedNagC run");
      require(traj.method.alpha_param > 3.0, "T10 requires alpha > 3");
      require(traj.method.beta_param > 0.5, "T10 requires beta > 1/2");
      const auto series = scaled_error_series(traj, s, f_star);
      const std::size_t N = series.size() - 1;
      const double late = window_mean(series, N / 10, N);
      const double early = window_mean(series, N / 100, N / 10);
      return trend_report(id, late, early, 0.5,
                          "scaled error terminal-decade trend");
    }
    case TheoremId::T1:
    case TheoremId::T2:
    case TheoremId::T5:
      throw std::invalid_argument(
          "check_bound: " + theorem_id_name(id) + " applies to ODE trajectories");
  }
  throw std::logic_error("check_bound: unreachable");
}

BoundReport check_bound_ode(TheoremId id, const OdeTrajectory& ode,
                            const Objective& obj, double f_star,
                            const Vec& x_star) {
  const double s = ode.spec.step_s;
  const double L = obj.lipschitz_L;
  const double mu = ode.spec.mu;
  if (ode.size() == 0) throw std::invalid_argument("check_bound_ode: empty trajectory");
  const double D = (ode.xs[0] - x_star).squaredNorm();

  std::vector<double> lhs, rhs;
  switch (id) {
    case TheoremId::T1:
    case TheoremId::T2: {
      const bool t1 = id == TheoremId::T1;
      require(ode.spec.family ==
                  (t1 ? OdeFamily::NagScHigh : OdeFamily::HeavyBallHigh),
              std::string(t1 ? "T1" : "T2") + " needs the matching ODE family");
      require(s <= 1.0 / L * (1.0 + 1e-12), "T1/T2 require s <= 1/L");
      const double c = t1 ? 2.0 : 3.5;
      for (std::size_t i = 0; i < ode.size(); ++i) {
        lhs.push_back(obj.value(ode.xs[i]) - f_star);
        rhs.push_back(c * D / s *
                      std::exp(-std::sqrt(mu) * ode.ts[i] / 4.0));
      }
      return ratio_report(id, lhs, rhs);
    }
    case TheoremId::T5: {
      require(ode.spec.family == OdeFamily::NagCHigh,
              "T5 needs the NagC high-resolution ODE");
      const double t0 = ode.spec.t_start();
      double running_inf = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ode.size(); ++i) {
        const double t = ode.ts[i];
        running_inf =
            std::min(running_inf, obj.gradient(ode.xs[i]).squaredNorm());
        if (t <= t0 + 1e-12) continue;
        lhs.push_back(running_inf);
        rhs.push_back((12.0 + 9.0 * s * L) * D /
                      (2.0 * std::sqrt(s) * (t * t * t - t0 * t0 * t0)));
      }
      return ratio_report(id, lhs, rhs);
    }
    default:
      throw std::invalid_argument("check_bound_ode: " + theorem_id_name(id) +
                                  " applies to discrete trajectories");
  }
}

std::vector<double> scaled_grad_norm_series(const Trajectory& traj, double s) {
  std::vector<double> out;
  out.reserve(traj.size());
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    running_min = std::min(running_min, traj.grad_norms[k] * traj.grad_norms[k]);
    const double kk = static_cast<double>(k) + 1.0;
    out.push_back(s * s * kk * kk * kk * running_min);
  }
  return out;
}

std::vector<double> scaled_error_series(const Trajectory& traj, double s,
                                        double f_star) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double kk = static_cast<double>(k) + 1.0;
    out.push_back(s * kk * kk * (traj.f_values[k] - f_star));
  }
  return out;
}

BoundReport summability_check(const Trajectory& traj, double s, double f_star) {
  if (traj.method.kind != MethodKind::GeneralizedNagC)
    throw std::invalid_argument("summability_check: GeneralizedNagC run required");
  if (!(traj.method.alpha_param > 3.0))
    throw std::invalid_argument("summability_check: alpha > 3 required");
  if (!(traj.method.beta_param > 0.5))
    throw std::invalid_argument("summability_check: beta > 1/2 required");

  std::vector<double> partial;
  partial.reserve(traj.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double kk = static_cast<double>(k) + 1.0;
    sum += kk * (traj.f_values[k] - f_star) +
           s * kk * kk * traj.grad_norms[k] * traj.grad_norms[k];
    partial.push_back(sum);
  }
  const std::size_t N = partial.size() - 1;
  const double s_mid = partial[N / 10];
  const double s_end = partial[N];
  return trend_report(TheoremId::P9_sum, s_end - s_mid, s_mid, 0.05,
                      "partial-sum tail stagnation");
}

long t6_crossover_index(double L, double s) {
  // 8568 / (s^2 (k+1)^3) <= 2 L * 119 / (s (k+1)^2)  <=>  k+1 >= 36/(L s)
  return static_cast<long>(std::ceil(36.0 / (L * s))) - 1;
}

double t8_max_step(double alpha, double beta, double L) {
  if (!(beta > 0.5))
    throw std::invalid_argument("t8_max_step: beta > 1/2 required");
  if (!(alpha >= 3.0))
    throw std::invalid_argument("t8_max_step: alpha >= 3 required");
  const double b2 = beta * beta;
  if (alpha == 3.0) {
    if (beta >= 3.0) return (2.0 * beta - 1.0) / (2.0 * L * b2);
    double k0;
    if (beta < 1.0) {
      k0 = std::floor((4.0 - 3.0 * beta) / (2.0 * beta - 1.0)) + 1.0;
    } else {
      k0 = std::max({0.0, std::floor(beta - 3.0) + 1.0,
                     std::floor((4.0 - 3.0 * beta) / (2.0 * beta - 1.0)) + 1.0});
    }
    return ((2.0 * beta - 1.0) * k0 + 3.0 * beta - 4.0) / ((k0 + 1.0) * L * b2);
  }
  if (alpha < beta) return (2.0 * beta - 1.0) / (2.0 * L * b2);
  const double k0 = std::max(
      {0.0,
       std::floor((2.0 - (alpha - 2.0) * (alpha - beta + 1.0)) / (alpha - 3.0)) +
           1.0,
       std::floor(beta - alpha - 1.0) + 1.0,
       std::floor((1.0 + alpha - 3.0 * beta) / (2.0 * beta - 1.0)) + 1.0});
  return ((2.0 * beta - 1.0) * k0 - alpha + 3.0 * beta - 1.0) /
         (L * b2 * (k0 + 1.0));
}

}  // namespace odelab
