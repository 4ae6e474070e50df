#include "odelab/optimizers.hpp"

#include <cmath>
#include <stdexcept>

namespace odelab {

namespace {

bool finite(const Vec& x) { return x.allFinite(); }

struct ScCoeffs {
  double sqrt_mu_s;  // sqrt(mu * s)
  double momentum;   // (1 - sqrt(mu s)) / (1 + sqrt(mu s))
};

ScCoeffs sc_coeffs(const MethodSpec& spec) {
  const double r = std::sqrt(spec.mu * spec.step_s);
  return {r, (1.0 - r) / (1.0 + r)};
}

void require_strongly_convex_method(const MethodSpec& spec, const char* who) {
  if (spec.kind != MethodKind::HeavyBall && spec.kind != MethodKind::NagSc)
    throw std::invalid_argument(std::string(who) +
                                ": HeavyBall or NagSc required");
}

}  // namespace

std::string method_kind_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::GradientDescent: return "gradient_descent";
    case MethodKind::HeavyBall: return "heavy_ball";
    case MethodKind::NagSc: return "nag_sc";
    case MethodKind::NagC: return "nag_c";
    case MethodKind::GeneralizedNagC: return "generalized_nag_c";
    case MethodKind::ModifiedNagC: return "modified_nag_c";
  }
  return "unknown";
}

void MethodSpec::validate() const {
  if (!(step_s > 0.0))
    throw std::invalid_argument("MethodSpec: step_s > 0 required");
  if (kind == MethodKind::HeavyBall || kind == MethodKind::NagSc) {
    if (!(mu > 0.0))
      throw std::invalid_argument("MethodSpec: mu > 0 required for " +
                                  method_kind_name(kind));
    if (!(mu * step_s < 1.0))
      throw std::invalid_argument("MethodSpec: mu * step_s < 1 required");
  }
  if (kind == MethodKind::GeneralizedNagC) {
    if (!(alpha_param >= 3.0))
      throw std::invalid_argument("MethodSpec: alpha_param >= 3 required");
    if (!(beta_param > 0.0))
      throw std::invalid_argument("MethodSpec: beta_param > 0 required");
  }
  if (mu < 0.0) throw std::invalid_argument("MethodSpec: mu >= 0 required");
}

Vec init_two_point(const MethodSpec& spec, const Objective& obj,
                   const Vec& x0) {
  require_strongly_convex_method(spec, "init_two_point");
  spec.validate();
  const auto c = sc_coeffs(spec);
  return x0 - (2.0 * spec.step_s / (1.0 + c.sqrt_mu_s)) * obj.gradient(x0);
}

PhaseState initial_phase_state(const MethodSpec& spec, const Objective& obj,
                               const Vec& x0) {
  spec.validate();
  const double sqrt_s = std::sqrt(spec.step_s);
  PhaseState st;
  st.k = 0;
  st.x = x0;
  switch (spec.kind) {
    case MethodKind::HeavyBall:
    case MethodKind::NagSc: {
      const auto c = sc_coeffs(spec);
      st.v = -(2.0 * sqrt_s / (1.0 + c.sqrt_mu_s)) * obj.gradient(x0);
      break;
    }
    case MethodKind::NagC:
    case MethodKind::GeneralizedNagC:
      st.v = -sqrt_s * obj.gradient(x0);
      break;
    default:
      throw std::invalid_argument(
          "initial_phase_state: no phase-space form for " +
          method_kind_name(spec.kind));
  }
  return st;
}

PhaseState step_phase_space(const MethodSpec& spec, const Objective& obj,
                            const PhaseState& state) {
  const double sqrt_s = std::sqrt(spec.step_s);
  PhaseState next;
  next.k = state.k + 1;
  next.x = state.x + sqrt_s * state.v;

  // v_{k+1} - v_k = -c2 v_{k+1} - bt sqrt(s) (g_{k+1} - g_k) - c1 sqrt(s) g_{k+1}
  double c1 = 0.0, c2 = 0.0, bt = 0.0;
  switch (spec.kind) {
    case MethodKind::HeavyBall: {
      const auto c = sc_coeffs(spec);
      c2 = 2.0 * c.sqrt_mu_s / (1.0 - c.sqrt_mu_s);
      c1 = (1.0 + c.sqrt_mu_s) / (1.0 - c.sqrt_mu_s);
      bt = 0.0;
      break;
    }
    case MethodKind::NagSc: {
      const auto c = sc_coeffs(spec);
      c2 = 2.0 * c.sqrt_mu_s / (1.0 - c.sqrt_mu_s);
      c1 = (1.0 + c.sqrt_mu_s) / (1.0 - c.sqrt_mu_s);
      bt = 1.0;
      break;
    }
    case MethodKind::NagC: {
      const double kk = static_cast<double>(next.k);
      c2 = 3.0 / kk;
      c1 = 1.0 + 3.0 / kk;
      bt = 1.0;
      break;
    }
    case MethodKind::GeneralizedNagC: {
      const double kk = static_cast<double>(next.k);
      c2 = spec.alpha_param / kk;
      c1 = 1.0 + spec.alpha_param / kk;
      bt = spec.beta_param;
      break;
    }
    default:
      throw std::invalid_argument("step_phase_space: no phase-space form for " +
                                  method_kind_name(spec.kind));
  }

  const Vec g_old = obj.gradient(state.x);
  const Vec g_new = obj.gradient(next.x);
  next.v = (state.v - bt * sqrt_s * (g_new - g_old) - c1 * sqrt_s * g_new) /
           (1.0 + c2);
  return next;
}

Vec gradient_descent_step(const Objective& obj, double s, const Vec& x) {
  return x - s * obj.gradient(x);
}

Vec heavy_ball_step(const MethodSpec& spec, const Objective& obj,
                    const Vec& x_k, const Vec& x_prev) {
  const auto c = sc_coeffs(spec);
  return x_k + c.momentum * (x_k - x_prev) - spec.step_s * obj.gradient(x_k);
}

Vec nag_sc_single_variable_step(const MethodSpec& spec, const Objective& obj,
                                const Vec& x_k, const Vec& x_prev) {
  const auto c = sc_coeffs(spec);
  const Vec g_k = obj.gradient(x_k);
  const Vec g_prev = obj.gradient(x_prev);
  return x_k + c.momentum * (x_k - x_prev) - spec.step_s * g_k -
         c.momentum * spec.step_s * (g_k - g_prev);
}

TwoSeqState nag_sc_two_sequence_step(const MethodSpec& spec,
                                     const Objective& obj,
                                     const TwoSeqState& state) {
  const auto c = sc_coeffs(spec);
  TwoSeqState next;
  next.y = state.x - spec.step_s * obj.gradient(state.x);
  next.x = next.y + c.momentum * (next.y - state.y);
  return next;
}

TwoSeqState nag_c_step(const MethodSpec& spec, const Objective& obj, long k,
                       const TwoSeqState& state) {
  TwoSeqState next;
  next.y = state.x - spec.step_s * obj.gradient(state.x);
  const double coeff = static_cast<double>(k) / static_cast<double>(k + 3);
  next.x = next.y + coeff * (next.y - state.y);
  return next;
}

TwoSeqState generalized_nag_c_step(const MethodSpec& spec, const Objective& obj,
                                   long k, const TwoSeqState& state) {
  const Vec g = obj.gradient(state.x);
  TwoSeqState next;
  next.y = state.x - spec.beta_param * spec.step_s * g;
  const double coeff =
      static_cast<double>(k) / (static_cast<double>(k) + spec.alpha_param);
  next.x = state.x - spec.step_s * g + coeff * (next.y - state.y);
  return next;
}

ModifiedState modified_nag_c_step(const MethodSpec& spec, const Objective& obj,
                                  long k, const ModifiedState& state) {
  const double s = spec.step_s;
  ModifiedState next;
  next.y = state.x - s * obj.gradient(state.x);
  next.grad_y = obj.gradient(next.y);
  const double kk = static_cast<double>(k);
  next.x = next.y + (kk / (kk + 3.0)) * (next.y - state.y) -
           s * ((kk / (kk + 3.0)) * next.grad_y -
                ((kk - 1.0) / (kk + 3.0)) * state.grad_y);
  return next;
}

Vec gradient_correction(const Objective& obj, const Vec& x_k, const Vec& x_prev,
                        double s, double coeff) {
  return coeff * s * (obj.gradient(x_k) - obj.gradient(x_prev));
}

Trajectory run(const MethodSpec& spec, const Objective& obj, const Vec& x0,
               long num_steps) {
  spec.validate();
  if (num_steps < 0) throw std::invalid_argument("run: num_steps >= 0 required");
  if (x0.size() != obj.dim)
    throw std::invalid_argument("run: x0 dimension mismatch");

  const double sqrt_s = std::sqrt(spec.step_s);
  Trajectory traj;
  traj.method = spec;
  traj.objective_id = obj.id;
  traj.xs.reserve(static_cast<std::size_t>(num_steps) + 1);

  const bool two_seq = spec.kind == MethodKind::NagSc ||
                       spec.kind == MethodKind::NagC ||
                       spec.kind == MethodKind::GeneralizedNagC ||
                       spec.kind == MethodKind::ModifiedNagC;

  // Iterate the published form to x_{N+1}; the extra point defines v_N.
  std::vector<Vec> xs;
  std::vector<Vec> ys;
  xs.push_back(x0);
  if (two_seq) ys.push_back(x0);

  switch (spec.kind) {
    case MethodKind::GradientDescent: {
      for (long k = 0; k <= num_steps; ++k) {
        Vec x = gradient_descent_step(obj, spec.step_s, xs.back());
        if (!finite(x)) { traj.diverged = true; break; }
        xs.push_back(std::move(x));
      }
      break;
    }
    case MethodKind::HeavyBall: {
      Vec x1 = init_two_point(spec, obj, x0);
      if (finite(x1)) {
        xs.push_back(x1);
        for (long k = 1; k <= num_steps; ++k) {
          Vec x = heavy_ball_step(spec, obj, xs[xs.size() - 1], xs[xs.size() - 2]);
          if (!finite(x)) { traj.diverged = true; break; }
          xs.push_back(std::move(x));
        }
      } else {
        traj.diverged = true;
      }
      break;
    }
    case MethodKind::NagSc: {
      TwoSeqState st{x0, x0};
      for (long k = 0; k <= num_steps; ++k) {
        st = nag_sc_two_sequence_step(spec, obj, st);
        if (!finite(st.x) || !finite(st.y)) { traj.diverged = true; break; }
        xs.push_back(st.x);
        ys.push_back(st.y);
      }
      break;
    }
    case MethodKind::NagC: {
      TwoSeqState st{x0, x0};
      for (long k = 0; k <= num_steps; ++k) {
        st = nag_c_step(spec, obj, k, st);
        if (!finite(st.x) || !finite(st.y)) { traj.diverged = true; break; }
        xs.push_back(st.x);
        ys.push_back(st.y);
      }
      break;
    }
    case MethodKind::GeneralizedNagC: {
      TwoSeqState st{x0, x0};
      for (long k = 0; k <= num_steps; ++k) {
        st = generalized_nag_c_step(spec, obj, k, st);
        if (!finite(st.x) || !finite(st.y)) { traj.diverged = true; break; }
        xs.push_back(st.x);
        ys.push_back(st.y);
      }
      break;
    }
    case MethodKind::ModifiedNagC: {
      ModifiedState st{x0, x0, obj.gradient(x0)};
      for (long k = 0; k <= num_steps; ++k) {
        st = modified_nag_c_step(spec, obj, k, st);
        if (!finite(st.x) || !finite(st.y)) { traj.diverged = true; break; }
        xs.push_back(st.x);
        ys.push_back(st.y);
      }
      break;
    }
  }

  // Keep x_0..x_N (the extra iterate only feeds the last velocity).
  const std::size_t n_states =
      std::min(xs.size() - (traj.diverged ? 0 : 1),
               static_cast<std::size_t>(num_steps) + 1);
  for (std::size_t k = 0; k < n_states; ++k) {
    traj.xs.push_back(xs[k]);
    if (k + 1 < xs.size())
      traj.vs.push_back((xs[k + 1] - xs[k]) / sqrt_s);
    else if (k > 0)  // truncated tail: backward difference
      traj.vs.push_back((xs[k] - xs[k - 1]) / sqrt_s);
    else
      traj.vs.push_back(Vec::Zero(obj.dim));
    if (two_seq) traj.ys.push_back(ys[k]);
    traj.f_values.push_back(obj.value(xs[k]));
    traj.grad_norms.push_back(obj.gradient(xs[k]).norm());
  }
  return traj;
}

}  // namespace odelab
