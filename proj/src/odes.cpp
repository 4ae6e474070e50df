#include "odelab/odes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odelab {

namespace {

struct FieldCoeffs {
  double friction;
  double hess_coeff;  // sqrt(s) * beta-tilde
  double grad_coeff;
};

FieldCoeffs field_coeffs(const OdeSpec& spec, double t) {
  const double sqrt_s = std::sqrt(spec.step_s);
  switch (spec.family) {
    case OdeFamily::HeavyBallHigh:
      return {2.0 * std::sqrt(spec.mu), 0.0,
              1.0 + std::sqrt(spec.mu * spec.step_s)};
    case OdeFamily::NagScHigh:
      return {2.0 * std::sqrt(spec.mu), sqrt_s,
              1.0 + std::sqrt(spec.mu * spec.step_s)};
    case OdeFamily::NagCHigh:
      return {3.0 / t, sqrt_s, 1.0 + 1.5 * sqrt_s / t};
    case OdeFamily::GeneralizedHigh:
      return {spec.alpha_param / t, spec.beta_param * sqrt_s,
              1.0 + 0.5 * spec.alpha_param * sqrt_s / t};
    case OdeFamily::StronglyConvexLow:
      return {2.0 * std::sqrt(spec.mu), 0.0, 1.0};
    case OdeFamily::NagCLow:
      return {3.0 / t, 0.0, 1.0};
  }
  throw std::logic_error("field_coeffs: unreachable");
}

bool time_dependent_friction(OdeFamily family) {
  return family == OdeFamily::NagCHigh || family == OdeFamily::GeneralizedHigh ||
         family == OdeFamily::NagCLow;
}

bool finite(const Vec& x) { return x.allFinite(); }

// Field evaluation used by the integrator. At the exact initial time of a
// low-resolution 1/t family (t = 0, v = 0) the friction term has the
// removable limit (friction * v) -> alpha/(1+alpha) * (-grad f), which gives
// dv = -grad f(x) / (1 + alpha).
void eval_field(const OdeSpec& spec, const Objective& obj, double t,
                const Vec& x, const Vec& v, Vec& dx, Vec& dv) {
  if (time_dependent_friction(spec.family) && t <= 0.0) {
    if (spec.family == OdeFamily::NagCLow && t == 0.0) {
      dx = v;
      dv = -obj.gradient(x) / 4.0;
      return;
    }
    throw std::invalid_argument("vector_field: t > 0 required for 1/t friction");
  }
  const auto c = field_coeffs(spec, t);
  dx = v;
  dv = -c.friction * v - c.grad_coeff * obj.gradient(x);
  if (c.hess_coeff != 0.0) dv -= c.hess_coeff * obj.hvp(x, v);
}

}  // namespace

std::string ode_family_name(OdeFamily family) {
  switch (family) {
    case OdeFamily::HeavyBallHigh: return "heavy_ball_high";
    case OdeFamily::NagScHigh: return "nag_sc_high";
    case OdeFamily::NagCHigh: return "nag_c_high";
    case OdeFamily::GeneralizedHigh: return "generalized_high";
    case OdeFamily::StronglyConvexLow: return "strongly_convex_low";
    case OdeFamily::NagCLow: return "nag_c_low";
  }
  return "unknown";
}

double OdeSpec::t_start() const {
  switch (family) {
    case OdeFamily::HeavyBallHigh:
    case OdeFamily::NagScHigh:
    case OdeFamily::StronglyConvexLow:
      return 0.0;
    case OdeFamily::NagCHigh:
    case OdeFamily::NagCLow:
      return 1.5 * std::sqrt(step_s);
    case OdeFamily::GeneralizedHigh:
      return 0.5 * alpha_param * std::sqrt(step_s);
  }
  return 0.0;
}

void OdeSpec::validate() const {
  if (step_s < 0.0) throw std::invalid_argument("OdeSpec: step_s >= 0 required");
  if (mu < 0.0) throw std::invalid_argument("OdeSpec: mu >= 0 required");
  const bool strongly_convex = family == OdeFamily::HeavyBallHigh ||
                               family == OdeFamily::NagScHigh ||
                               family == OdeFamily::StronglyConvexLow;
  if (strongly_convex && !(mu * step_s < 1.0))
    throw std::invalid_argument("OdeSpec: mu * step_s < 1 required");
  if (family == OdeFamily::GeneralizedHigh) {
    if (!(alpha_param >= 3.0))
      throw std::invalid_argument("OdeSpec: alpha_param >= 3 required");
    if (!(beta_param > 0.0))
      throw std::invalid_argument("OdeSpec: beta_param > 0 required");
  }
}

void vector_field(const OdeSpec& spec, const Objective& obj,
                  const OdeState& state, Vec& dx, Vec& dv) {
  if (time_dependent_friction(spec.family) && state.t <= 0.0)
    throw std::invalid_argument("vector_field: t > 0 required for 1/t friction");
  eval_field(spec, obj, state.t, state.x, state.v, dx, dv);
}

OdeState initial_state(const OdeSpec& spec, const Objective& obj,
                       const Vec& x0) {
  spec.validate();
  const double sqrt_s = std::sqrt(spec.step_s);
  OdeState st;
  st.t = spec.t_start();
  st.x = x0;
  switch (spec.family) {
    case OdeFamily::HeavyBallHigh:
    case OdeFamily::NagScHigh:
    case OdeFamily::StronglyConvexLow:
      st.v = -(2.0 * sqrt_s / (1.0 + std::sqrt(spec.mu * spec.step_s))) *
             obj.gradient(x0);
      break;
    case OdeFamily::NagCHigh:
    case OdeFamily::GeneralizedHigh:
      st.v = -sqrt_s * obj.gradient(x0);
      break;
    case OdeFamily::NagCLow:
      st.v = Vec::Zero(obj.dim);
      break;
  }
  return st;
}

OdeTrajectory integrate_rk4(const OdeSpec& spec, const Objective& obj,
                            const OdeState& init, double t_end, double h,
                            const std::vector<double>& sample_times) {
  spec.validate();
  if (!(h > 0.0)) throw std::invalid_argument("integrate_rk4: h > 0 required");
  if (h > t_end - init.t + 1e-15)
    throw std::invalid_argument("integrate_rk4: h <= t_end - t0 required");
  for (double ts : sample_times)
    if (ts < init.t - 1e-12 || ts > t_end + 1e-12)
      throw std::invalid_argument("integrate_rk4: sample time out of range");

  OdeTrajectory traj;
  traj.spec = spec;
  const bool record_nodes = sample_times.empty();

  Vec k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
  Vec xt, vt;

  double t = init.t;
  Vec x = init.x;
  Vec v = init.v;
  std::size_t next_sample = 0;

  auto record = [&](double tr, const Vec& xr, const Vec& vr) {
    traj.ts.push_back(tr);
    traj.xs.push_back(xr);
    traj.vs.push_back(vr);
  };

  if (record_nodes) record(t, x, v);

  const long n_steps = static_cast<long>(std::ceil((t_end - init.t) / h - 1e-9));
  for (long i = 0; i < n_steps; ++i) {
    const double step = std::min(h, t_end - t);
    eval_field(spec, obj, t, x, v, k1x, k1v);
    xt = x + 0.5 * step * k1x;
    vt = v + 0.5 * step * k1v;
    eval_field(spec, obj, t + 0.5 * step, xt, vt, k2x, k2v);
    xt = x + 0.5 * step * k2x;
    vt = v + 0.5 * step * k2v;
    eval_field(spec, obj, t + 0.5 * step, xt, vt, k3x, k3v);
    xt = x + step * k3x;
    vt = v + step * k3v;
    eval_field(spec, obj, t + step, xt, vt, k4x, k4v);

    Vec x_new = x + (step / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    Vec v_new = v + (step / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    const double t_new = (i + 1 == n_steps) ? t_end : init.t + (i + 1) * h;

    if (!finite(x_new) || !finite(v_new)) {
      traj.diverged = true;
      break;
    }

    // Emit requested samples inside (t, t_new] via cubic Hermite using the
    // endpoint derivatives (k1 of this step and of the next).
    if (!record_nodes) {
      while (next_sample < sample_times.size() &&
             sample_times[next_sample] <= t_new + 1e-12) {
        const double ts = sample_times[next_sample];
        if (ts < t - 1e-12) {  // sample before the very first node
          ++next_sample;
          continue;
        }
        if (std::abs(ts - t_new) <= 1e-12) {
          record(t_new, x_new, v_new);
        } else if (std::abs(ts - t) <= 1e-12) {
          record(t, x, v);
        } else {
          const double dt = t_new - t;
          const double u = (ts - t) / dt;
          Vec dxe, dve;
          eval_field(spec, obj, t_new, x_new, v_new, dxe, dve);
          const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
          const double h10 = u * (1 - u) * (1 - u);
          const double h01 = u * u * (3 - 2 * u);
          const double h11 = u * u * (u - 1);
          Vec xi = h00 * x + h10 * dt * v + h01 * x_new + h11 * dt * v_new;
          Vec vi = h00 * v + h10 * dt * k1v + h01 * v_new + h11 * dt * dve;
          record(ts, xi, vi);
        }
        ++next_sample;
      }
    }

    t = t_new;
    x.swap(x_new);
    v.swap(v_new);
    if (record_nodes) record(t, x, v);
  }
  return traj;
}

std::vector<Vec> integrate_forward_euler_secondorder(
    const OdeSpec& spec, const Objective& obj,
    const std::pair<Vec, Vec>& x_init_pair, long num_steps, bool* diverged) {
  if (spec.family != OdeFamily::HeavyBallHigh &&
      spec.family != OdeFamily::NagScHigh)
    throw std::invalid_argument(
        "integrate_forward_euler_secondorder: HeavyBallHigh or NagScHigh only");
  spec.validate();
  if (diverged) *diverged = false;

  const double s = spec.step_s;
  const double sqrt_mu_s = std::sqrt(spec.mu * s);
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(num_steps) + 2);
  out.push_back(x_init_pair.first);
  out.push_back(x_init_pair.second);

  for (long k = 0; k < num_steps; ++k) {
    const Vec& x_cur = out[out.size() - 1];   // X(t)
    const Vec& x_prev = out[out.size() - 2];  // X(t - sqrt(s))
    Vec x_next = 2.0 * x_cur - x_prev - 2.0 * sqrt_mu_s * (x_cur - x_prev) -
                 s * (1.0 + sqrt_mu_s) * obj.gradient(x_prev);
    if (spec.family == OdeFamily::NagScHigh)
      x_next -= s * obj.hvp(x_prev, x_cur - x_prev);
    if (!finite(x_next)) {
      if (diverged) *diverged = true;
      break;
    }
    out.push_back(std::move(x_next));
  }
  return out;
}

std::vector<PhaseState> integrate_symplectic_nag_sc(const Objective& obj,
                                                    const Vec& x0, double mu,
                                                    double s, long num_steps) {
  if (!(mu > 0.0))
    throw std::invalid_argument("integrate_symplectic_nag_sc: mu > 0 required");
  const double sqrt_s = std::sqrt(s);
  const double sqrt_mu_s = std::sqrt(mu * s);

  std::vector<PhaseState> out;
  out.reserve(static_cast<std::size_t>(num_steps) + 1);
  PhaseState st;
  st.k = 0;
  st.x = x0;
  st.v = -(2.0 * sqrt_s / (1.0 + sqrt_mu_s)) * obj.gradient(x0);
  out.push_back(st);

  for (long k = 1; k <= num_steps; ++k) {
    PhaseState next;
    next.k = k;
    next.x = st.x + sqrt_s * st.v;
    const Vec rhs = st.v - (1.0 + sqrt_mu_s) * sqrt_s * obj.gradient(next.x);
    const double diag = 1.0 + 2.0 * sqrt_mu_s;
    if (obj.hessian_const) {
      Mat M = s * (*obj.hessian_const);
      M.diagonal().array() += diag;
      next.v = M.ldlt().solve(rhs);
    } else {
      const Vec xk = next.x;
      auto apply = [&](const Vec& u) -> Vec {
        return diag * u + s * obj.hvp(xk, u);
      };
      auto cg = linalg::conjugate_gradient(apply, rhs, 1e-12, 10 * obj.dim);
      if (!cg.converged)
        throw std::runtime_error(
            "integrate_symplectic_nag_sc: CG did not converge");
      next.v = cg.x;
    }
    if (!finite(next.x) || !finite(next.v)) break;
    out.push_back(next);
    st = out.back();
  }
  return out;
}

std::string quad_class_name(QuadClass c) {
  switch (c) {
    case QuadClass::Oscillatory: return "oscillatory";
    case QuadClass::Critical: return "critical";
    case QuadClass::Overdamped: return "overdamped";
  }
  return "unknown";
}

ClosedFormResult closed_form_quadratic(OdeFamily family, double theta,
                                       double mu, double s, double t) {
  if (family != OdeFamily::HeavyBallHigh && family != OdeFamily::NagScHigh &&
      family != OdeFamily::StronglyConvexLow)
    throw std::invalid_argument("closed_form_quadratic: unsupported family");
  if (!(theta > 0.0))
    throw std::invalid_argument("closed_form_quadratic: theta > 0 required");
  if (mu > theta)
    throw std::invalid_argument("closed_form_quadratic: mu <= theta required");

  // X'' + 2a X' + w2 X = 0 with the family's damping a and stiffness w2.
  const double sqrt_s = std::sqrt(s);
  const double sqrt_mu_s = std::sqrt(mu * s);
  double a = 0.0, w2 = 0.0, v0 = 0.0;
  const double x0 = 1.0;
  switch (family) {
    case OdeFamily::StronglyConvexLow:
      a = std::sqrt(mu);
      w2 = theta;
      v0 = 0.0;
      break;
    case OdeFamily::HeavyBallHigh:
      a = std::sqrt(mu);
      w2 = (1.0 + sqrt_mu_s) * theta;
      v0 = -(2.0 * sqrt_s / (1.0 + sqrt_mu_s)) * theta * x0;
      break;
    case OdeFamily::NagScHigh:
      a = std::sqrt(mu) + 0.5 * sqrt_s * theta;
      w2 = (1.0 + sqrt_mu_s) * theta;
      v0 = -(2.0 * sqrt_s / (1.0 + sqrt_mu_s)) * theta * x0;
      break;
    default:
      break;
  }

  const double disc = a * a - w2;  // sign decides the regime
  const double disc_tol = 1e-14 * std::max({1.0, a * a, std::abs(w2)});

  ClosedFormResult res;
  if (std::abs(disc) <= disc_tol) {
    res.classification = QuadClass::Critical;
    const double c1 = x0;
    const double c2 = v0 + a * x0;
    res.x = (c1 + c2 * t) * std::exp(-a * t);
  } else if (disc < 0.0) {
    res.classification = QuadClass::Oscillatory;
    const double w = std::sqrt(-disc);
    const double c1 = x0;
    const double c2 = (v0 + a * x0) / w;
    res.x = std::exp(-a * t) * (c1 * std::cos(w * t) + c2 * std::sin(w * t));
  } else {
    res.classification = QuadClass::Overdamped;
    const double root = std::sqrt(disc);
    const double r1 = a + root;
    const double r2 = a - root;
    const double c1 = (-v0 - r2 * x0) / (r1 - r2);
    const double c2 = x0 - c1;
    res.x = c1 * std::exp(-r1 * t) + c2 * std::exp(-r2 * t);
  }
  return res;
}

double discrete_ode_deviation(const Trajectory& traj, const OdeSpec& spec,
                              const Objective& obj, double T) {
  spec.validate();
  const double s = traj.method.step_s;
  const double sqrt_s = std::sqrt(s);
  const bool offset_family =
      spec.family == OdeFamily::NagCHigh || spec.family == OdeFamily::GeneralizedHigh;
  const double offset = offset_family ? spec.t_start() : 0.0;

  const long k_max = std::min<long>(static_cast<long>(std::floor(T / sqrt_s)),
                                    static_cast<long>(traj.size()) - 1);
  if (k_max < 0) return 0.0;

  std::vector<double> sample_times;
  sample_times.reserve(static_cast<std::size_t>(k_max) + 1);
  for (long k = 0; k <= k_max; ++k) sample_times.push_back(offset + k * sqrt_s);

  const OdeState init = initial_state(spec, obj, traj.xs[0]);
  if (sample_times.back() <= init.t + 1e-15)
    return (traj.xs[0] - init.x).norm();
  const double t_end = sample_times.back() + 1e-12;
  const double h = std::min(sqrt_s / 20.0, t_end - init.t);
  const auto ode = integrate_rk4(spec, obj, init, t_end, h, sample_times);
  if (ode.size() != sample_times.size())
    throw std::runtime_error("discrete_ode_deviation: sampling failed");

  double dev = 0.0;
  for (long k = 0; k <= k_max; ++k)
    dev = std::max(dev, (traj.xs[static_cast<std::size_t>(k)] -
                         ode.xs[static_cast<std::size_t>(k)])
                            .norm());
  return dev;
}

}  // namespace odelab
