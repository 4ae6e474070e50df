#pragma once

#include <utility>
#include <vector>

#include "odelab/objectives.hpp"
#include "odelab/optimizers.hpp"

namespace odelab {

enum class OdeFamily {
  HeavyBallHigh,
  NagScHigh,
  NagCHigh,
  GeneralizedHigh,
  StronglyConvexLow,
  NagCLow
};

std::string ode_family_name(OdeFamily family);

struct OdeSpec {
  OdeFamily family = OdeFamily::NagScHigh;
  double step_s = 0.0;  // the sqrt(s)-coefficient parameter; 0 = low-resolution
  double mu = 0.0;
  double alpha_param = 3.0;  // GeneralizedHigh
  double beta_param = 1.0;   // GeneralizedHigh

  double t_start() const;
  void validate() const;
};

struct OdeState {
  double t = 0.0;
  Vec x;
  Vec v;  // dX/dt
};

struct OdeTrajectory {
  OdeSpec spec;
  std::vector<double> ts;
  std::vector<Vec> xs;
  std::vector<Vec> vs;
  bool diverged = false;

  std::size_t size() const { return ts.size(); }
};

// Phase-space field: dx = v, dv = -friction(t) v - sqrt(s) beta hvp(x, v)
//                                 - coeff(t) grad f(x).
// Rejects t <= 0 for the 1/t-friction families.
void vector_field(const OdeSpec& spec, const Objective& obj,
                  const OdeState& state, Vec& dx, Vec& dv);

OdeState initial_state(const OdeSpec& spec, const Objective& obj,
                       const Vec& x0);

// Classical RK4 with fixed step h; dense output by cubic Hermite
// interpolation at sample_times. Empty sample_times records every node.
OdeTrajectory integrate_rk4(const OdeSpec& spec, const Objective& obj,
                            const OdeState& init, double t_end, double h,
                            const std::vector<double>& sample_times = {});

// Forward Euler in second-order form on the grid t_k = k sqrt(s)
// (HeavyBallHigh / NagScHigh only). Returns X_0 .. X_{num_steps+1}; a
// non-finite iterate truncates and sets *diverged.
std::vector<Vec> integrate_forward_euler_secondorder(
    const OdeSpec& spec, const Objective& obj,
    const std::pair<Vec, Vec>& x_init_pair, long num_steps,
    bool* diverged = nullptr);

// Symplectic scheme for the NagSc high-resolution dynamics:
//   x_k - x_{k-1} = sqrt(s) v_{k-1}
//   v_k + 2 sqrt(mu s) v_k + s hvp(x_k, v_k) = v_{k-1} - (1+sqrt(mu s)) sqrt(s) grad f(x_k)
// The v-solve is dense when the Hessian matrix is available, matrix-free CG
// otherwise (tolerance 1e-12, at most 10*dim iterations).
std::vector<PhaseState> integrate_symplectic_nag_sc(const Objective& obj,
                                                    const Vec& x0, double mu,
                                                    double s, long num_steps);

enum class QuadClass { Oscillatory, Critical, Overdamped };

std::string quad_class_name(QuadClass c);

struct ClosedFormResult {
  double x = 0.0;
  QuadClass classification = QuadClass::Oscillatory;
};

// Closed-form solution of the scalar dynamics on f(x) = theta x^2 / 2 with
// X(0) = 1 and the family's initial velocity. Families: HeavyBallHigh,
// NagScHigh, StronglyConvexLow. Requires mu <= theta.
ClosedFormResult closed_form_quadratic(OdeFamily family, double theta,
                                       double mu, double s, double t);

// max over 0 <= k <= T/sqrt(s) of |x_k - X(t_k)| with t_k = k sqrt(s)
// (strongly convex families) or k sqrt(s) + 1.5 sqrt(s) (NagC), X from RK4
// at h = sqrt(s)/20.
double discrete_ode_deviation(const Trajectory& traj, const OdeSpec& spec,
                              const Objective& obj, double T);

}  // namespace odelab
