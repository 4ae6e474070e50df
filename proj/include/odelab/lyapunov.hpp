#pragma once

#include <vector>

#include "odelab/objectives.hpp"
#include "odelab/odes.hpp"
#include "odelab/optimizers.hpp"

namespace odelab {

enum class LyapunovVariant {
  // continuous
  ContNagSc,
  ContHeavyBall,
  ContNagC,
  ContGenAlpha3,
  ContGenAlphaGt3,
  ContNuFamily,
  // discrete
  DiscNagSc,
  DiscHeavyBall,
  DiscNagC,
  DiscGenAlpha3BetaLt1,
  DiscGenAlpha3BetaGe1,
  DiscGenAlphaGt3,
  DiscNuFamily,
  DiscModifiedNagC
};

std::string lyapunov_variant_name(LyapunovVariant v);

struct LyapunovSpec {
  LyapunovVariant variant;
  double s = 0.0;
  double mu = 0.0;
  double alpha = 3.0;
  double beta = 1.0;
  double nu = 2.0;

  void validate() const;
};

struct LyapunovLog {
  std::vector<double> k_or_t;
  std::vector<double> values;           // E at each index/time
  std::vector<double> required_margin;  // the lemma's RHS decrement
  std::vector<long> violations;         // indices where decay fails beyond slack
};

// Energy functional value at a continuous phase-space state.
double eval_continuous(const LyapunovSpec& spec, const Objective& obj,
                       const OdeState& state);

// Energy functional value at a discrete phase-space state; x_next = x_{k+1}.
double eval_discrete(const LyapunovSpec& spec, const Objective& obj,
                     const PhaseState& state, const Vec& x_next);

// The modified scheme's functional takes (x_k, y_k); w_k is formed internally.
double eval_discrete_modified(const LyapunovSpec& spec, const Objective& obj,
                              long k, const Vec& x_k, const Vec& y_k);

// Per-step decay checks of the matching lemma along a discrete trajectory.
// Additive slack 1e-9 * (1 + |E(k)|). Throws when the step size violates the
// lemma's hypothesis or the variant does not match the trajectory's method.
LyapunovLog check_decay_discrete(const LyapunovSpec& spec,
                                 const Trajectory& traj, const Objective& obj);

// Decay checks along RK4 samples in integrated form:
// E(t+d) - E(t) <= d * RHS + slack, with a curvature term absorbing the
// sampling error of time-varying right-hand sides.
LyapunovLog check_decay_continuous(const LyapunovSpec& spec,
                                   const OdeTrajectory& ode,
                                   const Objective& obj);

// Index below which the generalized-family decay estimates are not claimed.
long decay_start_index(const LyapunovSpec& spec, double L);

}  // namespace odelab
