#pragma once

#include <string>
#include <vector>

#include "odelab/objectives.hpp"

namespace odelab {

enum class MethodKind {
  GradientDescent,
  HeavyBall,
  NagSc,
  NagC,
  GeneralizedNagC,
  ModifiedNagC
};

std::string method_kind_name(MethodKind kind);

struct MethodSpec {
  MethodKind kind = MethodKind::GradientDescent;
  double step_s = 0.0;
  double mu = 0.0;          // required > 0 for HeavyBall / NagSc
  double alpha_param = 3.0; // GeneralizedNagC
  double beta_param = 1.0;  // GeneralizedNagC

  // Throws std::invalid_argument on violated preconditions
  // (mu*s < 1 for the strongly convex methods, alpha >= 3, beta > 0, s > 0).
  void validate() const;
};

struct PhaseState {
  long k = 0;
  Vec x;
  Vec v;  // v_k = (x_{k+1} - x_k) / sqrt(s)
};

struct Trajectory {
  MethodSpec method;
  std::vector<Vec> xs;          // x_0 .. x_N
  std::vector<Vec> vs;          // v_0 .. v_N (finite differences)
  std::vector<Vec> ys;          // y_0 .. y_N for two-sequence methods
  std::vector<double> f_values;
  std::vector<double> grad_norms;
  std::string objective_id;
  bool diverged = false;

  std::size_t size() const { return xs.size(); }
};

// x_1 = x_0 - 2 s grad f(x_0) / (1 + sqrt(mu s)); HeavyBall / NagSc only.
Vec init_two_point(const MethodSpec& spec, const Objective& obj, const Vec& x0);

// Phase-space start state; v_0 depends on the method family.
PhaseState initial_phase_state(const MethodSpec& spec, const Objective& obj,
                               const Vec& x0);

// One step of the position/velocity recurrence. The velocity update is
// affine in v_{k+1} and solved in closed form.
PhaseState step_phase_space(const MethodSpec& spec, const Objective& obj,
                            const PhaseState& state);

// Sequence-form single steps (the published recurrences).
Vec gradient_descent_step(const Objective& obj, double s, const Vec& x);
Vec heavy_ball_step(const MethodSpec& spec, const Objective& obj,
                    const Vec& x_k, const Vec& x_prev);
Vec nag_sc_single_variable_step(const MethodSpec& spec, const Objective& obj,
                                const Vec& x_k, const Vec& x_prev);

struct TwoSeqState {
  Vec x;
  Vec y;
};
TwoSeqState nag_sc_two_sequence_step(const MethodSpec& spec,
                                     const Objective& obj,
                                     const TwoSeqState& state);
TwoSeqState nag_c_step(const MethodSpec& spec, const Objective& obj, long k,
                       const TwoSeqState& state);
// Evaluates grad f(x_k) exactly once and reuses it in both update lines.
TwoSeqState generalized_nag_c_step(const MethodSpec& spec, const Objective& obj,
                                   long k, const TwoSeqState& state);

struct ModifiedState {
  Vec x;
  Vec y;
  Vec grad_y;  // grad f(y_k), carried to avoid re-evaluation
};
ModifiedState modified_nag_c_step(const MethodSpec& spec, const Objective& obj,
                                  long k, const ModifiedState& state);

// coeff * s * (grad f(x_k) - grad f(x_prev)); with the NagSc coefficient
// (1 - sqrt(mu s)) / (1 + sqrt(mu s)) this is exactly what separates NagSc
// from the heavy-ball step.
Vec gradient_correction(const Objective& obj, const Vec& x_k, const Vec& x_prev,
                        double s, double coeff);

// Deterministic run of the method's published form; records sequence
// iterates, phase-space velocities, f values and gradient norms. A
// non-finite iterate truncates the trajectory and sets the diverged flag.
Trajectory run(const MethodSpec& spec, const Objective& obj, const Vec& x0,
               long num_steps);

}  // namespace odelab
