#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odelab/lyapunov.hpp"
#include "odelab/objectives.hpp"
#include "odelab/odes.hpp"
#include "odelab/optimizers.hpp"
#include "odelab/rates.hpp"
#include "odelab/stability.hpp"

namespace odelab::harness {

// ---- configuration -------------------------------------------------------

struct ObjectiveConfig {
  std::string type;  // "quadratic" | "random_psd" | "log_sum_exp"
  // quadratic
  std::optional<Vec> hessian_diag;
  std::optional<Mat> hessian;
  std::optional<Vec> linear;
  // random_psd
  int n = 0;
  std::uint64_t seed = 0;
  // log_sum_exp (random entries when A/b absent)
  std::optional<Mat> A;
  std::optional<Vec> b;
  double rho = 1.0;
  int m = 0;
  int dim = 0;
};

struct MethodConfig {
  MethodKind kind = MethodKind::GradientDescent;
  std::optional<double> s;       // exactly one of s / s_rule
  std::optional<std::string> s_rule;
  std::optional<double> mu;      // defaults to the objective's strong_mu
  double alpha = 3.0;
  double beta = 1.0;
};

struct OdeRunConfig {
  OdeFamily family = OdeFamily::NagScHigh;
  std::optional<double> s;
  std::optional<std::string> s_rule;
  std::optional<double> mu;
  double alpha = 3.0;
  double beta = 1.0;
  double t_end = 0.0;
  std::optional<double> h;        // defaults to sqrt(s)/20
  std::string samples = "nodes";  // "nodes" | "iterates"
};

struct StabilityConfig {
  std::vector<EulerFamily> families;
  double mu = 0.0;
  double L = 0.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  ObjectiveConfig objective;
  Vec x0;
  long num_steps = 0;
  std::vector<MethodConfig> methods;
  std::vector<OdeRunConfig> ode_runs;
  std::vector<std::string> checks;  // theorem ids T1..T10/P9, lemma ids L1..L6
  std::optional<StabilityConfig> stability;
  std::string output_dir = "out";
};

// Strict parse: unknown keys are rejected with the offending path named.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::filesystem::path& path);

Objective build_objective(const ObjectiveConfig& cfg);
MethodSpec resolve_method(const MethodConfig& cfg, const Objective& obj,
                          const ObjectiveConfig* obj_cfg = nullptr);
OdeSpec resolve_ode(const OdeRunConfig& cfg, const Objective& obj,
                    const ObjectiveConfig* obj_cfg = nullptr);

// ---- optimum calibration ---------------------------------------------------

struct CalibratedOptimum {
  Vec minimizer;
  double optimal_value = 0.0;
  bool accurate = true;  // grad tolerance reached
  double grad_norm = 0.0;
};

// NagC at s = 1/(3L) until |grad f| <= 1e-12 (at most 1e6 steps), then 50
// gradient-descent polish steps at s = 1/L. Results are cached per objective
// id within the process.
CalibratedOptimum calibrate_optimum(const Objective& obj);

// Objective's own optimum when known, calibration otherwise.
CalibratedOptimum resolve_optimum(const Objective& obj);

// f* to use for gap-based checks. An accurate optimum passes through; an
// inaccurate one is lowered by the residual gap estimate |grad|^2/(2 mu)
// when the objective is strongly convex, and is unusable (nullopt) for
// mu = 0, in which case those checks are skipped with a warning.
std::optional<double> effective_gap_f_star(const CalibratedOptimum& opt,
                                           double strong_mu);

// ---- experiment execution --------------------------------------------------

struct CheckResult {
  std::string id;
  bool pass = false;
  double max_ratio = 0.0;
  std::optional<long> first_violation_index;
  std::string detail;
};

struct RunArtifacts {
  std::filesystem::path dir;
  std::vector<CheckResult> checks;
  bool all_pass = true;
  std::map<std::string, Trajectory> trajectories;       // by method name
  std::map<std::string, OdeTrajectory> ode_trajectories;  // by family name
};

// Executes trajectories, ODE integrations, requested checks and the optional
// stability sweep; writes CSV/JSON artifacts plus a manifest into
// config.output_dir. Throws on config errors; check failures are reported in
// the result (exit-status handling is the caller's).
RunArtifacts run_experiment(const ExperimentConfig& config);

// Emit one figure CSV from a completed run directory.
void emit_figure_data(const std::filesystem::path& run_dir,
                      const std::string& figure_id);

// ---- small IO helpers ------------------------------------------------------

std::string format_g17(double v);
void write_trajectory_csv(const std::filesystem::path& file,
                          const Trajectory& traj, double s);
void write_ode_csv(const std::filesystem::path& file, const OdeTrajectory& ode);
void write_lyapunov_csv(const std::filesystem::path& file,
                        const LyapunovLog& log);

}  // namespace odelab::harness
