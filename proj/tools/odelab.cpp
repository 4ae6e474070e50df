#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odelab/harness.hpp"

namespace {

using namespace odelab;

int cmd_run(const std::vector<std::string>& config_paths) {
  bool all_pass = true;
  for (const auto& path : config_paths) {
    const auto cfg = harness::load_config_file(path);
    const auto artifacts = harness::run_experiment(cfg);
    std::cout << path << " -> " << artifacts.dir.string() << "\n";
    for (const auto& check : artifacts.checks)
      std::cout << "  [" << (check.pass ? "PASS" : "FAIL") << "] " << check.id
                << "  max_ratio=" << harness::format_g17(check.max_ratio)
                << "\n";
    all_pass = all_pass && artifacts.all_pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_check(const std::string& config_path, const std::string& theorem) {
  auto cfg = harness::load_config_file(config_path);
  cfg.checks = {theorem};
  const auto artifacts = harness::run_experiment(cfg);
  const auto& check = artifacts.checks.at(0);
  std::cout << "[" << (check.pass ? "PASS" : "FAIL") << "] " << check.id
            << "  max_ratio=" << harness::format_g17(check.max_ratio) << "\n";
  return check.pass ? 0 : 1;
}

int cmd_stability(const std::string& family_name, double mu, double L) {
  EulerFamily family;
  if (family_name == "heavy-ball" || family_name == "heavy_ball")
    family = EulerFamily::HeavyBallEuler;
  else if (family_name == "nag-sc" || family_name == "nag_sc")
    family = EulerFamily::NagScEuler;
  else {
    std::cerr << "unknown family '" << family_name << "'\n";
    return 2;
  }
  const double smax = max_stable_step(family, mu, L);
  std::cout << "family: " << euler_family_name(family) << "\n";
  std::cout << "mu: " << harness::format_g17(mu)
            << "  L: " << harness::format_g17(L) << "\n";
  std::cout << "max_stable_step: " << harness::format_g17(smax) << "\n";
  std::cout << "theta,radius_at_max_step\n";
  for (int i = 0; i <= 16; ++i) {
    const double f = static_cast<double>(i) / 16.0;
    const double theta = mu * std::pow(L / mu, f);
    std::cout << harness::format_g17(theta) << ","
              << harness::format_g17(spectral_radius(family, theta, mu, smax))
              << "\n";
  }
  return 0;
}

int cmd_ode_compare(const std::string& config_path, const std::string& s_list,
                    double T) {
  const auto cfg = harness::load_config_file(config_path);
  const Objective obj = harness::build_objective(cfg.objective);

  std::vector<double> s_values;
  std::stringstream ss(s_list);
  std::string item;
  while (std::getline(ss, item, ',')) s_values.push_back(std::stod(item));
  if (s_values.empty()) {
    std::cerr << "--s-list must name at least one step size\n";
    return 2;
  }

  std::cout << "method";
  for (double s : s_values) std::cout << ",s=" << harness::format_g17(s);
  std::cout << "\n";

  for (const auto& mc : cfg.methods) {
    OdeFamily family;
    switch (mc.kind) {
      case MethodKind::HeavyBall: family = OdeFamily::HeavyBallHigh; break;
      case MethodKind::NagSc: family = OdeFamily::NagScHigh; break;
      case MethodKind::NagC: family = OdeFamily::NagCHigh; break;
      case MethodKind::GeneralizedNagC: family = OdeFamily::GeneralizedHigh; break;
      default: continue;  // no high-resolution ODE counterpart
    }
    std::cout << method_kind_name(mc.kind);
    for (double s : s_values) {
      harness::MethodConfig m = mc;
      m.s = s;
      m.s_rule.reset();
      const MethodSpec spec = harness::resolve_method(m, obj);
      const long steps = static_cast<long>(std::ceil(T / std::sqrt(s))) + 1;
      const Trajectory traj = run(spec, obj, cfg.x0, steps);
      OdeSpec ospec;
      ospec.family = family;
      ospec.step_s = s;
      ospec.mu = spec.mu;
      ospec.alpha_param = spec.alpha_param;
      ospec.beta_param = spec.beta_param;
      const double dev = discrete_ode_deviation(traj, ospec, obj, T);
      std::cout << "," << harness::format_g17(dev);
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_figure(const std::string& run_dir, const std::string& id) {
  harness::emit_figure_data(run_dir, id);
  std::cout << run_dir << "/" << id << ".csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"accelerated first-order method laboratory"};
  app.require_subcommand(1);

  std::vector<std::string> run_configs;
  auto* run_cmd = app.add_subcommand("run", "run experiment config(s)");
  run_cmd->add_option("configs", run_configs, "config JSON file(s)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string check_config, check_theorem;
  auto* check_cmd = app.add_subcommand("check", "run a single check");
  check_cmd->add_option("config", check_config, "config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  check_cmd->add_option("--theorem", check_theorem, "check id (e.g. T6_grad)")
      ->required();

  std::string stab_family;
  double stab_mu = 0.0, stab_L = 0.0;
  auto* stab_cmd =
      app.add_subcommand("stability", "max stable step and radius table");
  stab_cmd->add_option("--family", stab_family, "heavy-ball | nag-sc")
      ->required();
  stab_cmd->add_option("--mu", stab_mu, "strong convexity")->required();
  stab_cmd->add_option("--L", stab_L, "gradient Lipschitz constant")->required();

  std::string ode_config, ode_slist;
  double ode_T = 5.0;
  auto* ode_cmd = app.add_subcommand(
      "ode-compare", "discrete-vs-ODE deviation table over step sizes");
  ode_cmd->add_option("config", ode_config, "config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  ode_cmd->add_option("--s-list", ode_slist, "comma-separated step sizes")
      ->required();
  ode_cmd->add_option("--T", ode_T, "time horizon (default 5)");

  std::string fig_dir, fig_id;
  auto* fig_cmd = app.add_subcommand("figure", "emit plot CSV from a run dir");
  fig_cmd->add_option("run-dir", fig_dir, "directory written by 'run'")
      ->required()
      ->check(CLI::ExistingDirectory);
  fig_cmd->add_option("--id", fig_id,
                      "fig1 | fig2-left | fig2-right | fig3-left | "
                      "fig3-right | fig4 | fig5")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_configs);
    if (check_cmd->parsed()) return cmd_check(check_config, check_theorem);
    if (stab_cmd->parsed()) return cmd_stability(stab_family, stab_mu, stab_L);
    if (ode_cmd->parsed()) return cmd_ode_compare(ode_config, ode_slist, ode_T);
    if (fig_cmd->parsed()) return cmd_figure(fig_dir, fig_id);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
