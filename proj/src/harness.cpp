#include "odelab/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "odelab/rng.hpp"

namespace odelab::harness {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolName = "accel-odelab";
constexpr const char* kToolVersion = "0.1.0";

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("config: " + path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) { ok = true; break; }
    if (!ok) config_error(path + "." + item.key(), "unknown key");
  }
}

double get_number(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) config_error(path + "." + key, "missing");
  if (!obj[key].is_number()) config_error(path + "." + key, "number expected");
  return obj[key].get<double>();
}

Vec get_vector(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "array expected");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) config_error(path, "numeric array expected");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Mat get_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_error(path, "matrix expected");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) config_error(path, "matrix rows must be arrays");
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      config_error(path, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          j[i][c].get<double>();
  }
  return m;
}

json vector_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    a.push_back(row);
  }
  return a;
}

MethodKind method_kind_from_name(const std::string& name,
                                 const std::string& path) {
  for (MethodKind k :
       {MethodKind::GradientDescent, MethodKind::HeavyBall, MethodKind::NagSc,
        MethodKind::NagC, MethodKind::GeneralizedNagC, MethodKind::ModifiedNagC})
    if (method_kind_name(k) == name) return k;
  config_error(path, "unknown method kind '" + name + "'");
}

OdeFamily ode_family_from_name(const std::string& name,
                               const std::string& path) {
  for (OdeFamily f :
       {OdeFamily::HeavyBallHigh, OdeFamily::NagScHigh, OdeFamily::NagCHigh,
        OdeFamily::GeneralizedHigh, OdeFamily::StronglyConvexLow,
        OdeFamily::NagCLow})
    if (ode_family_name(f) == name) return f;
  config_error(path, "unknown ode family '" + name + "'");
}

bool low_resolution(OdeFamily f) {
  return f == OdeFamily::StronglyConvexLow || f == OdeFamily::NagCLow;
}

int thread_cap() {
  if (const char* env = std::getenv("ACCEL_ODELAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Index-slot work pool: results land in caller-indexed storage, so the
// outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const int workers =
      static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(thread_cap())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- config ----------------------------------------------------------------

ExperimentConfig parse_config(const std::string& text) {
  json root = json::parse(text);
  if (!root.is_object()) config_error("$", "object expected");
  check_keys(root, "$",
             {"seed", "objective", "x0", "num_steps", "methods", "ode_runs",
              "checks", "stability", "output_dir"});

  ExperimentConfig cfg;
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer())
      config_error("$.seed", "integer expected");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (!root.contains("objective")) config_error("$.objective", "missing");
  {
    const json& o = root["objective"];
    const std::string path = "$.objective";
    if (!o.is_object()) config_error(path, "object expected");
    check_keys(o, path,
               {"type", "hessian_diag", "hessian", "linear", "n", "seed", "A",
                "b", "rho", "m", "dim"});
    if (!o.contains("type")) config_error(path + ".type", "missing");
    cfg.objective.type = o["type"].get<std::string>();
    if (cfg.objective.type == "quadratic") {
      if (o.contains("hessian_diag"))
        cfg.objective.hessian_diag =
            get_vector(o["hessian_diag"], path + ".hessian_diag");
      if (o.contains("hessian"))
        cfg.objective.hessian = get_matrix(o["hessian"], path + ".hessian");
      if (o.contains("linear"))
        cfg.objective.linear = get_vector(o["linear"], path + ".linear");
    } else if (cfg.objective.type == "random_psd") {
      cfg.objective.n = static_cast<int>(get_number(o, path, "n"));
      cfg.objective.seed =
          static_cast<std::uint64_t>(get_number(o, path, "seed"));
    } else if (cfg.objective.type == "log_sum_exp") {
      cfg.objective.rho = get_number(o, path, "rho");
      if (o.contains("A")) {
        cfg.objective.A = get_matrix(o["A"], path + ".A");
        if (!o.contains("b")) config_error(path + ".b", "missing");
        cfg.objective.b = get_vector(o["b"], path + ".b");
      } else {
        cfg.objective.m = static_cast<int>(get_number(o, path, "m"));
        cfg.objective.dim = static_cast<int>(get_number(o, path, "dim"));
        cfg.objective.seed =
            static_cast<std::uint64_t>(get_number(o, path, "seed"));
      }
    } else {
      config_error(path + ".type", "unknown objective type");
    }
  }
  if (!root.contains("x0")) config_error("$.x0", "missing");
  cfg.x0 = get_vector(root["x0"], "$.x0");
  if (root.contains("num_steps")) {
    if (!root["num_steps"].is_number_integer())
      config_error("$.num_steps", "integer expected");
    cfg.num_steps = root["num_steps"].get<long>();
  }
  if (root.contains("methods")) {
    if (!root["methods"].is_array()) config_error("$.methods", "array expected");
    std::size_t idx = 0;
    for (const json& m : root["methods"]) {
      const std::string path = "$.methods[" + std::to_string(idx++) + "]";
      check_keys(m, path, {"kind", "s", "s_rule", "mu", "alpha", "beta"});
      MethodConfig mc;
      if (!m.contains("kind")) config_error(path + ".kind", "missing");
      mc.kind = method_kind_from_name(m["kind"].get<std::string>(),
                                      path + ".kind");
      if (m.contains("s")) mc.s = m["s"].get<double>();
      if (m.contains("s_rule")) mc.s_rule = m["s_rule"].get<std::string>();
      if (mc.s.has_value() == mc.s_rule.has_value())
        config_error(path, "exactly one of s / s_rule required");
      if (m.contains("mu")) mc.mu = m["mu"].get<double>();
      if (m.contains("alpha")) mc.alpha = m["alpha"].get<double>();
      if (m.contains("beta")) mc.beta = m["beta"].get<double>();
      cfg.methods.push_back(std::move(mc));
    }
  }
  if (root.contains("ode_runs")) {
    if (!root["ode_runs"].is_array())
      config_error("$.ode_runs", "array expected");
    std::size_t idx = 0;
    for (const json& o : root["ode_runs"]) {
      const std::string path = "$.ode_runs[" + std::to_string(idx++) + "]";
      check_keys(o, path,
                 {"family", "s", "s_rule", "mu", "alpha", "beta", "t_end", "h",
                  "samples"});
      OdeRunConfig oc;
      if (!o.contains("family")) config_error(path + ".family", "missing");
      oc.family =
          ode_family_from_name(o["family"].get<std::string>(), path + ".family");
      if (o.contains("s")) oc.s = o["s"].get<double>();
      if (o.contains("s_rule")) oc.s_rule = o["s_rule"].get<std::string>();
      if (oc.s.has_value() == oc.s_rule.has_value())
        config_error(path, "exactly one of s / s_rule required");
      if (o.contains("mu")) oc.mu = o["mu"].get<double>();
      if (o.contains("alpha")) oc.alpha = o["alpha"].get<double>();
      if (o.contains("beta")) oc.beta = o["beta"].get<double>();
      if (!o.contains("t_end")) config_error(path + ".t_end", "missing");
      oc.t_end = o["t_end"].get<double>();
      if (o.contains("h")) oc.h = o["h"].get<double>();
      if (o.contains("samples")) oc.samples = o["samples"].get<std::string>();
      if (oc.samples != "nodes" && oc.samples != "iterates")
        config_error(path + ".samples", "'nodes' or 'iterates' expected");
      cfg.ode_runs.push_back(std::move(oc));
    }
  }
  if (root.contains("checks")) {
    if (!root["checks"].is_array()) config_error("$.checks", "array expected");
    for (const json& c : root["checks"]) {
      if (!c.is_string()) config_error("$.checks", "string ids expected");
      cfg.checks.push_back(c.get<std::string>());
    }
  }
  if (root.contains("stability")) {
    const json& st = root["stability"];
    const std::string path = "$.stability";
    check_keys(st, path, {"families", "mu", "L"});
    StabilityConfig sc;
    if (!st.contains("families")) config_error(path + ".families", "missing");
    for (const json& f : st["families"]) {
      const std::string name = f.get<std::string>();
      if (name == "heavy_ball")
        sc.families.push_back(EulerFamily::HeavyBallEuler);
      else if (name == "nag_sc")
        sc.families.push_back(EulerFamily::NagScEuler);
      else
        config_error(path + ".families", "unknown family '" + name + "'");
    }
    sc.mu = get_number(st, path, "mu");
    sc.L = get_number(st, path, "L");
    cfg.stability = sc;
  }
  if (root.contains("output_dir"))
    cfg.output_dir = root["output_dir"].get<std::string>();
  return cfg;
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["seed"] = cfg.seed;
  json o;
  o["type"] = cfg.objective.type;
  if (cfg.objective.type == "quadratic") {
    if (cfg.objective.hessian_diag)
      o["hessian_diag"] = vector_to_json(*cfg.objective.hessian_diag);
    if (cfg.objective.hessian)
      o["hessian"] = matrix_to_json(*cfg.objective.hessian);
    if (cfg.objective.linear) o["linear"] = vector_to_json(*cfg.objective.linear);
  } else if (cfg.objective.type == "random_psd") {
    o["n"] = cfg.objective.n;
    o["seed"] = cfg.objective.seed;
  } else {
    o["rho"] = cfg.objective.rho;
    if (cfg.objective.A) {
      o["A"] = matrix_to_json(*cfg.objective.A);
      o["b"] = vector_to_json(*cfg.objective.b);
    } else {
      o["m"] = cfg.objective.m;
      o["dim"] = cfg.objective.dim;
      o["seed"] = cfg.objective.seed;
    }
  }
  root["objective"] = o;
  root["x0"] = vector_to_json(cfg.x0);
  root["num_steps"] = cfg.num_steps;
  json methods = json::array();
  for (const auto& m : cfg.methods) {
    json jm;
    jm["kind"] = method_kind_name(m.kind);
    if (m.s) jm["s"] = *m.s;
    if (m.s_rule) jm["s_rule"] = *m.s_rule;
    if (m.mu) jm["mu"] = *m.mu;
    jm["alpha"] = m.alpha;
    jm["beta"] = m.beta;
    methods.push_back(jm);
  }
  root["methods"] = methods;
  json odes = json::array();
  for (const auto& oc : cfg.ode_runs) {
    json jo;
    jo["family"] = ode_family_name(oc.family);
    if (oc.s) jo["s"] = *oc.s;
    if (oc.s_rule) jo["s_rule"] = *oc.s_rule;
    if (oc.mu) jo["mu"] = *oc.mu;
    jo["alpha"] = oc.alpha;
    jo["beta"] = oc.beta;
    jo["t_end"] = oc.t_end;
    if (oc.h) jo["h"] = *oc.h;
    jo["samples"] = oc.samples;
    odes.push_back(jo);
  }
  root["ode_runs"] = odes;
  root["checks"] = cfg.checks;
  if (cfg.stability) {
    json st;
    json fams = json::array();
    for (EulerFamily f : cfg.stability->families)
      fams.push_back(f == EulerFamily::HeavyBallEuler ? "heavy_ball" : "nag_sc");
    st["families"] = fams;
    st["mu"] = cfg.stability->mu;
    st["L"] = cfg.stability->L;
    root["stability"] = st;
  }
  root["output_dir"] = cfg.output_dir;
  return root;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
  return config_to_json(cfg).dump(2);
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Objective build_objective(const ObjectiveConfig& cfg) {
  if (cfg.type == "quadratic") {
    QuadraticSpec spec;
    spec.hessian_diag = cfg.hessian_diag;
    spec.hessian = cfg.hessian;
    if (cfg.linear)
      spec.linear = *cfg.linear;
    else if (cfg.hessian_diag)
      spec.linear = Vec::Zero(cfg.hessian_diag->size());
    else if (cfg.hessian)
      spec.linear = Vec::Zero(cfg.hessian->rows());
    return make_quadratic(spec);
  }
  if (cfg.type == "random_psd") return make_random_psd_quadratic(cfg.n, cfg.seed);
  if (cfg.type == "log_sum_exp") {
    if (cfg.A) {
      LogSumExpSpec spec;
      spec.A = *cfg.A;
      spec.b = *cfg.b;
      spec.rho = cfg.rho;
      return make_log_sum_exp(spec);
    }
    return make_log_sum_exp_random(cfg.m, cfg.dim, cfg.rho, cfg.seed);
  }
  throw std::invalid_argument("build_objective: unknown type " + cfg.type);
}

namespace {

double resolve_step_rule(const std::string& rule, const Objective& obj,
                         double mu, double alpha, double beta,
                         const ObjectiveConfig* obj_cfg) {
  const double L = obj.lipschitz_L;
  if (rule == "1/L") return 1.0 / L;
  if (rule == "1/(2L)") return 1.0 / (2.0 * L);
  if (rule == "1/(3L)") return 1.0 / (3.0 * L);
  if (rule == "1/(4L)") return 1.0 / (4.0 * L);
  if (rule == "mu/(16L^2)") return mu / (16.0 * L * L);
  if (rule == "0.1/L") return 0.1 / L;
  if (rule == "0.1/norm_A") {
    // For quadratics |A|_2 = L; log-sum-exp has L = |A|_2^2/rho, so
    // |A|_2 = sqrt(L rho) with rho taken from the objective config.
    if (obj.hessian_const) return 0.1 / L;
    if (obj_cfg && obj_cfg->type == "log_sum_exp")
      return 0.1 / std::sqrt(L * obj_cfg->rho);
    throw std::invalid_argument(
        "s_rule 0.1/norm_A needs a quadratic or log-sum-exp objective");
  }
  if (rule == "t8") return t8_max_step(alpha, beta, L);
  throw std::invalid_argument("unknown s_rule '" + rule + "'");
}

}  // namespace

MethodSpec resolve_method(const MethodConfig& cfg, const Objective& obj,
                          const ObjectiveConfig* obj_cfg) {
  MethodSpec spec;
  spec.kind = cfg.kind;
  spec.mu = cfg.mu.value_or(obj.strong_mu);
  spec.alpha_param = cfg.alpha;
  spec.beta_param = cfg.beta;
  spec.step_s = cfg.s ? *cfg.s
                      : resolve_step_rule(*cfg.s_rule, obj, spec.mu, cfg.alpha,
                                          cfg.beta, obj_cfg);
  if ((spec.kind == MethodKind::HeavyBall || spec.kind == MethodKind::NagSc) &&
      !(spec.mu > 0.0))
    throw std::invalid_argument("config: mu required for " +
                                method_kind_name(spec.kind));
  spec.validate();
  return spec;
}

OdeSpec resolve_ode(const OdeRunConfig& cfg, const Objective& obj,
                    const ObjectiveConfig* obj_cfg) {
  OdeSpec spec;
  spec.family = cfg.family;
  spec.mu = cfg.mu.value_or(obj.strong_mu);
  spec.alpha_param = cfg.alpha;
  spec.beta_param = cfg.beta;
  const double s = cfg.s ? *cfg.s
                         : resolve_step_rule(*cfg.s_rule, obj, spec.mu,
                                             cfg.alpha, cfg.beta, obj_cfg);
  spec.step_s = low_resolution(cfg.family) ? 0.0 : s;
  spec.validate();
  return spec;
}

// ---- calibration -----------------------------------------------------------

namespace {
std::mutex g_cal_mutex;
std::map<std::string, CalibratedOptimum> g_cal_cache;
}  // namespace

CalibratedOptimum calibrate_optimum(const Objective& obj) {
  {
    std::lock_guard<std::mutex> lock(g_cal_mutex);
    auto it = g_cal_cache.find(obj.id);
    if (it != g_cal_cache.end()) return it->second;
  }

  const double s = 1.0 / (3.0 * obj.lipschitz_L);
  Vec x = Vec::Zero(obj.dim);
  TwoSeqState st{x, x};
  MethodSpec nagc;
  nagc.kind = MethodKind::NagC;
  nagc.step_s = s;
  double gnorm = obj.gradient(x).norm();
  for (long k = 0; k < 1000000 && gnorm > 1e-12; ++k) {
    st = nag_c_step(nagc, obj, k, st);
    gnorm = obj.gradient(st.x).norm();
  }
  x = st.x;
  const double gd_step = 1.0 / obj.lipschitz_L;
  for (int i = 0; i < 50; ++i) x -= gd_step * obj.gradient(x);

  CalibratedOptimum res;
  res.minimizer = x;
  res.optimal_value = obj.value(x);
  res.grad_norm = obj.gradient(x).norm();
  res.accurate = res.grad_norm <= 1e-12;

  std::lock_guard<std::mutex> lock(g_cal_mutex);
  g_cal_cache.emplace(obj.id, res);
  return res;
}

CalibratedOptimum resolve_optimum(const Objective& obj) {
  if (obj.minimizer && obj.optimal_value) {
    CalibratedOptimum res;
    res.minimizer = *obj.minimizer;
    res.optimal_value = *obj.optimal_value;
    res.grad_norm = obj.gradient(*obj.minimizer).norm();
    res.accurate = true;
    return res;
  }
  return calibrate_optimum(obj);
}

std::optional<double> effective_gap_f_star(const CalibratedOptimum& opt,
                                           double strong_mu) {
  if (opt.accurate) return opt.optimal_value;
  if (strong_mu > 0.0)
    return opt.optimal_value - opt.grad_norm * opt.grad_norm / (2.0 * strong_mu);
  return std::nullopt;
}

// ---- CSV writers -----------------------------------------------------------

void write_trajectory_csv(const std::filesystem::path& file,
                          const Trajectory& traj, double s) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  const int dim = traj.xs.empty() ? 0 : static_cast<int>(traj.xs[0].size());
  const bool wide = dim <= 8;
  out << "k,t,f,grad_norm";
  if (wide) {
    for (int i = 0; i < dim; ++i) out << ",x" << (i + 1);
    for (int i = 0; i < dim; ++i) out << ",v" << (i + 1);
  }
  out << "\r\n";
  const double sqrt_s = std::sqrt(s);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << k << "," << format_g17(static_cast<double>(k) * sqrt_s) << ","
        << format_g17(traj.f_values[k]) << "," << format_g17(traj.grad_norms[k]);
    if (wide) {
      for (int i = 0; i < dim; ++i) out << "," << format_g17(traj.xs[k][i]);
      for (int i = 0; i < dim; ++i) out << "," << format_g17(traj.vs[k][i]);
    }
    out << "\r\n";
  }
}

void write_ode_csv(const std::filesystem::path& file, const OdeTrajectory& ode) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  const int dim = ode.xs.empty() ? 0 : static_cast<int>(ode.xs[0].size());
  const bool wide = dim <= 8;
  out << "t";
  if (wide) {
    for (int i = 0; i < dim; ++i) out << ",x" << (i + 1);
    for (int i = 0; i < dim; ++i) out << ",v" << (i + 1);
  }
  out << "\r\n";
  for (std::size_t i = 0; i < ode.size(); ++i) {
    out << format_g17(ode.ts[i]);
    if (wide) {
      for (int c = 0; c < dim; ++c) out << "," << format_g17(ode.xs[i][c]);
      for (int c = 0; c < dim; ++c) out << "," << format_g17(ode.vs[i][c]);
    }
    out << "\r\n";
  }
}

void write_lyapunov_csv(const std::filesystem::path& file,
                        const LyapunovLog& log) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "k_or_t,E,rhs_margin,violated\r\n";
  std::size_t vi = 0;
  for (std::size_t i = 0; i < log.values.size(); ++i) {
    bool violated = false;
    while (vi < log.violations.size() &&
           log.violations[vi] < static_cast<long>(i))
      ++vi;
    if (vi < log.violations.size() && log.violations[vi] == static_cast<long>(i))
      violated = true;
    out << format_g17(log.k_or_t[i]) << "," << format_g17(log.values[i]) << ","
        << format_g17(log.required_margin[i]) << "," << (violated ? 1 : 0)
        << "\r\n";
  }
}

// ---- experiment ------------------------------------------------------------

namespace {

struct ResolvedMethod {
  std::string name;
  MethodConfig cfg;
  MethodSpec spec;
};

struct ResolvedOde {
  std::string name;
  OdeRunConfig cfg;
  OdeSpec spec;
  double sample_s = 0.0;  // discrete step backing the t = k sqrt(s) grid
};

std::string unique_name(std::map<std::string, int>& used,
                        const std::string& base) {
  const int n = ++used[base];
  if (n == 1) return base;
  return base + "#" + std::to_string(n);
}

const ResolvedMethod* find_method(const std::vector<ResolvedMethod>& methods,
                                  MethodKind kind) {
  for (const auto& m : methods)
    if (m.spec.kind == kind) return &m;
  return nullptr;
}

const ResolvedOde* find_ode(const std::vector<ResolvedOde>& odes,
                            OdeFamily family) {
  for (const auto& o : odes)
    if (o.spec.family == family) return &o;
  return nullptr;
}

struct CheckPlan {
  // Exactly one of these is set.
  std::optional<TheoremId> theorem;
  std::optional<LyapunovVariant> lemma;
  bool needs_ode = false;
  MethodKind method_kind = MethodKind::GradientDescent;
  OdeFamily ode_family = OdeFamily::NagScHigh;
};

// Whether the check's left-hand side is anchored at f*. Gradient-norm
// bounds only need the minimizer position (for the distance factor).
bool check_needs_f_star(const CheckPlan& plan) {
  if (plan.lemma) return true;  // the energies contain f(x) - f*
  switch (*plan.theorem) {
    case TheoremId::T5:
    case TheoremId::T6_grad:
    case TheoremId::T7_grad:
    case TheoremId::T8_grad:
      return false;
    default:
      return true;
  }
}

CheckPlan plan_check(const std::string& id) {
  CheckPlan plan;
  if (auto th = theorem_id_from_name(id); th.has_value()) {
    plan.theorem = th;
    switch (*th) {
      case TheoremId::T1:
        plan.needs_ode = true;
        plan.ode_family = OdeFamily::NagScHigh;
        break;
      case TheoremId::T2:
        plan.needs_ode = true;
        plan.ode_family = OdeFamily::HeavyBallHigh;
        break;
      case TheoremId::T5:
        plan.needs_ode = true;
        plan.ode_family = OdeFamily::NagCHigh;
        break;
      case TheoremId::T3: plan.method_kind = MethodKind::NagSc; break;
      case TheoremId::T4: plan.method_kind = MethodKind::HeavyBall; break;
      case TheoremId::T6_grad:
      case TheoremId::T6_fval: plan.method_kind = MethodKind::NagC; break;
      case TheoremId::T7_grad:
      case TheoremId::T7_fval: plan.method_kind = MethodKind::ModifiedNagC; break;
      case TheoremId::T8_grad:
      case TheoremId::T8_fval:
      case TheoremId::P9_sum:
      case TheoremId::T10_trend:
        plan.method_kind = MethodKind::GeneralizedNagC;
        break;
    }
    return plan;
  }
  if (id == "L1") {
    plan.lemma = LyapunovVariant::ContNagSc;
    plan.needs_ode = true;
    plan.ode_family = OdeFamily::NagScHigh;
  } else if (id == "L2") {
    plan.lemma = LyapunovVariant::DiscNagSc;
    plan.method_kind = MethodKind::NagSc;
  } else if (id == "L3") {
    plan.lemma = LyapunovVariant::ContHeavyBall;
    plan.needs_ode = true;
    plan.ode_family = OdeFamily::HeavyBallHigh;
  } else if (id == "L4") {
    plan.lemma = LyapunovVariant::DiscHeavyBall;
    plan.method_kind = MethodKind::HeavyBall;
  } else if (id == "L5") {
    plan.lemma = LyapunovVariant::ContNagC;
    plan.needs_ode = true;
    plan.ode_family = OdeFamily::NagCHigh;
  } else if (id == "L6") {
    plan.lemma = LyapunovVariant::DiscNagC;
    plan.method_kind = MethodKind::NagC;
  } else if (id == "LMOD") {
    plan.lemma = LyapunovVariant::DiscModifiedNagC;
    plan.method_kind = MethodKind::ModifiedNagC;
  } else if (id == "LGEN") {
    plan.lemma = LyapunovVariant::DiscGenAlphaGt3;  // refined per alpha/beta
    plan.method_kind = MethodKind::GeneralizedNagC;
  } else if (id == "LNU") {
    plan.lemma = LyapunovVariant::DiscNuFamily;
    plan.method_kind = MethodKind::GeneralizedNagC;
  } else {
    throw std::invalid_argument("config: unknown check id '" + id + "'");
  }
  return plan;
}

LyapunovSpec lemma_spec(const CheckPlan& plan, const ResolvedMethod* method,
                        const ResolvedOde* ode) {
  LyapunovSpec spec;
  spec.variant = *plan.lemma;
  if (plan.needs_ode) {
    spec.s = ode->spec.step_s;
    spec.mu = ode->spec.mu;
    spec.alpha = ode->spec.alpha_param;
    spec.beta = ode->spec.beta_param;
  } else {
    spec.s = method->spec.step_s;
    spec.mu = method->spec.mu;
    spec.alpha = method->spec.alpha_param;
    spec.beta = method->spec.beta_param;
    if (spec.variant == LyapunovVariant::DiscGenAlphaGt3 &&
        method->spec.alpha_param == 3.0)
      spec.variant = method->spec.beta_param < 1.0
                         ? LyapunovVariant::DiscGenAlpha3BetaLt1
                         : LyapunovVariant::DiscGenAlpha3BetaGe1;
    if (spec.variant == LyapunovVariant::DiscNuFamily)
      spec.nu = 2.0;  // smallest admissible index of the family
  }
  return spec;
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config) {
  const Objective obj = build_objective(config.objective);
  if (config.x0.size() != obj.dim)
    throw std::invalid_argument("config: x0 dimension mismatch");

  // Resolve everything up front; step-size hypotheses of the requested
  // checks are validated before any trajectory runs.
  std::vector<ResolvedMethod> methods;
  std::map<std::string, int> used_names;
  for (const auto& mc : config.methods) {
    ResolvedMethod rm;
    rm.cfg = mc;
    rm.spec = resolve_method(mc, obj, &config.objective);
    std::string base = method_kind_name(mc.kind);
    if (mc.kind == MethodKind::GeneralizedNagC) {
      std::ostringstream os;
      os << base << "_a" << mc.alpha << "_b" << mc.beta;
      base = os.str();
    }
    rm.name = unique_name(used_names, base);
    methods.push_back(std::move(rm));
  }
  std::vector<ResolvedOde> odes;
  for (const auto& oc : config.ode_runs) {
    ResolvedOde ro;
    ro.cfg = oc;
    ro.spec = resolve_ode(oc, obj, &config.objective);
    ro.sample_s = oc.s ? *oc.s
                       : resolve_step_rule(*oc.s_rule, obj, ro.spec.mu,
                                           oc.alpha, oc.beta,
                                           &config.objective);
    ro.name = unique_name(used_names, ode_family_name(oc.family));
    odes.push_back(std::move(ro));
  }

  std::vector<CheckPlan> plans;
  for (const auto& id : config.checks) {
    CheckPlan plan = plan_check(id);
    if (plan.needs_ode) {
      if (!find_ode(odes, plan.ode_family))
        throw std::invalid_argument("config: check " + id +
                                    " needs an ode_run of family " +
                                    ode_family_name(plan.ode_family));
    } else if (!find_method(methods, plan.method_kind)) {
      throw std::invalid_argument("config: check " + id +
                                  " needs a method of kind " +
                                  method_kind_name(plan.method_kind));
    }
    plans.push_back(plan);
  }

  RunArtifacts artifacts;
  artifacts.dir = config.output_dir;
  std::filesystem::create_directories(artifacts.dir);

  // Trajectories and ODE integrations: independent tasks.
  std::vector<Trajectory> trajs(methods.size());
  parallel_for(methods.size(), [&](std::size_t i) {
    trajs[i] = run(methods[i].spec, obj, config.x0, config.num_steps);
  });
  std::vector<OdeTrajectory> otrajs(odes.size());
  parallel_for(odes.size(), [&](std::size_t i) {
    const auto& ro = odes[i];
    const OdeState init = initial_state(ro.spec, obj, config.x0);
    const double sqrt_s = std::sqrt(ro.sample_s);
    const double h = ro.cfg.h.value_or(sqrt_s / 20.0);
    std::vector<double> sample_times;
    if (ro.cfg.samples == "iterates") {
      const double offset =
          (ro.spec.family == OdeFamily::NagCHigh ||
           ro.spec.family == OdeFamily::GeneralizedHigh)
              ? ro.spec.t_start()
              : 0.0;
      for (long k = 0;; ++k) {
        const double t = offset + static_cast<double>(k) * sqrt_s;
        if (t > ro.cfg.t_end + 1e-12) break;
        if (t >= init.t - 1e-12) sample_times.push_back(t);
      }
    }
    otrajs[i] = integrate_rk4(ro.spec, obj, init, ro.cfg.t_end, h, sample_times);
  });

  for (std::size_t i = 0; i < methods.size(); ++i)
    artifacts.trajectories.emplace(methods[i].name, trajs[i]);
  for (std::size_t i = 0; i < odes.size(); ++i)
    artifacts.ode_trajectories.emplace(odes[i].name, otrajs[i]);

  // Optimum (exact or calibrated) once per run.
  const CalibratedOptimum opt = resolve_optimum(obj);
  const std::optional<double> gap_f_star =
      effective_gap_f_star(opt, obj.strong_mu);
  if (!gap_f_star && !plans.empty())
    std::fprintf(stderr,
                 "warning: calibrated optimum missed the gradient tolerance "
                 "(|grad| = %.3g, mu = 0); f*-anchored checks are skipped\n",
                 opt.grad_norm);

  // Checks: independent; results land in config order.
  std::vector<CheckResult> results(plans.size());
  std::vector<std::optional<LyapunovLog>> lyap_logs(plans.size());
  parallel_for(plans.size(), [&](std::size_t i) {
    const CheckPlan& plan = plans[i];
    CheckResult res;
    res.id = config.checks[i];
    if (check_needs_f_star(plan) && !gap_f_star) {
      res.pass = true;
      res.detail = "skipped: calibrated optimum below tolerance (mu = 0)";
      results[i] = std::move(res);
      return;
    }
    const double f_star_use = gap_f_star.value_or(opt.optimal_value);
    const ResolvedMethod* method =
        plan.needs_ode ? nullptr : find_method(methods, plan.method_kind);
    const ResolvedOde* ode =
        plan.needs_ode ? find_ode(odes, plan.ode_family) : nullptr;
    const Trajectory* traj = nullptr;
    const OdeTrajectory* otraj = nullptr;
    if (method)
      for (std::size_t m = 0; m < methods.size(); ++m)
        if (&methods[m] == method) traj = &trajs[m];
    if (ode)
      for (std::size_t o = 0; o < odes.size(); ++o)
        if (&odes[o] == ode) otraj = &otrajs[o];

    if (plan.theorem) {
      BoundReport rep;
      if (plan.needs_ode)
        rep = check_bound_ode(*plan.theorem, *otraj, obj, f_star_use,
                              opt.minimizer);
      else
        rep = check_bound(*plan.theorem, *traj, obj, f_star_use,
                          opt.minimizer);
      res.pass = rep.pass;
      res.max_ratio = rep.max_ratio;
      res.first_violation_index = rep.first_violation_index;
      res.detail = rep.detail.empty() ? theorem_id_name(rep.id) : rep.detail;
    } else {
      // Lemma decay checks need the objective's optimum in place.
      Objective obj_opt = obj;
      obj_opt.minimizer = opt.minimizer;
      obj_opt.optimal_value = f_star_use;
      const LyapunovSpec spec = lemma_spec(plan, method, ode);
      LyapunovLog log = plan.needs_ode
                            ? check_decay_continuous(spec, *otraj, obj_opt)
                            : check_decay_discrete(spec, *traj, obj_opt);
      res.pass = log.violations.empty();
      res.max_ratio = res.pass ? 0.0 : static_cast<double>(log.violations.size());
      if (!log.violations.empty())
        res.first_violation_index = log.violations.front();
      res.detail = lyapunov_variant_name(spec.variant) + " decay";
      lyap_logs[i] = std::move(log);
    }
    results[i] = std::move(res);
  });

  artifacts.checks = results;
  for (const auto& r : results) artifacts.all_pass = artifacts.all_pass && r.pass;

  // ---- artifacts on disk ----
  json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  const json config_json = config_to_json(config);
  manifest["config_hash"] =
      format_g17(static_cast<double>(rng::fnv1a64(config_json.dump())));
  manifest["config"] = config_json;
  manifest["objective_id"] = obj.id;
  manifest["f_star"] = opt.optimal_value;
  manifest["f_star_accurate"] = opt.accurate;
  manifest["f_star_grad_norm"] = opt.grad_norm;

  json jmethods = json::array();
  for (std::size_t i = 0; i < methods.size(); ++i) {
    json jm;
    jm["name"] = methods[i].name;
    jm["kind"] = method_kind_name(methods[i].spec.kind);
    jm["s"] = methods[i].spec.step_s;
    jm["mu"] = methods[i].spec.mu;
    jm["alpha"] = methods[i].spec.alpha_param;
    jm["beta"] = methods[i].spec.beta_param;
    jm["diverged"] = trajs[i].diverged;
    jm["file"] = "traj_" + methods[i].name + ".csv";
    jmethods.push_back(jm);
    write_trajectory_csv(artifacts.dir / ("traj_" + methods[i].name + ".csv"),
                         trajs[i], methods[i].spec.step_s);
  }
  manifest["methods"] = jmethods;

  json jodes = json::array();
  for (std::size_t i = 0; i < odes.size(); ++i) {
    json jo;
    jo["name"] = odes[i].name;
    jo["family"] = ode_family_name(odes[i].spec.family);
    jo["s"] = odes[i].sample_s;
    jo["step_s"] = odes[i].spec.step_s;
    jo["mu"] = odes[i].spec.mu;
    jo["alpha"] = odes[i].spec.alpha_param;
    jo["beta"] = odes[i].spec.beta_param;
    jo["t_end"] = odes[i].cfg.t_end;
    jo["samples"] = odes[i].cfg.samples;
    jo["diverged"] = otrajs[i].diverged;
    jo["file"] = "ode_" + odes[i].name + ".csv";
    jodes.push_back(jo);
    write_ode_csv(artifacts.dir / ("ode_" + odes[i].name + ".csv"), otrajs[i]);
  }
  manifest["ode_runs"] = jodes;

  json jchecks = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    json jc;
    jc["id"] = results[i].id;
    jc["pass"] = results[i].pass;
    jc["max_ratio"] = results[i].max_ratio;
    if (results[i].first_violation_index)
      jc["first_violation_index"] = *results[i].first_violation_index;
    else
      jc["first_violation_index"] = nullptr;
    jc["detail"] = results[i].detail;
    if (lyap_logs[i]) {
      const std::string fname = "lyapunov_" + results[i].id + ".csv";
      write_lyapunov_csv(artifacts.dir / fname, *lyap_logs[i]);
      jc["file"] = fname;
    }
    jchecks.push_back(jc);
  }

  json report;
  report["checks"] = jchecks;
  report["all_pass"] = artifacts.all_pass;

  if (config.stability) {
    json jstab = json::array();
    std::ofstream radii(artifacts.dir / "stability_radii.csv");
    radii << "family,theta,radius\r\n";
    for (EulerFamily fam : config.stability->families) {
      const double smax =
          max_stable_step(fam, config.stability->mu, config.stability->L);
      const auto thetas = theta_probes(obj, config.stability->mu);
      const auto rep = spectral_radius_verdict(fam, thetas,
                                               config.stability->mu, smax);
      json js;
      js["family"] = euler_family_name(fam);
      js["mu"] = config.stability->mu;
      js["L"] = config.stability->L;
      js["max_stable_step"] = smax;
      js["verdict_at_max_step"] = rep.stable ? "stable" : "unstable";
      jstab.push_back(js);
      for (std::size_t i = 0; i < rep.eigen_samples.size(); ++i)
        radii << euler_family_name(fam) << ","
              << format_g17(rep.eigen_samples[i]) << ","
              << format_g17(rep.spectral_radii[i]) << "\r\n";
    }
    json jroot;
    jroot["stability"] = jstab;
    std::ofstream out(artifacts.dir / "stability.json");
    out << jroot.dump(2) << "\n";
  }

  {
    std::ofstream out(artifacts.dir / "report.json");
    out << report.dump(2) << "\n";
  }
  {
    std::ofstream out(artifacts.dir / "manifest.json");
    out << manifest.dump(2) << "\n";
  }
  return artifacts;
}

// ---- figures ----------------------------------------------------------------

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (first) {
      while (std::getline(ss, cell, ',')) table.header.push_back(cell);
      first = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

int column_index(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return static_cast<int>(i);
  throw std::runtime_error("column '" + name + "' missing");
}

json load_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in)
    throw std::runtime_error("manifest.json missing in " + dir.string());
  json j;
  in >> j;
  return j;
}

const json* find_entry(const json& list, const std::string& key,
                       const std::string& value) {
  for (const auto& e : list)
    if (e.at(key).get<std::string>() == value) return &e;
  return nullptr;
}

const json& require_method(const json& manifest, const std::string& kind) {
  const json* m = find_entry(manifest.at("methods"), "kind", kind);
  if (!m)
    throw std::runtime_error("figure: run is missing a '" + kind +
                             "' trajectory");
  return *m;
}

const json& require_ode(const json& manifest, const std::string& family) {
  const json* o = find_entry(manifest.at("ode_runs"), "family", family);
  if (!o)
    throw std::runtime_error("figure: run is missing a '" + family +
                             "' ode trajectory");
  return *o;
}

void emit_fig1(const std::filesystem::path& dir, const json& manifest,
               std::ofstream& out) {
  out << "method,k,x1,x2,f\r\n";
  for (const char* kind : {"nag_sc", "heavy_ball"}) {
    const json& m = require_method(manifest, kind);
    const CsvTable t = read_csv(dir / m.at("file").get<std::string>());
    const int cx1 = column_index(t, "x1");
    const int cx2 = column_index(t, "x2");
    const int cf = column_index(t, "f");
    const int ck = column_index(t, "k");
    for (const auto& row : t.rows)
      out << kind << "," << static_cast<long>(row[ck]) << ","
          << format_g17(row[cx1]) << "," << format_g17(row[cx2]) << ","
          << format_g17(row[cf]) << "\r\n";
  }
}

void emit_fig2(const std::filesystem::path& dir, const json& manifest,
               std::ofstream& out, bool left) {
  out << "series,k,t,x1,x2\r\n";
  const std::vector<std::string> kinds =
      left ? std::vector<std::string>{"nag_sc", "heavy_ball"}
           : std::vector<std::string>{"nag_c"};
  for (const auto& kind : kinds) {
    const json& m = require_method(manifest, kind);
    const CsvTable t = read_csv(dir / m.at("file").get<std::string>());
    const int cx1 = column_index(t, "x1");
    const int cx2 = column_index(t, "x2");
    const int ck = column_index(t, "k");
    const int ct = column_index(t, "t");
    for (const auto& row : t.rows)
      out << kind << "," << static_cast<long>(row[ck]) << ","
          << format_g17(row[ct]) << "," << format_g17(row[cx1]) << ","
          << format_g17(row[cx2]) << "\r\n";
  }
  const std::vector<std::string> families =
      left ? std::vector<std::string>{"nag_sc_high", "heavy_ball_high",
                                      "strongly_convex_low"}
           : std::vector<std::string>{"nag_c_high", "nag_c_low"};
  for (const auto& family : families) {
    const json& o = require_ode(manifest, family);
    const CsvTable t = read_csv(dir / o.at("file").get<std::string>());
    const int cx1 = column_index(t, "x1");
    const int cx2 = column_index(t, "x2");
    const int ct = column_index(t, "t");
    const double s = o.at("s").get<double>();
    const double sqrt_s = std::sqrt(s);
    const double offset =
        (family == "nag_c_high") ? 1.5 * sqrt_s : 0.0;
    for (const auto& row : t.rows) {
      const long k = std::lround((row[ct] - offset) / sqrt_s);
      out << family << "," << k << "," << format_g17(row[ct]) << ","
          << format_g17(row[cx1]) << "," << format_g17(row[cx2]) << "\r\n";
    }
  }
}

void emit_fig3(const std::filesystem::path& dir, const json& manifest,
               std::ofstream& out) {
  const json& m = require_method(manifest, "nag_c");
  const CsvTable t = read_csv(dir / m.at("file").get<std::string>());
  const int ck = column_index(t, "k");
  const int cg = column_index(t, "grad_norm");
  const double s = m.at("s").get<double>();
  out << "k,scaled_grad_norm\r\n";
  double running_min = std::numeric_limits<double>::infinity();
  for (const auto& row : t.rows) {
    const double k = row[ck];
    running_min = std::min(running_min, row[cg] * row[cg]);
    const double v = s * s * (k + 1) * (k + 1) * (k + 1) * running_min;
    out << static_cast<long>(k) << "," << format_g17(v) << "\r\n";
  }
}

void emit_fig45(const std::filesystem::path& dir, const json& manifest,
                std::ofstream& out) {
  out << "alpha,beta,k,scaled_error\r\n";
  const double f_star = manifest.at("f_star").get<double>();
  bool any = false;
  for (const auto& m : manifest.at("methods")) {
    if (m.at("kind").get<std::string>() != "generalized_nag_c") continue;
    any = true;
    const CsvTable t = read_csv(dir / m.at("file").get<std::string>());
    const int ck = column_index(t, "k");
    const int cf = column_index(t, "f");
    const double s = m.at("s").get<double>();
    const double alpha = m.at("alpha").get<double>();
    const double beta = m.at("beta").get<double>();
    for (const auto& row : t.rows) {
      const double k = row[ck];
      const double v = s * (k + 1) * (k + 1) * (row[cf] - f_star);
      out << format_g17(alpha) << "," << format_g17(beta) << ","
          << static_cast<long>(k) << "," << format_g17(v) << "\r\n";
    }
  }
  if (!any)
    throw std::runtime_error("figure: run is missing generalized_nag_c runs");
}

}  // namespace

void emit_figure_data(const std::filesystem::path& run_dir,
                      const std::string& figure_id) {
  const json manifest = load_manifest(run_dir);
  std::ofstream out(run_dir / (figure_id + ".csv"));
  if (!out)
    throw std::runtime_error("cannot write figure CSV in " + run_dir.string());
  if (figure_id == "fig1") {
    emit_fig1(run_dir, manifest, out);
  } else if (figure_id == "fig2-left") {
    emit_fig2(run_dir, manifest, out, true);
  } else if (figure_id == "fig2-right") {
    emit_fig2(run_dir, manifest, out, false);
  } else if (figure_id == "fig3-left" || figure_id == "fig3-right") {
    emit_fig3(run_dir, manifest, out);
  } else if (figure_id == "fig4" || figure_id == "fig5") {
    emit_fig45(run_dir, manifest, out);
  } else {
    throw std::invalid_argument("unknown figure id '" + figure_id + "'");
  }
}

}  // namespace odelab::harness
