#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "odelab/lyapunov.hpp"
#include "odelab/odes.hpp"
#include "test_support.hpp"

using namespace odelab;
using namespace odelab::testing;

namespace {

Objective fig1_quadratic() {
  QuadraticSpec spec;
  spec.hessian_diag = Vec{{0.01, 2.0}};
  spec.linear = Vec::Zero(2);
  return make_quadratic(spec);
}

Objective fig2_right_quadratic() {
  QuadraticSpec spec;
  spec.hessian_diag = Vec{{0.04, 0.01}};
  spec.linear = Vec::Zero(2);
  return make_quadratic(spec);
}

Objective scalar_quadratic(double theta) {
  QuadraticSpec spec;
  spec.hessian_diag = Vec::Constant(1, theta);
  spec.linear = Vec::Zero(1);
  return make_quadratic(spec);
}

Objective constant_objective() {
  QuadraticSpec spec;
  spec.hessian_diag = Vec::Zero(2);
  spec.linear = Vec::Zero(2);
  return make_quadratic(spec);
}

OdeSpec make_ode(OdeFamily family, double s, double mu = 0.0,
                 double alpha = 3.0, double beta = 1.0) {
  OdeSpec spec;
  spec.family = family;
  spec.step_s = s;
  spec.mu = mu;
  spec.alpha_param = alpha;
  spec.beta_param = beta;
  return spec;
}

MethodSpec make_method(MethodKind kind, double s, double mu = 0.0) {
  MethodSpec spec;
  spec.kind = kind;
  spec.step_s = s;
  spec.mu = mu;
  return spec;
}

}  // namespace

TEST_CASE("vector field vanishes at equilibrium") {
  const Objective obj = fig1_quadratic();
  for (OdeFamily family : {OdeFamily::HeavyBallHigh, OdeFamily::NagScHigh,
                           OdeFamily::NagCHigh, OdeFamily::GeneralizedHigh,
                           OdeFamily::StronglyConvexLow}) {
    const OdeSpec spec = make_ode(family, 0.125, 0.01, 4.0, 1.0);
    OdeState st{std::max(spec.t_start(), 1.0), *obj.minimizer, Vec::Zero(2)};
    Vec dx, dv;
    vector_field(spec, obj, st, dx, dv);
    REQUIRE(dx.norm() == 0.0);
    REQUIRE(dv.norm() == 0.0);
  }
}

TEST_CASE("high-resolution fields degenerate to low-resolution at s = 0") {
  const Objective obj = fig1_quadratic();
  rng::Xoshiro256pp gen(5, "field-degeneracy");
  const OdeSpec sc_low = make_ode(OdeFamily::StronglyConvexLow, 0.0, 0.01);
  const OdeSpec nagc_low = make_ode(OdeFamily::NagCLow, 0.0);
  for (int i = 0; i < 50; ++i) {
    OdeState st{gen.uniform(0.5, 5.0), random_point(gen, 2, -2.0, 2.0),
                random_point(gen, 2, -1.0, 1.0)};
    Vec dx1, dv1, dx2, dv2;
    for (OdeFamily high : {OdeFamily::HeavyBallHigh, OdeFamily::NagScHigh}) {
      vector_field(make_ode(high, 0.0, 0.01), obj, st, dx1, dv1);
      vector_field(sc_low, obj, st, dx2, dv2);
      REQUIRE((dx1 - dx2).norm() == 0.0);
      REQUIRE((dv1 - dv2).norm() == 0.0);
    }
    vector_field(make_ode(OdeFamily::NagCHigh, 0.0), obj, st, dx1, dv1);
    vector_field(nagc_low, obj, st, dx2, dv2);
    REQUIRE((dv1 - dv2).norm() == 0.0);
  }
}

TEST_CASE("nag-sc high field against a matrix-arithmetic oracle") {
  const Objective obj = fig1_quadratic();
  const double s = 0.25, mu = 0.01;
  const OdeSpec spec = make_ode(OdeFamily::NagScHigh, s, mu);
  OdeState st{1.0, Vec{{1.0, 1.0}}, Vec{{0.1, -0.2}}};
  Vec dx, dv;
  vector_field(spec, obj, st, dx, dv);
  const Mat& H = *obj.hessian_const;
  const Vec oracle = -2.0 * std::sqrt(mu) * st.v - std::sqrt(s) * H * st.v -
                     (1.0 + std::sqrt(mu * s)) * H * st.x;
  CHECK((dv - oracle).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((dx - st.v).norm() == 0.0);
}

TEST_CASE("time-dependent friction rejects t <= 0") {
  const Objective obj = fig1_quadratic();
  const OdeSpec spec = make_ode(OdeFamily::NagCHigh, 0.04);
  OdeState st{0.0, Vec{{1.0, 1.0}}, Vec::Zero(2)};
  Vec dx, dv;
  CHECK_THROWS_AS(vector_field(spec, obj, st, dx, dv), std::invalid_argument);
}

TEST_CASE("initial states per family") {
  const Objective obj = fig1_quadratic();
  const Vec x0{{1.0, 1.0}};

  // stationary start has zero velocity in every family
  for (OdeFamily family :
       {OdeFamily::HeavyBallHigh, OdeFamily::NagScHigh, OdeFamily::NagCHigh,
        OdeFamily::GeneralizedHigh, OdeFamily::StronglyConvexLow,
        OdeFamily::NagCLow})
    REQUIRE(initial_state(make_ode(family, 0.04, 0.01, 4.0, 1.0), obj,
                          *obj.minimizer)
                .v.norm() == 0.0);

  const OdeState nagc =
      initial_state(make_ode(OdeFamily::NagCHigh, 0.04), obj, x0);
  CHECK(nagc.t == doctest::Approx(0.3).epsilon(1e-15));
  CHECK((nagc.v + 0.2 * obj.gradient(x0)).norm() <= 1e-16);

  const OdeState hb =
      initial_state(make_ode(OdeFamily::HeavyBallHigh, 0.04, 0.01), obj, x0);
  const OdeState sc =
      initial_state(make_ode(OdeFamily::NagScHigh, 0.04, 0.01), obj, x0);
  CHECK((hb.v - sc.v).norm() == 0.0);

  const OdeState low =
      initial_state(make_ode(OdeFamily::NagCLow, 0.0), obj, x0);
  CHECK(low.t == 0.0);
  CHECK(low.v.norm() == 0.0);
}

TEST_CASE("rk4 keeps a flat objective at rest") {
  const Objective obj = constant_objective();
  const OdeSpec spec = make_ode(OdeFamily::StronglyConvexLow, 0.0, 0.01);
  const OdeState init{0.0, Vec{{0.7, -0.3}}, Vec::Zero(2)};
  const auto traj = integrate_rk4(spec, obj, init, 5.0, 0.01);
  for (const auto& x : traj.xs) REQUIRE((x - init.x).norm() == 0.0);
}

TEST_CASE("rk4 matches the heavy-ball closed form") {
  const Objective obj = scalar_quadratic(1.0);
  const OdeSpec spec = make_ode(OdeFamily::HeavyBallHigh, 0.1, 0.25);
  const OdeState init = initial_state(spec, obj, Vec::Ones(1));
  const auto traj = integrate_rk4(spec, obj, init, 5.0, 1e-3, {5.0});
  REQUIRE(traj.size() == 1);
  const auto cf =
      closed_form_quadratic(OdeFamily::HeavyBallHigh, 1.0, 0.25, 0.1, 5.0);
  CHECK(close_rel(traj.xs[0][0], cf.x, 1e-8));
}

TEST_CASE("rk4 is fourth order on every shipped objective (Richardson)") {
  struct Case {
    Objective obj;
    OdeFamily family;
  };
  const std::vector<Case> cases = {
      {fig1_quadratic(), OdeFamily::NagScHigh},
      {fig2_right_quadratic(), OdeFamily::NagCHigh},
      {make_random_psd_quadratic(10, 4), OdeFamily::NagScHigh},
      {make_log_sum_exp_random(40, 10, 20.0, 11), OdeFamily::NagCHigh},
  };
  for (const auto& c : cases) {
    CAPTURE(c.obj.id);
    const double s = 0.5 / c.obj.lipschitz_L;
    const double mu = c.obj.strong_mu;
    const OdeSpec spec = make_ode(c.family, s, mu);
    rng::Xoshiro256pp gen(rng::fnv1a64(c.obj.id), "rk4-order-x0");
    const OdeState init =
        initial_state(spec, c.obj, random_point(gen, c.obj.dim, -1.0, 1.0));
    const double t_end = init.t + 1.0;
    auto terminal = [&](double h) {
      const auto traj = integrate_rk4(spec, c.obj, init, t_end, h, {t_end});
      return traj.xs.at(0);
    };
    const Vec ref = terminal(1.0 / 2048.0);
    const double e1 = (terminal(1.0 / 16.0) - ref).norm();
    const double e2 = (terminal(1.0 / 32.0) - ref).norm();
    const double ratio = e1 / e2;
    CAPTURE(e1);
    REQUIRE(ratio >= 12.0);
    REQUIRE(ratio <= 20.0);
  }
}

TEST_CASE("hermite sampling agrees with a fine reference") {
  const Objective obj = fig1_quadratic();
  const OdeSpec spec = make_ode(OdeFamily::NagScHigh, 0.125, 0.01);
  const OdeState init = initial_state(spec, obj, Vec{{1.0, 1.0}});
  // sample times that straddle integration nodes
  const std::vector<double> samples = {0.05, 1.234, 2.5, 3.999};
  const auto traj = integrate_rk4(spec, obj, init, 4.0, 0.01, samples);
  REQUIRE(traj.size() == samples.size());
  const auto fine = integrate_rk4(spec, obj, init, 4.0, 1e-4, samples);
  for (std::size_t i = 0; i < samples.size(); ++i)
    REQUIRE(close_vec(traj.xs[i], fine.xs[i], 1e-7, 1e-10));
}

TEST_CASE("forward euler constant on flat objectives") {
  const Objective obj = constant_objective();
  const OdeSpec spec = make_ode(OdeFamily::HeavyBallHigh, 0.1, 0.01);
  const Vec x0{{1.0, 2.0}};
  const auto xs = integrate_forward_euler_secondorder(spec, obj, {x0, x0}, 50);
  for (const auto& x : xs) REQUIRE((x - x0).norm() == 0.0);
}

TEST_CASE("forward euler equals the companion-matrix recurrence") {
  const double theta = 0.8, mu = 0.05, s = 0.3;
  const Objective obj = scalar_quadratic(theta);
  const double r = std::sqrt(mu * s);
  for (OdeFamily family : {OdeFamily::HeavyBallHigh, OdeFamily::NagScHigh}) {
    const OdeSpec spec = make_ode(family, s, mu);
    const std::pair<Vec, Vec> init{Vec::Ones(1), Vec::Constant(1, 0.9)};
    const auto xs = integrate_forward_euler_secondorder(spec, obj, init, 200);

    double a, b;
    if (family == OdeFamily::HeavyBallHigh) {
      a = 2.0 - 2.0 * r;
      b = -1.0 + 2.0 * r - s * (1.0 + r) * theta;
    } else {
      a = 2.0 - 2.0 * r - s * theta;
      b = -1.0 + 2.0 * r - r * s * theta;
    }
    // companion-matrix power: [x_{k+1}, x_k] = M [x_k, x_{k-1}]
    Eigen::Matrix2d M;
    M << a, b, 1.0, 0.0;
    Eigen::Vector2d state(0.9, 1.0);
    REQUIRE(xs.size() == 202);
    for (std::size_t k = 2; k < xs.size(); ++k) {
      state = M * state;
      REQUIRE(std::abs(xs[k][0] - state[0]) <=
              1e-10 * (1.0 + std::abs(state[0])));
    }
  }
}

TEST_CASE("heavy-ball euler blows up past the stability boundary") {
  // s = 1.0 violates the heavy-ball step bound s = O(mu/L^2)
  const Objective obj = scalar_quadratic(1.0);
  const OdeSpec spec = make_ode(OdeFamily::HeavyBallHigh, 1.0, 0.01);
  const auto xs = integrate_forward_euler_secondorder(
      spec, obj, {Vec::Ones(1), Vec::Constant(1, 0.99)}, 200);
  double max_abs = 0.0;
  for (const auto& x : xs) max_abs = std::max(max_abs, std::abs(x[0]));
  CHECK(max_abs > 1e6);
}

TEST_CASE("symplectic scheme: rest state and dense-vs-cg agreement") {
  const Objective flat = constant_objective();
  const auto rest =
      integrate_symplectic_nag_sc(flat, Vec{{1.0, 1.0}}, 0.01, 0.125, 20);
  for (const auto& st : rest) REQUIRE((st.x - Vec{{1.0, 1.0}}).norm() == 0.0);

  const Objective obj = fig1_quadratic();
  Objective matrix_free = obj;
  matrix_free.hessian_const.reset();  // forces the CG path
  const auto dense =
      integrate_symplectic_nag_sc(obj, Vec{{1.0, 1.0}}, 0.01, 0.125, 300);
  const auto cg = integrate_symplectic_nag_sc(matrix_free, Vec{{1.0, 1.0}},
                                              0.01, 0.125, 300);
  REQUIRE(dense.size() == cg.size());
  for (std::size_t k = 0; k < dense.size(); ++k) {
    REQUIRE((dense[k].x - cg[k].x).norm() <= 1e-10);
    REQUIRE((dense[k].v - cg[k].v).norm() <= 1e-10);
  }
}

TEST_CASE("symplectic energy decay (observational, not asserted)") {
  const Objective obj = fig1_quadratic();
  const double s = 0.125, mu = 0.01;
  const auto states =
      integrate_symplectic_nag_sc(obj, Vec{{1.0, 1.0}}, mu, s, 500);
  LyapunovSpec lspec;
  lspec.variant = LyapunovVariant::ContNagSc;
  lspec.s = s;
  lspec.mu = mu;
  long increases = 0;
  double prev = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    OdeState st{static_cast<double>(states[k].k) * std::sqrt(s), states[k].x,
                states[k].v};
    const double e = eval_continuous(lspec, obj, st);
    if (k > 0 && e > prev + 1e-10) ++increases;
    prev = e;
  }
  if (increases > 0)
    MESSAGE("energy increased along symplectic iterates at ", increases,
            " of ", states.size() - 1, " steps");
  CHECK(std::isfinite(prev));
}

TEST_CASE("closed-form classifications") {
  // low-resolution critical case at theta = mu
  const auto low =
      closed_form_quadratic(OdeFamily::StronglyConvexLow, 0.25, 0.25, 0.1, 1.0);
  CHECK(low.classification == QuadClass::Critical);
  const auto low_osc =
      closed_form_quadratic(OdeFamily::StronglyConvexLow, 1.0, 0.25, 0.1, 1.0);
  CHECK(low_osc.classification == QuadClass::Oscillatory);

  // heavy-ball high-resolution: always oscillatory
  for (double theta : {0.25, 0.5, 1.0})
    CHECK(closed_form_quadratic(OdeFamily::HeavyBallHigh, theta, 0.25, 0.1, 1.0)
              .classification == QuadClass::Oscillatory);

  // nag-sc with s >= 2 never oscillates on [mu, L]
  for (double theta : {0.5, 0.75, 1.0}) {
    const auto r =
        closed_form_quadratic(OdeFamily::NagScHigh, theta, 0.5, 2.0, 1.0);
    CHECK(r.classification != QuadClass::Oscillatory);
  }
  // the boundary case is exactly critical: 4(theta-mu)/theta^2 = s
  CHECK(closed_form_quadratic(OdeFamily::NagScHigh, 1.0, 0.5, 2.0, 1.0)
            .classification == QuadClass::Critical);

  CHECK_THROWS_AS(
      closed_form_quadratic(OdeFamily::NagScHigh, 0.1, 0.25, 0.1, 1.0),
      std::invalid_argument);  // mu > theta
}

TEST_CASE("classification agrees with the discriminant sign") {
  rng::Xoshiro256pp gen(17, "classification-grid");
  for (int i = 0; i < 200; ++i) {
    const double mu = gen.uniform(0.01, 0.5);
    const double theta = mu + gen.uniform(0.0, 1.0);
    const double s = gen.uniform(0.01, 3.0);
    const auto r =
        closed_form_quadratic(OdeFamily::NagScHigh, theta, mu, s, 1.0);
    const double disc = 4.0 * (mu - theta) + s * theta * theta;
    if (std::abs(disc) <= 1e-13 * std::max(1.0, std::abs(4.0 * (mu - theta))))
      continue;  // knife-edge; covered by the exact boundary case above
    REQUIRE(r.classification ==
            (disc < 0.0 ? QuadClass::Oscillatory : QuadClass::Overdamped));
  }
}

TEST_CASE("closed forms match rk4 across the criterion triplets") {
  const struct {
    double theta, mu, s;
  } cases[] = {{1.0, 0.25, 0.1}, {1.0, 1.0, 0.25}, {0.01, 0.01, 0.5}};
  for (const auto& c : cases) {
    const Objective obj = scalar_quadratic(c.theta);
    for (OdeFamily family : {OdeFamily::HeavyBallHigh, OdeFamily::NagScHigh,
                             OdeFamily::StronglyConvexLow}) {
      CAPTURE(static_cast<int>(family));
      CAPTURE(c.theta);
      const double ode_s = family == OdeFamily::StronglyConvexLow ? 0.0 : c.s;
      const OdeSpec spec = make_ode(family, ode_s, c.mu);
      const OdeState init = initial_state(spec, obj, Vec::Ones(1));
      const auto traj = integrate_rk4(spec, obj, init, 5.0, 1e-3, {5.0});
      const auto cf = closed_form_quadratic(family, c.theta, c.mu, c.s, 5.0);
      REQUIRE(close_rel(traj.xs.at(0)[0], cf.x, 1e-7, 1e-12));
    }
  }
}

TEST_CASE("init_two_point is reserved for the strongly convex methods") {
  const Objective obj = fig1_quadratic();
  MethodSpec spec = make_method(MethodKind::NagC, 0.1);
  CHECK_THROWS_AS(init_two_point(spec, obj, Vec{{1.0, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("deviation vanishes from a stationary start") {
  const Objective obj = fig1_quadratic();
  const MethodSpec m = make_method(MethodKind::NagSc, 0.01, 0.01);
  const Trajectory traj = run(m, obj, *obj.minimizer, 60);
  const OdeSpec spec = make_ode(OdeFamily::NagScHigh, 0.01, 0.01);
  CHECK(discrete_ode_deviation(traj, spec, obj, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("deviation shrinks with the step size (Propositions 1 and 2)") {
  const Objective fig1 = fig1_quadratic();
  const Objective fig2 = fig2_right_quadratic();
  const Vec x0{{1.0, 1.0}};
  const double T = 5.0;

  auto deviation = [&](const Objective& obj, MethodKind kind, OdeFamily family,
                       double s) {
    const MethodSpec m = make_method(kind, s, obj.strong_mu);
    const long steps = static_cast<long>(std::ceil(T / std::sqrt(s))) + 1;
    const Trajectory traj = run(m, obj, x0, steps);
    const OdeSpec spec = make_ode(family, s, obj.strong_mu);
    return discrete_ode_deviation(traj, spec, obj, T);
  };

  for (auto [kind, family] :
       {std::pair{MethodKind::HeavyBall, OdeFamily::HeavyBallHigh},
        std::pair{MethodKind::NagSc, OdeFamily::NagScHigh}}) {
    const double d1 = deviation(fig1, kind, family, 1e-1);
    const double d2 = deviation(fig1, kind, family, 1e-2);
    const double d3 = deviation(fig1, kind, family, 1e-3);
    CAPTURE(static_cast<int>(kind));
    CHECK(d3 < d2);
    CHECK(d2 < d1);
  }
  const double c1 =
      deviation(fig2, MethodKind::NagC, OdeFamily::NagCHigh, 1e-1);
  const double c2 =
      deviation(fig2, MethodKind::NagC, OdeFamily::NagCHigh, 1e-2);
  const double c3 =
      deviation(fig2, MethodKind::NagC, OdeFamily::NagCHigh, 1e-3);
  CHECK(c3 < c2);
  CHECK(c2 < c1);
}
