#include "odelab/stability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace odelab {

namespace {

// Geometric grid of 64 samples on [mu, L] plus both endpoints.
std::vector<double> geometric_grid(double mu, double L) {
  std::vector<double> thetas;
  thetas.push_back(mu);
  const int n = 64;
  for (int i = 1; i <= n; ++i) {
    const double f = static_cast<double>(i) / (n + 1);
    thetas.push_back(mu * std::pow(L / mu, f));
  }
  thetas.push_back(L);
  return thetas;
}

}  // namespace

std::string euler_family_name(EulerFamily family) {
  return family == EulerFamily::HeavyBallEuler ? "heavy_ball_euler"
                                               : "nag_sc_euler";
}

std::pair<std::complex<double>, std::complex<double>> characteristic_roots(
    EulerFamily family, double theta, double mu, double s) {
  if (!(mu * s < 1.0))
    throw std::invalid_argument("characteristic_roots: mu * s < 1 required");
  if (theta < 0.0)
    throw std::invalid_argument("characteristic_roots: theta >= 0 required");
  const double r = std::sqrt(mu * s);

  // lambda^2 + b lambda + c = 0
  double b, c;
  if (family == EulerFamily::HeavyBallEuler) {
    b = -(2.0 - 2.0 * r);
    c = (1.0 - 2.0 * r) + (1.0 + r) * s * theta;
  } else {
    b = -(2.0 - 2.0 * r - s * theta);
    c = (1.0 - 2.0 * r) + r * s * theta;  // sqrt(mu s^3) theta = r * s * theta
  }

  const double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    // q carries the sign of -b so the addition never cancels
    const double q = (b >= 0.0) ? -0.5 * (b + sq) : -0.5 * (b - sq);
    double r1 = q;
    double r2 = (q != 0.0) ? c / q : 0.0;
    return {std::complex<double>(r1, 0.0), std::complex<double>(r2, 0.0)};
  }
  const double re = -0.5 * b;
  const double im = 0.5 * std::sqrt(-disc);
  return {std::complex<double>(re, im), std::complex<double>(re, -im)};
}

double spectral_radius(EulerFamily family, double theta, double mu, double s) {
  const auto [r1, r2] = characteristic_roots(family, theta, mu, s);
  return std::max(std::abs(r1), std::abs(r2));
}

std::vector<double> theta_probes(const Objective& obj, double mu) {
  if (obj.hessian_const) {
    Eigen::SelfAdjointEigenSolver<Mat> es(*obj.hessian_const);
    std::vector<double> thetas(es.eigenvalues().data(),
                               es.eigenvalues().data() + obj.dim);
    return thetas;
  }
  return geometric_grid(std::max(mu, 1e-16 * obj.lipschitz_L),
                        obj.lipschitz_L);
}

StabilityReport spectral_radius_verdict(EulerFamily family,
                                        const std::vector<double>& thetas,
                                        double mu, double s) {
  StabilityReport rep;
  rep.family = family;
  rep.mu = mu;
  rep.step_s = s;
  rep.eigen_samples = thetas;
  rep.spectral_radii.reserve(thetas.size());
  double worst = 0.0;
  for (double theta : thetas) {
    const double rad = spectral_radius(family, theta, mu, s);
    rep.spectral_radii.push_back(rad);
    worst = std::max(worst, rad);
  }
  rep.stable = worst <= 1.0 + 1e-12;
  rep.max_stable_step = std::numeric_limits<double>::quiet_NaN();
  return rep;
}

double max_stable_step(EulerFamily family, double mu, double L) {
  if (!(mu > 0.0 && mu <= L))
    throw std::invalid_argument("max_stable_step: 0 < mu <= L required");
  const auto thetas = geometric_grid(mu, L);
  auto stable_at = [&](double s) {
    if (!(mu * s < 1.0)) return false;
    for (double theta : thetas)
      if (spectral_radius(family, theta, mu, s) > 1.0 + 1e-12) return false;
    return true;
  };

  double lo = 1e-12 / L;
  if (!stable_at(lo)) return 0.0;
  double hi = 1.0 / L;
  int guard = 0;
  while (stable_at(hi) && guard++ < 80) {
    lo = hi;
    hi *= 2.0;
  }
  if (guard >= 80) return lo;

  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (stable_at(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace odelab
