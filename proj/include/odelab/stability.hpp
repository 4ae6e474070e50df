#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "odelab/objectives.hpp"

namespace odelab {

enum class EulerFamily { HeavyBallEuler, NagScEuler };

std::string euler_family_name(EulerFamily family);

// Roots of the scheme's characteristic polynomial in the eigen-direction
// with Hessian eigenvalue theta. Computed cancellation-free: the larger
// root first, the other from the product of roots.
std::pair<std::complex<double>, std::complex<double>> characteristic_roots(
    EulerFamily family, double theta, double mu, double s);

double spectral_radius(EulerFamily family, double theta, double mu, double s);

struct StabilityReport {
  EulerFamily family = EulerFamily::HeavyBallEuler;
  double mu = 0.0;
  double step_s = 0.0;
  std::vector<double> eigen_samples;
  std::vector<double> spectral_radii;
  bool stable = false;  // all radii <= 1 + 1e-12
  double max_stable_step = 0.0;
};

// Eigenvalue probes for an objective: exact eigenvalues for quadratics,
// otherwise a 64-point geometric grid on [mu, L] plus endpoints.
std::vector<double> theta_probes(const Objective& obj, double mu);

StabilityReport spectral_radius_verdict(EulerFamily family,
                                        const std::vector<double>& thetas,
                                        double mu, double s);

// Largest stable step found by bisection (relative tolerance 1e-10) of the
// verdict over a geometric theta grid on [mu, L].
double max_stable_step(EulerFamily family, double mu, double L);

}  // namespace odelab
