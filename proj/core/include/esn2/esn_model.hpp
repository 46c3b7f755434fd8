#pragma once

#include <Eigen/Core>

#include "esn2/params.hpp"

namespace esn2 {

/// Univariate extended skew-normal density with location xi, scale^2 omega_sq,
/// shape alpha and truncation tau.
double density_esn1(double y, double xi, double omega_sq, double alpha, double tau);

/// Bivariate normal density N_2(xi, Omega) at y, i.e. the alpha = 0, tau = 0 member.
double density_normal2(double y1, double y2, const DpParams& dp);

/// Bivariate extended skew-normal density
///   phi_2(y - xi; Omega) Phi(alpha0 + alpha' omega^-1 (y - xi)) / Phi(tau).
double density_esn2(double y1, double y2, const DpParams& dp);

struct Moments2 {
  Eigen::Vector2d mean;
  Eigen::Matrix2d covariance;
};

/// E[Y] = xi + zeta1(tau) omega delta, Var[Y] = Omega + zeta2(tau) omega delta delta' omega.
Moments2 moments_esn2(const DpParams& dp);

/// K_Y(t) = xi't + t'Omega t / 2 + zeta0(tau + delta' omega t) - zeta0(tau).
double cgf_esn2(double t1, double t2, const DpParams& dp);

}  // namespace esn2
