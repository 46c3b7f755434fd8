#include "esn2/esn_model.hpp"

#include <cmath>
#include <numbers>

#include "esn2/errors.hpp"
#include "esn2/special_fns.hpp"

namespace esn2 {

namespace {

// log phi_2(d; Omega) for d = y - xi, written with Omega^-1 directly.
double log_normal2(double d1, double d2, const DpParams& dp) {
  const double det = dp.omega11 * dp.omega22 - dp.omega12 * dp.omega12;
  const double q = (dp.omega22 * d1 * d1 - 2.0 * dp.omega12 * d1 * d2 + dp.omega11 * d2 * d2) / det;
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * q;
}

}  // namespace

double density_esn1(double y, double xi, double omega_sq, double alpha, double tau) {
  if (!(omega_sq > 0.0) || !std::isfinite(omega_sq)) {
    throw NonPositiveDefiniteScale("density_esn1: omega_sq must be positive and finite");
  }
  if (!std::isfinite(y) || !std::isfinite(xi) || !std::isfinite(alpha) || !std::isfinite(tau)) {
    throw NonFiniteParameter("density_esn1: non-finite argument");
  }
  const double omega = std::sqrt(omega_sq);
  const double z = (y - xi) / omega;
  const double alpha0 = tau * std::sqrt(1.0 + alpha * alpha);
  return std::exp(std_normal_logpdf(z) + zeta0(alpha0 + alpha * z) - zeta0(tau)) / omega;
}

double density_normal2(double y1, double y2, const DpParams& dp) {
  validate(dp);
  return std::exp(log_normal2(y1 - dp.xi1, y2 - dp.xi2, dp));
}

double density_esn2(double y1, double y2, const DpParams& dp) {
  validate(dp);
  const double d1 = y1 - dp.xi1;
  const double d2 = y2 - dp.xi2;
  const double lambda = dp.omega12 / std::sqrt(dp.omega11 * dp.omega22);
  const double astar = dp.alpha1 * dp.alpha1 + dp.alpha2 * dp.alpha2 +
                       2.0 * dp.alpha1 * dp.alpha2 * lambda;
  const double alpha0 = dp.tau * std::sqrt(1.0 + astar);
  const double skew = alpha0 + dp.alpha1 * d1 / std::sqrt(dp.omega11) +
                      dp.alpha2 * d2 / std::sqrt(dp.omega22);
  return std::exp(log_normal2(d1, d2, dp) + zeta0(skew) - zeta0(dp.tau));
}

Moments2 moments_esn2(const DpParams& dp) {
  const ModelTerms m = model_terms(dp);
  const Eigen::Vector2d omega_delta(m.omega1 * m.delta.delta1, m.omega2 * m.delta.delta2);
  Eigen::Matrix2d big_omega;
  big_omega << dp.omega11, dp.omega12, dp.omega12, dp.omega22;
  Moments2 out;
  out.mean = Eigen::Vector2d(dp.xi1, dp.xi2) + m.zeta1_tau * omega_delta;
  out.covariance = big_omega + m.zeta2_tau * omega_delta * omega_delta.transpose();
  out.covariance(1, 0) = out.covariance(0, 1);
  return out;
}

double cgf_esn2(double t1, double t2, const DpParams& dp) {
  if (!std::isfinite(t1) || !std::isfinite(t2)) {
    throw NonFiniteParameter("cgf_esn2: non-finite argument");
  }
  const ModelTerms m = model_terms(dp);
  const double quad = dp.omega11 * t1 * t1 + 2.0 * dp.omega12 * t1 * t2 + dp.omega22 * t2 * t2;
  const double shift = m.delta.delta1 * m.omega1 * t1 + m.delta.delta2 * m.omega2 * t2;
  return dp.xi1 * t1 + dp.xi2 * t2 + 0.5 * quad + zeta0(dp.tau + shift) - m.zeta0_tau;
}

}  // namespace esn2
