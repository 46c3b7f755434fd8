// Quadruple precision expected information. This translation unit is built
// with GNU extensions for __float128.

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/float128.hpp>
#include <Eigen/Eigenvalues>

namespace Eigen {
template <>
struct NumTraits<boost::multiprecision::float128>
    : GenericNumTraits<boost::multiprecision::float128> {
  using Real = boost::multiprecision::float128;
  using NonInteger = Real;
  using Nested = Real;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8,
  };
  static Real dummy_precision() { return Real(1e-30); }
};
}  // namespace Eigen

#include "assembly.hpp"
#include "esn2/expected_info.hpp"
#include "esn2/special_fns.hpp"

namespace esn2 {

namespace {

using Quad = boost::multiprecision::float128;
using QuadMatrix = Eigen::Matrix<Quad, 8, 8>;

const Quad kLogSqrt2Pi = log(sqrt(2 * boost::math::constants::pi<Quad>()));
const Quad kSqrt2 = sqrt(Quad(2));

// Below this zeta_1 comes from the Mills-ratio continued fraction, which has
// converged to full quadruple precision by 100 terms there.
constexpr double kQuadLeftTail = -20.0;
constexpr int kQuadFractionTerms = 100;

Quad mills_tail_correction(const Quad& y) {
  Quad t = y;
  for (int k = kQuadFractionTerms; k >= 2; --k) t = y + k / t;
  return 1 / t;
}

Quad log_pdf(const Quad& x) { return -x * x / 2 - kLogSqrt2Pi; }

Quad zeta0(const Quad& x) {
  if (x < kQuadLeftTail) return log_pdf(x) - log(-x + mills_tail_correction(-x));
  if (x > 0) return log1p(-boost::math::erfc(x / kSqrt2) / 2);
  return log(boost::math::erfc(-x / kSqrt2) / 2);
}

struct QuadZeta {
  Quad z1, z2;
};

QuadZeta zeta12(const Quad& x) {
  if (x < kQuadLeftTail) {
    const Quad c = mills_tail_correction(-x);
    const Quad z1 = -x + c;
    return {z1, -z1 * c};
  }
  const Quad z1 = exp(log_pdf(x) - zeta0(x));
  return {z1, -z1 * (x + z1)};
}

detail::Terms<Quad> quad_terms(const DpParams& dp) {
  detail::Terms<Quad> m{};
  m.alpha1 = dp.alpha1;
  m.alpha2 = dp.alpha2;
  m.tau = dp.tau;
  m.omega11 = dp.omega11;
  m.omega22 = dp.omega22;
  m.omega1 = sqrt(m.omega11);
  m.omega2 = sqrt(m.omega22);
  m.lambda = Quad(dp.omega12) / (m.omega1 * m.omega2);
  m.one_minus_lsq = 1 - m.lambda * m.lambda;
  m.alpha_star_sq = m.alpha1 * m.alpha1 + m.alpha2 * m.alpha2 + 2 * m.alpha1 * m.alpha2 * m.lambda;
  m.den = sqrt(1 + m.alpha_star_sq);
  m.alpha0 = m.tau * m.den;
  m.delta1 = (m.alpha1 + m.lambda * m.alpha2) / m.den;
  m.delta2 = (m.alpha2 + m.lambda * m.alpha1) / m.den;
  const QuadZeta z = zeta12(m.tau);
  m.zeta1_tau = z.z1;
  m.zeta2_tau = z.z2;
  return m;
}

struct QuadATerms {
  Quad a0, a_1_1, a_2_1, a_1_2, a_2_2, a_12;
  double error = 0.0;
  bool converged = true;
};

// With Omegabar = L L' and Q the rotation taking e1 to L'alpha / alpha*,
// Z = L Q S where S2 is standard normal, independent of S1, and
// T = alpha0 + alpha* S1. Each a-term is then a combination of
//   J_k = E[S1^k zeta1(T)^2] = int s^k phi(s) phi(t)^2 / Phi(t) ds / Phi(tau).
QuadATerms quad_a_terms(const detail::Terms<Quad>& m) {
  const Quad c = sqrt(m.one_minus_lsq);
  const Quad b1 = m.alpha1 + m.lambda * m.alpha2;
  const Quad b2 = c * m.alpha2;
  const Quad astar = sqrt(b1 * b1 + b2 * b2);
  Quad q1 = 1, q2 = 0;
  if (astar > 0) {
    q1 = b1 / astar;
    q2 = b2 / astar;
  }
  const Quad m11 = q1, m12 = -q2;
  const Quad m21 = m.lambda * q1 + c * q2, m22 = -m.lambda * q2 + c * q1;
  const Quad z0tau = zeta0(m.tau);

  // log of the integrand without s^k is concave in s with curvature between
  // 1 + alpha*^2 and 1 + 2 alpha*^2; locate its mode and cover 18 sd each side.
  const double a = static_cast<double>(astar);
  const double a0 = static_cast<double>(m.alpha0);
  const auto slope = [a, a0](double s) {
    const double t = a0 + a * s;
    return -s - a * (2.0 * t + zeta1(t));
  };
  double lo = -1e4, hi = 1e4;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  const Quad centre = 0.5 * (lo + hi);
  const Quad half = 18 / sqrt(1 + astar * astar);

  const auto integrand = [&](int k) {
    return [&, k](const Quad& s) {
      const Quad t = m.alpha0 + astar * s;
      const Quad log_f = log_pdf(s) + 2 * log_pdf(t) - zeta0(t) - z0tau;
      const Quad f = exp(log_f);
      return k == 0 ? f : k == 1 ? s * f : s * s * f;
    };
  };
  using Rule = boost::math::quadrature::gauss_kronrod<Quad, 61>;
  const Quad tol = 1e-31;
  Quad J[3], err[3];
  for (int k = 0; k < 3; ++k) {
    J[k] = Rule::integrate(integrand(k), centre - half, centre + half, 20, tol, &err[k]);
  }

  QuadATerms out;
  out.a0 = J[0];
  out.a_1_1 = m11 * J[1];
  out.a_2_1 = m21 * J[1];
  out.a_1_2 = m11 * m11 * J[2] + m12 * m12 * J[0];
  out.a_2_2 = m21 * m21 * J[2] + m22 * m22 * J[0];
  out.a_12 = m11 * m21 * J[2] + m12 * m22 * J[0];
  // boost reports the absolute error; J_1 is judged against sqrt(J_0 J_2).
  const Quad scale[3] = {J[0], sqrt(J[0] * J[2]), J[2]};
  for (int k = 0; k < 3; ++k) {
    const Quad rel = scale[k] > 0 ? err[k] / scale[k] : err[k];
    out.error = std::max(out.error, static_cast<double>(rel));
    out.converged = out.converged && rel <= 1e-28;
  }
  return out;
}

struct QuadExpectations {
  Quad e_zeta1, e_z1_zeta1, e_z2_zeta1, e_z1sq_zeta1, e_z2sq_zeta1, e_t_zeta1, e_z1t_zeta1,
      e_z2t_zeta1;
  Quad e_zeta2, e_z1_zeta2, e_z2_zeta2, e_z1sq_zeta2, e_z2sq_zeta2, e_z1z2_zeta2;
  Quad e_z1, e_z2, e_z1sq, e_z2sq, e_z1z2;
};

struct QuadStatistics {
  Quad one, z1, z2, z1sq, z2sq, z1z2, zeta1, z1_zeta1, z2_zeta1, zeta2, z1_zeta2, z2_zeta2,
      z1sq_zeta2, z2sq_zeta2, z1z2_zeta2;
};

QuadStatistics statistics_of(const QuadExpectations& e) {
  return {1,
          e.e_z1,
          e.e_z2,
          e.e_z1sq,
          e.e_z2sq,
          e.e_z1z2,
          e.e_zeta1,
          e.e_z1_zeta1,
          e.e_z2_zeta1,
          e.e_zeta2,
          e.e_z1_zeta2,
          e.e_z2_zeta2,
          e.e_z1sq_zeta2,
          e.e_z2sq_zeta2,
          e.e_z1z2_zeta2};
}

}  // namespace

ExtendedInfoResult expected_info_extended(const DpParams& dp) {
  validate(dp);
  const detail::Terms<Quad> m = quad_terms(dp);
  const QuadATerms a = quad_a_terms(m);
  QuadExpectations e{};
  detail::fill_expectations(m, a, e);
  const QuadMatrix info = -detail::hessian(detail::coefficients(m), statistics_of(e));

  Eigen::SelfAdjointEigenSolver<QuadMatrix> solver(info, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();

  ExtendedInfoResult out;
  out.info.kind = InfoKind::expected;
  out.info.values = info.cast<double>();
  out.spectrum.eigenvalues.resize(8);
  for (int i = 0; i < 8; ++i) out.spectrum.eigenvalues(i) = static_cast<double>(ev(i));
  out.spectrum.det = static_cast<double>(ev.prod());
  out.spectrum.min_eigenvalue = out.spectrum.eigenvalues(0);
  out.quadrature_error = a.error;
  out.converged = a.converged;
  return out;
}

}  // namespace esn2
