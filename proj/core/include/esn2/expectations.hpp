#pragma once

#include <array>
#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "esn2/cubature.hpp"
#include "esn2/likelihood.hpp"
#include "esn2/params.hpp"

namespace esn2 {

// Expectations under the standardized variable Z = omega^-1 (Y - xi), which
// is ESN_2(0, Omegabar, alpha, tau), of functions of Z and T = alpha0 + alpha'Z.

/// E[zeta1(T)] = zeta1(tau) / sqrt(1 + alpha*^2). Requires |lambda| < 1.
double lemma4_expectation(double lambda, double alpha1, double alpha2, double tau);

/// U ~ N_2(-tau delta, Omegabar - delta delta'), the variable for which
/// E[h(Z) zeta1(T)] = E[zeta1(T)] E[h(U)].
struct UDistribution {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
};

/// Covariance taken from the closed forms
///   v11 = (1 + alpha2^2 (1 - lambda^2)) / (1 + alpha*^2)
///   v22 = (1 + alpha1^2 (1 - lambda^2)) / (1 + alpha*^2)
///   v12 = (lambda - alpha1 alpha2 (1 - lambda^2)) / (1 + alpha*^2)
UDistribution u_distribution(double lambda, double alpha1, double alpha2, double tau);

/// a0 = E[zeta1(T)^2], a_j_p = E[Z_j^p zeta1(T)^2], a_12 = E[Z1 Z2 zeta1(T)^2].
struct ATerms {
  double a0 = 0.0;
  double a_1_1 = 0.0;
  double a_2_1 = 0.0;
  double a_1_2 = 0.0;
  double a_2_2 = 0.0;
  double a_12 = 0.0;

  /// False when any of the six integrals hit the evaluation budget.
  bool converged = true;
  /// Largest cubature error estimate among the six integrals.
  double max_error = 0.0;
  std::size_t evals = 0;
  /// Integration box in the rotated coordinates S of integration_box():
  /// {lower1, lower2, upper1, upper2}.
  std::array<double, 4> box{};
  /// Lower bound on the standardized density mass in the box (1 in closed form).
  double box_mass = 1.0;
  bool closed_form = false;
};

/// Integrals over the standardized density are taken in rotated coordinates
/// S = (L Q)^-1 Z, where Omegabar = L L' (Cholesky) and Q is the rotation
/// taking e1 to L'alpha / alpha*. S1 is univariate ESN(0, 1, alpha*, tau), S2
/// is standard normal and independent of S1, and T = alpha0 + alpha* S1.
///
/// The box in S starts at [-5, 5]^2; when |tau| > 2 or delta* |tau| > 2
/// (delta* = alpha* / sqrt(1 + alpha*^2)) the S1 side is extended to cover
/// E[S1] +- 6 sd(S1), and the box is widened further until the mass inside is
/// at least 1 - 1e-10. The mass outside is bounded by the four marginal tail
/// masses, each a 1-D quadrature.
struct IntegrationBox {
  std::array<double, 2> lower{};
  std::array<double, 2> upper{};
  /// Lower bound on the density mass inside.
  double mass = 0.0;
};

IntegrationBox integration_box(const DpParams& dp, const CubatureControls& controls = {});

/// Function of (z1, z2, t) with t = alpha0 + alpha1 z1 + alpha2 z2.
using StandardizedFunction = std::function<double(double, double, double)>;

/// E[g(Z1, Z2, T)] by direct cubature over integration_box(dp), in the rotated coordinates.
CubatureResult standardized_expectation(const DpParams& dp, const StandardizedFunction& g,
                                        const CubatureControls& controls = {});

/// Computes the six a-terms by adaptive cubature of z1^p z2^q zeta1(t(z))^2
/// against the standardized density. At alpha = (0, 0) they are evaluated in
/// closed form instead (T is then the constant tau). The integrals run over
/// integration_box() in the rotated coordinates. The signed integrals (a_1_1, a_2_1, a_12) meet the
/// relative tolerance against their Cauchy-Schwarz bound, e.g.
/// sqrt(a0 a_1_2) for a_1_1, since their value itself may vanish.
ATerms a_terms(const DpParams& dp, const CubatureControls& controls = {});

/// Every expectation entering the expected information matrix.
struct ExpectationSet {
  double e_zeta1 = 0.0;
  double e_z1_zeta1 = 0.0;
  double e_z2_zeta1 = 0.0;
  double e_z1sq_zeta1 = 0.0;
  double e_z2sq_zeta1 = 0.0;
  double e_t_zeta1 = 0.0;
  double e_z1t_zeta1 = 0.0;
  double e_z2t_zeta1 = 0.0;

  double e_zeta2 = 0.0;
  double e_z1_zeta2 = 0.0;
  double e_z2_zeta2 = 0.0;
  double e_z1sq_zeta2 = 0.0;
  double e_z2sq_zeta2 = 0.0;
  double e_z1z2_zeta2 = 0.0;

  ATerms a;

  double e_z1 = 0.0;
  double e_z2 = 0.0;
  double e_z1z2 = 0.0;
  double e_z1sq = 0.0;
  double e_z2sq = 0.0;

  /// The expectations the score and hessian depend on, with one = 1.
  InfoStatistics statistics() const;
};

/// Closed-form part from the zeta functions, delta, the U moments and alpha0;
/// each zeta2 expectation is (closed form) - (a-term).
ExpectationSet expectation_set(const DpParams& dp, const ATerms& a);
ExpectationSet expectation_set(const DpParams& dp, const CubatureControls& controls = {});

}  // namespace esn2
