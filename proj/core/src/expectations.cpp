#include "esn2/expectations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "assembly.hpp"
#include "esn2/errors.hpp"
#include "esn2/parallel.hpp"
#include "esn2/special_fns.hpp"

namespace esn2 {

namespace {

constexpr double kDefaultHalfWidth = 5.0;
constexpr double kSdCover = 6.0;
constexpr double kMassDeficit = 1e-10;
constexpr std::size_t kInitialGrid = 8;
constexpr double kWidenFactor = 1.25;
constexpr int kMaxWidenings = 12;

void require_correlation(double lambda, const char* fn) {
  if (!(std::fabs(lambda) < 1.0)) {
    throw PreconditionError(std::string(fn) + ": |lambda| must be < 1");
  }
}

// The standardized ESN_2(0, Omegabar, alpha, tau) in rotated coordinates.
// With Omegabar = L L' and Q orthogonal with first column L'alpha / alpha*,
// Z = L Q S and S has density phi(s1) phi(s2) Phi(alpha0 + alpha* s1) / Phi(tau),
// so T depends on s1 alone and the integrands are smooth along s2.
struct StandardModel {
  double lambda, alpha1, alpha2, tau;
  double alpha0;
  double alpha_star;  // sqrt(alpha' Omegabar alpha)
  double m11, m12, m21, m22;
  double log_norm;  // -log(2 pi) - zeta0(tau)

  StandardModel(double lam, double a1, double a2, double t)
      : lambda(lam), alpha1(a1), alpha2(a2), tau(t) {
    const double c = std::sqrt(1.0 - lam * lam);
    const double b1 = a1 + lam * a2, b2 = c * a2;  // L'alpha
    const double astar_sq = a1 * a1 + a2 * a2 + 2.0 * a1 * a2 * lam;
    alpha_star = std::sqrt(std::max(astar_sq, 0.0));
    alpha0 = t * std::sqrt(1.0 + astar_sq);
    double q1 = 1.0, q2 = 0.0;
    const double norm = std::hypot(b1, b2);
    if (norm > 0.0) {
      q1 = b1 / norm;
      q2 = b2 / norm;
    }
    // L = [1 0; lam c], Q = [q1 -q2; q2 q1].
    m11 = q1;
    m12 = -q2;
    m21 = lam * q1 + c * q2;
    m22 = -lam * q2 + c * q1;
    log_norm = -std::log(2.0 * std::numbers::pi) - zeta0(t);
  }

  double t_of(double s1) const { return alpha0 + alpha_star * s1; }
  double z1_of(double s1, double s2) const { return m11 * s1 + m12 * s2; }
  double z2_of(double s1, double s2) const { return m21 * s1 + m22 * s2; }

  double density(double s1, double s2) const {
    return std::exp(log_norm - 0.5 * (s1 * s1 + s2 * s2) + zeta0(t_of(s1)));
  }

  // zeta1(t)^2 times the density
  double weighted(double s1, double s2) const {
    const double t = t_of(s1);
    const double r = zeta1(t);
    return r * r * std::exp(log_norm - 0.5 * (s1 * s1 + s2 * s2) + zeta0(t));
  }
};

// S1 is univariate ESN with shape alpha* and S2 is standard normal.
double s1_delta(const StandardModel& m) {
  return m.alpha_star / std::sqrt(1.0 + m.alpha_star * m.alpha_star);
}

std::array<double, 4> initial_box(const StandardModel& m) {
  std::array<double, 4> box{-kDefaultHalfWidth, -kDefaultHalfWidth, kDefaultHalfWidth,
                            kDefaultHalfWidth};
  const double d = s1_delta(m);
  if (std::fabs(m.tau) > 2.0 || d * std::fabs(m.tau) > 2.0) {
    const double mean = zeta1(m.tau) * d;
    const double sd = std::sqrt(std::max(1.0 + zeta2(m.tau) * d * d, 0.0));
    box[0] = std::min(box[0], mean - kSdCover * sd);
    box[2] = std::max(box[2], mean + kSdCover * sd);
  }
  return box;
}

// Mass of a univariate ESN marginal beyond `edge` (upper tail when upper is
// true). The marginal has density phi(s) Phi((tau + delta s) / sqrt(1 - delta^2)) / Phi(tau).
double marginal_tail(double edge, bool upper, double delta, double tau) {
  const double scale = 1.0 / std::sqrt(1.0 - delta * delta);
  const double z0tau = zeta0(tau);
  const double sign = upper ? 1.0 : -1.0;
  const auto f = [=](double x) {
    const double s = edge + sign * x;
    return std::exp(std_normal_logpdf(s) + zeta0((tau + delta * s) * scale) - z0tau);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

// Union bound on the mass outside the box from the four marginal tails.
double outside_mass_bound(const std::array<double, 4>& box, const StandardModel& m) {
  const double d = s1_delta(m);
  return marginal_tail(box[0], false, d, m.tau) + marginal_tail(box[2], true, d, m.tau) +
         std_normal_cdf(box[1]) + std_normal_cdf(-box[3]);
}

IntegrationBox box_for(const StandardModel& model) {
  std::array<double, 4> box = initial_box(model);
  IntegrationBox out;
  for (int k = 0;; ++k) {
    out.mass = 1.0 - outside_mass_bound(box, model);
    if (out.mass >= 1.0 - kMassDeficit || k == kMaxWidenings) break;
    for (int j = 0; j < 2; ++j) {
      const double c = 0.5 * (box[j] + box[j + 2]);
      const double h = 0.5 * (box[j + 2] - box[j]) * kWidenFactor;
      box[j] = c - h;
      box[j + 2] = c + h;
    }
  }
  out.lower = {box[0], box[1]};
  out.upper = {box[2], box[3]};
  return out;
}

StandardModel standard_model(const DpParams& dp) {
  const ModelTerms terms = model_terms(dp);
  return StandardModel(terms.lambda, dp.alpha1, dp.alpha2, dp.tau);
}

ATerms closed_form_a_terms(double lambda, double tau) {
  const double z = zeta1(tau);
  const double z2 = z * z;
  ATerms a;
  a.a0 = z2;
  a.a_1_1 = 0.0;
  a.a_2_1 = 0.0;
  a.a_1_2 = z2;
  a.a_2_2 = z2;
  a.a_12 = z2 * lambda;
  a.closed_form = true;
  return a;
}

}  // namespace

double lemma4_expectation(double lambda, double alpha1, double alpha2, double tau) {
  require_correlation(lambda, "lemma4_expectation");
  const double astar = alpha1 * alpha1 + alpha2 * alpha2 + 2.0 * alpha1 * alpha2 * lambda;
  return zeta1(tau) / std::sqrt(1.0 + astar);
}

UDistribution u_distribution(double lambda, double alpha1, double alpha2, double tau) {
  require_correlation(lambda, "u_distribution");
  const double astar = alpha1 * alpha1 + alpha2 * alpha2 + 2.0 * alpha1 * alpha2 * lambda;
  const double den = std::sqrt(1.0 + astar);
  const double l = 1.0 - lambda * lambda;
  const double delta1 = (alpha1 + lambda * alpha2) / den;
  const double delta2 = (alpha2 + lambda * alpha1) / den;
  UDistribution u;
  u.mean = Eigen::Vector2d(-tau * delta1, -tau * delta2);
  const double v11 = (1.0 + alpha2 * alpha2 * l) / (1.0 + astar);
  const double v22 = (1.0 + alpha1 * alpha1 * l) / (1.0 + astar);
  const double v12 = (lambda - alpha1 * alpha2 * l) / (1.0 + astar);
  u.cov << v11, v12, v12, v22;
  return u;
}

IntegrationBox integration_box(const DpParams& dp, const CubatureControls& controls) {
  validate(controls);
  return box_for(standard_model(dp));
}

CubatureResult standardized_expectation(const DpParams& dp, const StandardizedFunction& g,
                                        const CubatureControls& controls) {
  validate(controls);
  const StandardModel model = standard_model(dp);
  const IntegrationBox box = box_for(model);
  return integrate_2d(
      [&](double s1, double s2) {
        return g(model.z1_of(s1, s2), model.z2_of(s1, s2), model.t_of(s1)) *
               model.density(s1, s2);
      },
      box.lower, box.upper, controls, kInitialGrid);
}

ATerms a_terms(const DpParams& dp, const CubatureControls& controls) {
  validate(controls);
  const ModelTerms terms = model_terms(dp);
  if (dp.alpha1 == 0.0 && dp.alpha2 == 0.0) {
    return closed_form_a_terms(terms.lambda, dp.tau);
  }

  // Negating alpha negates the map S -> Z exactly and leaves T unchanged, so
  // reflected parameters give bit-identical even terms and negated odd terms.
  const StandardModel model(terms.lambda, dp.alpha1, dp.alpha2, dp.tau);
  const IntegrationBox ib = box_for(model);

  using Weight = double (*)(double, double);
  static constexpr std::array<Weight, 6> kWeights = {
      [](double, double) { return 1.0; },
      [](double z1, double) { return z1; },
      [](double, double z2) { return z2; },
      [](double z1, double) { return z1 * z1; },
      [](double, double z2) { return z2 * z2; },
      [](double z1, double z2) { return z1 * z2; },
  };
  std::array<CubatureResult, 6> results{};
  auto integrate = [&](std::size_t k, const CubatureControls& c) {
    const Weight w = kWeights[k];
    results[k] = integrate_2d(
        [&model, w](double s1, double s2) {
          return w(model.z1_of(s1, s2), model.z2_of(s1, s2)) * model.weighted(s1, s2);
        },
        ib.lower, ib.upper, c, kInitialGrid);
  };
  // Nonnegative integrands first; the signed ones can be near zero, so their
  // tolerance is taken relative to the Cauchy-Schwarz bound on their size.
  constexpr std::array<std::size_t, 3> kEven = {0, 3, 4};
  parallel_for(kEven.size(), [&](std::size_t i) { integrate(kEven[i], controls); });
  const double bounds[3] = {std::sqrt(results[0].value * results[3].value),
                            std::sqrt(results[0].value * results[4].value),
                            std::sqrt(results[3].value * results[4].value)};
  constexpr std::array<std::size_t, 3> kSigned = {1, 2, 5};
  parallel_for(kSigned.size(), [&](std::size_t i) {
    CubatureControls c = controls;
    c.abs_tol = std::max(controls.abs_tol, controls.rel_tol * bounds[i]);
    integrate(kSigned[i], c);
  });

  ATerms a;
  a.a0 = results[0].value;
  a.a_1_1 = results[1].value;
  a.a_2_1 = results[2].value;
  a.a_1_2 = results[3].value;
  a.a_2_2 = results[4].value;
  a.a_12 = results[5].value;
  a.box = {ib.lower[0], ib.lower[1], ib.upper[0], ib.upper[1]};
  a.box_mass = ib.mass;
  for (const auto& r : results) {
    a.converged = a.converged && r.converged;
    a.max_error = std::max(a.max_error, r.error_estimate);
    a.evals += r.evals;
  }
  return a;
}

ExpectationSet expectation_set(const DpParams& dp, const ATerms& a) {
  ExpectationSet e;
  e.a = a;
  detail::fill_expectations(detail::terms_of(dp, model_terms(dp)), a, e);
  return e;
}

ExpectationSet expectation_set(const DpParams& dp, const CubatureControls& controls) {
  return expectation_set(dp, a_terms(dp, controls));
}

InfoStatistics ExpectationSet::statistics() const {
  InfoStatistics s;
  s.one = 1.0;
  s.z1 = e_z1;
  s.z2 = e_z2;
  s.z1sq = e_z1sq;
  s.z2sq = e_z2sq;
  s.z1z2 = e_z1z2;
  s.zeta1 = e_zeta1;
  s.z1_zeta1 = e_z1_zeta1;
  s.z2_zeta1 = e_z2_zeta1;
  s.zeta2 = e_zeta2;
  s.z1_zeta2 = e_z1_zeta2;
  s.z2_zeta2 = e_z2_zeta2;
  s.z1sq_zeta2 = e_z1sq_zeta2;
  s.z2sq_zeta2 = e_z2sq_zeta2;
  s.z1z2_zeta2 = e_z1z2_zeta2;
  return s;
}

}  // namespace esn2
