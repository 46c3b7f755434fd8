#include "esn2/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "esn2/errors.hpp"
#include "esn2/likelihood.hpp"

namespace esn2 {

namespace {

using Vec = ParamVector;
using Mat = Matrix8;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxStep = 2.0;  // sup-norm cap on a step in internal coordinates

Vec to_internal(const DpParams& dp) {
  const double s = std::sqrt(dp.omega11 * dp.omega22);
  Vec eta;
  eta << dp.xi1, dp.xi2, std::log(dp.omega11), std::atanh(dp.omega12 / s), std::log(dp.omega22),
      dp.alpha1, dp.alpha2, dp.tau;
  return eta;
}

DpParams from_internal(const Vec& eta) {
  DpParams dp;
  dp.xi1 = eta(0);
  dp.xi2 = eta(1);
  dp.omega11 = std::exp(eta(2));
  dp.omega22 = std::exp(eta(4));
  dp.omega12 = std::tanh(eta(3)) * std::exp(0.5 * (eta(2) + eta(4)));
  dp.alpha1 = eta(5);
  dp.alpha2 = eta(6);
  dp.tau = eta(7);
  return dp;
}

// d theta / d eta.
Mat jacobian(const DpParams& dp) {
  const double s = std::sqrt(dp.omega11 * dp.omega22);
  const double lambda = dp.omega12 / s;
  Mat j = Mat::Identity();
  j(2, 2) = dp.omega11;
  j(4, 4) = dp.omega22;
  j(3, 3) = (1.0 - lambda * lambda) * s;
  j(3, 2) = 0.5 * dp.omega12;
  j(3, 4) = 0.5 * dp.omega12;
  return j;
}

// Objective F(eta) = -loglik / n with gradient and, optionally, hessian.
class Objective {
 public:
  explicit Objective(const Dataset& data) : data_(data), n_(static_cast<double>(data.size())) {}

  double value(const Vec& eta) const {
    const DpParams dp = from_internal(eta);
    if (!is_valid(dp)) return kInf;
    try {
      const double v = -loglik(dp, data_) / n_;
      return std::isfinite(v) ? v : kInf;
    } catch (const Error&) {
      return kInf;
    } catch (const std::domain_error&) {
      return kInf;
    }
  }

  Vec gradient(const Vec& eta) const {
    const DpParams dp = from_internal(eta);
    return -jacobian(dp).transpose() * score(dp, data_) / n_;
  }

  Mat hessian(const Vec& eta) const {
    const DpParams dp = from_internal(eta);
    const InfoStatistics s = observation_statistics(dp, data_);
    const Vec sc = score_from_statistics(dp, s);
    const Mat h = hessian_from_statistics(dp, s);
    const Mat j = jacobian(dp);
    Mat out = j.transpose() * h * j;
    // Second derivatives of the Omega entries with respect to eta.
    const double sq = std::sqrt(dp.omega11 * dp.omega22);
    const double lambda = dp.omega12 / sq;
    const double l = 1.0 - lambda * lambda;
    out(2, 2) += sc(2) * dp.omega11;
    out(4, 4) += sc(4) * dp.omega22;
    const double g12 = sc(3);
    out(2, 2) += g12 * dp.omega12 / 4.0;
    out(4, 4) += g12 * dp.omega12 / 4.0;
    out(2, 4) += g12 * dp.omega12 / 4.0;
    out(4, 2) += g12 * dp.omega12 / 4.0;
    out(2, 3) += g12 * l * sq / 2.0;
    out(3, 2) += g12 * l * sq / 2.0;
    out(4, 3) += g12 * l * sq / 2.0;
    out(3, 4) += g12 * l * sq / 2.0;
    out(3, 3) += g12 * (-2.0 * lambda * l * sq);
    return -out / n_;
  }

  double dp_score_norm(const Vec& eta) const {
    return score(from_internal(eta), data_).cwiseAbs().maxCoeff();
  }

 private:
  const Dataset& data_;
  double n_;
};

Vec cap(Vec p) {
  const double m = p.cwiseAbs().maxCoeff();
  if (m > kMaxStep) p *= kMaxStep / m;
  return p;
}

struct LineSearch {
  bool ok = false;
  Vec eta;
  double f = kInf;
};

LineSearch backtrack(const Objective& obj, const Vec& eta, double f, const Vec& g, const Vec& p) {
  const double slope = g.dot(p);
  LineSearch out;
  if (!(slope < 0.0)) return out;
  double step = 1.0;
  for (int k = 0; k < 60; ++k, step *= 0.5) {
    const double target = f + 1e-4 * step * slope;
    if (target == f) return out;  // required decrease below the resolution of f
    const Vec trial = eta + step * p;
    const double ft = obj.value(trial);
    if (ft <= target) {
      out.ok = true;
      out.eta = trial;
      out.f = ft;
      return out;
    }
  }
  return out;
}

}  // namespace

FitResult fit_mle(const Dataset& data, const DpParams& init, const FitControls& controls) {
  validate(init);
  if (data.size() < kMinFitObservations) {
    throw PreconditionError("fit_mle: at least 5 observations are required");
  }
  if (!(controls.grad_tol > 0.0)) throw PreconditionError("fit_mle: grad_tol must be positive");

  const Objective obj(data);
  Vec eta = to_internal(init);
  double f = obj.value(eta);
  if (!std::isfinite(f)) throw PreconditionError("fit_mle: log-likelihood is not finite at init");
  Vec g = obj.gradient(eta);

  FitResult result;
  std::size_t iter = 0;
  auto done = [&] { return obj.dp_score_norm(eta) < controls.grad_tol; };

  // Quasi-Newton phase, until the mean score is small.
  Mat hinv = Mat::Identity();
  bool first = true;
  while (iter < controls.max_iter && g.cwiseAbs().maxCoeff() > 1e-6 && !done()) {
    ++iter;
    const LineSearch ls = backtrack(obj, eta, f, g, cap(-hinv * g));
    if (!ls.ok) break;
    const Vec s = ls.eta - eta;
    const Vec g_new = obj.gradient(ls.eta);
    const Vec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first) {
        hinv = Mat::Identity() * (sy / y.dot(y));
        first = false;
      }
      const double rho = 1.0 / sy;
      const Mat a = Mat::Identity() - rho * s * y.transpose();
      hinv = a * hinv * a.transpose() + rho * s * s.transpose();
    }
    eta = ls.eta;
    f = ls.f;
    g = g_new;
  }

  // Newton polish on the analytic hessian.
  while (iter < controls.max_iter && !done()) {
    ++iter;
    Mat h = obj.hessian(eta);
    Vec p;
    bool solved = false;
    double mu = 0.0;
    for (int k = 0; k < 40; ++k) {
      Eigen::LLT<Mat> llt(h + mu * Mat::Identity());
      if (llt.info() == Eigen::Success) {
        p = llt.solve(-g);
        solved = true;
        break;
      }
      mu = mu == 0.0 ? 1e-8 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff()) : mu * 10.0;
    }
    if (!solved) break;
    p = cap(p);
    LineSearch ls = backtrack(obj, eta, f, g, p);
    if (!ls.ok) {
      // Near the optimum the decrease is below the rounding noise of F; accept
      // the full step when it reduces the gradient and F is unchanged to noise.
      const Vec trial = eta + p;
      const double ft = obj.value(trial);
      const double noise = 1e-12 * std::max(1.0, std::fabs(f));
      if (!(ft <= f + noise) || !(obj.gradient(trial).norm() < g.norm())) break;
      ls.ok = true;
      ls.eta = trial;
      ls.f = ft;
    }
    eta = ls.eta;
    f = ls.f;
    g = obj.gradient(eta);
  }

  result.dp_hat = from_internal(eta);
  result.final_score_norm = obj.dp_score_norm(eta);
  result.converged = result.final_score_norm < controls.grad_tol;
  result.loglik = loglik(result.dp_hat, data);
  result.iterations = iter;
  return result;
}

}  // namespace esn2
