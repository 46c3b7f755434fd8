#include "esn2/params.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "esn2/errors.hpp"
#include "esn2/special_fns.hpp"

namespace esn2 {

namespace {

constexpr std::array<const char*, kNumParams> kNames = {
    "xi1", "xi2", "Omega11", "Omega12", "Omega22", "alpha1", "alpha2", "tau"};

constexpr double kDetEps = 1e-12;

}  // namespace

const char* param_name(Param p) { return kNames[static_cast<std::size_t>(p)]; }
const std::array<const char*, kNumParams>& param_names() { return kNames; }

DpParams DpParams::from_vector(const ParamVector& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

DpParams DpParams::from_array(const std::array<double, kNumParams>& a) {
  return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
}

ParamVector DpParams::to_vector() const {
  ParamVector v;
  v << xi1, xi2, omega11, omega12, omega22, alpha1, alpha2, tau;
  return v;
}

std::array<double, kNumParams> DpParams::to_array() const {
  return {xi1, xi2, omega11, omega12, omega22, alpha1, alpha2, tau};
}

double DpParams::operator[](Param p) const {
  return const_cast<DpParams&>(*this)[p];
}

double& DpParams::operator[](Param p) {
  switch (p) {
    case Param::xi1: return xi1;
    case Param::xi2: return xi2;
    case Param::omega11: return omega11;
    case Param::omega12: return omega12;
    case Param::omega22: return omega22;
    case Param::alpha1: return alpha1;
    case Param::alpha2: return alpha2;
    case Param::tau: return tau;
  }
  return tau;  // unreachable
}

std::string to_string(const DpParams& dp) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  const auto a = dp.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) {
    os << (i ? ", " : "") << a[i];
  }
  os << ")";
  return os.str();
}

DpParams validate(const DpParams& dp) {
  const auto a = dp.to_array();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) {
      throw NonFiniteParameter(std::string("parameter ") + kNames[i] + " is not finite");
    }
  }
  if (dp.omega11 <= 0.0 || dp.omega22 <= 0.0) {
    throw NonPositiveDefiniteScale("Omega11 and Omega22 must be positive, got " + to_string(dp));
  }
  const double det = dp.omega11 * dp.omega22 - dp.omega12 * dp.omega12;
  if (det <= kDetEps * dp.omega11 * dp.omega22) {
    throw NonPositiveDefiniteScale("Omega is not positive definite, got " + to_string(dp));
  }
  return dp;
}

bool is_valid(const DpParams& dp) noexcept {
  try {
    validate(dp);
    return true;
  } catch (const Error&) {
    return false;
  }
}

ModelTerms model_terms(const DpParams& dp) {
  validate(dp);
  ModelTerms m{};
  m.omega1 = std::sqrt(dp.omega11);
  m.omega2 = std::sqrt(dp.omega22);
  m.lambda = dp.omega12 / (m.omega1 * m.omega2);
  m.one_minus_lsq = 1.0 - m.lambda * m.lambda;
  m.alpha_star_sq = dp.alpha1 * dp.alpha1 + dp.alpha2 * dp.alpha2 +
                    2.0 * dp.alpha1 * dp.alpha2 * m.lambda;
  m.den = std::sqrt(1.0 + m.alpha_star_sq);
  m.alpha0 = dp.tau * m.den;
  m.delta = {(dp.alpha1 + m.lambda * dp.alpha2) / m.den,
             (dp.alpha2 + m.lambda * dp.alpha1) / m.den};
  m.zeta0_tau = zeta0(dp.tau);
  const auto zt = zeta12(dp.tau);
  m.zeta1_tau = zt.z1;
  m.zeta2_tau = zt.z2;
  return m;
}

StandardizedState standardize(const DpParams& dp, double y1, double y2) {
  validate(dp);
  StandardizedState s{};
  const double omega1 = std::sqrt(dp.omega11);
  const double omega2 = std::sqrt(dp.omega22);
  s.z1 = (y1 - dp.xi1) / omega1;
  s.z2 = (y2 - dp.xi2) / omega2;
  s.lambda = dp.omega12 / (omega1 * omega2);
  s.alpha_star_sq = dp.alpha1 * dp.alpha1 + dp.alpha2 * dp.alpha2 +
                    2.0 * dp.alpha1 * dp.alpha2 * s.lambda;
  s.alpha0 = dp.tau * std::sqrt(1.0 + s.alpha_star_sq);
  s.t = s.alpha0 + dp.alpha1 * s.z1 + dp.alpha2 * s.z2;
  return s;
}

Dataset::Dataset(std::vector<double> y1, std::vector<double> y2)
    : y1_(std::move(y1)), y2_(std::move(y2)) {
  if (y1_.size() != y2_.size()) {
    throw DatasetError("y1 and y2 must have equal length (" + std::to_string(y1_.size()) +
                       " vs " + std::to_string(y2_.size()) + ")");
  }
  if (y1_.empty()) {
    throw DatasetError("dataset is empty");
  }
  for (std::size_t i = 0; i < y1_.size(); ++i) {
    if (!std::isfinite(y1_[i]) || !std::isfinite(y2_[i])) {
      throw DatasetError("observation " + std::to_string(i) + " is not finite");
    }
  }
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) {
    throw DatasetError("slice out of range");
  }
  return Dataset({y1_.begin() + first, y1_.begin() + first + count},
                 {y2_.begin() + first, y2_.begin() + first + count});
}

Dataset Dataset::concat(const Dataset& other) const {
  auto a = y1_;
  auto b = y2_;
  a.insert(a.end(), other.y1_.begin(), other.y1_.end());
  b.insert(b.end(), other.y2_.begin(), other.y2_.end());
  return Dataset(std::move(a), std::move(b));
}

}  // namespace esn2
