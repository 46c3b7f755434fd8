#include "esn2/special_fns.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace esn2 {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

// Below this point zeta_1 comes from the Mills-ratio continued fraction.
constexpr double kLeftTail = -10.0;
constexpr int kContinuedFractionTerms = 120;

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(fn) + ": argument is not finite");
  }
}

// For y >= 10 returns c such that phi(y)/(1 - Phi(y)) = y + c, using
//   (1 - Phi(y))/phi(y) = 1/(y + 1/(y + 2/(y + 3/(y + ...)))).
// Keeping c separate lets zeta_2 = -zeta_1 * c avoid the cancellation in x + zeta_1.
double mills_tail_correction(double y) {
  double t = y;
  for (int k = kContinuedFractionTerms; k >= 2; --k) {
    t = y + k / t;
  }
  return 1.0 / t;
}

}  // namespace

ZetaOrder::ZetaOrder(int m) : m_(m) {
  if (m < 0 || m > 2) {
    throw std::domain_error("zeta: order " + std::to_string(m) + " is not supported (0, 1, 2)");
  }
}

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  if (std::fabs(x) < 5.0) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
  }
  // Split x so that x1*x1 is exact and the exponent keeps full precision.
  const double x1 = std::floor(x * 0x1.0p16 + 0.5) * 0x1.0p-16;
  const double x2 = x - x1;
  return kInvSqrt2Pi * (std::exp(-0.5 * x1 * x1) * std::exp((-0.5 * x2 - x1) * x2));
}

double std_normal_logpdf(double x) {
  require_finite(x, "std_normal_logpdf");
  return -0.5 * x * x - kLogSqrt2Pi;
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double zeta0(double x) {
  require_finite(x, "zeta");
  if (x < kLeftTail) {
    const double y = -x;
    return std_normal_logpdf(x) - std::log(y + mills_tail_correction(y));
  }
  if (x > 0.0) {
    return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  }
  return std::log(std_normal_cdf(x));
}

double zeta1(double x) {
  require_finite(x, "zeta");
  if (x < kLeftTail) {
    const double y = -x;
    return y + mills_tail_correction(y);
  }
  return std_normal_pdf(x) / std_normal_cdf(x);
}

Zeta12 zeta12(double x) {
  require_finite(x, "zeta");
  if (x < kLeftTail) {
    const double y = -x;
    const double c = mills_tail_correction(y);
    const double z1 = y + c;
    return {z1, -z1 * c};
  }
  const double z1 = std_normal_pdf(x) / std_normal_cdf(x);
  return {z1, -z1 * (x + z1)};
}

double zeta2(double x) { return zeta12(x).z2; }

double zeta(ZetaOrder m, double x) {
  switch (m.value()) {
    case 0:
      return zeta0(x);
    case 1:
      return zeta1(x);
    default:
      return zeta2(x);
  }
}

}  // namespace esn2
