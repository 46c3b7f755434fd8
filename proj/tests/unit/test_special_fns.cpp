#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "esn2/special_fns.hpp"
#include "../support/oracle_values.hpp"

using namespace esn2;

namespace {
double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }
}  // namespace

TEST_CASE("normal pdf values and symmetry") {
  CHECK(std_normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(std_normal_pdf(1.0) == std_normal_pdf(-1.0));
  CHECK(rel(std_normal_pdf(3.0), oracle::kPdf3) < 1e-15);
  CHECK(std_normal_pdf(37.0) > 0.0);
  CHECK_FALSE(std::isnan(std_normal_pdf(40.0)));
  CHECK(std::exp(std_normal_logpdf(2.0)) == doctest::Approx(std_normal_pdf(2.0)).epsilon(1e-15));
  CHECK(std::isfinite(std_normal_logpdf(1e3)));
}

TEST_CASE("normal cdf values, symmetry and tails") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(rel(std_normal_cdf(1.0), oracle::kCdf1) < 1e-14);
  CHECK(rel(std_normal_cdf(-8.0), oracle::kCdfMinus8) < 1e-14);
  const double far = std_normal_cdf(-40.0);
  CHECK(far >= 0.0);
  CHECK_FALSE(std::isnan(far));
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    CHECK(std::fabs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) <= 1e-15);
  }
  double prev = 0.0;
  for (double x = -12.0; x <= 12.0; x += 0.01) {
    const double p = std_normal_cdf(x);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("non-finite arguments are domain errors") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(std_normal_pdf(nan), std::domain_error);
  CHECK_THROWS_AS(std_normal_cdf(inf), std::domain_error);
  CHECK_THROWS_AS(zeta0(-inf), std::domain_error);
  CHECK_THROWS_AS(zeta1(nan), std::domain_error);
  CHECK_THROWS_AS(zeta2(inf), std::domain_error);
}

TEST_CASE("zeta order is restricted to 0, 1, 2") {
  CHECK_THROWS_AS(ZetaOrder(3), std::domain_error);
  CHECK_THROWS_AS(ZetaOrder(-1), std::domain_error);
  CHECK(ZetaOrder(2).value() == 2);
}

TEST_CASE("zeta at zero") {
  CHECK(zeta(ZetaOrder(0), 0.0) == doctest::Approx(-0.6931471805599453).epsilon(1e-15));
  CHECK(zeta(ZetaOrder(1), 0.0) == doctest::Approx(0.7978845608028654).epsilon(1e-15));
  CHECK(zeta(ZetaOrder(2), 0.0) == doctest::Approx(-0.6366197723675814).epsilon(1e-15));
}

TEST_CASE("zeta against high-precision values") {
  for (const auto& z : oracle::kZeta) {
    CAPTURE(z.x);
    CHECK(rel(zeta0(z.x), z.zeta0) < 1e-13);
    CHECK(rel(zeta1(z.x), z.zeta1) < 1e-13);
    CHECK(rel(zeta2(z.x), z.zeta2) < 1e-10);
    const Zeta12 both = zeta12(z.x);
    CHECK(both.z1 == zeta1(z.x));
    CHECK(both.z2 == zeta2(z.x));
  }
}

TEST_CASE("zeta2 identity on random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const double z1 = zeta1(x);
    CHECK(std::fabs(zeta2(x) + z1 * x + z1 * z1) < 1e-12);
  }
}

TEST_CASE("zeta derivatives match finite differences") {
  const double h = 1e-5;
  for (double x = -8.0; x <= 8.0; x += 0.125) {
    CAPTURE(x);
    CHECK(std::fabs((zeta0(x + h) - zeta0(x - h)) / (2 * h) - zeta1(x)) < 1e-6);
    CHECK(std::fabs((zeta1(x + h) - zeta1(x - h)) / (2 * h) - zeta2(x)) < 1e-5);
  }
}

TEST_CASE("left tail is stable") {
  for (double x = -50.0; x <= -30.0; x += 0.5) {
    const double z1 = zeta1(x);
    CHECK(std::isfinite(z1));
    CHECK(std::fabs(z1 - (-x + 1.0 / std::fabs(x))) < 1e-3 * std::fabs(z1));
  }
  for (double x = -700.0; x <= 700.0; x += 0.37) {
    CAPTURE(x);
    const double z0 = zeta0(x), z1 = zeta1(x), z2 = zeta2(x);
    CHECK(std::isfinite(z0));
    CHECK(std::isfinite(z1));
    CHECK(std::isfinite(z2));
    CHECK(z1 >= 0.0);
    CHECK(z2 > -1.0);
    CHECK(z2 <= 0.0);
  }
}

TEST_CASE("zeta1 positive and zeta2 strictly inside (-1, 0) on moderate arguments") {
  for (double x = -30.0; x <= 8.0; x += 0.01) {
    CHECK(zeta1(x) > 0.0);
    CHECK(zeta2(x) > -1.0);
    CHECK(zeta2(x) < 0.0);
  }
}
