#include <cmath>
#include <random>

#include <doctest.h>

#include "esn2/cubature.hpp"
#include "esn2/errors.hpp"
#include "esn2/special_fns.hpp"

using namespace esn2;

TEST_CASE("constant integrand needs one rule application") {
  const CubatureResult r = integrate_2d([](double, double) { return 1.0; }, {0, 0}, {1, 1});
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.converged);
  CHECK(r.evals == kRulePoints);
}

TEST_CASE("separable polynomial") {
  const CubatureResult r = integrate_2d([](double x, double y) { return x * x * y * y; }, {-1, -1}, {1, 1});
  CHECK(r.value == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("standard normal density on [-8, 8]^2") {
  auto f = [](double x, double y) { return std_normal_pdf(x) * std_normal_pdf(y); };
  const CubatureResult r = integrate_2d(f, {-8, -8}, {8, 8}, {1e-10, 1e-15, 1'000'000});
  const double mass = std_normal_cdf(8) - std_normal_cdf(-8);
  CHECK(r.converged);
  CHECK(std::fabs(r.value - mass * mass) < 1e-8);
}

TEST_CASE("polynomials of total degree up to 5 are exact on one rule application") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng);
    const double lo1 = a, hi1 = a + 1.0 + std::fabs(u(rng));
    const double lo2 = b, hi2 = b + 0.5 + std::fabs(u(rng));
    for (int p = 0; p <= 5; ++p) {
      for (int q = 0; p + q <= 5; ++q) {
        auto f = [p, q](double x, double y) { return std::pow(x, p) * std::pow(y, q); };
        const CubatureResult r = integrate_2d(f, {lo1, lo2}, {hi1, hi2}, {1.0, 0.0, kRulePoints});
        const double exact = (std::pow(hi1, p + 1) - std::pow(lo1, p + 1)) / (p + 1) *
                             (std::pow(hi2, q + 1) - std::pow(lo2, q + 1)) / (q + 1);
        CAPTURE(p);
        CAPTURE(q);
        CHECK(r.evals == kRulePoints);
        CHECK(std::fabs(r.value - exact) <= 1e-13 * std::max(1.0, std::fabs(exact)));
      }
    }
  }
}

TEST_CASE("error estimate decreases under refinement of the normal density") {
  auto f = [](double x, double y) { return std_normal_pdf(x) * std_normal_pdf(y); };
  const CubatureTrace t = integrate_2d_traced(f, {-6, -6}, {6, 6}, {1e-10, 0.0, 200'000});
  REQUIRE(t.error_history.size() > 10);
  for (std::size_t i = 1; i < t.error_history.size(); ++i) {
    CHECK(t.error_history[i] <= t.error_history[i - 1]);
  }
}

TEST_CASE("budget exhaustion returns the best estimate unconverged") {
  auto f = [](double x, double y) { return std::exp(-100 * (x * x + y * y)); };
  const CubatureResult r = integrate_2d(f, {-3, -1}, {1, 3}, {1e-14, 0.0, 170});
  CHECK_FALSE(r.converged);
  CHECK(r.evals <= 170);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("converged results meet the tolerance") {
  auto f = [](double x, double y) { return std::cos(3 * x) * std::exp(y); };
  const CubatureControls c{1e-9, 1e-14, 1'000'000};
  const CubatureResult r = integrate_2d(f, {0, 0}, {2, 1}, c);
  CHECK(r.converged);
  CHECK(r.error_estimate <= std::max(c.abs_tol, c.rel_tol * std::fabs(r.value)));
  CHECK(r.value == doctest::Approx(std::sin(6.0) / 3 * (std::exp(1.0) - 1)).epsilon(1e-9));
}

TEST_CASE("a starting grid resolves integrands vanishing on the axes") {
  auto f = [](double x, double y) { return x * y * std::exp(-(x - 0.4) * (x - 0.4) - (y - 0.3) * (y - 0.3)); };
  const CubatureResult r = integrate_2d(f, {-6, -6}, {6, 6}, {1e-8, 1e-14, 1'000'000}, 8);
  const double exact = std::acos(-1.0) * 0.4 * 0.3;
  CHECK(std::fabs(r.value - exact) < 1e-7 * exact);
}

TEST_CASE("deterministic") {
  auto f = [](double x, double y) { return std::exp(-x * x - 3 * y * y + x * y) * (1 + std::sin(x)); };
  const CubatureResult a = integrate_2d(f, {-4, -4}, {4, 4}, {1e-10, 0.0, 500'000});
  const CubatureResult b = integrate_2d(f, {-4, -4}, {4, 4}, {1e-10, 0.0, 500'000});
  CHECK(a.value == b.value);
  CHECK(a.error_estimate == b.error_estimate);
  CHECK(a.evals == b.evals);
}

TEST_CASE("invalid inputs") {
  auto one = [](double, double) { return 1.0; };
  CHECK_THROWS_AS(integrate_2d(one, {1, 0}, {0, 1}), PreconditionError);
  CHECK_THROWS_AS(integrate_2d(one, {0, 0}, {1, 1}, {0.0, 0.0, 1000}), PreconditionError);
  CHECK_THROWS_AS(integrate_2d(one, {0, 0}, {1, 1}, {1e-6, -1.0, 1000}), PreconditionError);
  CHECK_THROWS_AS(integrate_2d(one, {0, 0}, {1, 1}, {1e-6, 0.0, 16}), PreconditionError);
  CHECK_THROWS_AS(integrate_2d(one, {0, 0}, {1, 1}, {}, 0), PreconditionError);
  auto bad = [](double x, double) { return x > 0.5 ? std::nan("") : 1.0; };
  CHECK_THROWS_AS(integrate_2d(bad, {0, 0}, {1, 1}), CubatureError);
  try {
    integrate_2d(bad, {0, 0}, {1, 1});
  } catch (const CubatureError& e) {
    CHECK(std::string(e.what()).find("(") != std::string::npos);
  }
}
