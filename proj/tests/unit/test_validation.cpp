#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "esn2/errors.hpp"
#include "esn2/esn_model.hpp"
#include "esn2/expected_info.hpp"
#include "esn2/special_fns.hpp"
#include "esn2/validation.hpp"
#include "../support/random_dp.hpp"

using namespace esn2;
using esn2::testing::reference_data;
using esn2::testing::reference_dp;

namespace {

// Per-entry checks of sample moments against closed forms; z-scores only.
double worst_moment_z(const DpParams& dp, std::size_t n, std::uint64_t seed) {
  const SampleMoments s = sample_moments(sample_esn2(dp, n, RngSeed{seed}));
  const Moments2 m = moments_esn2(dp);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    worst = std::max(worst, std::fabs(s.mean(i) - m.mean(i)) / s.mean_se(i));
    for (int j = 0; j < 2; ++j) {
      worst = std::max(worst, std::fabs(s.covariance(i, j) - m.covariance(i, j)) / s.covariance_se(i, j));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("fd gradient of a linear functional") {
  const ParamFunction f = [](const DpParams& dp) { return dp.omega11; };
  const ParamVector g = fd_gradient(f, reference_dp());
  for (int i = 0; i < 8; ++i) CHECK(std::fabs(g(i) - (i == 2 ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("fd hessian of a quadratic and of exp of a linear form") {
  Matrix8 a = Matrix8::Random();
  a = (a + a.transpose()).eval();
  const ParamFunction quad = [&a](const DpParams& dp) {
    const ParamVector t = dp.to_vector();
    return 0.5 * t.dot(a * t);
  };
  const Matrix8 h = fd_hessian(quad, reference_dp(), FdControls{1e-6, 1e-2});
  CHECK((h - a).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(h == h.transpose());

  ParamVector c;
  c << 0.1, -0.2, 0.05, 0.3, -0.1, 0.2, 0.1, -0.3;
  const ParamFunction ex = [&c](const DpParams& dp) { return std::exp(c.dot(dp.to_vector())); };
  const double v = std::exp(c.dot(reference_dp().to_vector()));
  CHECK((fd_gradient(ex, reference_dp()) - v * c).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((fd_hessian(ex, reference_dp()) - v * c * c.transpose()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fd steps shrink near the validity boundary") {
  const DpParams edge{0, 0, 1, 1 - 1e-9, 1, 0.5, 0.5, 0};
  const ParamFunction f = [](const DpParams& dp) { return dp.omega12 * dp.omega12; };
  const ParamVector g = fd_gradient(f, edge);
  CHECK(std::isfinite(g(3)));
  CHECK(std::fabs(g(3) - 2 * edge.omega12) < 1e-6);
}

TEST_CASE("fd failure names the coordinate") {
  const ParamFunction f = [](const DpParams& dp) {
    if (dp.tau != 0.25) throw std::runtime_error("no");
    return 1.0;
  };
  DpParams at = reference_dp();
  at.tau = 0.25;
  try {
    fd_gradient(f, at);
    FAIL("expected an error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
  CHECK_THROWS_AS(validate(FdControls{0.0, 1e-4}), PreconditionError);
}

TEST_CASE("sampler is reproducible and seed dependent") {
  const Dataset a = sample_esn2(reference_dp(), 40'000, RngSeed{1});
  const Dataset b = sample_esn2(reference_dp(), 40'000, RngSeed{1});
  const Dataset c = sample_esn2(reference_dp(), 40'000, RngSeed{2});
  CHECK(std::equal(a.y1().begin(), a.y1().end(), b.y1().begin()));
  CHECK(std::equal(a.y2().begin(), a.y2().end(), b.y2().begin()));
  CHECK_FALSE(std::equal(a.y1().begin(), a.y1().end(), c.y1().begin()));
  CHECK_THROWS_AS(sample_esn2(DpParams{0, 0, 1, 0, 1, 1, 1, -5}, 10, RngSeed{}), PreconditionError);
  CHECK_THROWS_AS(sample_esn2(reference_dp(), 0, RngSeed{}), PreconditionError);
}

TEST_CASE("sampler output does not depend on the thread count") {
  ::setenv("ESN2_THREADS", "1", 1);
  const Dataset a = sample_esn2(reference_dp(), 50'000, RngSeed{3});
  ::setenv("ESN2_THREADS", "6", 1);
  const Dataset b = sample_esn2(reference_dp(), 50'000, RngSeed{3});
  ::unsetenv("ESN2_THREADS");
  CHECK(std::equal(a.y1().begin(), a.y1().end(), b.y1().begin()));
  CHECK(std::equal(a.y2().begin(), a.y2().end(), b.y2().begin()));
}

TEST_CASE("sample moments match the closed forms") {
  CHECK(worst_moment_z(DpParams{0, 0, 1, 0, 1, 0, 0, 0}, 1'000'000, 10) < 3.5);
  CHECK(worst_moment_z(DpParams{0, 0, 1, 0.6, 1, 2, 3, 1}, 1'000'000, 11) < 3.5);
  CHECK(worst_moment_z(DpParams{1, -1, 2, 0.5, 1, 2, -1, 0.7}, 1'000'000, 12) < 3.5);
}

TEST_CASE("second marginal is normal when alpha2 = 0 and lambda = 0") {
  const DpParams dp{0, 0.5, 1, 0, 2, 3, 0, -0.5};
  const Dataset d = sample_esn2(dp, 100'000, RngSeed{77});
  std::vector<double> y(d.y2().begin(), d.y2().end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(y.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double f = std_normal_cdf((y[i] - dp.xi2) / std::sqrt(dp.omega22));
    ks = std::max({ks, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  CHECK(ks < 1.9495 / std::sqrt(n));
}

TEST_CASE("chi-square histogram accepts the sampler") {
  const DpParams dp = reference_dp();
  const ChiSquareResult r = chi_square_histogram(dp, sample_esn2(dp, 1'000'000, RngSeed{5}));
  CHECK(r.p_value > 0.001);
  CHECK(r.dof + 1 == r.cells);
}

TEST_CASE("chi-square histogram rejects a wrong model") {
  const DpParams dp = reference_dp();
  DpParams wrong = dp;
  wrong.tau = 0.5;
  const ChiSquareResult r = chi_square_histogram(wrong, sample_esn2(dp, 200'000, RngSeed{5}));
  CHECK(r.p_value < 1e-6);
}

TEST_CASE("mean score at the truth is zero") {
  const McMatrix m = mc_score(DpParams{0.5, 0.2, 1.5, -0.4, 0.8, -1, 0.5, -0.5}, 100'000, RngSeed{9});
  for (int i = 0; i < 8; ++i) CHECK(std::fabs(m.mean(i, 0)) < 4 * m.std_error(i, 0));
}

TEST_CASE("SN2 block at tau = 0") {
  const DpParams dp{0, 0, 1, 0.3, 1, 1.5, -0.8, 0};
  const McMatrix mc = mc_sn2_info(dp, 200'000, RngSeed{4});
  REQUIRE(mc.mean.rows() == 7);
  const Eigen::MatrixXd block = expected_info(dp).values.topLeftCorner<7, 7>();
  CHECK(compare_to_mc(block, mc).passed);
  CHECK_THROWS_AS(mc_sn2_info(reference_dp(), 100, RngSeed{}), PreconditionError);
}

TEST_CASE("family-wise Monte Carlo rule") {
  McMatrix mc;
  mc.mean = Eigen::MatrixXd::Zero(2, 2);
  mc.std_error = Eigen::MatrixXd::Ones(2, 2);
  Eigen::MatrixXd v(2, 2);
  v << 3.5, 3.5, 0, 0;
  CHECK(compare_to_mc(v, mc).passed);
  v(1, 0) = 3.5;
  CHECK_FALSE(compare_to_mc(v, mc).passed);
  v << 5.5, 0, 0, 0;
  const McComparison c = compare_to_mc(v, mc);
  CHECK_FALSE(c.passed);
  CHECK(c.exceed_5sigma == 1);
  CHECK(c.max_abs_z == 5.5);
}

TEST_CASE("empty dp set gives an empty report") {
  ValidationConfig cfg;
  const ValidationReport r = run_validation_suite(cfg);
  CHECK(r.checks.empty());
  CHECK(r.all_passed());
}

TEST_CASE("fast suite passes on one dp and is reproducible") {
  ValidationConfig cfg;
  cfg.dp_set = {default_validation_dps().front()};
  const ValidationReport a = run_validation_suite(cfg);
  for (const CheckResult& c : a.checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
  const ValidationReport b = run_validation_suite(cfg);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].measured == b.checks[i].measured);
}

TEST_CASE("a perturbed i67 entry fails the suite") {
  ValidationConfig cfg;
  cfg.dp_set = {default_validation_dps().front()};
  cfg.expected_info_fn = [](const DpParams& dp, const CubatureControls& c) {
    InfoMatrix m = expected_info(dp, c);
    m.values(5, 6) *= 1.1;
    m.values(6, 5) *= 1.1;
    return m;
  };
  const ValidationReport r = run_validation_suite(cfg);
  CHECK_FALSE(r.all_passed());
  bool einfo_failed = false;
  for (const CheckResult& c : r.checks) einfo_failed |= (c.name == "einfo_mc" && !c.passed);
  CHECK(einfo_failed);
}
