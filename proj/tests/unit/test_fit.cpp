#include <cmath>

#include <doctest.h>

#include "esn2/errors.hpp"
#include "esn2/expected_info.hpp"
#include "esn2/fit.hpp"
#include "esn2/likelihood.hpp"
#include "esn2/validation.hpp"

#include <Eigen/LU>

using namespace esn2;

namespace {

void check_recovery(const DpParams& truth, const DpParams& init, std::uint64_t seed) {
  const std::size_t n = 10'000;
  const Dataset data = sample_esn2(truth, n, RngSeed{seed});
  const FitResult r = fit_mle(data, init);
  REQUIRE(r.converged);
  CHECK(r.final_score_norm < 1e-6);
  CHECK(r.loglik >= loglik(init, data));
  CHECK(r.loglik == loglik(r.dp_hat, data));
  const Matrix8 info = expected_info(r.dp_hat).values;
  const Matrix8 cov = info.inverse() / static_cast<double>(n);
  for (int i = 0; i < 8; ++i) {
    CAPTURE(i);
    const double se = std::sqrt(cov(i, i));
    CHECK(std::fabs(r.dp_hat.to_vector()(i) - truth.to_vector()(i)) < 5 * se);
  }
}

}  // namespace

TEST_CASE("too few observations") {
  const Dataset two({0.1, 0.2}, {0.3, -0.1});
  CHECK_THROWS_AS(fit_mle(two, DpParams{}), PreconditionError);
  CHECK_THROWS_AS(fit_mle(Dataset({1, 2, 3, 4, 5}, {1, 2, 3, 4, 6}), DpParams{0, 0, 1, 3, 1, 0, 0, 0}),
                  NonPositiveDefiniteScale);
}

TEST_CASE("recovers a skewed truth from a perturbed start") {
  check_recovery(DpParams{0, 0, 1, 0.5, 1, 1.5, -1, 0.5}, DpParams{0.2, -0.2, 1.3, 0.3, 0.8, 1.0, -0.5, 0.2}, 99);
}

TEST_CASE("ascent from a distant start") {
  const DpParams truth{1, -1, 2, 0.5, 1, 2, -1, 0.7};
  const Dataset data = sample_esn2(truth, 2000, RngSeed{5});
  const DpParams init{0, 0, 1, 0, 1, 0.5, 0.5, 0};
  const FitResult r = fit_mle(data, init);
  CHECK(r.loglik >= loglik(init, data));
  CHECK(r.iterations > 0);
}

TEST_CASE("max_iter exhaustion is reported, not thrown") {
  const DpParams truth{0, 0, 1, 0.5, 1, 1.5, -1, 0.5};
  const Dataset data = sample_esn2(truth, 500, RngSeed{8});
  FitControls c;
  c.max_iter = 1;
  const FitResult r = fit_mle(data, DpParams{0, 0, 1, 0, 1, 0, 0, 0}, c);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(is_valid(r.dp_hat));
}
