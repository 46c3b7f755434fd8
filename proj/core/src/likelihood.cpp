#include "esn2/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "assembly.hpp"
#include "esn2/errors.hpp"
#include "esn2/parallel.hpp"
#include "esn2/special_fns.hpp"

namespace esn2 {

namespace {

// Observations are reduced in fixed-size chunks so that sums do not depend on
// how many threads were used.
constexpr std::size_t kChunk = 4096;

template <typename Result, typename PerChunk>
std::vector<Result> map_chunks(std::size_t n, PerChunk&& per_chunk) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Result> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const std::size_t last = std::min(n, first + kChunk);
    partial[c] = per_chunk(first, last);
  });
  return partial;
}

detail::Coefficients<double> coefficients(const DpParams& dp) {
  return detail::coefficients(detail::terms_of(dp, model_terms(dp)));
}

}  // namespace

InfoStatistics& InfoStatistics::operator+=(const InfoStatistics& o) {
  one += o.one;
  z1 += o.z1;
  z2 += o.z2;
  z1sq += o.z1sq;
  z2sq += o.z2sq;
  z1z2 += o.z1z2;
  zeta1 += o.zeta1;
  z1_zeta1 += o.z1_zeta1;
  z2_zeta1 += o.z2_zeta1;
  zeta2 += o.zeta2;
  z1_zeta2 += o.z1_zeta2;
  z2_zeta2 += o.z2_zeta2;
  z1sq_zeta2 += o.z1sq_zeta2;
  z2sq_zeta2 += o.z2sq_zeta2;
  z1z2_zeta2 += o.z1z2_zeta2;
  return *this;
}

namespace {

void add_observation(const DpParams& dp, const ModelTerms& m, double y1, double y2,
                     InfoStatistics& s) {
  const double z1 = (y1 - dp.xi1) / m.omega1;
  const double z2 = (y2 - dp.xi2) / m.omega2;
  const double t = m.alpha0 + dp.alpha1 * z1 + dp.alpha2 * z2;
  const Zeta12 zt = zeta12(t);
  s.one += 1.0;
  s.z1 += z1;
  s.z2 += z2;
  s.z1sq += z1 * z1;
  s.z2sq += z2 * z2;
  s.z1z2 += z1 * z2;
  s.zeta1 += zt.z1;
  s.z1_zeta1 += z1 * zt.z1;
  s.z2_zeta1 += z2 * zt.z1;
  s.zeta2 += zt.z2;
  s.z1_zeta2 += z1 * zt.z2;
  s.z2_zeta2 += z2 * zt.z2;
  s.z1sq_zeta2 += z1 * z1 * zt.z2;
  s.z2sq_zeta2 += z2 * z2 * zt.z2;
  s.z1z2_zeta2 += z1 * z2 * zt.z2;
}

}  // namespace

InfoStatistics observation_statistics(const DpParams& dp, const Dataset& data) {
  const ModelTerms m = model_terms(dp);
  const auto y1 = data.y1();
  const auto y2 = data.y2();
  const auto chunks = map_chunks<InfoStatistics>(
      data.size(), [&](std::size_t first, std::size_t last) {
        InfoStatistics s;
        for (std::size_t i = first; i < last; ++i) add_observation(dp, m, y1[i], y2[i], s);
        return s;
      });
  InfoStatistics total;
  for (const auto& c : chunks) total += c;
  return total;
}

InfoStatistics observation_statistics(const DpParams& dp, double y1, double y2) {
  if (!std::isfinite(y1) || !std::isfinite(y2)) {
    throw DatasetError("observation_statistics: observation must be finite");
  }
  InfoStatistics s;
  add_observation(dp, model_terms(dp), y1, y2, s);
  return s;
}

ScoreVector score_from_statistics(const DpParams& dp, const InfoStatistics& s) {
  const detail::Coefficients<double> c = coefficients(dp);
  const double u = 1.0 / c.L;
  const double lam = c.lam;
  // q = z1^2 + z2^2 - 2 lambda z1 z2, w = q lambda u^2
  const double q = s.z1sq + s.z2sq - 2.0 * lam * s.z1z2;
  const double w = q * lam * u * u;
  const double ratio = c.tau / c.den;

  ScoreVector g;
  g[0] = ((s.z1 - lam * s.z2) * u - c.a1 * s.zeta1) / c.w1;
  g[1] = ((s.z2 - lam * s.z1) * u - c.a2 * s.zeta1) / c.w2;
  g[2] = (w * lam + (s.z1sq - 2.0 * lam * s.z1z2 - s.one) * u -
          (c.a1 * c.a2 * lam * ratio * s.zeta1 + c.a1 * s.z1_zeta1)) /
         (2.0 * c.o11);
  g[3] = ((lam * s.one + s.z1z2) * u - w + c.a1 * c.a2 * ratio * s.zeta1) / (c.w1 * c.w2);
  g[4] = (w * lam + (s.z2sq - 2.0 * lam * s.z1z2 - s.one) * u -
          (c.a1 * c.a2 * lam * ratio * s.zeta1 + c.a2 * s.z2_zeta1)) /
         (2.0 * c.o22);
  g[5] = c.A1 * s.zeta1 + s.z1_zeta1;
  g[6] = c.A2 * s.zeta1 + s.z2_zeta1;
  g[7] = c.den * s.zeta1 - c.zeta1_tau * s.one;
  return g;
}

Matrix8 hessian_from_statistics(const DpParams& dp, const InfoStatistics& s) {
  return detail::hessian(coefficients(dp), s);
}

double loglik(const DpParams& dp, const Dataset& data) {
  const ModelTerms m = model_terms(dp);
  const auto y1 = data.y1();
  const auto y2 = data.y2();
  const double constant = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(dp.omega11) -
                          0.5 * std::log(dp.omega22) - 0.5 * std::log(m.one_minus_lsq) -
                          m.zeta0_tau;
  const auto chunks = map_chunks<double>(
      data.size(), [&](std::size_t first, std::size_t last) {
        double acc = 0.0;
        for (std::size_t i = first; i < last; ++i) {
          const double z1 = (y1[i] - dp.xi1) / m.omega1;
          const double z2 = (y2[i] - dp.xi2) / m.omega2;
          const double t = m.alpha0 + dp.alpha1 * z1 + dp.alpha2 * z2;
          const double q = z1 * z1 + z2 * z2 - 2.0 * m.lambda * z1 * z2;
          acc += constant - 0.5 * q / m.one_minus_lsq + zeta0(t);
        }
        return acc;
      });
  double total = 0.0;
  for (double c : chunks) total += c;
  return total;
}

ScoreVector score(const DpParams& dp, const Dataset& data) {
  return score_from_statistics(dp, observation_statistics(dp, data));
}

InfoMatrix observed_info(const DpParams& dp, const Dataset& data) {
  return {-hessian_from_statistics(dp, observation_statistics(dp, data)), InfoKind::observed};
}

}  // namespace esn2
