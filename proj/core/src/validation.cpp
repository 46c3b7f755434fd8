#include "esn2/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/gamma.hpp>

#include "esn2/errors.hpp"
#include "esn2/esn_model.hpp"
#include "esn2/expectations.hpp"
#include "esn2/expected_info.hpp"
#include "esn2/parallel.hpp"
#include "esn2/special_fns.hpp"

namespace esn2 {

namespace {

constexpr int kMaxShrink = 30;
constexpr std::size_t kSampleChunk = 16384;
constexpr std::size_t kMcChunk = 8192;

std::optional<double> probe(const ParamFunction& f, const ParamVector& theta) {
  const DpParams dp = DpParams::from_vector(theta);
  if (!is_valid(dp)) return std::nullopt;
  try {
    const double v = f(dp);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

[[noreturn]] void probe_failure(const char* fn, std::size_t j) {
  std::ostringstream os;
  os << fn << ": function not evaluable around coordinate " << param_name(static_cast<Param>(j))
     << " even after shrinking the step";
  throw PreconditionError(os.str());
}

// Running mean and sum of squared deviations of a matrix-valued sample.
struct MomentAccumulator {
  std::size_t count = 0;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd m2;

  void add(const Eigen::MatrixXd& x) {
    if (count == 0) {
      mean = Eigen::MatrixXd::Zero(x.rows(), x.cols());
      m2 = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    }
    ++count;
    const Eigen::MatrixXd d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d.cwiseProduct(x - mean);
  }

  void merge(const MomentAccumulator& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
    const double n = na + nb;
    const Eigen::MatrixXd d = o.mean - mean;
    mean += d * (nb / n);
    m2 += o.m2 + d.cwiseProduct(d) * (na * nb / n);
    count += o.count;
  }

  McMatrix result() const {
    McMatrix out;
    out.samples = count;
    out.mean = mean;
    const double n = static_cast<double>(count);
    out.std_error = count > 1 ? Eigen::MatrixXd((m2 / (n - 1.0) / n).cwiseSqrt())
                              : Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
    return out;
  }
};

// Draws n observations and reduces a per-observation statistic in fixed chunks.
template <typename PerObservation>
McMatrix mc_reduce(const Dataset& data, PerObservation&& per_obs) {
  const std::size_t n = data.size();
  const std::size_t chunks = (n + kMcChunk - 1) / kMcChunk;
  std::vector<MomentAccumulator> partial(chunks);
  const auto y1 = data.y1();
  const auto y2 = data.y2();
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t last = std::min(n, (c + 1) * kMcChunk);
    for (std::size_t i = c * kMcChunk; i < last; ++i) partial[c].add(per_obs(y1[i], y2[i]));
  });
  MomentAccumulator total;
  for (const auto& p : partial) total.merge(p);
  return total.result();
}

// SN_2 log-density written directly from its definition.
double sn2_logpdf(double y1, double y2, const DpParams& dp) {
  const double det = dp.omega11 * dp.omega22 - dp.omega12 * dp.omega12;
  const double d1 = y1 - dp.xi1, d2 = y2 - dp.xi2;
  const double quad = (dp.omega22 * d1 * d1 - 2.0 * dp.omega12 * d1 * d2 + dp.omega11 * d2 * d2) / det;
  const double skew = dp.alpha1 * d1 / std::sqrt(dp.omega11) + dp.alpha2 * d2 / std::sqrt(dp.omega22);
  return std::log(2.0) - std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * quad +
         zeta0(skew);
}

}  // namespace

void validate(const FdControls& controls) {
  if (!(controls.grad_step_scale > 0.0) || !(controls.hess_step_scale > 0.0) ||
      !std::isfinite(controls.grad_step_scale) || !std::isfinite(controls.hess_step_scale)) {
    throw PreconditionError("FdControls: step scales must be positive and finite");
  }
}

ParamVector fd_gradient(const ParamFunction& f, const DpParams& at, const FdControls& controls) {
  validate(controls);
  const ParamVector theta = validate(at).to_vector();
  ParamVector g;
  for (std::size_t j = 0; j < kNumParams; ++j) {
    double h = controls.grad_step_scale * std::max(1.0, std::fabs(theta(j)));
    bool done = false;
    for (int k = 0; k <= kMaxShrink && !done; ++k, h *= 0.5) {
      ParamVector plus = theta, minus = theta;
      plus(j) += h;
      minus(j) -= h;
      const auto fp = probe(f, plus);
      const auto fm = probe(f, minus);
      if (fp && fm) {
        g(j) = (*fp - *fm) / ((plus(j) - minus(j)));
        done = true;
      }
    }
    if (!done) probe_failure("fd_gradient", j);
  }
  return g;
}

Matrix8 fd_hessian(const ParamFunction& f, const DpParams& at, const FdControls& controls) {
  validate(controls);
  const ParamVector theta = validate(at).to_vector();
  const auto f0 = probe(f, theta);
  if (!f0) throw PreconditionError("fd_hessian: function not evaluable at the base point");

  std::array<double, kNumParams> h{};
  Matrix8 H;
  for (std::size_t j = 0; j < kNumParams; ++j) {
    h[j] = controls.hess_step_scale * std::max(1.0, std::fabs(theta(j)));
    bool done = false;
    for (int k = 0; k <= kMaxShrink && !done; ++k) {
      ParamVector plus = theta, minus = theta;
      plus(j) += h[j];
      minus(j) -= h[j];
      const auto fp = probe(f, plus);
      const auto fm = probe(f, minus);
      if (fp && fm) {
        H(j, j) = (*fp - 2.0 * *f0 + *fm) / (h[j] * h[j]);
        done = true;
      } else {
        h[j] *= 0.5;
      }
    }
    if (!done) probe_failure("fd_hessian", j);
  }
  for (std::size_t i = 0; i < kNumParams; ++i) {
    for (std::size_t j = i + 1; j < kNumParams; ++j) {
      double hi = h[i], hj = h[j];
      bool done = false;
      for (int k = 0; k <= kMaxShrink && !done; ++k, hi *= 0.5, hj *= 0.5) {
        std::array<std::optional<double>, 4> v;
        const double si[4] = {1, 1, -1, -1};
        const double sj[4] = {1, -1, 1, -1};
        bool ok = true;
        for (int c = 0; c < 4 && ok; ++c) {
          ParamVector p = theta;
          p(i) += si[c] * hi;
          p(j) += sj[c] * hj;
          v[c] = probe(f, p);
          ok = v[c].has_value();
        }
        if (ok) {
          H(i, j) = (*v[0] - *v[1] - *v[2] + *v[3]) / (4.0 * hi * hj);
          H(j, i) = H(i, j);
          done = true;
        }
      }
      if (!done) probe_failure("fd_hessian", j);
    }
  }
  return 0.5 * (H + H.transpose());
}

Dataset sample_esn2(const DpParams& dp, std::size_t n, RngSeed seed) {
  const ModelTerms m = model_terms(dp);
  if (n == 0) throw PreconditionError("sample_esn2: n must be at least 1");
  if (std_normal_cdf(dp.tau) < 1e-6) {
    throw PreconditionError(
        "sample_esn2: acceptance rate Phi(tau) < 1e-6; a tail-adapted sampler would be needed");
  }
  Eigen::Matrix3d cov;
  cov << 1.0, m.delta.delta1, m.delta.delta2,
      m.delta.delta1, 1.0, m.lambda,
      m.delta.delta2, m.lambda, 1.0;
  const Eigen::LLT<Eigen::Matrix3d> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw PreconditionError("sample_esn2: latent covariance is not positive definite");
  }
  const Eigen::Matrix3d L = llt.matrixL();

  std::vector<double> y1(n), y2(n);
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.seed), static_cast<std::uint32_t>(seed.seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    const std::size_t last = std::min(n, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < last;) {
      const Eigen::Vector3d u(normal(rng), normal(rng), normal(rng));
      const Eigen::Vector3d x = L * u;
      if (x(0) + dp.tau > 0.0) {
        y1[i] = dp.xi1 + m.omega1 * x(1);
        y2[i] = dp.xi2 + m.omega2 * x(2);
        ++i;
      }
    }
  });
  return Dataset(std::move(y1), std::move(y2));
}

SampleMoments sample_moments(const Dataset& data) {
  const auto y1 = data.y1();
  const auto y2 = data.y2();
  const double n = static_cast<double>(data.size());
  SampleMoments out;
  out.mean.setZero();
  for (std::size_t i = 0; i < data.size(); ++i) out.mean += Eigen::Vector2d(y1[i], y2[i]);
  out.mean /= n;
  out.covariance.setZero();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::Vector2d d(y1[i] - out.mean(0), y2[i] - out.mean(1));
    out.covariance += d * d.transpose();
  }
  out.covariance /= n;
  Eigen::Matrix2d var_prod = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::Vector2d d(y1[i] - out.mean(0), y2[i] - out.mean(1));
    const Eigen::Matrix2d e = d * d.transpose() - out.covariance;
    var_prod += e.cwiseProduct(e);
  }
  var_prod /= n;
  out.mean_se = (out.covariance.diagonal() / n).cwiseSqrt();
  out.covariance_se = (var_prod / n).cwiseSqrt();
  return out;
}

ChiSquareResult chi_square_histogram(const DpParams& dp, const Dataset& data, std::size_t bins,
                                     double half_width) {
  const ModelTerms m = model_terms(dp);
  if (bins == 0 || !(half_width > 0.0)) {
    throw PreconditionError("chi_square_histogram: bins and half_width must be positive");
  }
  const std::array<double, 2> lo{dp.xi1 - half_width * m.omega1, dp.xi2 - half_width * m.omega2};
  const std::array<double, 2> width{2.0 * half_width * m.omega1 / static_cast<double>(bins),
                                    2.0 * half_width * m.omega2 / static_cast<double>(bins)};
  const std::size_t cells = bins * bins;

  std::vector<double> mass(cells);
  const CubatureControls cell_controls{1e-10, 1e-15, 200'000};
  parallel_for(cells, [&](std::size_t k) {
    const std::size_t a = k / bins, b = k % bins;
    const std::array<double, 2> lower{lo[0] + static_cast<double>(a) * width[0],
                                      lo[1] + static_cast<double>(b) * width[1]};
    const std::array<double, 2> upper{lower[0] + width[0], lower[1] + width[1]};
    mass[k] = integrate_2d([&dp](double x, double y) { return density_esn2(x, y, dp); }, lower,
                           upper, cell_controls)
                  .value;
  });

  std::vector<double> counts(cells, 0.0);
  double outside_count = 0.0;
  const auto y1 = data.y1();
  const auto y2 = data.y2();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double fa = std::floor((y1[i] - lo[0]) / width[0]);
    const double fb = std::floor((y2[i] - lo[1]) / width[1]);
    if (fa < 0 || fb < 0 || fa >= static_cast<double>(bins) || fb >= static_cast<double>(bins)) {
      outside_count += 1.0;
    } else {
      counts[static_cast<std::size_t>(fa) * bins + static_cast<std::size_t>(fb)] += 1.0;
    }
  }

  const double n = static_cast<double>(data.size());
  double inside_mass = 0.0;
  for (double p : mass) inside_mass += p;
  double pooled_expected = std::max(0.0, 1.0 - inside_mass) * n;
  double pooled_count = outside_count;

  ChiSquareResult out;
  for (std::size_t k = 0; k < cells; ++k) {
    const double e = mass[k] * n;
    if (e < 5.0) {
      pooled_expected += e;
      pooled_count += counts[k];
      continue;
    }
    out.statistic += (counts[k] - e) * (counts[k] - e) / e;
    ++out.cells;
  }
  if (pooled_expected > 0.0) {
    out.statistic += (pooled_count - pooled_expected) * (pooled_count - pooled_expected) / pooled_expected;
    ++out.cells;
  }
  if (out.cells < 2) throw PreconditionError("chi_square_histogram: too few usable cells");
  out.dof = out.cells - 1;
  out.p_value = boost::math::gamma_q(0.5 * static_cast<double>(out.dof), 0.5 * out.statistic);
  return out;
}

McMatrix mc_observed_info(const DpParams& dp, std::size_t n, RngSeed seed) {
  const Dataset data = sample_esn2(dp, n, seed);
  return mc_reduce(data, [&dp](double y1, double y2) -> Eigen::MatrixXd {
    return -hessian_from_statistics(dp, observation_statistics(dp, y1, y2));
  });
}

McMatrix mc_sn2_info(const DpParams& dp, std::size_t n, RngSeed seed, const FdControls& controls) {
  validate(dp);
  if (dp.tau != 0.0) throw PreconditionError("mc_sn2_info: requires tau = 0");
  const Dataset data = sample_esn2(dp, n, seed);
  return mc_reduce(data, [&](double y1, double y2) -> Eigen::MatrixXd {
    const Matrix8 h = fd_hessian(
        [y1, y2](const DpParams& p) { return sn2_logpdf(y1, y2, p); }, dp, controls);
    return -h.topLeftCorner<7, 7>();
  });
}

McMatrix mc_score(const DpParams& dp, std::size_t n, RngSeed seed) {
  const Dataset data = sample_esn2(dp, n, seed);
  return mc_reduce(data, [&dp](double y1, double y2) -> Eigen::MatrixXd {
    return score_from_statistics(dp, observation_statistics(dp, y1, y2));
  });
}

McComparison compare_to_mc(const Eigen::MatrixXd& value, const McMatrix& mc,
                           std::size_t allowed_3sigma) {
  if (value.rows() != mc.mean.rows() || value.cols() != mc.mean.cols()) {
    throw PreconditionError("compare_to_mc: shape mismatch");
  }
  McComparison out;
  for (Eigen::Index i = 0; i < value.rows(); ++i) {
    for (Eigen::Index j = 0; j < value.cols(); ++j) {
      const double diff = std::fabs(value(i, j) - mc.mean(i, j));
      const double se = mc.std_error(i, j);
      double z;
      if (se > 0.0) {
        z = diff / se;
      } else {
        z = diff <= 1e-12 * std::max(1.0, std::fabs(mc.mean(i, j)))
                ? 0.0
                : std::numeric_limits<double>::infinity();
      }
      out.max_abs_z = std::max(out.max_abs_z, z);
      if (z > 3.0) ++out.exceed_3sigma;
      if (z > 5.0) ++out.exceed_5sigma;
    }
  }
  out.passed = out.exceed_3sigma <= allowed_3sigma && out.exceed_5sigma == 0;
  return out;
}

std::vector<DpParams> default_validation_dps() {
  return {
      DpParams{0, 0, 1, 0.6, 1, 2, 3, 1},
      DpParams{1, -1, 2, 0.5, 1, 2, -1, 0.7},
      DpParams{0, 0, 1, 0.3, 1, 1.5, -0.8, 0},
      DpParams{0.5, 0.2, 1.5, -0.4, 0.8, -1, 0.5, -0.5},
  };
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

std::string mc_detail(const McComparison& c) {
  std::ostringstream os;
  os << c.exceed_3sigma << " entries beyond 3 se, " << c.exceed_5sigma << " beyond 5 se";
  return os.str();
}

// 20 expectations whose Monte Carlo means are compared with expectation_set.
Eigen::MatrixXd expectation_vector(const ExpectationSet& e) {
  Eigen::MatrixXd v(20, 1);
  v << e.e_zeta1, e.e_z1_zeta1, e.e_z2_zeta1, e.e_z1sq_zeta1, e.e_z2sq_zeta1, e.e_t_zeta1,
      e.e_z1t_zeta1, e.e_z2t_zeta1, e.e_zeta2, e.e_z1_zeta2, e.e_z2_zeta2, e.e_z1sq_zeta2,
      e.e_z2sq_zeta2, e.e_z1z2_zeta2, e.a.a0, e.a.a_1_1, e.a.a_2_1, e.a.a_1_2, e.a.a_2_2, e.a.a_12;
  return v;
}

Eigen::MatrixXd expectation_sample(const DpParams& dp, const ModelTerms& m, double y1, double y2) {
  const double z1 = (y1 - dp.xi1) / m.omega1;
  const double z2 = (y2 - dp.xi2) / m.omega2;
  const double t = m.alpha0 + dp.alpha1 * z1 + dp.alpha2 * z2;
  const Zeta12 zt = zeta12(t);
  const double r = zt.z1, q = zt.z2, r2 = r * r;
  Eigen::MatrixXd v(20, 1);
  v << r, z1 * r, z2 * r, z1 * z1 * r, z2 * z2 * r, t * r, z1 * t * r, z2 * t * r, q, z1 * q,
      z2 * q, z1 * z1 * q, z2 * z2 * q, z1 * z2 * q, r2, z1 * r2, z2 * r2, z1 * z1 * r2,
      z2 * z2 * r2, z1 * z2 * r2;
  return v;
}

}  // namespace

ValidationReport run_validation_suite(const ValidationConfig& config) {
  ValidationReport report;
  const bool full = config.level == CheckLevel::full;
  const ExpectedInfoFn einfo = config.expected_info_fn
                                   ? config.expected_info_fn
                                   : ExpectedInfoFn([](const DpParams& dp, const CubatureControls& c) {
                                       return expected_info(dp, c);
                                     });
  const std::size_t mc_n = config.mc_info_samples ? config.mc_info_samples : 200'000;
  const std::size_t chi_n = config.chi_square_samples ? config.chi_square_samples
                                                      : (full ? 1'000'000 : 200'000);

  for (std::size_t k = 0; k < config.dp_set.size(); ++k) {
    const DpParams& dp = config.dp_set[k];
    const std::uint64_t base_seed = config.seed.seed + 1000 * k;
    auto add = [&](std::string name, auto&& body) {
      CheckResult r;
      r.name = std::move(name);
      r.dp_index = k;
      try {
        validate(dp);
        body(r);
      } catch (const std::exception& e) {
        r.passed = false;
        r.detail = e.what();
      }
      report.checks.push_back(std::move(r));
    };

    const auto fd_data = [&] { return sample_esn2(dp, 5, RngSeed{base_seed + 1}); };

    add("score_fd", [&](CheckResult& r) {
      const Dataset data = fd_data();
      const ParamVector fd = fd_gradient([&](const DpParams& p) { return loglik(p, data); }, dp, config.fd);
      r.measured = (score(dp, data) - fd).cwiseAbs().maxCoeff();
      r.threshold = 1e-5;
      r.passed = r.measured < r.threshold;
    });

    add("oinfo_fd", [&](CheckResult& r) {
      const Dataset data = fd_data();
      const Matrix8 fd = fd_hessian([&](const DpParams& p) { return loglik(p, data); }, dp, config.fd);
      const Matrix8 an = -observed_info(dp, data).values;
      const Matrix8 scale = an.cwiseAbs().cwiseMax(fd.cwiseAbs()).cwiseMax(1.0);
      r.measured = ((an - fd).cwiseAbs().cwiseQuotient(scale)).maxCoeff();
      r.threshold = 1e-4;
      r.passed = r.measured < r.threshold;
    });

    add("lemma4_cubature", [&](CheckResult& r) {
      const ModelTerms m = model_terms(dp);
      const double closed = lemma4_expectation(m.lambda, dp.alpha1, dp.alpha2, dp.tau);
      CubatureControls c = config.cubature;
      c.rel_tol = std::min(c.rel_tol, 1e-7);
      const CubatureResult cub =
          standardized_expectation(dp, [](double, double, double t) { return zeta1(t); }, c);
      r.measured = std::fabs(closed - cub.value) / closed;
      r.threshold = 1e-5;
      r.passed = r.measured < r.threshold;
    });

    add("einfo_mc", [&](CheckResult& r) {
      const Matrix8 info = einfo(dp, config.cubature).values;
      const McMatrix mc = mc_observed_info(dp, mc_n, RngSeed{base_seed + 2});
      const McComparison cmp = compare_to_mc(info, mc);
      r.measured = cmp.max_abs_z;
      r.threshold = 5.0;
      r.passed = cmp.passed;
      r.detail = mc_detail(cmp);
    });

    add("sn2_reduction_mc", [&](CheckResult& r) {
      DpParams dp0 = dp;
      dp0.tau = 0.0;
      const Matrix8 info = einfo(dp0, config.cubature).values;
      const McMatrix mc = mc_sn2_info(dp0, full ? mc_n : std::min<std::size_t>(mc_n, 50'000),
                                      RngSeed{base_seed + 3}, config.fd);
      const McComparison cmp = compare_to_mc(info.topLeftCorner<7, 7>(), mc);
      r.measured = cmp.max_abs_z;
      r.threshold = 5.0;
      r.passed = cmp.passed;
      r.detail = mc_detail(cmp);
    });

    add("sampler_chi2", [&](CheckResult& r) {
      const Dataset data = sample_esn2(dp, chi_n, RngSeed{base_seed + 4});
      const ChiSquareResult chi = chi_square_histogram(dp, data);
      r.measured = chi.p_value;
      r.threshold = 1e-3;
      r.passed = chi.p_value > r.threshold;
      std::ostringstream os;
      os << "statistic " << chi.statistic << " on " << chi.dof << " dof";
      r.detail = os.str();
    });

    add("singular_point", [&](CheckResult& r) {
      DpParams dp0 = dp;
      dp0.alpha1 = dp0.alpha2 = dp0.tau = 0.0;
      const Matrix8 info = einfo(dp0, config.cubature).values;
      const double det = spectrum(info).det;
      r.measured = std::max(std::fabs(info(7, 7)), std::fabs(det));
      r.threshold = 1e-10;
      r.passed = std::fabs(info(7, 7)) <= 1e-12 && std::fabs(det) < 1e-10;
      std::ostringstream os;
      os << "i88 = " << info(7, 7) << ", det = " << det;
      r.detail = os.str();
    });

    if (full) {
      add("expectations_mc", [&](CheckResult& r) {
        const ModelTerms m = model_terms(dp);
        const ExpectationSet es = expectation_set(dp, config.cubature);
        const Dataset data = sample_esn2(dp, 10'000'000, RngSeed{base_seed + 5});
        const McMatrix mc = mc_reduce(data, [&](double y1, double y2) {
          return expectation_sample(dp, m, y1, y2);
        });
        const McComparison cmp = compare_to_mc(expectation_vector(es), mc);
        r.measured = cmp.max_abs_z;
        r.threshold = 5.0;
        r.passed = cmp.passed;
        r.detail = mc_detail(cmp);
      });
    }
  }
  return report;
}

}  // namespace esn2
