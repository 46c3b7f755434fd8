#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "esn2/cubature.hpp"
#include "esn2/likelihood.hpp"
#include "esn2/params.hpp"

namespace esn2 {

struct RngSeed {
  std::uint64_t seed = 20240601;
};

struct FdControls {
  double grad_step_scale = 1e-6;
  double hess_step_scale = 1e-4;
};

void validate(const FdControls& controls);

using ParamFunction = std::function<double(const DpParams&)>;

/// Central differences with h_j = grad_step_scale * max(1, |theta_j|). The step
/// is halved (up to 30 times) while a probe point is not a valid DpParams or f
/// throws; PreconditionError names the coordinate if that never succeeds.
ParamVector fd_gradient(const ParamFunction& f, const DpParams& at, const FdControls& controls = {});

/// Second-order central stencils with h_j = hess_step_scale * max(1, |theta_j|),
/// averaged with the transpose.
Matrix8 fd_hessian(const ParamFunction& f, const DpParams& at, const FdControls& controls = {});

/// Rejection sampler from the hidden-truncation representation: (X0, X) is
/// trivariate normal with Var X0 = 1, Var X = Omegabar and Cov(X0, X) = delta;
/// X is kept when X0 + tau > 0 and Y = xi + omega X. Draws come in chunks
/// with their own (seed, chunk) stream, so the output does not depend on the
/// thread count. Throws PreconditionError when Phi(tau) < 1e-6.
Dataset sample_esn2(const DpParams& dp, std::size_t n, RngSeed seed);

/// Sample mean and covariance (divisor n) with their standard errors.
struct SampleMoments {
  Eigen::Vector2d mean;
  Eigen::Matrix2d covariance;
  Eigen::Vector2d mean_se;
  Eigen::Matrix2d covariance_se;
};
SampleMoments sample_moments(const Dataset& data);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
  std::size_t cells = 0;
};

/// Pearson chi-square of a bins x bins histogram over
/// [xi_j - half_width omega_j, xi_j + half_width omega_j] against cell masses
/// from cubature of density_esn2. Cells expecting fewer than 5 counts are
/// pooled together with the mass outside the grid.
ChiSquareResult chi_square_histogram(const DpParams& dp, const Dataset& data, std::size_t bins = 50,
                                     double half_width = 4.0);

/// Entrywise Monte Carlo mean and standard error of a matrix-valued statistic.
struct McMatrix {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd std_error;
  std::size_t samples = 0;
};

/// observed_info of single observations drawn from dp.
McMatrix mc_observed_info(const DpParams& dp, std::size_t n, RngSeed seed);

/// Minus the hessian of the SN_2 log-density in (xi, Omega, alpha) over single
/// draws from dp (tau must be 0). The hessian is taken by central differences
/// of a separately coded SN_2 log-density, not from the ESN_2 formulas.
McMatrix mc_sn2_info(const DpParams& dp, std::size_t n, RngSeed seed,
                     const FdControls& controls = {});

/// Mean score of single observations, as an 8 x 1 McMatrix.
McMatrix mc_score(const DpParams& dp, std::size_t n, RngSeed seed);

/// Family-wise comparison of a matrix against a Monte Carlo estimate: passes
/// with at most `allowed_3sigma` entries beyond 3 standard errors and none
/// beyond 5.
struct McComparison {
  bool passed = false;
  std::size_t exceed_3sigma = 0;
  std::size_t exceed_5sigma = 0;
  double max_abs_z = 0.0;
};
McComparison compare_to_mc(const Eigen::MatrixXd& value, const McMatrix& mc,
                           std::size_t allowed_3sigma = 2);

enum class CheckLevel { fast, full };

using ExpectedInfoFn = std::function<InfoMatrix(const DpParams&, const CubatureControls&)>;

struct ValidationConfig {
  CheckLevel level = CheckLevel::fast;
  std::vector<DpParams> dp_set;
  RngSeed seed;
  CubatureControls cubature;
  FdControls fd;
  /// Expected information under test; defaults to esn2::expected_info.
  ExpectedInfoFn expected_info_fn;
  /// Monte Carlo sizes; 0 selects the level's default.
  std::size_t mc_info_samples = 0;
  std::size_t chi_square_samples = 0;
};

/// The dp set used when none is given on the command line.
std::vector<DpParams> default_validation_dps();

struct CheckResult {
  std::string name;
  std::size_t dp_index = 0;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Per dp: score vs FD, observed info vs FD, closed-form E[zeta1(T)] vs cubature, expected
/// info vs Monte Carlo, the SN_2 block vs Monte Carlo at the same dp with
/// tau set to 0, sampler chi-square and the alpha = 0, tau = 0 singularity. The full level
/// adds a Monte Carlo check of the a-terms with 10^7 draws. Failures are
/// report entries; an empty dp set gives an empty report.
ValidationReport run_validation_suite(const ValidationConfig& config);

}  // namespace esn2
