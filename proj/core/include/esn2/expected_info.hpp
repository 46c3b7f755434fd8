#pragma once

#include <vector>

#include "esn2/cubature.hpp"
#include "esn2/expectations.hpp"
#include "esn2/likelihood.hpp"
#include "esn2/params.hpp"

namespace esn2 {

struct ExpectedInfoResult {
  InfoMatrix info;
  ExpectationSet expectations;
  bool converged = true;
};

/// Per-observation expected information together with the expectations it was
/// built from. Never throws on cubature non-convergence; check `converged`.
ExpectedInfoResult expected_info_detailed(const DpParams& dp, const CubatureControls& controls = {});

/// Per-observation expected Fisher information i(theta), exactly symmetric.
/// Throws CubatureNonConvergence when an a-term integral misses its tolerance.
InfoMatrix expected_info(const DpParams& dp, const CubatureControls& controls = {});

/// Eigenvalues (ascending) and their product.
struct Spectrum {
  Eigen::Matrix<double, Eigen::Dynamic, 1> eigenvalues;
  double det = 0.0;
  double min_eigenvalue = 0.0;
};
Spectrum spectrum(const Eigen::MatrixXd& symmetric);

/// Expected information in quadruple precision (113-bit significand), for
/// points where it is nearly singular and double precision cannot resolve the
/// small eigenvalues. In the rotated coordinates of integration_box() the
/// a-terms reduce to one-dimensional integrals in S1, taken by adaptive
/// Gauss-Kronrod to a relative tolerance of 1e-31; the closed-form parts and
/// the eigenvalues are computed at the same precision before rounding.
struct ExtendedInfoResult {
  InfoMatrix info;
  Spectrum spectrum;
  /// Largest relative error estimate among the one-dimensional integrals.
  double quadrature_error = 0.0;
  /// False when that estimate exceeds 1e-28.
  bool converged = true;
};
ExtendedInfoResult expected_info_extended(const DpParams& dp);

/// Information for psi = psi(nu) from the information for nu: i(nu) / psi'(nu)^2.
double reparam_scalar_info(double info_value, double dpsi_dnu);

/// Pairwise conditional independence of Y1 and Y2 given the hidden variable:
/// Omega12 = 0 and alpha1 alpha2 = 0 (each zero up to 1e-14 times its scale).
bool conditional_independence(const DpParams& dp);

struct BlockCheck {
  bool is_block = false;
  double max_offblock = 0.0;
  /// Expected information reordered as (xi1, Omega11 | xi2, Omega22, alpha2, tau).
  Eigen::Matrix<double, 6, 6> reordered;
};

/// Requires Omega12 = 0 and alpha1 = 0. Reports the largest absolute entry
/// coupling (xi1, Omega11) with (xi2, Omega22, alpha2, tau).
BlockCheck block_structure_check(const DpParams& dp, const CubatureControls& controls = {});

enum class SweepParam { alpha1, alpha2, tau };

const char* sweep_param_name(SweepParam p);
/// Throws PreconditionError for names other than alpha1, alpha2, tau.
SweepParam parse_sweep_param(const std::string& name);

struct SweepSpec {
  SweepParam sweep_param = SweepParam::alpha1;
  std::vector<double> grid;
  DpParams base;
};

/// Throws PreconditionError for an empty or non-monotone grid, or when any
/// grid point gives an invalid DpParams.
void validate(const SweepSpec& spec);

/// `points` equally spaced values from `from` to `to` inclusive.
std::vector<double> linear_grid(double from, double to, std::size_t points);

DpParams sweep_point(const SweepSpec& spec, double value);

struct SweepRow {
  double param_value = 0.0;
  double det = 0.0;
  double min_eigenvalue = 0.0;
  bool converged = true;
};

enum class Precision { standard, extended };

/// Determinant and smallest eigenvalue of the expected information at every
/// grid point, from expected_info (standard) or expected_info_extended
/// (extended; controls are then unused). Points run concurrently; rows come
/// back in grid order. A point whose integration fails is reported with
/// converged = false.
std::vector<SweepRow> det_scan(const SweepSpec& spec, const CubatureControls& controls = {},
                               Precision precision = Precision::standard);

}  // namespace esn2
