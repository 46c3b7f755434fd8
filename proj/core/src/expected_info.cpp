#include "esn2/expected_info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "esn2/errors.hpp"
#include "esn2/parallel.hpp"

namespace esn2 {

ExpectedInfoResult expected_info_detailed(const DpParams& dp, const CubatureControls& controls) {
  validate(dp);
  ExpectedInfoResult out;
  out.expectations = expectation_set(dp, controls);
  out.converged = out.expectations.a.converged;
  out.info.kind = InfoKind::expected;
  out.info.values = -hessian_from_statistics(dp, out.expectations.statistics());
  return out;
}

InfoMatrix expected_info(const DpParams& dp, const CubatureControls& controls) {
  ExpectedInfoResult r = expected_info_detailed(dp, controls);
  if (!r.converged) {
    std::ostringstream os;
    os.precision(3);
    os << "expected_info: a-term cubature did not converge within " << controls.max_evals
       << " evaluations (error estimate " << r.expectations.a.max_error << ") at "
       << to_string(dp);
    throw CubatureNonConvergence(os.str());
  }
  return r.info;
}

Spectrum spectrum(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  Spectrum s;
  s.eigenvalues = solver.eigenvalues();
  s.det = s.eigenvalues.prod();
  s.min_eigenvalue = s.eigenvalues.size() ? s.eigenvalues(0) : 0.0;
  return s;
}

double reparam_scalar_info(double info_value, double dpsi_dnu) {
  if (dpsi_dnu == 0.0 || !std::isfinite(dpsi_dnu)) {
    throw PreconditionError("reparam_scalar_info: derivative must be finite and nonzero");
  }
  return info_value / (dpsi_dnu * dpsi_dnu);
}

bool conditional_independence(const DpParams& dp) {
  validate(dp);
  constexpr double kEps = 1e-14;
  const double omega_scale = std::sqrt(dp.omega11 * dp.omega22);
  const double alpha_scale = std::max(1.0, std::fabs(dp.alpha1) * std::fabs(dp.alpha2));
  return std::fabs(dp.omega12) <= kEps * omega_scale &&
         std::fabs(dp.alpha1 * dp.alpha2) <= kEps * alpha_scale;
}

BlockCheck block_structure_check(const DpParams& dp, const CubatureControls& controls) {
  validate(dp);
  if (dp.omega12 != 0.0 || dp.alpha1 != 0.0) {
    throw PreconditionError("block_structure_check: requires Omega12 = 0 and alpha1 = 0");
  }
  const Matrix8 info = expected_info(dp, controls).values;
  constexpr std::array<Param, 6> order = {Param::xi1, Param::omega11, Param::xi2,
                                          Param::omega22, Param::alpha2, Param::tau};
  BlockCheck out;
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t c = 0; c < order.size(); ++c) {
      out.reordered(r, c) = info(static_cast<Eigen::Index>(order[r]),
                                 static_cast<Eigen::Index>(order[c]));
    }
  }
  out.max_offblock = out.reordered.block<2, 4>(0, 2).cwiseAbs().maxCoeff();
  out.is_block = out.max_offblock < 1e-6;
  return out;
}

const char* sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::alpha1: return "alpha1";
    case SweepParam::alpha2: return "alpha2";
    case SweepParam::tau: return "tau";
  }
  return "?";
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "alpha1") return SweepParam::alpha1;
  if (name == "alpha2") return SweepParam::alpha2;
  if (name == "tau") return SweepParam::tau;
  throw PreconditionError("sweep parameter must be one of alpha1, alpha2, tau (got '" + name + "')");
}

DpParams sweep_point(const SweepSpec& spec, double value) {
  DpParams dp = spec.base;
  switch (spec.sweep_param) {
    case SweepParam::alpha1: dp.alpha1 = value; break;
    case SweepParam::alpha2: dp.alpha2 = value; break;
    case SweepParam::tau: dp.tau = value; break;
  }
  return dp;
}

void validate(const SweepSpec& spec) {
  if (spec.grid.empty()) throw PreconditionError("sweep grid is empty");
  if (spec.grid.size() > 1) {
    const bool up = spec.grid[1] > spec.grid[0];
    for (std::size_t i = 1; i < spec.grid.size(); ++i) {
      const bool ok = up ? spec.grid[i] > spec.grid[i - 1] : spec.grid[i] < spec.grid[i - 1];
      if (!ok) throw PreconditionError("sweep grid must be strictly monotone");
    }
  }
  for (double v : spec.grid) {
    if (!std::isfinite(v)) throw PreconditionError("sweep grid contains a non-finite value");
    validate(sweep_point(spec, v));
  }
}

std::vector<double> linear_grid(double from, double to, std::size_t points) {
  if (points == 0) throw PreconditionError("sweep needs at least one point");
  if (!std::isfinite(from) || !std::isfinite(to)) {
    throw PreconditionError("sweep bounds must be finite");
  }
  if (points == 1) return {from};
  std::vector<double> grid(points);
  const double step = (to - from) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = from + step * static_cast<double>(i);
  grid.back() = to;
  return grid;
}

std::vector<SweepRow> det_scan(const SweepSpec& spec, const CubatureControls& controls,
                               Precision precision) {
  validate(spec);
  validate(controls);
  std::vector<SweepRow> rows(spec.grid.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.param_value = spec.grid[i];
    try {
      if (precision == Precision::extended) {
        const ExtendedInfoResult r = expected_info_extended(sweep_point(spec, spec.grid[i]));
        row.det = r.spectrum.det;
        row.min_eigenvalue = r.spectrum.min_eigenvalue;
        row.converged = r.converged;
        return;
      }
      const ExpectedInfoResult r = expected_info_detailed(sweep_point(spec, spec.grid[i]), controls);
      const Spectrum s = spectrum(r.info.values);
      row.det = s.det;
      row.min_eigenvalue = s.min_eigenvalue;
      row.converged = r.converged;
    } catch (const CubatureError&) {
      row.det = std::numeric_limits<double>::quiet_NaN();
      row.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
      row.converged = false;
    }
  });
  return rows;
}

}  // namespace esn2
