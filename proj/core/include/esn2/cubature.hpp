#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace esn2 {

struct CubatureControls {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  std::size_t max_evals = 1'000'000;
};

/// Throws PreconditionError unless rel_tol > 0, abs_tol >= 0 and max_evals
/// allows at least one rule application.
void validate(const CubatureControls& controls);

struct CubatureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evals = 0;
  bool converged = false;
};

/// Number of integrand evaluations used by one application of the rule.
inline constexpr std::size_t kRulePoints = 17;

using Integrand2d = std::function<double(double, double)>;

/// Adaptive integration of f over the rectangle [lower, upper] with an
/// embedded degree-7/degree-5 Genz-Malik pair. The region with the largest
/// error estimate is bisected along its longer side until the summed error
/// estimate is at most max(abs_tol, rel_tol |value|) or the evaluation budget
/// runs out (then converged = false and the best estimate is returned).
/// When the children's estimates sum to more than the parent's, they are
/// scaled back to it, so the summed estimate never grows under refinement.
///
/// The adaptive phase starts from an initial_grid x initial_grid partition of
/// the box. A single starting region can report a spuriously small error when
/// the rule points miss the integrand's features (odd integrands such as
/// z1 z2 g(z) vanish on both axes), so callers integrating such functions
/// should start from a grid.
///
/// Throws CubatureError, naming the point, if f returns a non-finite value.
/// The computation is sequential and deterministic.
CubatureResult integrate_2d(const Integrand2d& f, std::array<double, 2> lower,
                            std::array<double, 2> upper, const CubatureControls& controls = {},
                            std::size_t initial_grid = 1);

/// Error estimate of the summed regions after each refinement step, starting
/// with the single initial region. Exposed for diagnostics and tests.
struct CubatureTrace {
  CubatureResult result;
  std::vector<double> error_history;
};
CubatureTrace integrate_2d_traced(const Integrand2d& f, std::array<double, 2> lower,
                                  std::array<double, 2> upper,
                                  const CubatureControls& controls = {},
                                  std::size_t initial_grid = 1);

}  // namespace esn2
