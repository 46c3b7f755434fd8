#pragma once

#include <cstddef>

#include "esn2/params.hpp"

namespace esn2 {

struct FitControls {
  /// Convergence when the sup-norm of the (summed) DP score drops below this.
  double grad_tol = 1e-6;
  std::size_t max_iter = 500;
};

struct FitResult {
  DpParams dp_hat;
  bool converged = false;
  double final_score_norm = 0.0;
  double loglik = 0.0;
  std::size_t iterations = 0;
};

/// Minimum number of observations accepted by fit_mle.
inline constexpr std::size_t kMinFitObservations = 5;

/// Maximum likelihood estimate by BFGS on the analytic score, followed by
/// Newton steps on the analytic hessian. Iterates live in the coordinates
/// (xi1, xi2, log Omega11, atanh lambda, log Omega22, alpha1, alpha2, tau),
/// so every iterate is a valid DpParams, and each accepted step does not
/// decrease the log-likelihood.
///
/// Throws for an invalid init or fewer than kMinFitObservations observations.
/// Failure to converge is reported through `converged`, not by throwing.
FitResult fit_mle(const Dataset& data, const DpParams& init, const FitControls& controls = {});

}  // namespace esn2
