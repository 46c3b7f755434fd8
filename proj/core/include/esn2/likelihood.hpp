#pragma once

#include "esn2/params.hpp"

namespace esn2 {

using ScoreVector = ParamVector;

enum class InfoKind { observed, expected };

/// 8x8 information matrix indexed by the theta ordering.
struct InfoMatrix {
  Matrix8 values;
  InfoKind kind;
};

/// The statistics that the score and the hessian of the log-likelihood depend
/// on linearly. For a dataset each field is a sum over observations (`one`
/// counts them); for the expected information each field is an expectation
/// under the model (`one` = 1). zeta_k denotes zeta_k(t) at the observation.
struct InfoStatistics {
  double one = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double z1sq = 0.0;
  double z2sq = 0.0;
  double z1z2 = 0.0;
  double zeta1 = 0.0;
  double z1_zeta1 = 0.0;
  double z2_zeta1 = 0.0;
  double zeta2 = 0.0;
  double z1_zeta2 = 0.0;
  double z2_zeta2 = 0.0;
  double z1sq_zeta2 = 0.0;
  double z2sq_zeta2 = 0.0;
  double z1z2_zeta2 = 0.0;

  InfoStatistics& operator+=(const InfoStatistics& o);
};

/// Sum of the per-observation statistics. The reduction order depends only on
/// the data, never on the number of threads.
InfoStatistics observation_statistics(const DpParams& dp, const Dataset& data);

/// Statistics of the single observation (y1, y2).
InfoStatistics observation_statistics(const DpParams& dp, double y1, double y2);

/// Score assembled from (summed or expected) statistics.
ScoreVector score_from_statistics(const DpParams& dp, const InfoStatistics& s);

/// Hessian of the log-likelihood assembled from statistics. Each off-diagonal
/// entry is computed once and mirrored, so the result is exactly symmetric.
Matrix8 hessian_from_statistics(const DpParams& dp, const InfoStatistics& s);

/// Log-likelihood with the constant fixed to -log(2 pi) per observation, so a
/// single observation gives the log-density.
double loglik(const DpParams& dp, const Dataset& data);

ScoreVector score(const DpParams& dp, const Dataset& data);

/// Minus the hessian of loglik at dp. Not necessarily positive definite away
/// from the maximum.
InfoMatrix observed_info(const DpParams& dp, const Dataset& data);

}  // namespace esn2
