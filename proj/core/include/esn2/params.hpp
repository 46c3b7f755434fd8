#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace esn2 {

inline constexpr std::size_t kNumParams = 8;

using ParamVector = Eigen::Matrix<double, 8, 1>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

/// Position of each component in the parameter vector theta.
enum class Param : std::size_t {
  xi1 = 0,
  xi2 = 1,
  omega11 = 2,
  omega12 = 3,
  omega22 = 4,
  alpha1 = 5,
  alpha2 = 6,
  tau = 7,
};

const char* param_name(Param p);
const std::array<const char*, kNumParams>& param_names();

/// Direct parameterization theta = (xi1, xi2, Omega11, Omega12, Omega22, alpha1, alpha2, tau).
///
/// A plain aggregate: construction does not validate. Pass the value through
/// validate() (every public entry point does) before trusting it.
struct DpParams {
  double xi1 = 0.0;
  double xi2 = 0.0;
  double omega11 = 1.0;
  double omega12 = 0.0;
  double omega22 = 1.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double tau = 0.0;

  static DpParams from_vector(const ParamVector& v);
  static DpParams from_array(const std::array<double, kNumParams>& a);
  ParamVector to_vector() const;
  std::array<double, kNumParams> to_array() const;

  double operator[](Param p) const;
  double& operator[](Param p);

  bool operator==(const DpParams&) const = default;
};

std::string to_string(const DpParams& dp);

/// Returns dp unchanged when Omega is positive definite and every entry is finite.
/// Throws NonFiniteParameter or NonPositiveDefiniteScale otherwise. Omega is
/// rejected when det(Omega) <= 1e-12 * Omega11 * Omega22, i.e. |lambda| too close to 1.
DpParams validate(const DpParams& dp);

bool is_valid(const DpParams& dp) noexcept;

/// (delta1, delta2) = Omegabar alpha / sqrt(1 + alpha*^2).
struct DeltaVector {
  double delta1;
  double delta2;
};

/// Observation-independent quantities shared by every formula. Built from a validated dp.
struct ModelTerms {
  double omega1;         // sqrt(Omega11)
  double omega2;         // sqrt(Omega22)
  double lambda;         // Omega12 / (omega1 omega2)
  double one_minus_lsq;  // 1 - lambda^2
  double alpha_star_sq;  // alpha1^2 + alpha2^2 + 2 alpha1 alpha2 lambda
  double den;            // sqrt(1 + alpha*^2)
  double alpha0;         // tau * den
  DeltaVector delta;
  double zeta0_tau;
  double zeta1_tau;
  double zeta2_tau;
};

ModelTerms model_terms(const DpParams& dp);

/// Per-observation derived quantities.
struct StandardizedState {
  double z1;
  double z2;
  double lambda;
  double alpha_star_sq;
  double alpha0;
  double t;  // alpha0 + alpha1 z1 + alpha2 z2
};

StandardizedState standardize(const DpParams& dp, double y1, double y2);

/// Paired observations stored column-wise. Always nonempty, equal length, finite.
class Dataset {
 public:
  Dataset(std::vector<double> y1, std::vector<double> y2);

  std::size_t size() const noexcept { return y1_.size(); }
  std::span<const double> y1() const noexcept { return y1_; }
  std::span<const double> y2() const noexcept { return y2_; }

  /// Observations [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const;
  /// Observations of *this followed by those of other.
  Dataset concat(const Dataset& other) const;

 private:
  std::vector<double> y1_;
  std::vector<double> y2_;
};

}  // namespace esn2
