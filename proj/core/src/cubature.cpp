#include "esn2/cubature.hpp"

#include <cmath>
#include <algorithm>
#include <queue>
#include <sstream>
#include <vector>

#include "esn2/errors.hpp"

namespace esn2 {

namespace {

// Genz-Malik generators and weights for dimension 2 (normalised to unit volume).
const double kL2 = std::sqrt(9.0 / 70.0);
const double kL4 = std::sqrt(9.0 / 10.0);
const double kL5 = std::sqrt(9.0 / 19.0);

constexpr double kW1 = (12824.0 - 9120.0 * 2 + 400.0 * 4) / 19683.0;
constexpr double kW2 = 980.0 / 6561.0;
constexpr double kW3 = (1820.0 - 400.0 * 2) / 19683.0;
constexpr double kW4 = 200.0 / 19683.0;
constexpr double kW5 = 6859.0 / 19683.0 / 4.0;

constexpr double kE1 = (729.0 - 950.0 * 2 + 50.0 * 4) / 729.0;
constexpr double kE2 = 245.0 / 486.0;
constexpr double kE3 = (265.0 - 100.0 * 2) / 1458.0;
constexpr double kE4 = 25.0 / 729.0;

struct Region {
  std::array<double, 2> center;
  std::array<double, 2> half;
  double value;
  double error;
  std::size_t id;
};

struct LessUrgent {
  bool operator()(const Region& a, const Region& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.id > b.id;  // older regions first on ties
  }
};

class RuleEvaluator {
 public:
  explicit RuleEvaluator(const Integrand2d& f) : f_(f) {}

  Region apply(std::array<double, 2> center, std::array<double, 2> half, std::size_t id) {
    const double cx = center[0], cy = center[1];
    const double hx = half[0], hy = half[1];

    const double f0 = eval(cx, cy);
    const double s2 = eval(cx - kL2 * hx, cy) + eval(cx + kL2 * hx, cy) +
                      eval(cx, cy - kL2 * hy) + eval(cx, cy + kL2 * hy);
    const double s3 = eval(cx - kL4 * hx, cy) + eval(cx + kL4 * hx, cy) +
                      eval(cx, cy - kL4 * hy) + eval(cx, cy + kL4 * hy);
    const double s4 = eval(cx - kL4 * hx, cy - kL4 * hy) + eval(cx - kL4 * hx, cy + kL4 * hy) +
                      eval(cx + kL4 * hx, cy - kL4 * hy) + eval(cx + kL4 * hx, cy + kL4 * hy);
    const double s5 = eval(cx - kL5 * hx, cy - kL5 * hy) + eval(cx - kL5 * hx, cy + kL5 * hy) +
                      eval(cx + kL5 * hx, cy - kL5 * hy) + eval(cx + kL5 * hx, cy + kL5 * hy);

    const double volume = 4.0 * hx * hy;
    const double r7 = volume * (kW1 * f0 + kW2 * s2 + kW3 * s3 + kW4 * s4 + kW5 * s5);
    const double r5 = volume * (kE1 * f0 + kE2 * s2 + kE3 * s3 + kE4 * s4);
    return Region{center, half, r7, std::fabs(r7 - r5), id};
  }

  std::size_t evals() const { return evals_; }

 private:
  double eval(double x, double y) {
    ++evals_;
    const double v = f_(x, y);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os.precision(17);
      os << "integrand is not finite at (" << x << ", " << y << ")";
      throw CubatureError(os.str());
    }
    return v;
  }

  const Integrand2d& f_;
  std::size_t evals_ = 0;
};

CubatureTrace run(const Integrand2d& f, std::array<double, 2> lower, std::array<double, 2> upper,
                  const CubatureControls& controls, std::size_t grid, bool trace) {
  validate(controls);
  if (grid == 0) throw PreconditionError("integrate_2d: initial_grid must be at least 1");
  for (int k = 0; k < 2; ++k) {
    if (!(lower[k] < upper[k]) || !std::isfinite(lower[k]) || !std::isfinite(upper[k])) {
      throw PreconditionError("integrate_2d: lower must be < upper componentwise and finite");
    }
  }

  RuleEvaluator rule(f);
  std::size_t next_id = 0;
  std::priority_queue<Region, std::vector<Region>, LessUrgent> heap;

  const double g = static_cast<double>(grid);
  const std::array<double, 2> half{0.5 * (upper[0] - lower[0]) / g, 0.5 * (upper[1] - lower[1]) / g};
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const std::array<double, 2> center{lower[0] + (2.0 * static_cast<double>(i) + 1.0) * half[0],
                                         lower[1] + (2.0 * static_cast<double>(j) + 1.0) * half[1]};
      Region r = rule.apply(center, half, next_id++);
      value += r.value;
      error += r.error;
      heap.push(r);
    }
  }

  CubatureTrace out;
  if (trace) out.error_history.push_back(error);

  auto satisfied = [&] {
    return error <= std::max(controls.abs_tol, controls.rel_tol * std::fabs(value));
  };

  while (!satisfied() && rule.evals() + 2 * kRulePoints <= controls.max_evals) {
    Region worst = heap.top();
    heap.pop();
    const int axis = worst.half[1] > worst.half[0] ? 1 : 0;
    auto child_half = worst.half;
    child_half[axis] *= 0.5;
    auto left_center = worst.center;
    auto right_center = worst.center;
    left_center[axis] -= child_half[axis];
    right_center[axis] += child_half[axis];
    Region left = rule.apply(left_center, child_half, next_id++);
    Region right = rule.apply(right_center, child_half, next_id++);
    // The two degree-7 applications are at least as accurate as the parent's,
    // so the refined region keeps the parent's estimate as a bound.
    const double children = left.error + right.error;
    if (children > worst.error) {
      const double scale = worst.error / children;
      left.error *= scale;
      right.error *= scale;
    }
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    if (trace) out.error_history.push_back(error);
  }

  // Re-sum from scratch so the running updates do not accumulate rounding.
  std::vector<Region> regions;
  regions.reserve(heap.size());
  while (!heap.empty()) {
    regions.push_back(heap.top());
    heap.pop();
  }
  std::sort(regions.begin(), regions.end(),
            [](const Region& a, const Region& b) { return a.id < b.id; });
  double v = 0.0, e = 0.0;
  for (const auto& r : regions) {
    v += r.value;
    e += r.error;
  }

  out.result.value = v;
  out.result.error_estimate = e;
  out.result.evals = rule.evals();
  out.result.converged = e <= std::max(controls.abs_tol, controls.rel_tol * std::fabs(v));
  return out;
}

}  // namespace

void validate(const CubatureControls& controls) {
  if (!(controls.rel_tol > 0.0) || !std::isfinite(controls.rel_tol)) {
    throw PreconditionError("cubature: rel_tol must be positive");
  }
  if (!(controls.abs_tol >= 0.0) || !std::isfinite(controls.abs_tol)) {
    throw PreconditionError("cubature: abs_tol must be non-negative");
  }
  if (controls.max_evals < kRulePoints) {
    throw PreconditionError("cubature: max_evals must allow one rule application (17 points)");
  }
}

CubatureResult integrate_2d(const Integrand2d& f, std::array<double, 2> lower,
                            std::array<double, 2> upper, const CubatureControls& controls,
                            std::size_t initial_grid) {
  return run(f, lower, upper, controls, initial_grid, false).result;
}

CubatureTrace integrate_2d_traced(const Integrand2d& f, std::array<double, 2> lower,
                                  std::array<double, 2> upper, const CubatureControls& controls,
                                  std::size_t initial_grid) {
  return run(f, lower, upper, controls, initial_grid, true);
}

}  // namespace esn2
