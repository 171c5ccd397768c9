#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace odimdp {

using Index = std::size_t;

/// Absolute tolerance used for all probability invariant checks.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Non-owning view of the bounds of an interval ambiguity set.
struct AmbiguityView {
  std::span<const double> lower;
  std::span<const double> upper;

  Index size() const noexcept { return lower.size(); }
};

/**
 * Set of distributions gamma over a finite support with
 * lower[t] <= gamma(t) <= upper[t] for every support element t.
 *
 * Invariants: equal lengths (>= 1), 0 <= lower <= upper <= 1 entrywise and
 * sum(lower) <= 1 <= sum(upper), each up to kProbabilityTolerance.
 * The constructor throws ValidationError when any invariant fails.
 */
class IntervalAmbiguity {
 public:
  IntervalAmbiguity(std::vector<double> lower, std::vector<double> upper);

  /// Singleton set {p}.
  static IntervalAmbiguity degenerate(std::vector<double> distribution);
  /// Point mass on `index` over a support of `size` elements.
  static IntervalAmbiguity point_mass(Index size, Index index);

  Index size() const noexcept { return lower_.size(); }
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }
  AmbiguityView view() const noexcept { return {lower_, upper_}; }

  /// True when gamma is a distribution inside the bounds (within `tol`).
  bool contains(std::span<const double> gamma, double tol = kProbabilityTolerance) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Human-readable descriptions of every violated invariant; empty when valid.
std::vector<std::string> check_interval_bounds(std::span<const double> lower,
                                               std::span<const double> upper,
                                               double tol = kProbabilityTolerance);

}  // namespace odimdp
