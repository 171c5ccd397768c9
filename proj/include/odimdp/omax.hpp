#pragma once

#include "odimdp/interval_ambiguity.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace odimdp {

/// Choice of the adversary resolving the ambiguity set.
enum class Adversary : std::uint8_t {
  Pessimistic,  ///< minimizes the expectation
  Optimistic,   ///< maximizes the expectation
};

struct OMaxResult {
  double value = 0.0;
  std::vector<double> witness;
};

/**
 * Exact optimum of sum_t values[t] * gamma(t) over gamma in the interval
 * ambiguity set `amb`.
 *
 * Starts from gamma = lower and hands the residual mass 1 - sum(lower) to the
 * support elements in ascending value order (pessimistic) or descending order
 * (optimistic), each capped at upper - lower. Equal values are visited in
 * ascending index order. Throws ValidationError for infeasible sets.
 */
OMaxResult o_maximization(std::span<const double> values, AmbiguityView amb, Adversary adversary);

/// Writes the visiting order used by o_maximization into `order`.
void omax_order(std::span<const double> values, Adversary adversary, std::span<std::uint32_t> order);

/// Unchecked value-only variant with a precomputed visiting order.
inline double omax_value_ordered(std::span<const double> values, AmbiguityView amb,
                                 std::span<const std::uint32_t> order) {
  double residual = 1.0;
  double value = 0.0;
  const Index m = values.size();
  for (Index t = 0; t < m; ++t) {
    residual -= amb.lower[t];
    value += values[t] * amb.lower[t];
  }
  for (Index k = 0; k < m && residual > 0.0; ++k) {
    const std::uint32_t t = order[k];
    const double gap = amb.upper[t] - amb.lower[t];
    const double add = gap < residual ? gap : residual;
    value += values[t] * add;
    residual -= add;
  }
  return value;
}

/// Unchecked value-only variant; `scratch` must hold values.size() entries.
double omax_value(std::span<const double> values, AmbiguityView amb, Adversary adversary,
                  std::span<std::uint32_t> scratch);

}  // namespace odimdp
