#include "odimdp/omax.hpp"

#include "odimdp/errors.hpp"

#include <algorithm>
#include <numeric>

namespace odimdp {

void omax_order(std::span<const double> values, Adversary adversary,
                std::span<std::uint32_t> order) {
  const Index m = values.size();
  std::iota(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), 0U);
  auto first = order.begin();
  auto last = order.begin() + static_cast<std::ptrdiff_t>(m);
  // Small supports dominate in the recursion; insertion sort beats std::sort there.
  const auto before = [&](std::uint32_t a, std::uint32_t b) {
    if (values[a] != values[b]) {
      return adversary == Adversary::Pessimistic ? values[a] < values[b] : values[a] > values[b];
    }
    return a < b;
  };
  if (m <= 16) {
    for (auto it = first + 1; it < last; ++it) {
      const std::uint32_t key = *it;
      auto j = it;
      while (j > first && before(key, *(j - 1))) {
        *j = *(j - 1);
        --j;
      }
      *j = key;
    }
  } else {
    std::sort(first, last, before);
  }
}

double omax_value(std::span<const double> values, AmbiguityView amb, Adversary adversary,
                  std::span<std::uint32_t> scratch) {
  omax_order(values, adversary, scratch);
  return omax_value_ordered(values, amb, scratch.first(values.size()));
}

OMaxResult o_maximization(std::span<const double> values, AmbiguityView amb,
                          Adversary adversary) {
  if (values.size() != amb.size()) {
    throw ValidationError("value vector length " + std::to_string(values.size()) +
                          " does not match ambiguity support " + std::to_string(amb.size()));
  }
  const auto violations = check_interval_bounds(amb.lower, amb.upper);
  if (!violations.empty()) {
    throw ValidationError("infeasible ambiguity set: " + violations.front());
  }
  const Index m = values.size();
  std::vector<std::uint32_t> order(m);
  omax_order(values, adversary, order);

  OMaxResult result;
  result.witness.assign(amb.lower.begin(), amb.lower.end());
  double residual = 1.0 - std::accumulate(amb.lower.begin(), amb.lower.end(), 0.0);
  for (Index k = 0; k < m && residual > 0.0; ++k) {
    const Index t = order[k];
    const double add = std::min(residual, amb.upper[t] - amb.lower[t]);
    result.witness[t] += add;
    residual -= add;
  }
  for (Index t = 0; t < m; ++t) result.value += values[t] * result.witness[t];
  return result;
}

}  // namespace odimdp
