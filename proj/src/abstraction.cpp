#include "odimdp/abstraction.hpp"

#include "odimdp/errors.hpp"
#include "parallel.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace odimdp {

void repair_marginal(std::span<double> lower, std::span<double> upper) {
  const Index m = upper.size();
  double sum_upper = std::accumulate(upper.begin(), upper.end(), 0.0);
  if (sum_upper < 1.0) {
    const double raise = std::nextafter((1.0 - sum_upper) / static_cast<double>(m), 1.0);
    if (raise > kMaxWidening) {
      throw ValidationError("upper bounds miss unit mass by " + std::to_string(1.0 - sum_upper));
    }
    for (auto& u : upper) u = std::min(1.0, u + raise);
  }
  const double sum_lower = std::accumulate(lower.begin(), lower.end(), 0.0);
  if (sum_lower > 1.0) {
    const double scale = std::nextafter(1.0 / sum_lower, 0.0);
    for (auto& l : lower) {
      const double scaled = l * scale;
      if (l - scaled > kMaxWidening) {
        throw ValidationError("lower bounds exceed unit mass by " + std::to_string(sum_lower - 1.0));
      }
      l = scaled;
    }
  }
}

OdImdp build_component(const GaussianKernelSpec& kernel, std::size_t component,
                       const RectPartition& partition, const AbstractionOptions& options) {
  kernel.validate();
  if (component >= kernel.components.size()) throw ValidationError("no such kernel component");
  const KernelComponent& comp = kernel.components[component];
  const Index n = partition.axis_count();
  if (kernel.dimension() != n) {
    throw ValidationError("kernel dimension " + std::to_string(kernel.dimension()) +
                          " does not match partition dimension " + std::to_string(n));
  }
  const StateSpace space = partition.state_space();
  const Index actions = kernel.action_count();
  std::vector<Index> offsets(n);
  Index block = 0;
  for (Index i = 0; i < n; ++i) {
    offsets[i] = block;
    block += space.axis_size(i);
  }
  const Index rows = partition.cell_count();
  std::vector<double> lower(rows * actions * block);
  std::vector<double> upper(lower.size());

  detail::parallel_chunks(rows, options.workers, [&](Index begin, Index end) {
    std::vector<Index> cells(n);
    for (Index row = begin; row < end; ++row) {
      Index rest = row;
      for (Index i = n; i-- > 0;) {
        cells[i] = rest % partition.count(i);
        rest /= partition.count(i);
      }
      const Box cell = partition.cell_box(cells);
      for (Index a = 0; a < actions; ++a) {
        const MomentBounds moments = bound_moments(comp, cell, kernel.inputs[a]);
        for (Index i = 0; i < n; ++i) {
          const Index base = (row * actions + a) * block + offsets[i];
          const auto& m = moments.axes[i];
          const auto sink = sink_bounds(m, partition.region()[i]);
          lower[base] = sink.lower;
          upper[base] = sink.upper;
          for (Index t = 0; t < partition.count(i); ++t) {
            const auto p = marginal_bounds(m, partition.cell(i, t));
            lower[base + 1 + t] = p.lower;
            upper[base + 1 + t] = p.upper;
          }
          const Index size = space.axis_size(i);
          repair_marginal(std::span<double>(lower).subspan(base, size),
                          std::span<double>(upper).subspan(base, size));
        }
      }
    }
  });

  OdImdp model(space, actions, std::move(lower), std::move(upper), kernel.input_labels);
  require_valid(validate_odimdp(model), "abstraction");
  return model;
}

OdImdp build_odimdp(const GaussianKernelSpec& kernel, const RectPartition& partition,
                    const AbstractionOptions& options) {
  if (kernel.components.size() != 1) {
    throw ValidationError("build_odimdp needs a single-component kernel; use build_mixture");
  }
  return build_component(kernel, 0, partition, options);
}

MixtureOdImdp build_mixture(const GaussianKernelSpec& kernel, const RectPartition& partition,
                            const AbstractionOptions& options) {
  kernel.validate();
  const Index k = kernel.components.size();
  std::vector<OdImdp> components;
  components.reserve(k);
  for (Index r = 0; r < k; ++r) components.push_back(build_component(kernel, r, partition, options));

  const Index n = partition.axis_count();
  const Index actions = kernel.action_count();
  const Index rows = partition.cell_count();
  std::vector<double> lower(rows * actions * k, 1.0);
  std::vector<double> upper(lower.size(), 1.0);
  if (kernel.weights) {
    std::vector<Index> cells(n);
    for (Index row = 0; row < rows; ++row) {
      Index rest = row;
      for (Index i = n; i-- > 0;) {
        cells[i] = rest % partition.count(i);
        rest /= partition.count(i);
      }
      const Box cell = partition.cell_box(cells);
      for (Index a = 0; a < actions; ++a) {
        const Box w = kernel.weights->enclose(cell, kernel.inputs[a]);
        for (Index r = 0; r < k; ++r) {
          lower[(row * actions + a) * k + r] = std::clamp(w[r].lo, 0.0, 1.0);
          upper[(row * actions + a) * k + r] = std::clamp(w[r].hi, 0.0, 1.0);
        }
      }
    }
  }
  MixtureOdImdp model(std::move(components), std::move(lower), std::move(upper));
  require_valid(validate_mixture(model), "mixture abstraction");
  return model;
}

}  // namespace odimdp
