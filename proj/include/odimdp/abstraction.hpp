#pragma once

#include "odimdp/kernel.hpp"
#include "odimdp/models.hpp"
#include "odimdp/partition.hpp"

#include <span>

namespace odimdp {

/// Largest amount by which assembly may move a single bound to restore feasibility.
inline constexpr double kMaxWidening = 1e-12;

struct AbstractionOptions {
  unsigned workers = 1;
};

/**
 * Restores sum(lower) <= 1 <= sum(upper) after floating-point assembly:
 * uppers are raised uniformly and lowers scaled down, each by at most
 * kMaxWidening. Throws ValidationError when a larger change would be needed.
 */
void repair_marginal(std::span<double> lower, std::span<double> upper);

/**
 * Abstraction of one kernel component over the partition. Every non-sink
 * source and action gets, per axis, bounds for the sink (index 0) followed by
 * one bound per grid cell. The result is validated before it is returned.
 */
OdImdp build_component(const GaussianKernelSpec& kernel, std::size_t component,
                       const RectPartition& partition, const AbstractionOptions& options = {});

/// Single-component abstraction; throws ValidationError for mixtures.
OdImdp build_odimdp(const GaussianKernelSpec& kernel, const RectPartition& partition,
                    const AbstractionOptions& options = {});

/// Per-component tables plus weight bounds from the weight map's cell enclosure.
MixtureOdImdp build_mixture(const GaussianKernelSpec& kernel, const RectPartition& partition,
                            const AbstractionOptions& options = {});

}  // namespace odimdp
