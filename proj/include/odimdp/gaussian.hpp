#pragma once

#include "odimdp/interval.hpp"

#include <vector>

namespace odimdp {

/// Mean and variance enclosure of one axis of a Gaussian kernel over a cell.
struct AxisMoments {
  Interval mean;
  Interval variance;
};

/// Per-axis mean and variance enclosures for one (cell, action, component).
struct MomentBounds {
  std::vector<AxisMoments> axes;
};

struct ProbabilityBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/**
 * P(a <= X <= b) for X ~ N(mean, variance). Uses complementary error
 * functions on the side away from the mean so that tail masses keep full
 * relative accuracy. Throws ValidationError for a nonpositive variance.
 */
double interval_probability(double mean, double variance, Interval target);

/// P(X < lo or X > hi) for X ~ N(mean, variance), computed from the two tails.
double outside_probability(double mean, double variance, Interval domain);

/**
 * Tight bounds on P(X in target) over mean in m.mean and variance in m.variance.
 *
 * The minimum is attained at a corner of the moment box. The maximum is
 * attained at the mean clamped to the target midpoint, with the variance at an
 * endpoint or, when that mean lies outside the target, at the interior
 * stationary variance.
 */
ProbabilityBounds marginal_bounds(const AxisMoments& m, Interval target);

/// Bounds on the probability of leaving `domain`, evaluated from the tails.
ProbabilityBounds sink_bounds(const AxisMoments& m, Interval domain);

}  // namespace odimdp
