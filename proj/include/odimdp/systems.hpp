#pragma once

#include "odimdp/kernel.hpp"
#include "odimdp/models.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace odimdp {

enum class SpecKind : std::uint8_t {
  ReachAvoid,  ///< reach a reach box while avoiding the avoid boxes and leaving X
  Safety,      ///< stay in X and out of the avoid boxes for the whole horizon
};

/// Reach and avoid sets as unions of boxes in state units.
struct ReachAvoidSpec {
  std::vector<Box> reach;
  std::vector<Box> avoid;
  SpecKind kind = SpecKind::ReachAvoid;
  Index horizon = 10;

  /// Throws ValidationError for overlapping reach/avoid sets or bad boxes.
  void validate(std::size_t dimension) const;
};

struct BenchmarkDef {
  std::string name;
  GaussianKernelSpec kernel;
  Box region;
  std::vector<Index> counts;
  ReachAvoidSpec spec;
};

/**
 * Built-in benchmark by name: car_parking, robot_reach, robot_reach_avoid,
 * bas4d, van_der_pol, switched or linear_nd(n) for n >= 1.
 * Throws ConfigError for unknown names.
 */
BenchmarkDef benchmark(std::string_view name);

std::vector<std::string> benchmark_names();

/// Single-component kernel with mean A x + B u + c and diagonal noise variance.
GaussianKernelSpec affine_kernel(std::size_t n, Vector a, std::size_t m, Vector b, Vector c,
                                 Vector noise_variance, std::vector<Vector> inputs);

/// Evenly spaced grid of `count` points over [lo, hi] (the midpoint when count == 1).
Vector linspace(double lo, double hi, std::size_t count);

}  // namespace odimdp
