#pragma once

#include "odimdp/interval.hpp"
#include "odimdp/models.hpp"

#include <optional>
#include <span>
#include <vector>

namespace odimdp {

/**
 * Uniform grid over a hyperrectangular region of interest.
 *
 * Cell j on axis i is [lo_i + j w_i, lo_i + (j + 1) w_i]. For point location
 * cells are half-open on the right except the last cell per axis, which is
 * closed. Abstract states add a sink at index 0 on every axis, so grid cell j
 * has abstract coordinate j + 1.
 */
class RectPartition {
 public:
  RectPartition(Box region, std::vector<Index> counts);

  Index axis_count() const noexcept { return region_.size(); }
  const Box& region() const noexcept { return region_; }
  std::span<const Index> counts() const noexcept { return counts_; }
  Index count(Index axis) const { return counts_.at(axis); }
  double width(Index axis) const { return region_.at(axis).width() / static_cast<double>(counts_.at(axis)); }
  Index cell_count() const noexcept { return cell_count_; }

  double edge(Index axis, Index j) const;
  Interval cell(Index axis, Index j) const { return {edge(axis, j), edge(axis, j + 1)}; }
  /// Box of the grid cell with the given per-axis cell indices.
  Box cell_box(std::span<const Index> cells) const;

  /// Cell index along one axis, or nullopt outside the region.
  std::optional<Index> locate_axis(Index axis, double x) const;
  std::optional<std::vector<Index>> locate(std::span<const double> x) const;

  /// Product space with a sink on every axis.
  StateSpace state_space() const;
  /// Joint abstract state of grid cell indices.
  Index state_of(std::span<const Index> cells) const;
  /// Abstract state containing x; nullopt outside the region.
  std::optional<Index> state_of_point(std::span<const double> x) const;
  /// Box of a non-sink abstract state; throws ValidationError for sinks.
  Box state_box(Index state) const;

 private:
  Box region_;
  std::vector<Index> counts_;
  Index cell_count_ = 1;
  StateSpace space_;
};

}  // namespace odimdp
