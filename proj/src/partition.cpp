#include "odimdp/partition.hpp"

#include "odimdp/errors.hpp"

#include <cmath>
#include <string>

namespace odimdp {

RectPartition::RectPartition(Box region, std::vector<Index> counts)
    : region_(std::move(region)), counts_(std::move(counts)) {
  if (region_.empty() || region_.size() != counts_.size()) {
    throw ValidationError("partition: region and counts must have the same nonzero length");
  }
  std::vector<Index> sizes;
  for (Index i = 0; i < region_.size(); ++i) {
    if (!(region_[i].lo < region_[i].hi) || !std::isfinite(region_[i].width())) {
      throw ValidationError("partition: axis " + std::to_string(i) + " has nonpositive width");
    }
    if (counts_[i] == 0) {
      throw ValidationError("partition: axis " + std::to_string(i) + " has zero cells");
    }
    cell_count_ *= counts_[i];
    sizes.push_back(counts_[i] + 1);
  }
  space_ = StateSpace(std::move(sizes), true);
}

double RectPartition::edge(Index axis, Index j) const {
  const Interval& r = region_.at(axis);
  const Index n = counts_.at(axis);
  if (j >= n) return r.hi;
  return r.lo + static_cast<double>(j) * (r.width() / static_cast<double>(n));
}

Box RectPartition::cell_box(std::span<const Index> cells) const {
  Box box(axis_count());
  for (Index i = 0; i < axis_count(); ++i) box[i] = cell(i, cells[i]);
  return box;
}

std::optional<Index> RectPartition::locate_axis(Index axis, double x) const {
  const Interval& r = region_.at(axis);
  if (!(x >= r.lo && x <= r.hi)) return std::nullopt;
  const Index n = counts_[axis];
  auto j = static_cast<Index>(std::floor((x - r.lo) / width(axis)));
  j = std::min(j, n - 1);
  // The division can land one cell off near an edge; settle against the edges.
  while (j > 0 && x < edge(axis, j)) --j;
  while (j + 1 < n && x >= edge(axis, j + 1)) ++j;
  return j;
}

std::optional<std::vector<Index>> RectPartition::locate(std::span<const double> x) const {
  if (x.size() != axis_count()) return std::nullopt;
  std::vector<Index> cells(axis_count());
  for (Index i = 0; i < axis_count(); ++i) {
    const auto j = locate_axis(i, x[i]);
    if (!j) return std::nullopt;
    cells[i] = *j;
  }
  return cells;
}

StateSpace RectPartition::state_space() const { return space_; }

Index RectPartition::state_of(std::span<const Index> cells) const {
  std::vector<Index> coords(cells.begin(), cells.end());
  for (auto& c : coords) ++c;
  return space_.linear(coords);
}

std::optional<Index> RectPartition::state_of_point(std::span<const double> x) const {
  const auto cells = locate(x);
  if (!cells) return std::nullopt;
  return state_of(*cells);
}

Box RectPartition::state_box(Index state) const {
  if (space_.is_sink(state)) {
    throw ValidationError("state " + std::to_string(state) + " is a sink and has no region");
  }
  auto coords = space_.coords(state);
  for (auto& c : coords) --c;
  return cell_box(coords);
}

}  // namespace odimdp
