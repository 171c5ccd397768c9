#pragma once

#include "odimdp/interval_ambiguity.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace odimdp {

/// Per-axis index reserved for the sink state when a state space has sinks.
inline constexpr Index kSinkIndex = 0;

/// Joint state coordinates, one per axis.
using JointState = std::vector<Index>;

/**
 * Product state space S = S_1 x ... x S_n.
 *
 * Joint states are linearized lexicographically with axis 0 slowest varying.
 * When `has_sinks` is set, index 0 on every axis is that axis' sink state and
 * any joint state with a sink coordinate is a sink state.
 */
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(std::vector<Index> axis_sizes, bool has_sinks);

  Index axis_count() const noexcept { return sizes_.size(); }
  Index axis_size(Index axis) const { return sizes_.at(axis); }
  std::span<const Index> axis_sizes() const noexcept { return sizes_; }
  Index stride(Index axis) const { return strides_.at(axis); }
  Index size() const noexcept { return size_; }
  bool has_sinks() const noexcept { return has_sinks_; }

  Index linear(std::span<const Index> coords) const;
  JointState coords(Index state) const;
  void coords(Index state, std::span<Index> out) const;

  bool is_sink(Index state) const;
  /// Number of joint states without any sink coordinate.
  Index interior_size() const noexcept { return interior_size_; }

  bool operator==(const StateSpace& other) const {
    return sizes_ == other.sizes_ && has_sinks_ == other.has_sinks_;
  }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> strides_;
  Index size_ = 0;
  Index interior_size_ = 0;
  bool has_sinks_ = false;
};

/**
 * Orthogonally decoupled interval MDP: the ambiguity set of each
 * source-action pair is the product of one interval ambiguity set per axis.
 *
 * Bounds are stored densely for every non-sink source ("row") and action, as
 * contiguous per-axis arrays. Sink sources are not stored; their marginals are
 * absorbing point masses on the source's own coordinates (the sink on the
 * sink axes). The constructor checks shapes only; use validate_odimdp for the
 * probability invariants.
 */
class OdImdp {
 public:
  OdImdp(StateSpace space, Index action_count, std::vector<double> lower,
         std::vector<double> upper, std::vector<std::string> action_labels = {});

  /// Builds a model by querying `marginal(source, action, axis)` for every stored row.
  static OdImdp from_marginals(
      StateSpace space, Index action_count,
      const std::function<IntervalAmbiguity(Index, Index, Index)>& marginal,
      std::vector<std::string> action_labels = {});

  const StateSpace& space() const noexcept { return space_; }
  Index state_count() const noexcept { return space_.size(); }
  Index axis_count() const noexcept { return space_.axis_count(); }
  Index action_count() const noexcept { return action_count_; }
  const std::vector<std::string>& action_labels() const noexcept { return action_labels_; }

  /// Number of stored source rows.
  Index row_count() const noexcept { return row_to_state_.size(); }
  /// Row of a stored source, or nullopt for a sink source.
  std::optional<Index> row_of(Index state) const;
  Index state_of_row(Index row) const { return row_to_state_.at(row); }

  AmbiguityView marginal(Index state, Index action, Index axis) const;
  AmbiguityView row_marginal(Index row, Index action, Index axis) const;

  /// Sum of axis sizes, the length of one (row, action) block.
  Index block_size() const noexcept { return block_size_; }
  Index axis_offset(Index axis) const { return axis_offsets_.at(axis); }
  std::span<const double> lower_data() const noexcept { return lower_; }
  std::span<const double> upper_data() const noexcept { return upper_; }

 private:
  StateSpace space_;
  Index action_count_;
  std::vector<std::string> action_labels_;
  std::vector<Index> axis_offsets_;
  Index block_size_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Index> row_to_state_;
  std::vector<std::int64_t> state_to_row_;
  // Point masses for sink sources: unit_[axis_offset + c*size + t] = (t == c).
  std::vector<double> unit_;
  std::vector<Index> unit_offsets_;
};

/**
 * Flat interval MDP over an explicitly enumerated joint state space; one
 * dense bound vector over all |S| targets per (source, action).
 */
class Imdp {
 public:
  Imdp(Index state_count, Index action_count, std::vector<double> lower,
       std::vector<double> upper, std::optional<StateSpace> shape = std::nullopt);

  Index state_count() const noexcept { return state_count_; }
  Index action_count() const noexcept { return action_count_; }
  /// Product shape when the model was built from an odIMDP.
  const std::optional<StateSpace>& shape() const noexcept { return shape_; }

  AmbiguityView transition(Index state, Index action) const;
  std::span<const double> lower_data() const noexcept { return lower_; }
  std::span<const double> upper_data() const noexcept { return upper_; }

 private:
  Index state_count_;
  Index action_count_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::optional<StateSpace> shape_;
};

/**
 * Mixture of K odIMDPs sharing states and actions, with an interval
 * ambiguity set over mixture weights per stored (row, action).
 */
class MixtureOdImdp {
 public:
  MixtureOdImdp(std::vector<OdImdp> components, std::vector<double> weight_lower,
                std::vector<double> weight_upper);

  Index component_count() const noexcept { return components_.size(); }
  const OdImdp& component(Index r) const { return components_.at(r); }
  const std::vector<OdImdp>& components() const noexcept { return components_; }
  const StateSpace& space() const noexcept { return components_.front().space(); }
  Index state_count() const noexcept { return space().size(); }
  Index action_count() const noexcept { return components_.front().action_count(); }

  /// Weight ambiguity set of a stored source; sink sources get the unconstrained set.
  AmbiguityView weights(Index state, Index action) const;
  std::span<const double> weight_lower_data() const noexcept { return weight_lower_; }
  std::span<const double> weight_upper_data() const noexcept { return weight_upper_; }

 private:
  std::vector<OdImdp> components_;
  std::vector<double> weight_lower_;
  std::vector<double> weight_upper_;
  std::vector<double> free_lower_;
  std::vector<double> free_upper_;
};

/// One invariant violation found by validation.
struct Violation {
  Index state = 0;
  Index action = 0;
  /// Axis of the offending marginal; nullopt for weight sets / joint rows.
  std::optional<Index> axis;
  /// Offending support element, when the violation is entrywise.
  std::optional<Index> element;
  std::string message;
};

std::vector<Violation> validate_odimdp(const OdImdp& model);
std::vector<Violation> validate_imdp(const Imdp& model);
std::vector<Violation> validate_mixture(const MixtureOdImdp& model);

/// Throws ValidationError listing the first violations when the report is non-empty.
void require_valid(const std::vector<Violation>& report, const std::string& what);

/// Scalar storage accounting at 8 bytes per scalar.
struct MemoryFootprint {
  std::uint64_t scalars = 0;
  std::uint64_t bytes = 0;
  /// |S| including sink states.
  std::uint64_t states_with_sinks = 0;
  /// |S| counting grid states only.
  std::uint64_t states_without_sinks = 0;
  /// 2 |S~| |A| sum_i |S~_i| over grid states and grid columns only; equals
  /// 2 |S||A| n |S|^(1/n) for equal axis sizes.
  std::uint64_t grid_formula_scalars = 0;
};

MemoryFootprint memory_footprint(const OdImdp& model);
MemoryFootprint memory_footprint(const Imdp& model);
MemoryFootprint memory_footprint(const MixtureOdImdp& model);

/// Dense IMDP cost 2 |S|^2 |A| for a product of the given space.
MemoryFootprint dense_imdp_footprint(const StateSpace& space, Index action_count);

inline constexpr double kDefaultMemoryBudget = 2.0 * 1024 * 1024 * 1024;

/**
 * Flat IMDP whose joint bounds are the entrywise products of the marginal
 * bounds. Joint targets follow the space's lexicographic order.
 * Throws CapacityError when the dense storage exceeds `memory_budget_bytes`.
 */
Imdp product_imdp(const OdImdp& model, double memory_budget_bytes = kDefaultMemoryBudget);

/// Human-readable byte count, e.g. "1.10 TB".
std::string format_bytes(double bytes);

}  // namespace odimdp
