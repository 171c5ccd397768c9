#include "odimdp/models.hpp"

#include "odimdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace odimdp {

StateSpace::StateSpace(std::vector<Index> axis_sizes, bool has_sinks)
    : sizes_(std::move(axis_sizes)), has_sinks_(has_sinks) {
  if (sizes_.empty()) throw ValidationError("state space needs at least one axis");
  strides_.assign(sizes_.size(), 1);
  size_ = 1;
  interior_size_ = 1;
  for (Index i = sizes_.size(); i-- > 0;) {
    const Index min_size = has_sinks_ ? 2 : 1;
    if (sizes_[i] < min_size) {
      throw ValidationError("axis " + std::to_string(i) + " has too few states");
    }
    strides_[i] = size_;
    size_ *= sizes_[i];
    interior_size_ *= has_sinks_ ? sizes_[i] - 1 : sizes_[i];
  }
}

Index StateSpace::linear(std::span<const Index> coords) const {
  Index s = 0;
  for (Index i = 0; i < sizes_.size(); ++i) s += coords[i] * strides_[i];
  return s;
}

JointState StateSpace::coords(Index state) const {
  JointState out(sizes_.size());
  coords(state, out);
  return out;
}

void StateSpace::coords(Index state, std::span<Index> out) const {
  for (Index i = 0; i < sizes_.size(); ++i) {
    out[i] = state / strides_[i];
    state %= strides_[i];
  }
}

bool StateSpace::is_sink(Index state) const {
  if (!has_sinks_) return false;
  for (Index i = 0; i < sizes_.size(); ++i) {
    if (state / strides_[i] == kSinkIndex) return true;
    state %= strides_[i];
  }
  return false;
}

// ---------------------------------------------------------------------------

OdImdp::OdImdp(StateSpace space, Index action_count, std::vector<double> lower,
               std::vector<double> upper, std::vector<std::string> action_labels)
    : space_(std::move(space)),
      action_count_(action_count),
      action_labels_(std::move(action_labels)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  if (action_count_ == 0) throw ValidationError("model needs at least one action");
  if (action_labels_.empty()) {
    for (Index a = 0; a < action_count_; ++a) action_labels_.push_back(std::to_string(a));
  }
  if (action_labels_.size() != action_count_) {
    throw ValidationError("action label count does not match action count");
  }
  const Index n = space_.axis_count();
  axis_offsets_.resize(n);
  unit_offsets_.resize(n);
  Index unit_size = 0;
  for (Index i = 0; i < n; ++i) {
    axis_offsets_[i] = block_size_;
    block_size_ += space_.axis_size(i);
    unit_offsets_[i] = unit_size;
    unit_size += space_.axis_size(i) * space_.axis_size(i);
  }
  unit_.assign(unit_size, 0.0);
  for (Index i = 0; i < n; ++i) {
    const Index m = space_.axis_size(i);
    for (Index c = 0; c < m; ++c) unit_[unit_offsets_[i] + c * m + c] = 1.0;
  }

  state_to_row_.assign(space_.size(), -1);
  row_to_state_.reserve(space_.interior_size());
  for (Index s = 0; s < space_.size(); ++s) {
    if (space_.is_sink(s)) continue;
    state_to_row_[s] = static_cast<std::int64_t>(row_to_state_.size());
    row_to_state_.push_back(s);
  }
  const Index expected = row_to_state_.size() * action_count_ * block_size_;
  if (lower_.size() != expected || upper_.size() != expected) {
    throw ValidationError("bound arrays have " + std::to_string(lower_.size()) + "/" +
                          std::to_string(upper_.size()) + " entries, expected " +
                          std::to_string(expected));
  }
}

OdImdp OdImdp::from_marginals(
    StateSpace space, Index action_count,
    const std::function<IntervalAmbiguity(Index, Index, Index)>& marginal,
    std::vector<std::string> action_labels) {
  Index block = 0;
  for (Index size : space.axis_sizes()) block += size;
  const Index rows = space.interior_size();
  std::vector<double> lower(rows * action_count * block);
  std::vector<double> upper(lower.size());
  Index row = 0;
  for (Index s = 0; s < space.size(); ++s) {
    if (space.is_sink(s)) continue;
    for (Index a = 0; a < action_count; ++a) {
      Index offset = (row * action_count + a) * block;
      for (Index i = 0; i < space.axis_count(); ++i) {
        const IntervalAmbiguity amb = marginal(s, a, i);
        if (amb.size() != space.axis_size(i)) {
          throw ValidationError("marginal support size does not match axis size");
        }
        std::copy(amb.lower().begin(), amb.lower().end(), lower.begin() + offset);
        std::copy(amb.upper().begin(), amb.upper().end(), upper.begin() + offset);
        offset += amb.size();
      }
    }
    ++row;
  }
  return OdImdp(std::move(space), action_count, std::move(lower), std::move(upper),
                std::move(action_labels));
}

std::optional<Index> OdImdp::row_of(Index state) const {
  const std::int64_t row = state_to_row_.at(state);
  if (row < 0) return std::nullopt;
  return static_cast<Index>(row);
}

AmbiguityView OdImdp::row_marginal(Index row, Index action, Index axis) const {
  const Index offset = (row * action_count_ + action) * block_size_ + axis_offsets_[axis];
  const Index m = space_.axis_size(axis);
  return {std::span<const double>(lower_).subspan(offset, m),
          std::span<const double>(upper_).subspan(offset, m)};
}

AmbiguityView OdImdp::marginal(Index state, Index action, Index axis) const {
  if (const auto row = row_of(state)) return row_marginal(*row, action, axis);
  // Absorbing sink source: stay on the own coordinate of every axis.
  const Index m = space_.axis_size(axis);
  const Index c = state / space_.stride(axis) % m;
  const auto unit = std::span<const double>(unit_).subspan(unit_offsets_[axis] + c * m, m);
  return {unit, unit};
}

// ---------------------------------------------------------------------------

Imdp::Imdp(Index state_count, Index action_count, std::vector<double> lower,
           std::vector<double> upper, std::optional<StateSpace> shape)
    : state_count_(state_count),
      action_count_(action_count),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      shape_(std::move(shape)) {
  const Index expected = state_count_ * action_count_ * state_count_;
  if (state_count_ == 0 || action_count_ == 0) throw ValidationError("empty IMDP");
  if (lower_.size() != expected || upper_.size() != expected) {
    throw ValidationError("IMDP bound arrays have the wrong size");
  }
  if (shape_ && shape_->size() != state_count_) {
    throw ValidationError("IMDP shape does not match state count");
  }
}

AmbiguityView Imdp::transition(Index state, Index action) const {
  const Index offset = (state * action_count_ + action) * state_count_;
  return {std::span<const double>(lower_).subspan(offset, state_count_),
          std::span<const double>(upper_).subspan(offset, state_count_)};
}

// ---------------------------------------------------------------------------

MixtureOdImdp::MixtureOdImdp(std::vector<OdImdp> components, std::vector<double> weight_lower,
                             std::vector<double> weight_upper)
    : components_(std::move(components)),
      weight_lower_(std::move(weight_lower)),
      weight_upper_(std::move(weight_upper)) {
  if (components_.empty()) throw ValidationError("mixture needs at least one component");
  const auto& first = components_.front();
  for (const auto& c : components_) {
    if (!(c.space() == first.space()) || c.action_count() != first.action_count()) {
      throw ValidationError("mixture components must share the state/action layout");
    }
  }
  const Index k = components_.size();
  const Index expected = first.row_count() * first.action_count() * k;
  if (weight_lower_.size() != expected || weight_upper_.size() != expected) {
    throw ValidationError("mixture weight arrays have the wrong size");
  }
  free_lower_.assign(k, 0.0);
  free_upper_.assign(k, 1.0);
}

AmbiguityView MixtureOdImdp::weights(Index state, Index action) const {
  const auto row = components_.front().row_of(state);
  if (!row) return {free_lower_, free_upper_};
  const Index k = components_.size();
  const Index offset = (*row * action_count() + action) * k;
  return {std::span<const double>(weight_lower_).subspan(offset, k),
          std::span<const double>(weight_upper_).subspan(offset, k)};
}

// ---------------------------------------------------------------------------

namespace {

void append_violations(std::vector<Violation>& report, AmbiguityView amb, Index state,
                       Index action, std::optional<Index> axis) {
  const auto messages = check_interval_bounds(amb.lower, amb.upper);
  if (messages.empty()) return;
  // Locate entrywise violations individually so the report names (s, a, axis, t).
  bool entrywise = false;
  for (Index t = 0; t < amb.size(); ++t) {
    const double lo = amb.lower[t];
    const double hi = amb.upper[t];
    if (lo < -kProbabilityTolerance || hi > 1.0 + kProbabilityTolerance ||
        lo > hi + kProbabilityTolerance || !std::isfinite(lo) || !std::isfinite(hi)) {
      std::ostringstream msg;
      msg << "lower=" << lo << " upper=" << hi << " out of order";
      report.push_back({state, action, axis, t, msg.str()});
      entrywise = true;
    }
  }
  for (const auto& m : messages) {
    const bool is_entry = m.rfind("bounds out of order", 0) == 0 || m.rfind("non-finite", 0) == 0;
    if (is_entry && entrywise) continue;
    report.push_back({state, action, axis, std::nullopt, m});
  }
}

}  // namespace

std::vector<Violation> validate_odimdp(const OdImdp& model) {
  std::vector<Violation> report;
  for (Index row = 0; row < model.row_count(); ++row) {
    const Index s = model.state_of_row(row);
    for (Index a = 0; a < model.action_count(); ++a) {
      for (Index i = 0; i < model.axis_count(); ++i) {
        append_violations(report, model.row_marginal(row, a, i), s, a, i);
      }
    }
  }
  return report;
}

std::vector<Violation> validate_imdp(const Imdp& model) {
  std::vector<Violation> report;
  for (Index s = 0; s < model.state_count(); ++s) {
    for (Index a = 0; a < model.action_count(); ++a) {
      append_violations(report, model.transition(s, a), s, a, std::nullopt);
    }
  }
  return report;
}

std::vector<Violation> validate_mixture(const MixtureOdImdp& model) {
  std::vector<Violation> report;
  for (const auto& component : model.components()) {
    auto part = validate_odimdp(component);
    report.insert(report.end(), part.begin(), part.end());
  }
  const auto& first = model.component(0);
  for (Index row = 0; row < first.row_count(); ++row) {
    const Index s = first.state_of_row(row);
    for (Index a = 0; a < model.action_count(); ++a) {
      append_violations(report, model.weights(s, a), s, a, std::nullopt);
    }
  }
  return report;
}

void require_valid(const std::vector<Violation>& report, const std::string& what) {
  if (report.empty()) return;
  std::ostringstream msg;
  msg << what << " failed validation with " << report.size() << " violation(s)";
  const Index shown = std::min<Index>(report.size(), 3);
  for (Index k = 0; k < shown; ++k) {
    const auto& v = report[k];
    msg << "; (s=" << v.state << ", a=" << v.action;
    if (v.axis) msg << ", axis=" << *v.axis;
    if (v.element) msg << ", t=" << *v.element;
    msg << "): " << v.message;
  }
  throw ValidationError(msg.str());
}

// ---------------------------------------------------------------------------

MemoryFootprint memory_footprint(const OdImdp& model) {
  MemoryFootprint fp;
  const auto& space = model.space();
  fp.scalars = 2ULL * model.row_count() * model.action_count() * model.block_size();
  fp.bytes = fp.scalars * sizeof(double);
  fp.states_with_sinks = space.size();
  fp.states_without_sinks = space.interior_size();
  std::uint64_t grid_columns = 0;
  for (Index size : space.axis_sizes()) grid_columns += space.has_sinks() ? size - 1 : size;
  fp.grid_formula_scalars = 2ULL * space.interior_size() * model.action_count() * grid_columns;
  return fp;
}

MemoryFootprint memory_footprint(const Imdp& model) {
  MemoryFootprint fp;
  const std::uint64_t states = model.state_count();
  fp.scalars = 2ULL * states * states * model.action_count();
  fp.bytes = fp.scalars * sizeof(double);
  fp.states_with_sinks = states;
  fp.states_without_sinks = model.shape() ? model.shape()->interior_size() : states;
  const std::uint64_t grid = fp.states_without_sinks;
  fp.grid_formula_scalars = 2ULL * grid * grid * model.action_count();
  return fp;
}

MemoryFootprint memory_footprint(const MixtureOdImdp& model) {
  MemoryFootprint fp;
  for (const auto& c : model.components()) {
    const auto part = memory_footprint(c);
    fp.scalars += part.scalars;
    fp.grid_formula_scalars += part.grid_formula_scalars;
  }
  fp.scalars += model.weight_lower_data().size() + model.weight_upper_data().size();
  fp.bytes = fp.scalars * sizeof(double);
  fp.states_with_sinks = model.space().size();
  fp.states_without_sinks = model.space().interior_size();
  return fp;
}

MemoryFootprint dense_imdp_footprint(const StateSpace& space, Index action_count) {
  MemoryFootprint fp;
  const double states = static_cast<double>(space.size());
  const double grid = static_cast<double>(space.interior_size());
  // Doubles avoid overflow for very large spaces; exact below 2^53.
  fp.scalars = static_cast<std::uint64_t>(2.0 * states * states * action_count);
  fp.bytes = fp.scalars * sizeof(double);
  fp.states_with_sinks = space.size();
  fp.states_without_sinks = space.interior_size();
  fp.grid_formula_scalars = static_cast<std::uint64_t>(2.0 * grid * grid * action_count);
  return fp;
}

std::string format_bytes(double bytes) {
  static constexpr const char* kUnits[] = {"B", "KB", "MB", "GB", "TB", "PB"};
  int unit = 0;
  while (bytes >= 1000.0 && unit < 5) {
    bytes /= 1000.0;
    ++unit;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f %s", bytes, kUnits[unit]);
  return buf;
}

Imdp product_imdp(const OdImdp& model, double memory_budget_bytes) {
  const auto& space = model.space();
  const Index n = space.axis_count();
  const Index states = space.size();
  const Index actions = model.action_count();
  const auto fp = dense_imdp_footprint(space, actions);
  const double required = 2.0 * static_cast<double>(states) * states * actions * sizeof(double);
  if (required > memory_budget_bytes) {
    const double grid_bytes = static_cast<double>(fp.grid_formula_scalars) * sizeof(double);
    throw CapacityError("dense product IMDP needs " + format_bytes(required) + " (" +
                            format_bytes(grid_bytes) + " counting grid states only), budget is " +
                            format_bytes(memory_budget_bytes),
                        required);
  }

  std::vector<double> lower(states * actions * states);
  std::vector<double> upper(lower.size());
  std::vector<Index> coords(n);
  std::vector<AmbiguityView> marginals(n);
  for (Index s = 0; s < states; ++s) {
    for (Index a = 0; a < actions; ++a) {
      for (Index i = 0; i < n; ++i) marginals[i] = model.marginal(s, a, i);
      const Index offset = (s * actions + a) * states;
      for (Index t = 0; t < states; ++t) {
        space.coords(t, coords);
        double lo = 1.0;
        double hi = 1.0;
        for (Index i = 0; i < n; ++i) {
          lo *= marginals[i].lower[coords[i]];
          hi *= marginals[i].upper[coords[i]];
        }
        lower[offset + t] = lo;
        upper[offset + t] = hi;
      }
    }
  }
  return Imdp(states, actions, std::move(lower), std::move(upper), space);
}

}  // namespace odimdp
