#include "odimdp/synthesis.hpp"

#include "odimdp/errors.hpp"
#include "parallel.hpp"

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <cstring>

namespace odimdp {

namespace {

bool inside(const Box& inner, const Box& outer) {
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i].lo < outer[i].lo || inner[i].hi > outer[i].hi) return false;
  }
  return true;
}

bool interiors_meet(const Box& a, const Box& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].lo < b[i].hi && b[i].lo < a[i].hi)) return false;
  }
  return true;
}

bool in_any(const std::vector<Box>& boxes, std::span<const double> x) {
  for (const Box& b : boxes) {
    bool in = true;
    for (std::size_t i = 0; i < b.size() && in; ++i) in = b[i].contains(x[i]);
    if (in) return true;
  }
  return false;
}

bool in_region(const Box& region, std::span<const double> x) {
  for (std::size_t i = 0; i < region.size(); ++i) {
    if (!region[i].contains(x[i])) return false;
  }
  return true;
}

Labeling dual_labeling(const Labeling& labeling) {
  Labeling dual;
  dual.labels.resize(labeling.size());
  for (Index s = 0; s < labeling.size(); ++s) {
    dual.labels[s] =
        labeling.labels[s] == StateLabel::Avoid ? StateLabel::Reach : StateLabel::Transient;
  }
  return dual;
}

void complement(std::vector<double>& v) {
  for (auto& x : v) x = 1.0 - x;
}

template <typename Model>
SynthesisResult synthesize_impl(const Model& model, const Labeling& labeling,
                                const SynthesisOptions& options) {
  IterationOptions it;
  it.horizon = options.horizon;
  it.order = options.order;
  it.workers = options.workers;

  SynthesisResult result;
  result.kind = options.kind;
  result.labeling = labeling;
  if (options.kind == SpecKind::ReachAvoid) {
    it.direction = {Adversary::Pessimistic, Objective::Maximize};
    auto low = value_iteration(model, labeling, it);
    it.direction = {Adversary::Optimistic, Objective::Maximize};
    auto high = evaluate_policy(model, labeling, low.policy, it);
    result.lower = std::move(low.values);
    result.upper = std::move(high.values);
    result.policy = std::move(low.policy);
  } else {
    if (labeling.count(StateLabel::Reach) > 0) {
      throw ValidationError("safety synthesis does not take reach states");
    }
    const Labeling dual = dual_labeling(labeling);
    it.direction = {Adversary::Optimistic, Objective::Minimize};
    auto high_bad = value_iteration(model, dual, it);
    it.direction = {Adversary::Pessimistic, Objective::Minimize};
    auto low_bad = evaluate_policy(model, dual, high_bad.policy, it);
    complement(high_bad.values.values);
    complement(low_bad.values.values);
    result.lower = std::move(high_bad.values);
    result.upper = std::move(low_bad.values);
    result.policy = std::move(high_bad.policy);
  }
  result.metrics = compute_metrics(result.lower.values, result.upper.values, labeling);
  result.provenance.model_hash = model_hash(model);
  return result;
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < size; ++k) {
      h_ ^= p[k];
      h_ *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t x) { bytes(&x, sizeof x); }
  void doubles(std::span<const double> xs) { bytes(xs.data(), xs.size_bytes()); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace

LabelingResult label_states(const RectPartition& partition, const ReachAvoidSpec& spec) {
  const Index n = partition.axis_count();
  spec.validate(n);
  const StateSpace space = partition.state_space();
  LabelingResult out;
  out.labeling.labels.assign(space.size(), StateLabel::Transient);
  std::vector<Index> coords(n);
  for (Index s = 0; s < space.size(); ++s) {
    if (space.is_sink(s)) {
      out.labeling.labels[s] = StateLabel::Avoid;
      continue;
    }
    const Box cell = partition.state_box(s);
    bool avoid = false;
    for (const Box& o : spec.avoid) {
      if (interiors_meet(cell, o)) {
        avoid = true;
        if (!inside(cell, o)) out.misaligned = true;
      }
    }
    bool reach = false;
    for (const Box& r : spec.reach) {
      if (inside(cell, r)) {
        reach = true;
      } else if (interiors_meet(cell, r)) {
        out.misaligned = true;
      }
    }
    if (avoid) {
      out.labeling.labels[s] = StateLabel::Avoid;
    } else if (reach) {
      out.labeling.labels[s] = StateLabel::Reach;
    }
  }
  if (out.misaligned) {
    out.warnings.push_back(
        "reach/avoid boundaries are not aligned with the grid; the upper bound may be unsound");
  }
  return out;
}

SynthesisResult synthesize(const OdImdp& model, const Labeling& labeling,
                           const SynthesisOptions& options) {
  return synthesize_impl(model, labeling, options);
}

SynthesisResult synthesize(const MixtureOdImdp& model, const Labeling& labeling,
                           const SynthesisOptions& options) {
  return synthesize_impl(model, labeling, options);
}

SynthesisResult synthesize(const Imdp& model, const Labeling& labeling,
                           const SynthesisOptions& options) {
  return synthesize_impl(model, labeling, options);
}

Metrics compute_metrics(std::span<const double> lower, std::span<const double> upper,
                        const Labeling& labeling) {
  if (lower.size() != labeling.size() || upper.size() != labeling.size()) {
    throw ValidationError("value and labeling sizes differ");
  }
  Metrics m;
  double sum_v = 0.0;
  double sum_gap = 0.0;
  for (Index s = 0; s < labeling.size(); ++s) {
    if (labeling.terminal(s)) continue;
    sum_v += lower[s];
    sum_gap += upper[s] - lower[s];
    ++m.states;
  }
  if (m.states > 0) {
    m.mean_v = sum_v / static_cast<double>(m.states);
    m.eps = sum_gap / static_cast<double>(m.states);
  }
  return m;
}

DeltaStats compare(const SynthesisResult& a, const SynthesisResult& b) {
  if (a.lower.values.size() != b.lower.values.size() || a.labeling.labels != b.labeling.labels) {
    throw ValidationError("compared results differ in state space or labeling");
  }
  DeltaStats d;
  d.per_state.assign(a.lower.values.size(), 0.0);
  double sum = 0.0;
  for (Index s = 0; s < a.labeling.size(); ++s) {
    if (a.labeling.terminal(s)) continue;
    const double delta = a.lower.values[s] - b.lower.values[s];
    d.per_state[s] = delta;
    if (d.count == 0 || delta < d.min) d.min = delta;
    if (d.count == 0 || delta > d.max) d.max = delta;
    sum += delta;
    ++d.count;
  }
  if (d.count > 0) d.mean = sum / static_cast<double>(d.count);
  return d;
}

std::uint64_t model_hash(const OdImdp& model) {
  Fnv1a h;
  for (Index size : model.space().axis_sizes()) h.u64(size);
  h.u64(model.action_count());
  h.doubles(model.lower_data());
  h.doubles(model.upper_data());
  return h.value();
}

std::uint64_t model_hash(const MixtureOdImdp& model) {
  Fnv1a h;
  for (const auto& c : model.components()) h.u64(model_hash(c));
  h.doubles(model.weight_lower_data());
  h.doubles(model.weight_upper_data());
  return h.value();
}

std::uint64_t model_hash(const Imdp& model) {
  Fnv1a h;
  h.u64(model.state_count());
  h.u64(model.action_count());
  h.doubles(model.lower_data());
  h.doubles(model.upper_data());
  return h.value();
}

ConcretePolicy::ConcretePolicy(const SynthesisResult& result, const RectPartition& partition)
    : policy_(result.policy), partition_(partition) {
  if (policy_.state_count() != partition_.state_space().size()) {
    throw ValidationError("policy does not match the partition");
  }
}

std::optional<Index> ConcretePolicy::action(std::span<const double> x, Index t) const {
  const auto state = partition_.state_of_point(x);
  if (!state) throw OutsideRegionError("state lies outside the region of interest");
  if (t >= policy_.horizon()) return std::nullopt;
  return policy_.action(*state, policy_.horizon() - t);
}

Trajectory simulate_trajectory(const GaussianKernelSpec& kernel, const Box& region,
                               const ReachAvoidSpec& spec, const ConcretePolicy& policy,
                               std::span<const double> x0, Rng& rng) {
  Trajectory tr;
  Vector x(x0.begin(), x0.end());
  const Index H = policy.horizon();
  for (Index k = 0;; ++k) {
    tr.states.push_back(x);
    if (!in_region(region, x) || in_any(spec.avoid, x)) return tr;
    if (spec.kind == SpecKind::ReachAvoid && in_any(spec.reach, x)) {
      tr.satisfied = true;
      return tr;
    }
    if (k == H) {
      tr.satisfied = spec.kind == SpecKind::Safety;
      return tr;
    }
    const Index a = policy.action(x, k).value_or(0);
    tr.actions.push_back(a);
    x = sample_step(kernel, x, kernel.inputs.at(a), rng);
  }
}

std::pair<double, double> clopper_pearson(Index successes, Index trials, double confidence) {
  if (trials == 0 || successes > trials) throw ValidationError("invalid binomial counts");
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  double lo = 0.0;
  double hi = 1.0;
  if (successes > 0) lo = boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1), alpha / 2);
  if (successes < trials) hi = boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k), 1 - alpha / 2);
  return {lo, hi};
}

McEstimate monte_carlo_validate(const GaussianKernelSpec& kernel, const Box& region,
                                const ReachAvoidSpec& spec, const ConcretePolicy& policy,
                                std::span<const double> x0, Index trials, std::uint64_t seed,
                                unsigned workers) {
  if (trials == 0) throw ValidationError("Monte Carlo needs at least one trial");
  std::vector<std::uint8_t> ok(trials, 0);
  detail::parallel_chunks(trials, workers, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      Rng rng(stream_seed(seed, i));
      ok[i] = simulate_trajectory(kernel, region, spec, policy, x0, rng).satisfied ? 1 : 0;
    }
  });
  McEstimate est;
  est.trials = trials;
  for (auto v : ok) est.successes += v;
  est.estimate = static_cast<double>(est.successes) / static_cast<double>(trials);
  std::tie(est.ci_lower, est.ci_upper) = clopper_pearson(est.successes, trials, 0.99);
  return est;
}

}  // namespace odimdp
