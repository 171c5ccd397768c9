#include "odimdp/bellman.hpp"

#include "odimdp/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <unordered_map>

namespace odimdp {

// Policy / labeling -------------------------------------------------------------

std::optional<Index> Policy::action(Index state, Index steps_to_go) const {
  if (steps_to_go == 0 || steps_to_go > horizon_ || state >= state_count_) return std::nullopt;
  const std::int32_t a = actions_[(steps_to_go - 1) * state_count_ + state];
  if (a == kNoAction) return std::nullopt;
  return static_cast<Index>(a);
}

void Policy::set(Index state, Index steps_to_go, std::optional<Index> action) {
  actions_.at((steps_to_go - 1) * state_count_ + state) =
      action ? static_cast<std::int32_t>(*action) : kNoAction;
}

Index Labeling::count(StateLabel label) const {
  return static_cast<Index>(std::count(labels.begin(), labels.end(), label));
}

Labeling Labeling::from_sets(Index state_count, std::span<const Index> reach,
                             std::span<const Index> avoid) {
  Labeling out;
  out.labels.assign(state_count, StateLabel::Transient);
  for (Index s : reach) out.labels.at(s) = StateLabel::Reach;
  for (Index s : avoid) {
    if (out.labels.at(s) == StateLabel::Reach) {
      throw ValidationError("inconsistent labeling: state " + std::to_string(s) +
                            " is in both the reach and the avoid set");
    }
    out.labels[s] = StateLabel::Avoid;
  }
  return out;
}

std::vector<double> reach_indicator(const Labeling& labeling) {
  std::vector<double> v(labeling.size(), 0.0);
  for (Index s = 0; s < labeling.size(); ++s) {
    if (labeling.labels[s] == StateLabel::Reach) v[s] = 1.0;
  }
  return v;
}

namespace {

std::vector<Index> axis_permutation(Index n, EliminationOrder order) {
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  if (order == EliminationOrder::Reverse) std::reverse(perm.begin(), perm.end());
  return perm;
}

double tighter(double a, double b, Adversary adversary) {
  return adversary == Adversary::Pessimistic ? std::max(a, b) : std::min(a, b);
}

void check_value_size(std::span<const double> v_prev, Index state_count) {
  if (v_prev.size() != state_count) {
    throw ValidationError("value function has " + std::to_string(v_prev.size()) +
                          " entries, model has " + std::to_string(state_count) + " states");
  }
}

void check_pair_marginals(const OdImdp& model, Index source, Index action) {
  if (source >= model.state_count() || action >= model.action_count()) {
    throw ValidationError("source/action out of range");
  }
  for (Index i = 0; i < model.axis_count(); ++i) {
    const auto amb = model.marginal(source, action, i);
    const auto violations = check_interval_bounds(amb.lower, amb.upper);
    if (!violations.empty()) {
      throw ValidationError("infeasible ambiguity set on axis " + std::to_string(i) + ": " +
                            violations.front());
    }
  }
}

double recurse(const OdImdp& model, std::span<const double> v_prev, Index source, Index action,
               Adversary adversary, std::span<const Index> perm, Index depth,
               std::vector<Index>& coords, BellmanStats* stats) {
  const Index axis = perm[depth];
  const Index m = model.space().axis_size(axis);
  const bool leaf = depth + 1 == perm.size();
  std::vector<double> w(m);
  for (Index t = 0; t < m; ++t) {
    coords[axis] = t;
    w[t] = leaf ? v_prev[model.space().linear(coords)]
                : recurse(model, v_prev, source, action, adversary, perm, depth + 1, coords, stats);
  }
  std::vector<std::uint32_t> scratch(m);
  if (stats) ++stats->omax_calls;
  return omax_value(w, model.marginal(source, action, axis), adversary, scratch);
}

}  // namespace

double recursive_bellman(const OdImdp& model, std::span<const double> v_prev, Index source,
                         Index action, Adversary adversary, std::span<const Index> axis_order,
                         BellmanStats* stats) {
  check_value_size(v_prev, model.state_count());
  check_pair_marginals(model, source, action);
  const Index n = model.axis_count();
  std::vector<Index> sorted(axis_order.begin(), axis_order.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() != n || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      sorted.back() >= n) {
    throw ValidationError("elimination order must be a permutation of the axes");
  }
  std::vector<Index> coords(n, 0);
  return recurse(model, v_prev, source, action, adversary, axis_order, 0, coords, stats);
}

double recursive_bellman(const OdImdp& model, std::span<const double> v_prev, Index source,
                         Index action, Adversary adversary, EliminationOrder order,
                         BellmanStats* stats) {
  const Index n = model.axis_count();
  if (order != EliminationOrder::Best) {
    return recursive_bellman(model, v_prev, source, action, adversary,
                             axis_permutation(n, order), stats);
  }
  const double fwd = recursive_bellman(model, v_prev, source, action, adversary,
                                       axis_permutation(n, EliminationOrder::Forward), stats);
  const double rev = recursive_bellman(model, v_prev, source, action, adversary,
                                       axis_permutation(n, EliminationOrder::Reverse), stats);
  return tighter(fwd, rev, adversary);
}

double mixture_bellman(const MixtureOdImdp& model, std::span<const double> v_prev, Index source,
                       Index action, Adversary adversary, EliminationOrder order) {
  std::vector<double> per_component(model.component_count());
  for (Index r = 0; r < model.component_count(); ++r) {
    per_component[r] =
        recursive_bellman(model.component(r), v_prev, source, action, adversary, order);
  }
  return o_maximization(per_component, model.weights(source, action), adversary).value;
}

double imdp_bellman(const Imdp& model, std::span<const double> v_prev, Index source,
                    Index action, Adversary adversary) {
  check_value_size(v_prev, model.state_count());
  return o_maximization(v_prev, model.transition(source, action), adversary).value;
}

// Batched sweeps ----------------------------------------------------------------

namespace {

using Mask = std::span<const std::uint8_t>;

std::uint64_t hash_bounds(AmbiguityView amb) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](double x) {
    if (x == 0.0) x = 0.0;  // -0 and +0 compare equal
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xFFU;
      h *= 1099511628211ULL;
    }
  };
  for (double x : amb.lower) mix(x);
  for (double x : amb.upper) mix(x);
  return h;
}

bool same_bounds(AmbiguityView a, AmbiguityView b) {
  return std::equal(a.lower.begin(), a.lower.end(), b.lower.begin()) &&
         std::equal(a.upper.begin(), a.upper.end(), b.upper.begin());
}

/// Dense ids of distinct marginals of one axis, indexed by row * |A| + a.
std::vector<std::uint32_t> marginal_ids(const OdImdp& model, Index axis) {
  const Index actions = model.action_count();
  const Index pairs = model.row_count() * actions;
  std::vector<std::uint32_t> ids(pairs);
  std::vector<Index> representative;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
  for (Index p = 0; p < pairs; ++p) {
    const auto amb = model.row_marginal(p / actions, p % actions, axis);
    auto& bucket = buckets[hash_bounds(amb)];
    std::uint32_t id = 0;
    bool found = false;
    for (std::uint32_t candidate : bucket) {
      const Index rep = representative[candidate];
      if (same_bounds(amb, model.row_marginal(rep / actions, rep % actions, axis))) {
        id = candidate;
        found = true;
        break;
      }
    }
    if (!found) {
      id = static_cast<std::uint32_t>(representative.size());
      representative.push_back(p);
      bucket.push_back(id);
    }
    ids[p] = id;
  }
  return ids;
}

/**
 * Evaluates the recursive bound for many (row, action) pairs bottom-up.
 *
 * Level L holds W after eliminating the L innermost axes of one pair; it only
 * depends on the marginals of those axes. Pairs are visited sorted by their
 * innermost-first marginal ids, so consecutive pairs reuse every level whose
 * marginals coincide. The arithmetic per level is identical to
 * recursive_bellman with the same order.
 */
class OdImdpSweep {
 public:
  OdImdpSweep(const OdImdp& model, std::vector<Index> perm)
      : model_(model), perm_(std::move(perm)) {
    const auto& space = model.space();
    const Index n = perm_.size();
    dims_.resize(n);
    for (Index j = 0; j < n; ++j) dims_[j] = space.axis_size(perm_[j]);
    level_sizes_.assign(n + 1, 1);
    level_sizes_[0] = space.size();
    for (Index level = 1; level <= n; ++level) {
      level_sizes_[level] = level_sizes_[level - 1] / dims_[n - level];
    }
    max_dim_ = *std::max_element(dims_.begin(), dims_.end());

    bool identity = true;
    for (Index j = 0; j < n; ++j) identity = identity && perm_[j] == j;
    if (!identity) {
      to_original_.resize(space.size());
      std::vector<Index> coords(n);
      for (Index p = 0; p < space.size(); ++p) {
        Index rest = p;
        for (Index j = n; j-- > 0;) {
          coords[perm_[j]] = rest % dims_[j];
          rest /= dims_[j];
        }
        to_original_[p] = space.linear(coords);
      }
    }

    const Index actions = model.action_count();
    const Index pairs = model.row_count() * actions;
    std::vector<std::vector<std::uint32_t>> ids(n);
    for (Index level = 1; level <= n; ++level) ids[level - 1] = marginal_ids(model, perm_[n - level]);
    keys_.resize(pairs * n);
    for (Index p = 0; p < pairs; ++p) {
      for (Index k = 0; k < n; ++k) keys_[p * n + k] = ids[k][p];
    }
    sorted_pairs_.resize(pairs);
    std::iota(sorted_pairs_.begin(), sorted_pairs_.end(), std::uint32_t{0});
    std::stable_sort(sorted_pairs_.begin(), sorted_pairs_.end(),
                     [this, n](std::uint32_t a, std::uint32_t b) {
                       return std::lexicographical_compare(
                           keys_.begin() + a * n, keys_.begin() + (a + 1) * n,
                           keys_.begin() + b * n, keys_.begin() + (b + 1) * n);
                     });
  }

  /// Writes W(s, a) at out[s * |A| + a] for every requested non-sink pair.
  void run(std::span<const double> v_prev, Adversary adversary, Mask requested,
           std::span<double> out, unsigned workers) const {
    const Index n = perm_.size();
    const Index actions = model_.action_count();

    std::vector<double> permuted;
    std::span<const double> leaf_values = v_prev;
    if (!to_original_.empty()) {
      permuted.resize(v_prev.size());
      for (Index p = 0; p < permuted.size(); ++p) permuted[p] = v_prev[to_original_[p]];
      leaf_values = permuted;
    }
    // The innermost O-maximizations of every pair share their sort orders.
    const Index inner = dims_[n - 1];
    std::vector<std::uint32_t> leaf_order(leaf_values.size());
    for (Index f = 0; f < level_sizes_[1]; ++f) {
      omax_order(leaf_values.subspan(f * inner, inner), adversary,
                 std::span<std::uint32_t>(leaf_order).subspan(f * inner, inner));
    }

    std::vector<std::uint32_t> todo;
    todo.reserve(sorted_pairs_.size());
    for (std::uint32_t p : sorted_pairs_) {
      const Index state = model_.state_of_row(p / actions);
      if (requested[state * actions + p % actions]) todo.push_back(p);
    }

    detail::parallel_chunks(todo.size(), workers, [&](Index begin, Index end) {
      std::vector<std::vector<double>> levels(n + 1);
      for (Index level = 1; level <= n; ++level) levels[level].resize(level_sizes_[level]);
      std::vector<std::uint32_t> scratch(max_dim_);
      const std::uint32_t* previous = nullptr;
      for (Index k = begin; k < end; ++k) {
        const std::uint32_t p = todo[k];
        const Index row = p / actions;
        const Index action = p % actions;
        const std::uint32_t* key = keys_.data() + static_cast<Index>(p) * n;
        Index valid = 0;
        if (previous) {
          while (valid < n && previous[valid] == key[valid]) ++valid;
        }
        for (Index level = valid + 1; level <= n; ++level) {
          const Index m = dims_[n - level];
          const auto amb = model_.row_marginal(row, action, perm_[n - level]);
          std::span<const double> in =
              level == 1 ? leaf_values : std::span<const double>(levels[level - 1]);
          auto& dst = levels[level];
          if (level == 1) {
            for (Index o = 0; o < dst.size(); ++o) {
              dst[o] = omax_value_ordered(in.subspan(o * m, m), amb,
                                          std::span<const std::uint32_t>(leaf_order).subspan(o * m, m));
            }
          } else {
            for (Index o = 0; o < dst.size(); ++o) {
              dst[o] = omax_value(in.subspan(o * m, m), amb, adversary, scratch);
            }
          }
        }
        out[model_.state_of_row(row) * actions + action] = levels[n][0];
        previous = key;
      }
    });
  }

 private:
  const OdImdp& model_;
  std::vector<Index> perm_;
  std::vector<Index> dims_;
  std::vector<Index> level_sizes_;
  Index max_dim_ = 1;
  std::vector<Index> to_original_;
  std::vector<std::uint32_t> keys_;
  std::vector<std::uint32_t> sorted_pairs_;
};

using SweepFn = std::function<void(std::span<const double>, Adversary, Mask, std::span<double>)>;

void fill_sink_pairs(const StateSpace& space, Index actions, std::span<const double> v_prev,
                     Mask requested, std::span<double> out) {
  if (!space.has_sinks()) return;
  for (Index s = 0; s < space.size(); ++s) {
    if (!space.is_sink(s)) continue;
    for (Index a = 0; a < actions; ++a) {
      if (requested[s * actions + a]) out[s * actions + a] = v_prev[s];
    }
  }
}

/// Sweep over one odIMDP honoring the elimination order (Best = both, tighter kept).
class OdImdpEngine {
 public:
  OdImdpEngine(const OdImdp& model, const SweepOptions& options)
      : model_(model), order_(options.order), workers_(options.workers) {
    const Index n = model.axis_count();
    if (order_ != EliminationOrder::Reverse) {
      sweeps_.emplace_back(model, axis_permutation(n, EliminationOrder::Forward));
    }
    if (order_ != EliminationOrder::Forward && n > 1) {
      sweeps_.emplace_back(model, axis_permutation(n, EliminationOrder::Reverse));
    }
    if (sweeps_.empty()) sweeps_.emplace_back(model, axis_permutation(n, EliminationOrder::Forward));
  }

  void operator()(std::span<const double> v_prev, Adversary adversary, Mask requested,
                  std::span<double> out) const {
    const Index actions = model_.action_count();
    sweeps_.front().run(v_prev, adversary, requested, out, workers_);
    if (sweeps_.size() > 1) {
      std::vector<double> other(out.size());
      sweeps_.back().run(v_prev, adversary, requested, other, workers_);
      for (Index row = 0; row < model_.row_count(); ++row) {
        const Index s = model_.state_of_row(row);
        for (Index a = 0; a < actions; ++a) {
          const Index p = s * actions + a;
          if (requested[p]) out[p] = tighter(out[p], other[p], adversary);
        }
      }
    }
    fill_sink_pairs(model_.space(), actions, v_prev, requested, out);
  }

 private:
  const OdImdp& model_;
  EliminationOrder order_;
  unsigned workers_;
  std::vector<OdImdpSweep> sweeps_;
};

class MixtureEngine {
 public:
  MixtureEngine(const MixtureOdImdp& model, const SweepOptions& options) : model_(model) {
    engines_.reserve(model.component_count());
    for (const auto& c : model.components()) engines_.emplace_back(c, options);
  }

  void operator()(std::span<const double> v_prev, Adversary adversary, Mask requested,
                  std::span<double> out) const {
    const Index k = model_.component_count();
    const Index actions = model_.action_count();
    std::vector<std::vector<double>> per_component(k, std::vector<double>(out.size(), 0.0));
    for (Index r = 0; r < k; ++r) engines_[r](v_prev, adversary, requested, per_component[r]);
    std::vector<double> w(k);
    std::vector<std::uint32_t> scratch(k);
    const auto& space = model_.space();
    for (Index s = 0; s < space.size(); ++s) {
      const bool sink = space.is_sink(s);
      for (Index a = 0; a < actions; ++a) {
        const Index p = s * actions + a;
        if (!requested[p]) continue;
        if (sink) {
          out[p] = v_prev[s];
          continue;
        }
        for (Index r = 0; r < k; ++r) w[r] = per_component[r][p];
        out[p] = omax_value(w, model_.weights(s, a), adversary, scratch);
      }
    }
  }

 private:
  const MixtureOdImdp& model_;
  std::vector<OdImdpEngine> engines_;
};

class ImdpEngine {
 public:
  ImdpEngine(const Imdp& model, const SweepOptions& options)
      : model_(model), workers_(options.workers) {}

  void operator()(std::span<const double> v_prev, Adversary adversary, Mask requested,
                  std::span<double> out) const {
    // One sort of V serves every (s, a).
    std::vector<std::uint32_t> order(v_prev.size());
    omax_order(v_prev, adversary, order);
    const Index actions = model_.action_count();
    detail::parallel_chunks(model_.state_count(), workers_, [&](Index begin, Index end) {
      for (Index s = begin; s < end; ++s) {
        for (Index a = 0; a < actions; ++a) {
          const Index p = s * actions + a;
          if (requested[p]) out[p] = omax_value_ordered(v_prev, model_.transition(s, a), order);
        }
      }
    });
  }

 private:
  const Imdp& model_;
  unsigned workers_;
};

std::vector<double> sweep_all(const SweepFn& fn, Index states, Index actions,
                              std::span<const double> v_prev, Adversary adversary) {
  check_value_size(v_prev, states);
  std::vector<std::uint8_t> requested(states * actions, 1);
  std::vector<double> out(states * actions, 0.0);
  fn(v_prev, adversary, requested, out);
  return out;
}

IterationResult iterate(Index states, Index actions, const Labeling& labeling,
                        const IterationOptions& options, const Policy* fixed,
                        const SweepFn& sweep) {
  if (labeling.size() != states) {
    throw ValidationError("labeling covers " + std::to_string(labeling.size()) +
                          " states, model has " + std::to_string(states));
  }
  if (options.horizon > kMaxHorizon) {
    throw ValidationError("horizon " + std::to_string(options.horizon) + " exceeds maximum " +
                          std::to_string(kMaxHorizon));
  }
  if (options.safety && labeling.count(StateLabel::Reach) > 0) {
    throw ValidationError("safety iteration does not take a reach set");
  }
  if (fixed && (fixed->state_count() != states || fixed->horizon() < options.horizon)) {
    throw ValidationError("fixed policy does not cover the model and horizon");
  }
  const Index H = options.horizon;
  const Adversary adversary = options.direction.adversary;
  const bool maximize = options.direction.objective == Objective::Maximize;

  IterationResult result;
  result.policy = Policy(states, H);
  std::vector<double> v(states, 0.0);
  for (Index s = 0; s < states; ++s) {
    switch (labeling.labels[s]) {
      case StateLabel::Reach: v[s] = 1.0; break;
      case StateLabel::Avoid: v[s] = 0.0; break;
      case StateLabel::Transient: v[s] = options.safety ? 1.0 : 0.0; break;
    }
  }
  if (options.keep_history) result.history.push_back(v);

  std::vector<std::uint8_t> requested(states * actions, 0);
  for (Index s = 0; s < states; ++s) {
    if (labeling.terminal(s) || fixed) continue;
    std::fill_n(requested.begin() + s * actions, actions, std::uint8_t{1});
  }
  std::vector<double> w(states * actions, 0.0);
  std::vector<double> next(states);

  for (Index k = 1; k <= H; ++k) {
    if (fixed) {
      std::fill(requested.begin(), requested.end(), std::uint8_t{0});
      for (Index s = 0; s < states; ++s) {
        if (labeling.terminal(s)) continue;
        const auto a = fixed->action(s, k);
        if (!a) throw ValidationError("fixed policy undefined at a transient state");
        requested[s * actions + *a] = 1;
      }
    }
    sweep(v, adversary, requested, w);
    for (Index s = 0; s < states; ++s) {
      if (labeling.terminal(s)) {
        next[s] = labeling.labels[s] == StateLabel::Reach ? 1.0 : 0.0;
        continue;
      }
      Index best_action = 0;
      double best = 0.0;
      if (fixed) {
        best_action = *fixed->action(s, k);
        best = w[s * actions + best_action];
      } else {
        best = w[s * actions];
        for (Index a = 1; a < actions; ++a) {
          const double q = w[s * actions + a];
          if (maximize ? q > best : q < best) {
            best = q;
            best_action = a;
          }
        }
      }
      next[s] = std::clamp(best, 0.0, 1.0);
      result.policy.set(s, k, best_action);
    }
    v.swap(next);
    if (options.keep_history) result.history.push_back(v);
  }
  result.values = {std::move(v), H};
  return result;
}

}  // namespace

std::vector<double> bellman_sweep(const OdImdp& model, std::span<const double> v_prev,
                                  Adversary adversary, const SweepOptions& options) {
  const OdImdpEngine engine(model, options);
  return sweep_all(std::cref(engine), model.state_count(), model.action_count(), v_prev,
                   adversary);
}

std::vector<double> bellman_sweep(const MixtureOdImdp& model, std::span<const double> v_prev,
                                  Adversary adversary, const SweepOptions& options) {
  const MixtureEngine engine(model, options);
  return sweep_all(std::cref(engine), model.state_count(), model.action_count(), v_prev,
                   adversary);
}

std::vector<double> bellman_sweep(const Imdp& model, std::span<const double> v_prev,
                                  Adversary adversary, const SweepOptions& options) {
  const ImdpEngine engine(model, options);
  return sweep_all(std::cref(engine), model.state_count(), model.action_count(), v_prev,
                   adversary);
}

IterationResult value_iteration(const OdImdp& model, const Labeling& labeling,
                                const IterationOptions& options) {
  const OdImdpEngine engine(model, {options.order, options.workers});
  return iterate(model.state_count(), model.action_count(), labeling, options, nullptr,
                 std::cref(engine));
}

IterationResult value_iteration(const MixtureOdImdp& model, const Labeling& labeling,
                                const IterationOptions& options) {
  const MixtureEngine engine(model, {options.order, options.workers});
  return iterate(model.state_count(), model.action_count(), labeling, options, nullptr,
                 std::cref(engine));
}

IterationResult value_iteration(const Imdp& model, const Labeling& labeling,
                                const IterationOptions& options) {
  const ImdpEngine engine(model, {options.order, options.workers});
  return iterate(model.state_count(), model.action_count(), labeling, options, nullptr,
                 std::cref(engine));
}

IterationResult evaluate_policy(const OdImdp& model, const Labeling& labeling,
                                const Policy& policy, const IterationOptions& options) {
  const OdImdpEngine engine(model, {options.order, options.workers});
  return iterate(model.state_count(), model.action_count(), labeling, options, &policy,
                 std::cref(engine));
}

IterationResult evaluate_policy(const MixtureOdImdp& model, const Labeling& labeling,
                                const Policy& policy, const IterationOptions& options) {
  const MixtureEngine engine(model, {options.order, options.workers});
  return iterate(model.state_count(), model.action_count(), labeling, options, &policy,
                 std::cref(engine));
}

IterationResult evaluate_policy(const Imdp& model, const Labeling& labeling,
                                const Policy& policy, const IterationOptions& options) {
  const ImdpEngine engine(model, {options.order, options.workers});
  return iterate(model.state_count(), model.action_count(), labeling, options, &policy,
                 std::cref(engine));
}

}  // namespace odimdp
