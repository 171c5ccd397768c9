#pragma once

#include "odimdp/models.hpp"
#include "odimdp/omax.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace odimdp {

enum class Objective : std::uint8_t { Maximize, Minimize };

/// Inner adversary and outer objective of a robust Bellman recursion.
struct SpecDirection {
  Adversary adversary = Adversary::Pessimistic;
  Objective objective = Objective::Maximize;
};

/**
 * Order in which marginals are eliminated by the recursive odIMDP bound.
 * Forward keeps the last axis innermost; Reverse keeps the first axis
 * innermost; Best evaluates both and keeps the tighter bound.
 */
enum class EliminationOrder : std::uint8_t { Forward, Reverse, Best };

struct BellmanStats {
  std::uint64_t omax_calls = 0;
};

/// Values over joint states after `step` Bellman updates.
struct ValueFunction {
  std::vector<double> values;
  Index step = 0;
};

/**
 * Time-varying deterministic policy. `action(s, k)` is the action taken in
 * state s with k >= 1 steps to go, i.e. at time H - k; nullopt for terminal
 * states.
 */
class Policy {
 public:
  static constexpr std::int32_t kNoAction = -1;

  Policy() = default;
  Policy(Index state_count, Index horizon)
      : state_count_(state_count), horizon_(horizon),
        actions_(state_count * horizon, kNoAction) {}

  Index state_count() const noexcept { return state_count_; }
  Index horizon() const noexcept { return horizon_; }
  std::optional<Index> action(Index state, Index steps_to_go) const;
  void set(Index state, Index steps_to_go, std::optional<Index> action);

 private:
  Index state_count_ = 0;
  Index horizon_ = 0;
  std::vector<std::int32_t> actions_;
};

enum class StateLabel : std::uint8_t { Transient, Reach, Avoid };

/// Reach/avoid/transient class of every joint state.
struct Labeling {
  std::vector<StateLabel> labels;

  Index size() const noexcept { return labels.size(); }
  bool terminal(Index s) const { return labels[s] != StateLabel::Transient; }
  Index count(StateLabel label) const;

  /// Throws ValidationError when a state is listed in both sets.
  static Labeling from_sets(Index state_count, std::span<const Index> reach,
                            std::span<const Index> avoid);
};

/// The reach indicator V_0.
std::vector<double> reach_indicator(const Labeling& labeling);

// Per-pair robust Bellman operators -----------------------------------------

/**
 * Divide-and-conquer bound on the multilinear robust expectation of `v_prev`
 * for (source, action): depth-first over prefixes of the marginal order, one
 * O-maximization per internal node. A lower bound on the exact optimum for a
 * pessimistic adversary, an upper bound for an optimistic one.
 */
double recursive_bellman(const OdImdp& model, std::span<const double> v_prev, Index source,
                         Index action, Adversary adversary,
                         EliminationOrder order = EliminationOrder::Forward,
                         BellmanStats* stats = nullptr);

/// Recursion with an explicit elimination order (outermost axis first).
double recursive_bellman(const OdImdp& model, std::span<const double> v_prev, Index source,
                         Index action, Adversary adversary, std::span<const Index> axis_order,
                         BellmanStats* stats = nullptr);

/// Worst (or best) weighting of the per-component recursive bounds.
double mixture_bellman(const MixtureOdImdp& model, std::span<const double> v_prev, Index source,
                       Index action, Adversary adversary,
                       EliminationOrder order = EliminationOrder::Forward);

/// One O-maximization over the full joint support.
double imdp_bellman(const Imdp& model, std::span<const double> v_prev, Index source,
                    Index action, Adversary adversary);

// Batched sweeps --------------------------------------------------------------

struct SweepOptions {
  EliminationOrder order = EliminationOrder::Forward;
  unsigned workers = 1;
};

/// Bellman values W(s, a) for all pairs, laid out as s * |A| + a.
std::vector<double> bellman_sweep(const OdImdp& model, std::span<const double> v_prev,
                                  Adversary adversary, const SweepOptions& options = {});
std::vector<double> bellman_sweep(const MixtureOdImdp& model, std::span<const double> v_prev,
                                  Adversary adversary, const SweepOptions& options = {});
std::vector<double> bellman_sweep(const Imdp& model, std::span<const double> v_prev,
                                  Adversary adversary, const SweepOptions& options = {});

// Value iteration --------------------------------------------------------------

struct IterationOptions {
  Index horizon = 10;
  SpecDirection direction{};
  EliminationOrder order = EliminationOrder::Forward;
  unsigned workers = 1;
  /// Invariance instead of reach-avoid: V_0 = 1 off the avoid set and no reach set.
  bool safety = false;
  /// Keep V_k for every k in IterationResult::history.
  bool keep_history = false;
};

struct IterationResult {
  ValueFunction values;
  Policy policy;
  std::vector<std::vector<double>> history;
};

inline constexpr Index kMaxHorizon = 1'000'000;

/**
 * Finite-horizon robust value iteration: V_0 = 1_R, and for every transient
 * state V_k(s) = opt_a W(s, a) with terminal states clamped (reach -> 1,
 * avoid -> 0). Ties between actions go to the lowest index.
 */
IterationResult value_iteration(const OdImdp& model, const Labeling& labeling,
                                const IterationOptions& options);
IterationResult value_iteration(const MixtureOdImdp& model, const Labeling& labeling,
                                const IterationOptions& options);
IterationResult value_iteration(const Imdp& model, const Labeling& labeling,
                                const IterationOptions& options);

/// Value of a fixed policy under the adversary in `options.direction`.
IterationResult evaluate_policy(const OdImdp& model, const Labeling& labeling,
                                const Policy& policy, const IterationOptions& options);
IterationResult evaluate_policy(const MixtureOdImdp& model, const Labeling& labeling,
                                const Policy& policy, const IterationOptions& options);
IterationResult evaluate_policy(const Imdp& model, const Labeling& labeling,
                                const Policy& policy, const IterationOptions& options);

}  // namespace odimdp
