#pragma once

#include "odimdp/bellman.hpp"
#include "odimdp/kernel.hpp"
#include "odimdp/partition.hpp"
#include "odimdp/systems.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace odimdp {

struct LabelingResult {
  Labeling labeling;
  /// Some cell straddles a reach or avoid boundary.
  bool misaligned = false;
  std::vector<std::string> warnings;
};

/**
 * Labels abstract states: reach iff the cell lies inside a reach box, avoid
 * iff the cell's interior meets an avoid box or the state is a sink. Avoid
 * wins over reach.
 */
LabelingResult label_states(const RectPartition& partition, const ReachAvoidSpec& spec);

struct Metrics {
  /// Mean of the lower bound over non-terminal states.
  double mean_v = 0.0;
  /// Mean of upper minus lower bound over non-terminal states.
  double eps = 0.0;
  Index states = 0;
};

struct Provenance {
  std::vector<Index> counts;
  std::uint64_t model_hash = 0;
  std::uint64_t seed = 0;
};

struct SynthesisOptions {
  Index horizon = 10;
  SpecKind kind = SpecKind::ReachAvoid;
  EliminationOrder order = EliminationOrder::Forward;
  unsigned workers = 1;
};

struct SynthesisResult {
  ValueFunction lower;
  ValueFunction upper;
  Policy policy;
  Labeling labeling;
  SpecKind kind = SpecKind::ReachAvoid;
  Metrics metrics;
  /// Upper bound computed over a misaligned labeling; it may not be sound.
  bool upper_flagged = false;
  Provenance provenance;
};

/**
 * Pessimistically optimal policy and the bounds [V_lower, V_upper] it attains.
 *
 * Reach-avoid: max over actions against a minimizing adversary gives the
 * policy and V_lower; the same policy against a maximizing adversary gives
 * V_upper. Safety is solved on the dual problem: minimize the optimistic
 * probability of reaching the avoid states, then complement.
 */
SynthesisResult synthesize(const OdImdp& model, const Labeling& labeling,
                           const SynthesisOptions& options);
SynthesisResult synthesize(const MixtureOdImdp& model, const Labeling& labeling,
                           const SynthesisOptions& options);
SynthesisResult synthesize(const Imdp& model, const Labeling& labeling,
                           const SynthesisOptions& options);

Metrics compute_metrics(std::span<const double> lower, std::span<const double> upper,
                        const Labeling& labeling);

struct DeltaStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  Index count = 0;
  /// V_A(s) - V_B(s) for every state; zero on terminal states.
  std::vector<double> per_state;
};

/// Differences of the lower bounds over non-terminal states.
DeltaStats compare(const SynthesisResult& a, const SynthesisResult& b);

/// FNV-1a hash of the shape and bound arrays.
std::uint64_t model_hash(const OdImdp& model);
std::uint64_t model_hash(const MixtureOdImdp& model);
std::uint64_t model_hash(const Imdp& model);

/// Maps a concrete state and time to the abstract policy of its cell.
class ConcretePolicy {
 public:
  ConcretePolicy(const SynthesisResult& result, const RectPartition& partition);

  Index horizon() const noexcept { return policy_.horizon(); }
  /// Action at time t (0 <= t < H); nullopt in terminal cells.
  /// Throws OutsideRegionError when x is outside the region of interest.
  std::optional<Index> action(std::span<const double> x, Index t) const;

 private:
  Policy policy_;
  RectPartition partition_;
};

struct Trajectory {
  std::vector<Vector> states;
  std::vector<Index> actions;
  bool satisfied = false;
};

/// Simulates one run and scores it against the specification.
Trajectory simulate_trajectory(const GaussianKernelSpec& kernel, const Box& region,
                               const ReachAvoidSpec& spec, const ConcretePolicy& policy,
                               std::span<const double> x0, Rng& rng);

struct McEstimate {
  Index successes = 0;
  Index trials = 0;
  double estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;

  bool overlaps(double lo, double hi) const { return ci_lower <= hi && lo <= ci_upper; }
};

/// Exact binomial (Clopper-Pearson) interval at the given confidence.
std::pair<double, double> clopper_pearson(Index successes, Index trials, double confidence);

/// Fraction of satisfying runs from x0 with a 99% Clopper-Pearson interval.
McEstimate monte_carlo_validate(const GaussianKernelSpec& kernel, const Box& region,
                                const ReachAvoidSpec& spec, const ConcretePolicy& policy,
                                std::span<const double> x0, Index trials, std::uint64_t seed,
                                unsigned workers = 1);

}  // namespace odimdp
