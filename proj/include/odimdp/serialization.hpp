#pragma once

#include "odimdp/bellman.hpp"
#include "odimdp/models.hpp"
#include "odimdp/synthesis.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace odimdp {

enum class ModelKind : std::uint8_t { OdImdp, Imdp, Mixture };

/**
 * Binary model files. Layout (all integers and floats little-endian):
 *
 *   8-byte magic, u32 version, u32 flags,
 *   u64 axis count, u64 axis sizes..., u64 action count,
 *   then per stored (row, action) and per axis: f64 lower[|S_i|], f64 upper[|S_i|],
 *   then u64 label count and length-prefixed action labels.
 *
 * Flat IMDPs store f64 lower[|S|], f64 upper[|S|] per (state, action) instead;
 * mixtures store the weight bounds followed by each component.
 */
void write_model(std::ostream& out, const OdImdp& model);
void write_model(std::ostream& out, const Imdp& model);
void write_model(std::ostream& out, const MixtureOdImdp& model);

OdImdp read_odimdp(std::istream& in);
Imdp read_imdp(std::istream& in);
MixtureOdImdp read_mixture(std::istream& in);

/// Kind of the model stored in a file; throws IoError for unknown magic.
ModelKind peek_model_kind(const std::filesystem::path& path);

template <typename Model>
void save_model(const std::filesystem::path& path, const Model& model);
OdImdp load_odimdp(const std::filesystem::path& path);
Imdp load_imdp(const std::filesystem::path& path);
MixtureOdImdp load_mixture(const std::filesystem::path& path);

/// CSV: state, per-axis cell index (-1 on a sink axis), label, v_lower, v_upper.
void write_values_csv(const std::filesystem::path& path, const StateSpace& space,
                      const SynthesisResult& result);
/// CSV: state, time, steps_to_go, action, action_label for every non-terminal state.
void write_policy_csv(const std::filesystem::path& path, const Policy& policy,
                      const Labeling& labeling, const std::vector<std::string>& action_labels);
/// CSV: state, delta for every non-terminal state.
void write_deltas_csv(const std::filesystem::path& path, const DeltaStats& deltas,
                      const Labeling& labeling);

/// Writes `text` to `path`, creating parent directories; throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace odimdp
