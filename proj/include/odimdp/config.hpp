#pragma once

#include "odimdp/bellman.hpp"
#include "odimdp/systems.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace odimdp {

enum class Baseline : std::uint8_t { None, Imdp };

/**
 * Resolved job description. JSON schema (all keys optional except one of
 * "benchmark" / "system"):
 *
 *   benchmark   builtin name; overrides "system" when both are present
 *   system      {"A": [[..]], "B": [[..]], "c": [..], "noise_variance": [..],
 *                "inputs": [[..], ..]}
 *   region      [[lo, hi], ..]
 *   grid        [n1, n2, ..] or a single count for every axis
 *   spec        {"kind": "reach_avoid" | "safety", "reach": [box, ..],
 *                "avoid": [box, ..], "horizon": H} with box = [[lo, hi], ..]
 *   engine      {"order": "forward" | "reverse" | "best",
 *                "baseline": "none" | "imdp", "mem_budget": bytes or "2GB",
 *                "workers": n}
 *   output      directory for result files
 *   seed        unsigned integer
 *   simulate    {"initial_states": [[x..], ..], "random_initial": n, "trials": N}
 *   convergence {"grids": [n, ..], "horizons": [H, ..]}
 */
struct JobConfig {
  BenchmarkDef system;
  std::optional<std::string> benchmark_name;
  EliminationOrder order = EliminationOrder::Forward;
  Baseline baseline = Baseline::None;
  double mem_budget = kDefaultMemoryBudget;
  unsigned workers = 1;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
  std::vector<Vector> initial_states;
  Index random_initial = 20;
  Index trials = 10000;
  std::vector<Index> convergence_grids;
  std::vector<Index> convergence_horizons;
};

/// Parses JSON text; throws ConfigError on malformed or inconsistent input.
JobConfig parse_config(const std::string& text);
JobConfig load_config(const std::filesystem::path& path);

/// Accepts plain bytes or a decimal suffix (KB, MB, GB, TB).
double parse_bytes(const std::string& text);
EliminationOrder parse_order(const std::string& text);
Baseline parse_baseline(const std::string& text);

/// Grid counts from "40", "40x40" or "5,5,7,7" for a system of the given dimension.
std::vector<Index> parse_grid(const std::string& text, std::size_t dimension);

}  // namespace odimdp
