// Command-line front end: abstraction, synthesis, baseline comparison,
// Monte Carlo validation and grid-convergence sweeps.

#include "odimdp/abstraction.hpp"
#include "odimdp/config.hpp"
#include "odimdp/errors.hpp"
#include "odimdp/serialization.hpp"
#include "odimdp/synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <boost/random/uniform_real_distribution.hpp>

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

using namespace odimdp;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kValidation = 3,
  kCapacity = 4,
  kIo = 5,
};

struct Flags {
  std::string benchmark;
  std::string config;
  std::string grid;
  std::string order;
  std::string baseline;
  std::string out;
  std::string mem_budget;
  std::string model;
  std::string grids;
  long horizon = -1;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  Index trials = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double peak_rss_mb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<double>(usage.ru_maxrss) / 1024.0;
}

std::string hex(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

unsigned default_workers() {
  if (const char* env = std::getenv("ODIMDP_WORKERS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw ConfigError("ODIMDP_WORKERS must be a positive integer");
    }
  }
  return 1;
}

JobConfig resolve(const Flags& f) {
  JobConfig cfg;
  if (!f.config.empty()) {
    cfg = load_config(f.config);
  } else if (!f.benchmark.empty()) {
    cfg.system = benchmark(f.benchmark);
    cfg.benchmark_name = f.benchmark;
  } else {
    throw ConfigError("either --benchmark or --config is required");
  }
  if (!f.benchmark.empty() && !f.config.empty()) {
    cfg.system = benchmark(f.benchmark);
    cfg.benchmark_name = f.benchmark;
  }
  const std::size_t n = cfg.system.kernel.dimension();
  if (!f.grid.empty()) cfg.system.counts = parse_grid(f.grid, n);
  if (f.horizon >= 0) cfg.system.spec.horizon = static_cast<Index>(f.horizon);
  if (!f.order.empty()) cfg.order = parse_order(f.order);
  if (!f.baseline.empty()) cfg.baseline = parse_baseline(f.baseline);
  if (!f.mem_budget.empty()) cfg.mem_budget = parse_bytes(f.mem_budget);
  if (!f.out.empty()) cfg.output = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials > 0) cfg.trials = f.trials;
  if (!f.grids.empty()) {
    const auto axes = static_cast<std::size_t>(std::count(f.grids.begin(), f.grids.end(), ',')) + 1;
    cfg.convergence_grids = parse_grid(f.grids, axes);
  }
  cfg.workers = f.workers > 0 ? f.workers : (f.config.empty() ? default_workers() : cfg.workers);
  return cfg;
}

/// Either a single-component odIMDP or a mixture, built or loaded.
struct Model {
  std::optional<OdImdp> od;
  std::optional<MixtureOdImdp> mix;

  MemoryFootprint footprint() const { return od ? memory_footprint(*od) : memory_footprint(*mix); }
  const StateSpace& space() const { return od ? od->space() : mix->space(); }
  std::uint64_t hash() const { return od ? model_hash(*od) : model_hash(*mix); }
};

Model build(const JobConfig& cfg, const RectPartition& partition) {
  AbstractionOptions opts{cfg.workers};
  Model m;
  if (cfg.system.kernel.components.size() == 1) {
    m.od = build_odimdp(cfg.system.kernel, partition, opts);
  } else {
    m.mix = build_mixture(cfg.system.kernel, partition, opts);
  }
  return m;
}

Model load(const std::filesystem::path& path) {
  Model m;
  switch (peek_model_kind(path)) {
    case ModelKind::OdImdp: m.od = load_odimdp(path); break;
    case ModelKind::Mixture: m.mix = load_mixture(path); break;
    case ModelKind::Imdp: throw ConfigError("synthesize expects an odIMDP or mixture model file");
  }
  return m;
}

SynthesisOptions synthesis_options(const JobConfig& cfg) {
  SynthesisOptions o;
  o.horizon = cfg.system.spec.horizon;
  o.kind = cfg.system.spec.kind;
  o.order = cfg.order;
  o.workers = cfg.workers;
  return o;
}

SynthesisResult run_synthesis(const Model& m, const LabelingResult& lab, const JobConfig& cfg,
                              const RectPartition& partition) {
  const auto opts = synthesis_options(cfg);
  SynthesisResult r = m.od ? synthesize(*m.od, lab.labeling, opts) : synthesize(*m.mix, lab.labeling, opts);
  r.upper_flagged = lab.misaligned;
  r.provenance.counts.assign(partition.counts().begin(), partition.counts().end());
  r.provenance.seed = cfg.seed;
  return r;
}

/// Refuses early when the dense baseline cannot fit the budget.
void check_baseline_capacity(const JobConfig& cfg, const RectPartition& partition) {
  const auto dense = dense_imdp_footprint(partition.state_space(), cfg.system.kernel.action_count());
  if (static_cast<double>(dense.bytes) > cfg.mem_budget) {
    const auto grid_only = 2.0 * static_cast<double>(dense.states_without_sinks) *
                           static_cast<double>(dense.states_without_sinks) *
                           static_cast<double>(cfg.system.kernel.action_count()) * 8.0;
    throw CapacityError("dense product IMDP needs " + format_bytes(static_cast<double>(dense.bytes)) +
                            " (" + format_bytes(grid_only) + " over grid states only), budget " +
                            format_bytes(cfg.mem_budget),
                        static_cast<double>(dense.bytes));
  }
}

json footprint_json(const MemoryFootprint& f) {
  return {{"scalars", f.scalars},
          {"bytes", f.bytes},
          {"states_with_sinks", f.states_with_sinks},
          {"states_without_sinks", f.states_without_sinks},
          {"grid_formula_scalars", f.grid_formula_scalars}};
}

json metrics_json(const JobConfig& cfg, const SynthesisResult& r) {
  return {{"system", cfg.system.name},
          {"grid", cfg.system.counts},
          {"horizon", cfg.system.spec.horizon},
          {"kind", cfg.system.spec.kind == SpecKind::Safety ? "safety" : "reach_avoid"},
          {"order", cfg.order == EliminationOrder::Forward   ? "forward"
                    : cfg.order == EliminationOrder::Reverse ? "reverse"
                                                             : "best"},
          {"mean_v", r.metrics.mean_v},
          {"eps", r.metrics.eps},
          {"transient_states", r.metrics.states},
          {"upper_flagged", r.upper_flagged},
          {"model_hash", hex(r.provenance.model_hash)},
          {"seed", r.provenance.seed}};
}

std::string summary_text(const json& metrics) {
  std::string out;
  for (const auto& [key, value] : metrics.items()) out += key + ": " + value.dump() + "\n";
  return out;
}

void print_timing(const char* what, double secs) {
  std::printf("%-22s %.3f s\n", what, secs);
}

int cmd_abstract(const JobConfig& cfg) {
  const RectPartition partition(cfg.system.region, cfg.system.counts);
  if (cfg.baseline == Baseline::Imdp) check_baseline_capacity(cfg, partition);
  const auto t0 = Clock::now();
  const Model m = build(cfg, partition);
  const double abs_time = seconds_since(t0);
  const auto fp = m.footprint();
  std::filesystem::create_directories(cfg.output);
  if (m.od) {
    save_model(cfg.output / "model.odimdp", *m.od);
  } else {
    save_model(cfg.output / "model.odmix", *m.mix);
  }
  json stats = {{"system", cfg.system.name}, {"grid", cfg.system.counts},
                {"actions", cfg.system.kernel.action_count()}, {"footprint", footprint_json(fp)},
                {"model_hash", hex(m.hash())}};
  if (cfg.baseline == Baseline::Imdp) {
    if (!m.od) throw ConfigError("the product IMDP baseline needs a single-component system");
    const Imdp flat = product_imdp(*m.od, cfg.mem_budget);
    save_model(cfg.output / "baseline.imdp", flat);
    stats["baseline_footprint"] = footprint_json(memory_footprint(flat));
  }
  write_text(cfg.output / "abstract.json", stats.dump(2) + "\n");
  print_timing("abstraction", abs_time);
  std::printf("stored scalars         %llu (%s)\n", static_cast<unsigned long long>(fp.scalars),
              format_bytes(static_cast<double>(fp.bytes)).c_str());
  std::printf("grid formula scalars   %llu\n", static_cast<unsigned long long>(fp.grid_formula_scalars));
  std::printf("states                 %llu with sinks, %llu grid\n",
              static_cast<unsigned long long>(fp.states_with_sinks),
              static_cast<unsigned long long>(fp.states_without_sinks));
  std::printf("peak RSS               %.1f MB\n", peak_rss_mb());
  return kOk;
}

int cmd_synthesize(const JobConfig& cfg, const std::string& model_path) {
  const RectPartition partition(cfg.system.region, cfg.system.counts);
  const auto lab = label_states(partition, cfg.system.spec);
  for (const auto& w : lab.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (cfg.baseline == Baseline::Imdp) check_baseline_capacity(cfg, partition);

  auto t0 = Clock::now();
  const Model m = model_path.empty() ? build(cfg, partition) : load(model_path);
  if (!(m.space() == partition.state_space())) {
    throw ValidationError("model does not match the configured partition");
  }
  const double abs_time = seconds_since(t0);
  t0 = Clock::now();
  const SynthesisResult r = run_synthesis(m, lab, cfg, partition);
  const double cert_time = seconds_since(t0);

  json metrics = metrics_json(cfg, r);
  std::filesystem::create_directories(cfg.output);
  write_values_csv(cfg.output / "values.csv", partition.state_space(), r);
  write_policy_csv(cfg.output / "policy.csv", r.policy, r.labeling, cfg.system.kernel.input_labels);

  if (cfg.baseline == Baseline::Imdp) {
    if (!m.od) throw ConfigError("the product IMDP baseline needs a single-component system");
    const Imdp flat = product_imdp(*m.od, cfg.mem_budget);
    auto base = synthesize(flat, lab.labeling, synthesis_options(cfg));
    const auto d = compare(r, base);
    metrics["baseline"] = {{"mean_v", base.metrics.mean_v},
                           {"eps", base.metrics.eps},
                           {"delta_min", d.min},
                           {"delta_max", d.max},
                           {"delta_mean", d.mean}};
    write_deltas_csv(cfg.output / "deltas.csv", d, lab.labeling);
  }
  write_text(cfg.output / "metrics.json", metrics.dump(2) + "\n");
  write_text(cfg.output / "metrics.txt", summary_text(metrics));
  write_text(cfg.output / "timings.json",
             json{{"abstraction_s", abs_time}, {"synthesis_s", cert_time}, {"peak_rss_mb", peak_rss_mb()}}
                     .dump(2) + "\n");

  std::printf("mean V                 %.6f\n", r.metrics.mean_v);
  std::printf("eps                    %.6f\n", r.metrics.eps);
  if (metrics.contains("baseline")) {
    const auto& b = metrics["baseline"];
    std::printf("baseline mean V        %.6f\n", b["mean_v"].get<double>());
    std::printf("delta min/max/mean     %.6f %.6f %.6f\n", b["delta_min"].get<double>(),
                b["delta_max"].get<double>(), b["delta_mean"].get<double>());
  }
  print_timing("abstraction", abs_time);
  print_timing("synthesis", cert_time);
  std::printf("peak RSS               %.1f MB\n", peak_rss_mb());
  return kOk;
}

int cmd_compare(JobConfig cfg) {
  cfg.baseline = Baseline::Imdp;
  const RectPartition partition(cfg.system.region, cfg.system.counts);
  if (cfg.system.kernel.components.size() != 1) {
    throw ConfigError("compare needs a single-component system");
  }
  check_baseline_capacity(cfg, partition);
  const auto lab = label_states(partition, cfg.system.spec);
  const Model m = build(cfg, partition);
  const auto ours = run_synthesis(m, lab, cfg, partition);
  const Imdp flat = product_imdp(*m.od, cfg.mem_budget);
  const auto base = synthesize(flat, lab.labeling, synthesis_options(cfg));
  const auto d = compare(ours, base);
  std::filesystem::create_directories(cfg.output);
  write_deltas_csv(cfg.output / "deltas.csv", d, lab.labeling);
  const json report = {{"system", cfg.system.name},
                       {"odimdp", {{"mean_v", ours.metrics.mean_v}, {"eps", ours.metrics.eps}}},
                       {"product_imdp", {{"mean_v", base.metrics.mean_v}, {"eps", base.metrics.eps}}},
                       {"delta_min", d.min},
                       {"delta_max", d.max},
                       {"delta_mean", d.mean},
                       {"states", d.count}};
  write_text(cfg.output / "compare.json", report.dump(2) + "\n");
  std::printf("odIMDP mean V          %.6f\n", ours.metrics.mean_v);
  std::printf("product IMDP mean V    %.6f\n", base.metrics.mean_v);
  std::printf("delta min/max/mean     %.6f %.6f %.6f\n", d.min, d.max, d.mean);
  return kOk;
}

int cmd_simulate(const JobConfig& cfg) {
  const RectPartition partition(cfg.system.region, cfg.system.counts);
  const auto lab = label_states(partition, cfg.system.spec);
  const Model m = build(cfg, partition);
  const auto r = run_synthesis(m, lab, cfg, partition);
  const ConcretePolicy policy(r, partition);

  std::vector<Vector> starts = cfg.initial_states;
  if (starts.empty()) {
    Rng rng(stream_seed(cfg.seed, ~std::uint64_t{0}));
    for (Index k = 0; k < cfg.random_initial; ++k) {
      Vector x;
      for (const auto& iv : cfg.system.region) {
        x.push_back(boost::random::uniform_real_distribution<double>(iv.lo, iv.hi)(rng));
      }
      starts.push_back(std::move(x));
    }
  }
  std::filesystem::create_directories(cfg.output);
  std::string csv = "index,state,estimate,ci_lower,ci_upper,v_lower,v_upper,verdict\n";
  Index failures = 0;
  for (Index k = 0; k < starts.size(); ++k) {
    const auto s = partition.state_of_point(starts[k]);
    if (!s) throw OutsideRegionError("initial state " + std::to_string(k) + " is outside the region");
    const auto est = monte_carlo_validate(cfg.system.kernel, cfg.system.region, cfg.system.spec, policy,
                                          starts[k], cfg.trials, stream_seed(cfg.seed, k), cfg.workers);
    const double lo = r.lower.values[*s];
    const double hi = r.upper.values[*s];
    const bool pass = est.overlaps(lo, hi);
    failures += pass ? 0 : 1;
    char line[256];
    std::snprintf(line, sizeof line, "%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%s\n", k, *s, est.estimate,
                  est.ci_lower, est.ci_upper, lo, hi, pass ? "pass" : "fail");
    csv += line;
    std::printf("x0[%zu] estimate %.4f CI [%.4f, %.4f] bounds [%.4f, %.4f] %s\n", k, est.estimate,
                est.ci_lower, est.ci_upper, lo, hi, pass ? "pass" : "FAIL");
  }
  write_text(cfg.output / "simulate.csv", csv);
  return failures == 0 ? kOk : kFailure;
}

int cmd_convergence(JobConfig cfg) {
  std::vector<Index> grids = cfg.convergence_grids;
  if (grids.empty()) grids.push_back(cfg.system.counts.front());
  std::vector<Index> horizons = cfg.convergence_horizons;
  if (horizons.empty()) horizons.push_back(cfg.system.spec.horizon);
  std::string csv = "regions_per_axis,horizon,mean_eps,ci_lower,ci_upper\n";
  for (Index g : grids) {
    cfg.system.counts.assign(cfg.system.kernel.dimension(), g);
    const RectPartition partition(cfg.system.region, cfg.system.counts);
    const auto lab = label_states(partition, cfg.system.spec);
    const Model m = build(cfg, partition);
    for (Index h : horizons) {
      cfg.system.spec.horizon = h;
      const auto r = run_synthesis(m, lab, cfg, partition);
      // 95% normal interval of the mean gap over uniformly weighted initial cells.
      double sum = 0.0;
      double sum_sq = 0.0;
      Index count = 0;
      for (Index s = 0; s < r.labeling.size(); ++s) {
        if (r.labeling.terminal(s)) continue;
        const double gap = r.upper.values[s] - r.lower.values[s];
        sum += gap;
        sum_sq += gap * gap;
        ++count;
      }
      const double mean = count ? sum / static_cast<double>(count) : 0.0;
      const double var = count > 1 ? (sum_sq - sum * mean) / static_cast<double>(count - 1) : 0.0;
      const double half = count ? 1.96 * std::sqrt(std::max(var, 0.0) / static_cast<double>(count)) : 0.0;
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%zu,%.8f,%.8f,%.8f\n", g, h, mean, mean - half, mean + half);
      csv += line;
      std::printf("%s", line);
    }
  }
  write_text(cfg.output / "convergence.csv", csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abstraction and controller synthesis with orthogonally decoupled interval MDPs"};
  app.require_subcommand(1);
  Flags f;

  const auto add_common = [&f](CLI::App* cmd) {
    cmd->add_option("--benchmark", f.benchmark, "Built-in benchmark name");
    cmd->add_option("--config", f.config, "JSON job configuration");
    cmd->add_option("--grid", f.grid, "Cells per axis: 40, 40x40 or 5,5,7,7");
    cmd->add_option("--horizon", f.horizon, "Time horizon");
    cmd->add_option("--baseline", f.baseline, "Baseline model: none or imdp");
    cmd->add_option("--order", f.order, "Elimination order: forward, reverse or best");
    cmd->add_option("--workers", f.workers, "Worker threads (default $ODIMDP_WORKERS or 1)");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--mem-budget", f.mem_budget, "Memory budget, e.g. 2GB");
  };

  auto* abstract = app.add_subcommand("abstract", "Build and store the abstraction");
  auto* synth = app.add_subcommand("synthesize", "Synthesize a policy and its bounds");
  auto* comp = app.add_subcommand("compare", "Compare against the product IMDP baseline");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo validation of the bounds");
  auto* conv = app.add_subcommand("convergence", "Mean error over grid sizes");
  for (auto* cmd : {abstract, synth, comp, sim, conv}) add_common(cmd);
  synth->add_option("--model", f.model, "Model file from 'abstract'");
  sim->add_option("--trials", f.trials, "Trajectories per initial state");
  conv->add_option("--grids", f.grids, "Comma-separated cells per axis, e.g. 20,40,80");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const JobConfig cfg = resolve(f);
    if (abstract->parsed()) return cmd_abstract(cfg);
    if (synth->parsed()) return cmd_synthesize(cfg, f.model);
    if (comp->parsed()) return cmd_compare(cfg);
    if (sim->parsed()) return cmd_simulate(cfg);
    if (conv->parsed()) return cmd_convergence(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return kCapacity;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kValidation;
  } catch (const OutsideRegionError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
