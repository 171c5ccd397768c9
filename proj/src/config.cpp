#include "odimdp/config.hpp"

#include "odimdp/errors.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <sstream>

namespace odimdp {

namespace {

using nlohmann::json;

Interval parse_interval(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("interval must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Box parse_box(const json& j) {
  if (!j.is_array()) throw ConfigError("box must be a list of [lo, hi] intervals");
  Box box;
  for (const auto& iv : j) box.push_back(parse_interval(iv));
  return box;
}

std::vector<Box> parse_boxes(const json& j) {
  std::vector<Box> boxes;
  for (const auto& b : j) boxes.push_back(parse_box(b));
  return boxes;
}

Vector flatten(const json& matrix, std::size_t rows, std::size_t cols, const char* what) {
  Vector out;
  if (!matrix.is_array() || matrix.size() != rows) {
    throw ConfigError(std::string(what) + " must have " + std::to_string(rows) + " rows");
  }
  for (const auto& row : matrix) {
    if (!row.is_array() || row.size() != cols) {
      throw ConfigError(std::string(what) + " rows must have " + std::to_string(cols) + " entries");
    }
    for (const auto& x : row) out.push_back(x.get<double>());
  }
  return out;
}

BenchmarkDef parse_system(const json& sys) {
  if (!sys.contains("A")) throw ConfigError("system needs a matrix A");
  const std::size_t n = sys.at("A").size();
  Vector a = flatten(sys.at("A"), n, n, "A");
  std::vector<Vector> inputs;
  if (sys.contains("inputs")) {
    inputs = sys.at("inputs").get<std::vector<Vector>>();
  }
  if (inputs.empty()) inputs.push_back({});
  const std::size_t m = inputs.front().size();
  for (const auto& u : inputs) {
    if (u.size() != m) throw ConfigError("all inputs must have the same dimension");
  }
  Vector b = m > 0 ? flatten(sys.at("B"), n, m, "B") : Vector{};
  Vector c = sys.value("c", Vector(n, 0.0));
  Vector noise = sys.at("noise_variance").get<Vector>();
  if (noise.size() != n || c.size() != n) {
    throw ConfigError("c and noise_variance must have one entry per state axis");
  }
  BenchmarkDef def;
  def.name = sys.value("name", std::string("custom"));
  def.kernel = affine_kernel(n, std::move(a), m, std::move(b), std::move(c), std::move(noise),
                             std::move(inputs));
  return def;
}

JobConfig from_json(const json& j) {
  JobConfig cfg;
  if (j.contains("benchmark")) {
    cfg.benchmark_name = j.at("benchmark").get<std::string>();
    cfg.system = benchmark(*cfg.benchmark_name);
  } else if (j.contains("system")) {
    cfg.system = parse_system(j.at("system"));
    if (!j.contains("region")) throw ConfigError("an inline system needs a region");
  } else {
    throw ConfigError("config needs either 'benchmark' or 'system'");
  }
  const std::size_t n = cfg.system.kernel.dimension();
  if (j.contains("region")) cfg.system.region = parse_box(j.at("region"));
  if (cfg.system.region.size() != n) throw ConfigError("region dimension does not match the system");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    cfg.system.counts = g.is_array() ? g.get<std::vector<Index>>() : std::vector<Index>(n, g.get<Index>());
  }
  if (cfg.system.counts.empty()) cfg.system.counts.assign(n, 10);
  if (cfg.system.counts.size() != n) throw ConfigError("grid dimension does not match the system");
  if (j.contains("spec")) {
    const auto& s = j.at("spec");
    auto& spec = cfg.system.spec;
    if (s.contains("kind")) {
      const auto kind = s.at("kind").get<std::string>();
      if (kind == "reach_avoid") {
        spec.kind = SpecKind::ReachAvoid;
      } else if (kind == "safety") {
        spec.kind = SpecKind::Safety;
      } else {
        throw ConfigError("spec kind must be reach_avoid or safety");
      }
    }
    if (s.contains("reach")) spec.reach = parse_boxes(s.at("reach"));
    if (s.contains("avoid")) spec.avoid = parse_boxes(s.at("avoid"));
    if (s.contains("horizon")) spec.horizon = s.at("horizon").get<Index>();
  }
  try {
    cfg.system.spec.validate(n);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("invalid spec: ") + e.what());
  }
  if (j.contains("engine")) {
    const auto& e = j.at("engine");
    if (e.contains("order")) cfg.order = parse_order(e.at("order").get<std::string>());
    if (e.contains("baseline")) cfg.baseline = parse_baseline(e.at("baseline").get<std::string>());
    if (e.contains("mem_budget")) {
      const auto& mb = e.at("mem_budget");
      cfg.mem_budget = mb.is_string() ? parse_bytes(mb.get<std::string>()) : mb.get<double>();
    }
    if (e.contains("workers")) cfg.workers = std::max(1U, e.at("workers").get<unsigned>());
  }
  if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("simulate")) {
    const auto& s = j.at("simulate");
    if (s.contains("initial_states")) cfg.initial_states = s.at("initial_states").get<std::vector<Vector>>();
    if (s.contains("random_initial")) cfg.random_initial = s.at("random_initial").get<Index>();
    if (s.contains("trials")) cfg.trials = s.at("trials").get<Index>();
    for (const auto& x : cfg.initial_states) {
      if (x.size() != n) throw ConfigError("initial state dimension does not match the system");
    }
  }
  if (j.contains("convergence")) {
    const auto& c = j.at("convergence");
    if (c.contains("grids")) cfg.convergence_grids = c.at("grids").get<std::vector<Index>>();
    if (c.contains("horizons")) cfg.convergence_horizons = c.at("horizons").get<std::vector<Index>>();
  }
  return cfg;
}

}  // namespace

JobConfig parse_config(const std::string& text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("invalid system: ") + e.what());
  }
}

JobConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double parse_bytes(const std::string& text) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse byte count '" + text + "'");
  }
  std::string unit = text.substr(pos);
  for (auto& ch : unit) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  double scale = 1.0;
  if (unit == "" || unit == "B") {
    scale = 1.0;
  } else if (unit == "KB") {
    scale = 1e3;
  } else if (unit == "MB") {
    scale = 1e6;
  } else if (unit == "GB") {
    scale = 1e9;
  } else if (unit == "TB") {
    scale = 1e12;
  } else {
    throw ConfigError("unknown byte unit '" + unit + "'");
  }
  if (!(value > 0.0)) throw ConfigError("memory budget must be positive");
  return value * scale;
}

EliminationOrder parse_order(const std::string& text) {
  if (text == "forward") return EliminationOrder::Forward;
  if (text == "reverse") return EliminationOrder::Reverse;
  if (text == "best") return EliminationOrder::Best;
  throw ConfigError("order must be forward, reverse or best");
}

Baseline parse_baseline(const std::string& text) {
  if (text == "none") return Baseline::None;
  if (text == "imdp") return Baseline::Imdp;
  throw ConfigError("baseline must be none or imdp");
}

std::vector<Index> parse_grid(const std::string& text, std::size_t dimension) {
  std::vector<Index> counts;
  std::string token;
  for (char ch : text + ",") {
    if (ch == ',' || ch == 'x') {
      if (token.empty()) throw ConfigError("malformed grid '" + text + "'");
      try {
        counts.push_back(std::stoul(token));
      } catch (const std::exception&) {
        throw ConfigError("malformed grid '" + text + "'");
      }
      token.clear();
    } else {
      token += ch;
    }
  }
  if (counts.size() == 1) counts.assign(dimension, counts.front());
  if (counts.size() != dimension) throw ConfigError("grid has the wrong number of axes");
  for (Index c : counts) {
    if (c == 0) throw ConfigError("grid counts must be positive");
  }
  return counts;
}

}  // namespace odimdp
