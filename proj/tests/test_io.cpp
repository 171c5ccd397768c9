#include "odimdp/abstraction.hpp"
#include "odimdp/config.hpp"
#include "odimdp/errors.hpp"
#include "odimdp/serialization.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace odimdp;
namespace fs = std::filesystem;

namespace {

template <typename T>
bool same_bits(std::span<const T> a, std::span<const T> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("odimdp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("serialization") {

TEST_CASE("odIMDP round trip is bit-identical") {
  std::mt19937_64 rng(1);
  const auto model = random_odimdp(rng, {4, 3, 5}, 3, true);
  std::stringstream buf;
  write_model(buf, model);
  const auto back = read_odimdp(buf);
  CHECK(back.space() == model.space());
  CHECK(back.action_count() == model.action_count());
  CHECK(same_bits(back.lower_data(), model.lower_data()));
  CHECK(same_bits(back.upper_data(), model.upper_data()));
  CHECK(model_hash(back) == model_hash(model));
}

TEST_CASE("IMDP and mixture round trips") {
  std::mt19937_64 rng(2);
  const auto c1 = random_odimdp(rng, {3, 3}, 2, true);
  const auto c2 = random_odimdp(rng, {3, 3}, 2, true);
  const auto flat = product_imdp(c1);
  std::stringstream b1;
  write_model(b1, flat);
  const auto flat2 = read_imdp(b1);
  CHECK(same_bits(flat2.lower_data(), flat.lower_data()));
  CHECK(same_bits(flat2.upper_data(), flat.upper_data()));
  CHECK(flat2.shape() == flat.shape());

  std::vector<double> wl, wu;
  for (Index p = 0; p < c1.row_count() * 2; ++p) {
    wl.insert(wl.end(), {0.25, 0.5});
    wu.insert(wu.end(), {0.5, 0.75});
  }
  const MixtureOdImdp mix({c1, c2}, wl, wu);
  std::stringstream b2;
  write_model(b2, mix);
  const auto mix2 = read_mixture(b2);
  CHECK(same_bits(mix2.weight_lower_data(), mix.weight_lower_data()));
  CHECK(same_bits(mix2.component(1).upper_data(), mix.component(1).upper_data()));
  CHECK(model_hash(mix2) == model_hash(mix));
}

TEST_CASE("one-cell model file round-trips byte for byte") {
  const auto dir = scratch_dir("onecell");
  const auto kernel = affine_kernel(1, {0.5}, 0, {}, {0.0}, {0.1}, {{}});
  const auto model = build_odimdp(kernel, RectPartition({{-1, 1}}, {1}));
  save_model(dir / "a.odimdp", model);
  CHECK(peek_model_kind(dir / "a.odimdp") == ModelKind::OdImdp);
  save_model(dir / "b.odimdp", load_odimdp(dir / "a.odimdp"));
  CHECK(slurp(dir / "a.odimdp") == slurp(dir / "b.odimdp"));
}

TEST_CASE("malformed model files") {
  const auto dir = scratch_dir("bad");
  {
    std::ofstream out(dir / "junk.bin", std::ios::binary);
    out << "NOTAMODEL-------";
  }
  CHECK_THROWS_AS(peek_model_kind(dir / "junk.bin"), IoError);
  CHECK_THROWS_AS(load_odimdp(dir / "missing.bin"), IoError);

  std::mt19937_64 rng(3);
  std::stringstream buf;
  write_model(buf, random_odimdp(rng, {3, 3}, 1, false));
  const std::string bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_odimdp(truncated), IoError);
  std::stringstream wrong_kind(bytes);
  CHECK_THROWS_AS(read_imdp(wrong_kind), IoError);
}

TEST_CASE("value and policy CSV") {
  const auto dir = scratch_dir("csv");
  const StateSpace space({2, 2}, true);
  SynthesisResult r;
  r.lower.values = {0, 0, 0, 0.25};
  r.upper.values = {0, 0, 0, 0.5};
  r.labeling.labels = {StateLabel::Avoid, StateLabel::Avoid, StateLabel::Avoid, StateLabel::Transient};
  r.policy = Policy(4, 2);
  r.policy.set(3, 1, 1);
  r.policy.set(3, 2, 0);
  write_values_csv(dir / "values.csv", space, r);
  CHECK(slurp(dir / "values.csv") ==
        "state,cell0,cell1,label,v_lower,v_upper\n"
        "0,-1,-1,avoid,0,0\n"
        "1,-1,0,avoid,0,0\n"
        "2,0,-1,avoid,0,0\n"
        "3,0,0,transient,0.25,0.5\n");
  write_policy_csv(dir / "policy.csv", r.policy, r.labeling, {"(0,1)", "b"});
  CHECK(slurp(dir / "policy.csv") ==
        "state,time,steps_to_go,action,action_label\n"
        "3,0,2,0,\"(0,1)\"\n"
        "3,1,1,1,b\n");
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("benchmark config with overrides") {
  const auto cfg = parse_config(R"({
    "benchmark": "car_parking",
    "grid": 20,
    "spec": {"horizon": 5},
    "engine": {"order": "best", "baseline": "imdp", "mem_budget": "1.5GB", "workers": 3},
    "seed": 42,
    "simulate": {"initial_states": [[-5, -5]], "trials": 100},
    "output": "results"
  })");
  CHECK(cfg.system.counts == std::vector<Index>{20, 20});
  CHECK(cfg.system.spec.horizon == 5);
  CHECK(cfg.order == EliminationOrder::Best);
  CHECK(cfg.baseline == Baseline::Imdp);
  CHECK(cfg.mem_budget == 1.5e9);
  CHECK(cfg.workers == 3);
  CHECK(cfg.seed == 42);
  CHECK(cfg.trials == 100);
  CHECK(cfg.output == fs::path("results"));
}

TEST_CASE("inline affine system") {
  const auto cfg = parse_config(R"({
    "system": {"A": [[0.5]], "B": [[1.0]], "noise_variance": [0.2], "inputs": [[-0.5], [0.5]]},
    "region": [[-1, 1]],
    "grid": [4],
    "spec": {"kind": "reach_avoid", "reach": [[[0, 0.5]]], "avoid": [[[-1, -0.5]]]}
  })");
  CHECK(cfg.system.kernel.dimension() == 1);
  CHECK(cfg.system.kernel.action_count() == 2);
  const std::vector<double> x = {0.4};
  CHECK(cfg.system.kernel.components[0].mean->evaluate(x, cfg.system.kernel.inputs[1])[0] == doctest::Approx(0.7));

  // the benchmark name wins over an inline system
  const auto both = parse_config(R"({"benchmark": "van_der_pol", "system": {"A": [[1.0]], "noise_variance": [1]}})");
  CHECK(both.system.name == "van_der_pol");
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"benchmark": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"system": {"A": [[1]], "noise_variance": [1]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"system": {"A": [[1]], "noise_variance": [-1]}, "region": [[0, 1]]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"benchmark": "car_parking", "grid": [1, 2, 3]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"benchmark": "car_parking", "engine": {"order": "sideways"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"benchmark": "car_parking",
      "spec": {"reach": [[[0, 1], [0, 1]]], "avoid": [[[0, 1], [0, 1]]]}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("flag parsers") {
  CHECK(parse_bytes("2GB") == 2e9);
  CHECK(parse_bytes("512") == 512);
  CHECK(parse_bytes("1.5tb") == 1.5e12);
  CHECK_THROWS_AS(parse_bytes("lots"), ConfigError);
  CHECK_THROWS_AS(parse_bytes("3PB"), ConfigError);
  CHECK(parse_grid("40", 2) == std::vector<Index>{40, 40});
  CHECK(parse_grid("40x30", 2) == std::vector<Index>{40, 30});
  CHECK(parse_grid("5,5,7,7", 4) == std::vector<Index>{5, 5, 7, 7});
  CHECK_THROWS_AS(parse_grid("5,5", 3), ConfigError);
  CHECK_THROWS_AS(parse_grid("0", 1), ConfigError);
  CHECK_THROWS_AS(parse_grid("4,,4", 3), ConfigError);
}

}  // TEST_SUITE
