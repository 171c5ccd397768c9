#include "odimdp/systems.hpp"

#include "odimdp/errors.hpp"

#include <cmath>
#include <cstdio>
#include <regex>

namespace odimdp {

namespace {

bool overlaps_open(const Box& a, const Box& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i].lo < b[i].hi && b[i].lo < a[i].hi)) return false;
  }
  return true;
}

std::string format_input(const Vector& u) {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? "," : "", u[i]);
    out += buf;
  }
  return out + ")";
}

std::vector<std::string> labels_for(const std::vector<Vector>& inputs) {
  std::vector<std::string> out;
  out.reserve(inputs.size());
  for (const auto& u : inputs) out.push_back(format_input(u));
  return out;
}

Vector identity(std::size_t n, double scale) {
  Vector a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = scale;
  return a;
}

BenchmarkDef car_parking() {
  std::vector<Vector> inputs;
  for (double u1 : {-1.0, 0.0, 1.0}) {
    for (double u2 : {-1.0, 0.0, 1.0}) inputs.push_back({u1, u2});
  }
  BenchmarkDef def;
  def.name = "car_parking";
  def.kernel = affine_kernel(2, identity(2, 0.9), 2, identity(2, 0.7), {}, {1.0, 1.0}, inputs);
  def.region = {{-10, 10}, {-10, 10}};
  def.counts = {40, 40};
  def.spec.reach = {{{4, 10}, {-4, 0}}};
  def.spec.avoid = {{{4, 10}, {0, 4}}};
  return def;
}

// The nonlinear input map v = (u1 cos u2, u1 sin u2) is applied to the input
// grid, so the kernel itself is linear in v.
BenchmarkDef robot(bool avoid) {
  const Index levels = avoid ? 21 : 11;
  const Vector grid = linspace(-1.0, 1.0, levels);
  std::vector<Vector> inputs;
  std::vector<std::string> labels;
  for (double u1 : grid) {
    for (double u2 : grid) {
      inputs.push_back({u1 * std::cos(u2), u1 * std::sin(u2)});
      labels.push_back(format_input({u1, u2}));
    }
  }
  BenchmarkDef def;
  def.name = avoid ? "robot_reach_avoid" : "robot_reach";
  def.kernel = affine_kernel(2, identity(2, 1.0), 2, identity(2, 10.0), {}, {0.75, 0.75}, inputs);
  def.kernel.input_labels = std::move(labels);
  def.region = {{-10, 10}, {-10, 10}};
  def.counts = avoid ? std::vector<Index>{40, 40} : std::vector<Index>{20, 20};
  def.spec.reach = {{{5, 7}, {5, 7}}};
  if (avoid) def.spec.avoid = {{{-2, 2}, {-2, 2}}};
  return def;
}

BenchmarkDef bas4d() {
  // clang-format off
  Vector a = {0.6682, 0,      0.02632,   0,
              0,      0.683,  0,         0.02096,
              1.0005, 0,      -0.000499, 0,
              0,      0.8004, 0,         0.1996};
  // clang-format on
  Vector b = {0.1320, 0.1402, 0.0, 0.0};
  // Constant drift of the building model; without it every state leaves X in one step.
  Vector c = {3.3378, 2.9272, 13.0207, 10.4166};
  Vector noise = {1.0 / 12.9199, 1.0 / 12.9199, 1.0 / 2.5826, 1.0 / 3.2276};
  std::vector<Vector> inputs = {{17.0}, {18.0}, {19.0}, {20.0}};
  BenchmarkDef def;
  def.name = "bas4d";
  def.kernel = affine_kernel(4, a, 1, b, c, noise, inputs);
  def.region = {{18.75, 21.25}, {18.75, 21.25}, {29.5, 36.5}, {29.5, 36.5}};
  def.counts = {5, 5, 7, 7};
  def.spec.kind = SpecKind::Safety;
  return def;
}

BenchmarkDef van_der_pol() {
  BenchmarkDef def;
  def.name = "van_der_pol";
  KernelComponent comp{std::make_shared<VanDerPolMean>(0.1), {0.2, 0.2}};
  def.kernel.components = {comp};
  for (double u : linspace(-1.0, 1.0, 11)) def.kernel.inputs.push_back({u});
  def.kernel.input_labels = labels_for(def.kernel.inputs);
  def.region = {{-4, 4}, {-4, 4}};
  def.counts = {50, 50};
  def.spec.reach = {{{-1.4, -0.7}, {-2.9, -2.0}}};
  return def;
}

BenchmarkDef linear_nd(std::size_t n) {
  Vector a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = 0.7;
    a[i * n + (i + 1) % n] += -0.1;
  }
  BenchmarkDef def;
  def.name = "linear_nd(" + std::to_string(n) + ")";
  // Noise standard deviation 0.1 per axis.
  def.kernel = affine_kernel(n, a, 0, {}, {}, Vector(n, 0.01), {Vector{}});
  def.kernel.input_labels = {"none"};
  def.region = Box(n, Interval{-1.0, 1.0});
  def.counts = std::vector<Index>(n, 8);
  def.spec.kind = SpecKind::Safety;
  return def;
}

BenchmarkDef switched() {
  auto mean1 = std::make_shared<AffineMean>(2, Vector{0.1, 0.9, 0.8, 0.2}, 0, Vector{}, Vector{});
  auto mean2 = std::make_shared<AffineMean>(2, Vector{0.8, 0.2, 0.1, 0.9}, 0, Vector{}, Vector{});
  BenchmarkDef def;
  def.name = "switched";
  def.kernel.components = {{mean1, {0.3 * 0.3, 0.2 * 0.2}}, {mean2, {0.2 * 0.2, 0.1 * 0.1}}};
  def.kernel.weights = std::make_shared<ConstantWeights>(Vector{0.7, 0.3});
  def.kernel.inputs = {Vector{}};
  def.kernel.input_labels = {"none"};
  def.region = {{-2, 2}, {-2, 2}};
  def.counts = {40, 40};
  def.spec.reach = {{{1, 2}, {0, 1}}};
  def.spec.avoid = {{{-1, 0}, {-1, 1}}};
  return def;
}

}  // namespace

void ReachAvoidSpec::validate(std::size_t dimension) const {
  for (const auto* set : {&reach, &avoid}) {
    for (const Box& b : *set) {
      if (b.size() != dimension) throw ValidationError("spec box has the wrong dimension");
      for (const auto& iv : b) {
        if (!(iv.lo <= iv.hi)) throw ValidationError("spec box bounds out of order");
      }
    }
  }
  for (const Box& r : reach) {
    for (const Box& o : avoid) {
      if (overlaps_open(r, o)) throw ValidationError("reach and avoid sets overlap");
    }
  }
  if (kind == SpecKind::Safety && !reach.empty()) {
    throw ValidationError("safety specification takes no reach set");
  }
  if (horizon > 1'000'000) throw ValidationError("horizon too large");
}

Vector linspace(double lo, double hi, std::size_t count) {
  if (count == 1) return {0.5 * (lo + hi)};
  Vector out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

GaussianKernelSpec affine_kernel(std::size_t n, Vector a, std::size_t m, Vector b, Vector c,
                                 Vector noise_variance, std::vector<Vector> inputs) {
  GaussianKernelSpec kernel;
  kernel.components.push_back(
      {std::make_shared<AffineMean>(n, std::move(a), m, std::move(b), std::move(c)),
       std::move(noise_variance)});
  kernel.input_labels = labels_for(inputs);
  kernel.inputs = std::move(inputs);
  kernel.validate();
  return kernel;
}

BenchmarkDef benchmark(std::string_view name) {
  if (name == "car_parking") return car_parking();
  if (name == "robot_reach") return robot(false);
  if (name == "robot_reach_avoid") return robot(true);
  if (name == "bas4d") return bas4d();
  if (name == "van_der_pol") return van_der_pol();
  if (name == "switched") return switched();
  std::cmatch match;
  const std::string text(name);
  static const std::regex pattern(R"(linear_nd\((\d+)\)|linear(\d+)d)");
  if (std::regex_match(text.c_str(), match, pattern)) {
    const std::string digits = match[1].matched ? match[1].str() : match[2].str();
    const unsigned long n = std::stoul(digits);
    if (n >= 1 && n <= 12) return linear_nd(n);
  }
  throw ConfigError("unknown benchmark '" + text + "'; known: car_parking, robot_reach, "
                    "robot_reach_avoid, bas4d, van_der_pol, switched, linear_nd(n)");
}

std::vector<std::string> benchmark_names() {
  return {"car_parking", "robot_reach", "robot_reach_avoid", "bas4d",
          "van_der_pol", "switched",    "linear_nd(6)"};
}

}  // namespace odimdp
