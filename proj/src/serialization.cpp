#include "odimdp/serialization.hpp"

#include "odimdp/errors.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace odimdp {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::array<char, 8> kOdMagic = {'O', 'D', 'I', 'M', 'D', 'P', '0', '1'};
constexpr std::array<char, 8> kImdpMagic = {'I', 'M', 'D', 'P', 'F', 'L', '0', '1'};
constexpr std::array<char, 8> kMixMagic = {'O', 'D', 'M', 'I', 'X', '0', '0', '1'};

constexpr std::uint32_t kFlagSinks = 1U << 0;
constexpr std::uint32_t kFlagShape = 1U << 1;

// Sizes read from a file are checked against this before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 36;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void raw(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out_) throw IoError("write failed");
  }
  void u32(std::uint32_t x) { le(x); }
  void u64(std::uint64_t x) { le(x); }
  void f64(double x) { le(std::bit_cast<std::uint64_t>(x)); }
  void doubles(std::span<const double> xs) {
    if constexpr (std::endian::native == std::endian::little) {
      raw(xs.data(), xs.size_bytes());
    } else {
      for (double x : xs) f64(x);
    }
  }
  void string(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }

 private:
  template <typename T>
  void le(T x) {
    unsigned char buf[sizeof(T)];
    for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<unsigned char>(x >> (8 * k));
    raw(buf, sizeof buf);
  }

  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void raw(void* data, std::size_t size) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (!in_) throw IoError("model file is truncated");
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  std::uint64_t count(const char* what) {
    const std::uint64_t n = u64();
    if (n > kMaxElements) throw IoError(std::string("implausible ") + what + " in model file");
    return n;
  }
  void doubles(std::span<double> xs) {
    if constexpr (std::endian::native == std::endian::little) {
      raw(xs.data(), xs.size_bytes());
    } else {
      for (double& x : xs) x = std::bit_cast<double>(le<std::uint64_t>());
    }
  }
  std::string string() {
    std::string s(count("string length"), '\0');
    raw(s.data(), s.size());
    return s;
  }
  void expect_magic(const std::array<char, 8>& magic) {
    std::array<char, 8> got{};
    raw(got.data(), got.size());
    if (got != magic) throw IoError("not a model file of the expected kind");
    const std::uint32_t version = u32();
    if (version != kVersion) {
      throw IoError("unsupported model file version " + std::to_string(version));
    }
  }

 private:
  template <typename T>
  T le() {
    unsigned char buf[sizeof(T)];
    raw(buf, sizeof buf);
    T x = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) x |= static_cast<T>(buf[k]) << (8 * k);
    return x;
  }

  std::istream& in_;
};

void write_labels(Writer& w, const std::vector<std::string>& labels) {
  w.u64(labels.size());
  for (const auto& s : labels) w.string(s);
}

std::vector<std::string> read_labels(Reader& r) {
  std::vector<std::string> labels(r.count("label count"));
  for (auto& s : labels) s = r.string();
  return labels;
}

void write_od_body(Writer& w, const OdImdp& model) {
  const auto& space = model.space();
  w.u32(space.has_sinks() ? kFlagSinks : 0U);
  w.u64(space.axis_count());
  for (Index size : space.axis_sizes()) w.u64(size);
  w.u64(model.action_count());
  const Index block = model.block_size();
  const auto lower = model.lower_data();
  const auto upper = model.upper_data();
  for (Index p = 0; p < model.row_count() * model.action_count(); ++p) {
    for (Index i = 0; i < space.axis_count(); ++i) {
      const Index off = p * block + model.axis_offset(i);
      w.doubles(lower.subspan(off, space.axis_size(i)));
      w.doubles(upper.subspan(off, space.axis_size(i)));
    }
  }
  write_labels(w, model.action_labels());
}

OdImdp read_od_body(Reader& r) {
  const std::uint32_t flags = r.u32();
  const std::uint64_t n = r.count("axis count");
  std::vector<Index> sizes(n);
  std::uint64_t total = 1;
  for (auto& s : sizes) {
    s = r.count("axis size");
    total *= std::max<std::uint64_t>(s, 1);
    if (total > kMaxElements) throw IoError("implausible state space in model file");
  }
  const std::uint64_t actions = r.count("action count");
  StateSpace space(sizes, (flags & kFlagSinks) != 0);
  Index block = 0;
  for (Index s : sizes) block += s;
  const std::uint64_t pairs = space.interior_size() * actions;
  if (pairs * block > kMaxElements) throw IoError("implausible model size in file");
  std::vector<double> lower(pairs * block);
  std::vector<double> upper(lower.size());
  for (Index p = 0; p < pairs; ++p) {
    Index off = p * block;
    for (Index size : sizes) {
      r.doubles(std::span<double>(lower).subspan(off, size));
      r.doubles(std::span<double>(upper).subspan(off, size));
      off += size;
    }
  }
  auto labels = read_labels(r);
  return OdImdp(std::move(space), actions, std::move(lower), std::move(upper), std::move(labels));
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

const char* label_name(StateLabel label) {
  switch (label) {
    case StateLabel::Reach: return "reach";
    case StateLabel::Avoid: return "avoid";
    case StateLabel::Transient: break;
  }
  return "transient";
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_model(std::ostream& out, const OdImdp& model) {
  Writer w(out);
  w.raw(kOdMagic.data(), kOdMagic.size());
  w.u32(kVersion);
  write_od_body(w, model);
}

void write_model(std::ostream& out, const Imdp& model) {
  Writer w(out);
  w.raw(kImdpMagic.data(), kImdpMagic.size());
  w.u32(kVersion);
  const auto& shape = model.shape();
  w.u32((shape ? kFlagShape : 0U) | (shape && shape->has_sinks() ? kFlagSinks : 0U));
  w.u64(model.state_count());
  w.u64(model.action_count());
  if (shape) {
    w.u64(shape->axis_count());
    for (Index size : shape->axis_sizes()) w.u64(size);
  }
  const Index S = model.state_count();
  for (Index p = 0; p < S * model.action_count(); ++p) {
    w.doubles(model.lower_data().subspan(p * S, S));
    w.doubles(model.upper_data().subspan(p * S, S));
  }
}

void write_model(std::ostream& out, const MixtureOdImdp& model) {
  Writer w(out);
  w.raw(kMixMagic.data(), kMixMagic.size());
  w.u32(kVersion);
  w.u64(model.component_count());
  w.u64(model.weight_lower_data().size());
  w.doubles(model.weight_lower_data());
  w.doubles(model.weight_upper_data());
  for (const auto& c : model.components()) write_od_body(w, c);
}

OdImdp read_odimdp(std::istream& in) {
  Reader r(in);
  r.expect_magic(kOdMagic);
  return read_od_body(r);
}

Imdp read_imdp(std::istream& in) {
  Reader r(in);
  r.expect_magic(kImdpMagic);
  const std::uint32_t flags = r.u32();
  const std::uint64_t S = r.count("state count");
  const std::uint64_t A = r.count("action count");
  std::optional<StateSpace> shape;
  if (flags & kFlagShape) {
    std::vector<Index> sizes(r.count("axis count"));
    for (auto& s : sizes) s = r.count("axis size");
    shape = StateSpace(sizes, (flags & kFlagSinks) != 0);
  }
  if (S * S * A > kMaxElements) throw IoError("implausible model size in file");
  std::vector<double> lower(S * S * A);
  std::vector<double> upper(lower.size());
  for (Index p = 0; p < S * A; ++p) {
    r.doubles(std::span<double>(lower).subspan(p * S, S));
    r.doubles(std::span<double>(upper).subspan(p * S, S));
  }
  return Imdp(S, A, std::move(lower), std::move(upper), std::move(shape));
}

MixtureOdImdp read_mixture(std::istream& in) {
  Reader r(in);
  r.expect_magic(kMixMagic);
  const std::uint64_t k = r.count("component count");
  std::vector<double> lower(r.count("weight count"));
  std::vector<double> upper(lower.size());
  r.doubles(lower);
  r.doubles(upper);
  std::vector<OdImdp> components;
  for (std::uint64_t c = 0; c < k; ++c) components.push_back(read_od_body(r));
  return MixtureOdImdp(std::move(components), std::move(lower), std::move(upper));
}

ModelKind peek_model_kind(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in) throw IoError("'" + path.string() + "' is too short to be a model file");
  if (magic == kOdMagic) return ModelKind::OdImdp;
  if (magic == kImdpMagic) return ModelKind::Imdp;
  if (magic == kMixMagic) return ModelKind::Mixture;
  throw IoError("'" + path.string() + "' is not a model file");
}

template <typename Model>
void save_model(const std::filesystem::path& path, const Model& model) {
  auto out = open_out(path, true);
  write_model(out, model);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

template void save_model(const std::filesystem::path&, const OdImdp&);
template void save_model(const std::filesystem::path&, const Imdp&);
template void save_model(const std::filesystem::path&, const MixtureOdImdp&);

OdImdp load_odimdp(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_odimdp(in);
}

Imdp load_imdp(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_imdp(in);
}

MixtureOdImdp load_mixture(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_mixture(in);
}

void write_values_csv(const std::filesystem::path& path, const StateSpace& space,
                      const SynthesisResult& result) {
  auto out = open_out(path, false);
  out << "state";
  for (Index i = 0; i < space.axis_count(); ++i) out << ",cell" << i;
  out << ",label,v_lower,v_upper\n";
  std::vector<Index> coords(space.axis_count());
  for (Index s = 0; s < space.size(); ++s) {
    space.coords(s, coords);
    out << s;
    for (Index c : coords) {
      if (space.has_sinks()) {
        out << ',' << (c == kSinkIndex ? std::string("-1") : std::to_string(c - 1));
      } else {
        out << ',' << c;
      }
    }
    out << ',' << label_name(result.labeling.labels[s]) << ',' << fmt(result.lower.values[s])
        << ',' << fmt(result.upper.values[s]) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

static std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

void write_policy_csv(const std::filesystem::path& path, const Policy& policy,
                      const Labeling& labeling, const std::vector<std::string>& action_labels) {
  auto out = open_out(path, false);
  out << "state,time,steps_to_go,action,action_label\n";
  const Index H = policy.horizon();
  for (Index s = 0; s < policy.state_count(); ++s) {
    if (labeling.terminal(s)) continue;
    for (Index t = 0; t < H; ++t) {
      const auto a = policy.action(s, H - t);
      if (!a) continue;
      out << s << ',' << t << ',' << H - t << ',' << *a << ','
          << csv_field(*a < action_labels.size() ? action_labels[*a] : std::to_string(*a)) << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_deltas_csv(const std::filesystem::path& path, const DeltaStats& deltas,
                      const Labeling& labeling) {
  auto out = open_out(path, false);
  out << "state,delta\n";
  for (Index s = 0; s < deltas.per_state.size(); ++s) {
    if (labeling.terminal(s)) continue;
    out << s << ',' << fmt(deltas.per_state[s]) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, false);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace odimdp
