#include "odimdp/kernel.hpp"

#include "odimdp/errors.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cmath>
#include <string>

namespace odimdp {

AffineMean::AffineMean(std::size_t n, Vector a, std::size_t m, Vector b, Vector c)
    : n_(n), m_(m), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  if (c_.empty()) c_.assign(n_, 0.0);
  if (a_.size() != n_ * n_ || b_.size() != n_ * m_ || c_.size() != n_) {
    throw ValidationError("affine mean: matrix shapes do not match dimension " +
                          std::to_string(n_));
  }
}

Vector AffineMean::evaluate(std::span<const double> x, std::span<const double> u) const {
  // same summation order as enclose() so vertices land inside the enclosure exactly
  Vector out(c_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) out[i] += b_[i * m_ + j] * u[j];
    for (std::size_t j = 0; j < n_; ++j) out[i] += a_[i * n_ + j] * x[j];
  }
  return out;
}

Box AffineMean::enclose(const Box& cell, std::span<const double> u) const {
  Box out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double offset = c_[i];
    for (std::size_t j = 0; j < m_; ++j) offset += b_[i * m_ + j] * u[j];
    Interval acc = Interval::point(offset);
    for (std::size_t j = 0; j < n_; ++j) acc = acc + a_[i * n_ + j] * cell[j];
    out[i] = acc;
  }
  return out;
}

Vector VanDerPolMean::evaluate(std::span<const double> x, std::span<const double> u) const {
  const double d = 1.0 - x[0];
  return {x[0] + tau_ * x[1], x[1] + tau_ * (-x[0] + d * d * x[1]) + u[0]};
}

Box VanDerPolMean::enclose(const Box& cell, std::span<const double> u) const {
  const Interval x1 = cell[0];
  const Interval x2 = cell[1];
  const Interval first = x1 + tau_ * x2;
  const Interval gain = 1.0 + tau_ * sqr(1.0 - x1);  // always >= 1
  const Interval second = x2 * gain - tau_ * x1 + u[0];
  const double m1 = std::max(std::abs(x1.lo), std::abs(x1.hi));
  const double m2 = std::max(std::abs(x2.lo), std::abs(x2.hi));
  const double scale = 1.0 + m1 + m2 * gain.hi + std::abs(u[0]);
  return {pad(first, 1e-14 * scale), pad(second, 1e-14 * scale)};
}

ConstantWeights::ConstantWeights(Vector weights) : w_(std::move(weights)) {
  double sum = 0.0;
  for (double w : w_) {
    if (!(w >= 0.0)) throw ValidationError("mixture weights must be nonnegative");
    sum += w;
  }
  if (w_.empty() || std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("mixture weights must sum to one");
  }
}

Box ConstantWeights::enclose(const Box&, std::span<const double>) const {
  Box out;
  for (double w : w_) out.push_back(Interval::point(w));
  return out;
}

Vector ClampedCoordinateWeights::evaluate(std::span<const double> x,
                                          std::span<const double>) const {
  const double a = std::clamp(x[axis_], 0.0, 1.0);
  return {a, 1.0 - a};
}

Box ClampedCoordinateWeights::enclose(const Box& cell, std::span<const double>) const {
  const double lo = std::clamp(cell.at(axis_).lo, 0.0, 1.0);
  const double hi = std::clamp(cell.at(axis_).hi, 0.0, 1.0);
  return {{lo, hi}, {1.0 - hi, 1.0 - lo}};
}

void GaussianKernelSpec::validate() const {
  if (components.empty()) throw ValidationError("kernel has no components");
  const std::size_t n = components.front().mean ? components.front().mean->dimension() : 0;
  if (n == 0) throw ValidationError("kernel component has no mean map");
  for (const auto& c : components) {
    if (!c.mean || c.mean->dimension() != n || c.variance.size() != n) {
      throw ValidationError("kernel components disagree on the state dimension");
    }
    for (double v : c.variance) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("variances must be positive");
    }
  }
  if (components.size() > 1 && (!weights || weights->components() != components.size())) {
    throw ValidationError("mixture kernel needs one weight per component");
  }
  if (inputs.empty()) throw ValidationError("kernel has no inputs (use one empty input)");
  if (!input_labels.empty() && input_labels.size() != inputs.size()) {
    throw ValidationError("input label count does not match input count");
  }
}

MomentBounds bound_moments(const KernelComponent& component, const Box& cell,
                           std::span<const double> u) {
  const Box mean = component.mean->enclose(cell, u);
  MomentBounds out;
  out.axes.reserve(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    out.axes.push_back({mean[i], Interval::point(component.variance[i])});
  }
  return out;
}

Vector sample_step(const GaussianKernelSpec& kernel, std::span<const double> x,
                   std::span<const double> u, Rng& rng, std::size_t* component) {
  std::size_t r = 0;
  if (kernel.components.size() > 1) {
    const Vector w = kernel.weights->evaluate(x, u);
    double draw = boost::random::uniform_01<double>{}(rng);
    r = w.size() - 1;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (draw < w[k]) {
        r = k;
        break;
      }
      draw -= w[k];
    }
  }
  if (component) *component = r;
  const auto& comp = kernel.components[r];
  Vector next = comp.mean->evaluate(x, u);
  boost::random::normal_distribution<double> normal;
  for (std::size_t i = 0; i < next.size(); ++i) {
    next[i] += std::sqrt(comp.variance[i]) * normal(rng);
  }
  return next;
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace odimdp
