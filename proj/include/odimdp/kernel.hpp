#pragma once

#include "odimdp/gaussian.hpp"
#include "odimdp/interval.hpp"

#include <boost/random/mersenne_twister.hpp>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace odimdp {

using Vector = std::vector<double>;

/// Deterministic part x -> mu(x, u) of a Gaussian transition kernel.
class MeanMap {
 public:
  virtual ~MeanMap() = default;

  virtual std::size_t dimension() const = 0;
  virtual Vector evaluate(std::span<const double> x, std::span<const double> u) const = 0;
  /// Sound per-axis enclosure of mu(x, u) over x in `cell`.
  virtual Box enclose(const Box& cell, std::span<const double> u) const = 0;
};

/// mu(x, u) = A x + B u + c with dense row-major matrices.
class AffineMean final : public MeanMap {
 public:
  AffineMean(std::size_t n, Vector a, std::size_t m, Vector b, Vector c);

  std::size_t dimension() const override { return n_; }
  std::size_t input_dimension() const { return m_; }
  Vector evaluate(std::span<const double> x, std::span<const double> u) const override;
  /// Exact: each row is monotone in every coordinate, so its range is found term by term.
  Box enclose(const Box& cell, std::span<const double> u) const override;

  const Vector& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Vector& c() const { return c_; }

 private:
  std::size_t n_;
  std::size_t m_;
  Vector a_;
  Vector b_;
  Vector c_;
};

/**
 * Discretized Van der Pol oscillator with a scalar input on the second axis:
 *   x1' = x1 + tau x2
 *   x2' = x2 + tau (-x1 + (1 - x1)^2 x2) + u
 */
class VanDerPolMean final : public MeanMap {
 public:
  explicit VanDerPolMean(double tau = 0.1) : tau_(tau) {}

  std::size_t dimension() const override { return 2; }
  Vector evaluate(std::span<const double> x, std::span<const double> u) const override;
  /// Interval evaluation of x2 (1 + tau (1 - x1)^2) - tau x1 + u.
  Box enclose(const Box& cell, std::span<const double> u) const override;

 private:
  double tau_;
};

/// Mixture weights alpha_r(x, u); must be nonnegative and sum to one.
class WeightMap {
 public:
  virtual ~WeightMap() = default;

  virtual std::size_t components() const = 0;
  virtual Vector evaluate(std::span<const double> x, std::span<const double> u) const = 0;
  /// Per-component enclosure over x in `cell`.
  virtual Box enclose(const Box& cell, std::span<const double> u) const = 0;
};

class ConstantWeights final : public WeightMap {
 public:
  explicit ConstantWeights(Vector weights);

  std::size_t components() const override { return w_.size(); }
  Vector evaluate(std::span<const double>, std::span<const double>) const override { return w_; }
  Box enclose(const Box& cell, std::span<const double> u) const override;

 private:
  Vector w_;
};

/// Two components with alpha_1 = clamp(x[axis], 0, 1) and alpha_2 = 1 - alpha_1.
class ClampedCoordinateWeights final : public WeightMap {
 public:
  explicit ClampedCoordinateWeights(std::size_t axis) : axis_(axis) {}

  std::size_t components() const override { return 2; }
  Vector evaluate(std::span<const double> x, std::span<const double> u) const override;
  Box enclose(const Box& cell, std::span<const double> u) const override;

 private:
  std::size_t axis_;
};

/// One Gaussian component: mean map and constant diagonal covariance.
struct KernelComponent {
  std::shared_ptr<const MeanMap> mean;
  Vector variance;
};

/**
 * Transition kernel x' ~ sum_r alpha_r(x, u) N(mu^r(x, u), diag(variance^r))
 * with a finite input set.
 */
struct GaussianKernelSpec {
  std::vector<KernelComponent> components;
  /// Null means a single component with weight one.
  std::shared_ptr<const WeightMap> weights;
  std::vector<Vector> inputs;
  std::vector<std::string> input_labels;

  std::size_t dimension() const { return components.front().mean->dimension(); }
  std::size_t action_count() const { return inputs.size(); }

  /// Throws ValidationError when shapes or variances are inconsistent.
  void validate() const;
};

/// Mean and variance enclosures of component r over `cell` under input u.
MomentBounds bound_moments(const KernelComponent& component, const Box& cell,
                           std::span<const double> u);

using Rng = boost::random::mt19937_64;

/// Draws r ~ alpha(x, u) and then x' ~ N(mu^r(x, u), diag(variance^r)).
Vector sample_step(const GaussianKernelSpec& kernel, std::span<const double> x,
                   std::span<const double> u, Rng& rng, std::size_t* component = nullptr);

/// Independent stream seed for trajectory `index` under a master seed.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

}  // namespace odimdp
