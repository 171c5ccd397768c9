#include "odimdp/gaussian.hpp"

#include "odimdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace odimdp {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// Upper tail Q(z) = P(Z > z).
double upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

void check_variance(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ValidationError("variance must be positive and finite, got " + std::to_string(variance));
  }
}

double clamp_unit(double p) { return std::clamp(p, 0.0, 1.0); }

// Variance that maximizes the mass of [a, b] when the mean lies outside it.
std::optional<double> stationary_variance(double mean, Interval target) {
  const double d1 = std::min(std::abs(target.lo - mean), std::abs(target.hi - mean));
  const double d2 = std::max(std::abs(target.lo - mean), std::abs(target.hi - mean));
  if (!(d1 > 0.0) || !(d2 > d1)) return std::nullopt;
  const double s = (d2 * d2 - d1 * d1) / (2.0 * std::log(d2 / d1));
  if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
  return s;
}

}  // namespace

double interval_probability(double mean, double variance, Interval target) {
  check_variance(variance);
  if (!(target.hi > target.lo)) return 0.0;
  const double sigma = std::sqrt(variance);
  const double za = (target.lo - mean) / sigma;
  const double zb = (target.hi - mean) / sigma;
  double p = 0.0;
  if (za >= 0.0) {
    p = upper_tail(za) - upper_tail(zb);
  } else if (zb <= 0.0) {
    p = upper_tail(-zb) - upper_tail(-za);
  } else {
    p = 1.0 - upper_tail(-za) - upper_tail(zb);
  }
  return clamp_unit(p);
}

double outside_probability(double mean, double variance, Interval domain) {
  check_variance(variance);
  const double sigma = std::sqrt(variance);
  const double za = (domain.lo - mean) / sigma;
  const double zb = (domain.hi - mean) / sigma;
  return clamp_unit(upper_tail(-za) + upper_tail(zb));
}

namespace {

template <typename Prob>
ProbabilityBounds bounds_by(const AxisMoments& m, Interval target, Prob&& prob,
                            bool complement) {
  check_variance(m.variance.lo);
  check_variance(m.variance.hi);
  if (m.mean.lo > m.mean.hi || m.variance.lo > m.variance.hi) {
    throw ValidationError("moment interval bounds out of order");
  }
  // Minimum of the inside mass: corners of the moment box.
  double in_min = 0.0;
  bool first = true;
  for (double mu : {m.mean.lo, m.mean.hi}) {
    for (double var : {m.variance.lo, m.variance.hi}) {
      const double p = prob(mu, var);
      const double in = complement ? -p : p;
      if (first || in < in_min) in_min = in;
      first = false;
    }
  }
  // Maximum: mean closest to the target midpoint, then the best variance.
  const double mu = std::clamp(target.mid(), m.mean.lo, m.mean.hi);
  double in_max = 0.0;
  first = true;
  std::vector<double> candidates = {m.variance.lo, m.variance.hi};
  if (!target.contains(mu)) {
    if (auto s = stationary_variance(mu, target)) {
      candidates.push_back(std::clamp(*s, m.variance.lo, m.variance.hi));
    }
  }
  for (double var : candidates) {
    const double p = prob(mu, var);
    const double in = complement ? -p : p;
    if (first || in > in_max) in_max = in;
    first = false;
  }
  if (complement) return {clamp_unit(-in_max), clamp_unit(-in_min)};
  return {clamp_unit(in_min), clamp_unit(std::max(in_min, in_max))};
}

}  // namespace

ProbabilityBounds marginal_bounds(const AxisMoments& m, Interval target) {
  if (target.lo > target.hi) throw ValidationError("target interval bounds out of order");
  return bounds_by(
      m, target, [&](double mu, double var) { return interval_probability(mu, var, target); },
      false);
}

ProbabilityBounds sink_bounds(const AxisMoments& m, Interval domain) {
  if (!(domain.lo < domain.hi)) throw ValidationError("axis domain must have positive width");
  return bounds_by(
      m, domain, [&](double mu, double var) { return outside_probability(mu, var, domain); },
      true);
}

}  // namespace odimdp
