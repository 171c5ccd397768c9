#include "odimdp/interval_ambiguity.hpp"

#include "odimdp/errors.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace odimdp {

std::vector<std::string> check_interval_bounds(std::span<const double> lower,
                                               std::span<const double> upper, double tol) {
  std::vector<std::string> violations;
  if (lower.size() != upper.size()) {
    std::ostringstream msg;
    msg << "lower/upper length mismatch (" << lower.size() << " vs " << upper.size() << ")";
    violations.push_back(msg.str());
    return violations;
  }
  if (lower.empty()) {
    violations.emplace_back("empty support");
    return violations;
  }
  for (Index t = 0; t < lower.size(); ++t) {
    const double lo = lower[t];
    const double hi = upper[t];
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      violations.push_back("non-finite bound at t=" + std::to_string(t));
      continue;
    }
    if (lo < -tol || hi > 1.0 + tol || lo > hi + tol) {
      std::ostringstream msg;
      msg << "bounds out of order at t=" << t << ": lower=" << lo << " upper=" << hi;
      violations.push_back(msg.str());
    }
  }
  const double lower_mass = std::accumulate(lower.begin(), lower.end(), 0.0);
  const double upper_mass = std::accumulate(upper.begin(), upper.end(), 0.0);
  if (lower_mass > 1.0 + tol) {
    std::ostringstream msg;
    msg << "lower bounds exceed unit mass (sum=" << lower_mass << ")";
    violations.push_back(msg.str());
  }
  if (upper_mass < 1.0 - tol) {
    std::ostringstream msg;
    msg << "upper bounds below unit mass (sum=" << upper_mass << ")";
    violations.push_back(msg.str());
  }
  return violations;
}

IntervalAmbiguity::IntervalAmbiguity(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  const auto violations = check_interval_bounds(lower_, upper_);
  if (!violations.empty()) {
    throw ValidationError("invalid interval ambiguity set: " + violations.front());
  }
}

IntervalAmbiguity IntervalAmbiguity::degenerate(std::vector<double> distribution) {
  auto copy = distribution;
  return IntervalAmbiguity(std::move(distribution), std::move(copy));
}

IntervalAmbiguity IntervalAmbiguity::point_mass(Index size, Index index) {
  std::vector<double> p(size, 0.0);
  p.at(index) = 1.0;
  return degenerate(std::move(p));
}

bool IntervalAmbiguity::contains(std::span<const double> gamma, double tol) const {
  if (gamma.size() != size()) return false;
  double mass = 0.0;
  for (Index t = 0; t < size(); ++t) {
    if (gamma[t] < lower_[t] - tol || gamma[t] > upper_[t] + tol) return false;
    mass += gamma[t];
  }
  return std::abs(mass - 1.0) <= tol;
}

}  // namespace odimdp
