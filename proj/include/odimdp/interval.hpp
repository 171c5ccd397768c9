#pragma once

#include <algorithm>
#include <vector>

namespace odimdp {

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double x) { return {x, x}; }

  double width() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }

  bool operator==(const Interval&) const = default;
};

/// Axis-aligned box, one interval per axis.
using Box = std::vector<Interval>;

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator+(Interval a, double c) { return {a.lo + c, a.hi + c}; }
inline Interval operator+(double c, Interval a) { return a + c; }
inline Interval operator-(double c, Interval a) { return {c - a.hi, c - a.lo}; }

inline Interval operator*(double c, Interval a) {
  return c >= 0.0 ? Interval{c * a.lo, c * a.hi} : Interval{c * a.hi, c * a.lo};
}

inline Interval operator*(Interval a, Interval b) {
  const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

/// Tight enclosure of x^2 (nonnegative even when a straddles zero).
inline Interval sqr(Interval a) {
  const double l = a.lo * a.lo;
  const double h = a.hi * a.hi;
  if (a.lo >= 0.0) return {l, h};
  if (a.hi <= 0.0) return {h, l};
  return {0.0, std::max(l, h)};
}

/// Widens both ends by `r`; covers rounding differences between evaluation and enclosure.
inline Interval pad(Interval a, double r) { return {a.lo - r, a.hi + r}; }

inline Interval hull(Interval a, Interval b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline bool contains(const Box& box, const std::vector<double>& x) {
  if (box.size() != x.size()) return false;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!box[i].contains(x[i])) return false;
  }
  return true;
}

}  // namespace odimdp
