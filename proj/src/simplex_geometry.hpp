#pragma once

// Exact convex clipping on the probability simplex over three actions.
// Points live in the chart (x, y) = (q_a, q_b) with q_c = 1 - x - y.

#include <vector>

#include "levelscope/ieds.hpp"

namespace levelscope::detail {

struct Point2 {
  Rational x;
  Rational y;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// f(q) = coefficients . (q_a, q_b, q_c), rewritten in the chart as
// (c_a - c_c) x + (c_b - c_c) y + c_c.
inline Rational evaluate(const LinearForm& form, const Point2& p) {
  const auto& c = form.coefficients;
  return Rational(c[0] - c[2]) * p.x + Rational(c[1] - c[2]) * p.y + Rational(c[2]);
}

inline std::vector<Point2> full_simplex() {
  // Vertices "all a", "all b", "all c" in counter-clockwise order.
  return {{Rational(1), Rational(0)}, {Rational(0), Rational(1)}, {Rational(0), Rational(0)}};
}

inline void dedupe(std::vector<Point2>& poly) {
  std::vector<Point2> out;
  for (const auto& p : poly) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  poly = std::move(out);
}

// Keeps the part of a convex polygon (possibly degenerate) where form >= 0.
inline std::vector<Point2> clip(const std::vector<Point2>& poly, const LinearForm& form) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& cur = poly[i];
    const Point2& nxt = poly[(i + 1) % n];
    const Rational fc = evaluate(form, cur);
    const Rational fn = evaluate(form, nxt);
    if (fc >= 0) out.push_back(cur);
    if ((fc > 0 && fn < 0) || (fc < 0 && fn > 0)) {
      const Rational t = fc / (fc - fn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  dedupe(out);
  return out;
}

inline Rational signed_area(const std::vector<Point2>& poly) {
  Rational twice(0);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    twice += p.x * q.y - q.x * p.y;
  }
  return twice / 2;
}

inline SimplexPoint to_simplex(const Point2& p) { return {p.x, p.y, Rational(1) - p.x - p.y}; }

// form = u_own - u_other over the neighbor's actions.
inline LinearForm difference_form(const PayoffMatrix& m, RingAction own, RingAction other) {
  LinearForm form;
  for (std::size_t j = 0; j < 3; ++j) {
    form.coefficients[j] = m[index_of(own)][j] - m[index_of(other)][j];
  }
  return form;
}

// -q_j >= 0, i.e. the neighbor never plays j.
inline LinearForm excluded_form(std::size_t j) {
  LinearForm form;
  form.coefficients[j] = -1;
  return form;
}

}  // namespace levelscope::detail
