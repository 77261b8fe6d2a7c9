#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace limsup {

struct Fraction {
  std::int64_t a = 0, b = 1;
};

/// Consecutive Farey fractions a/b <= y < c/d of order N (y in [0,1)),
/// by Stern-Brocot descent with batched steps.
inline std::pair<Fraction, Fraction> farey_bracket(double y, std::int64_t N) {
  std::int64_t a = 0, b = 1, c = 1, d = 1;
  if (y < 0) y = 0;
  if (y >= 1) return {{1, 1}, {1, 1}};
  const long double Y = y;
  while (b + d <= N) {
    if ((a + c) <= Y * (b + d)) {
      // advance the left end: largest k with (a + k c) <= Y (b + k d)
      long double den = c - Y * d;
      std::int64_t k = den > 0 ? static_cast<std::int64_t>(std::floor((Y * b - a) / den)) : N;
      k = std::min<std::int64_t>(k, (N - b) / d);
      if (k < 1) k = 1;
      while (k > 1 && (a + k * c) > Y * (b + k * d)) --k;
      a += k * c;
      b += k * d;
    } else {
      // advance the right end: largest k with (c + k a) > Y (d + k b)
      long double den = Y * b - a;
      std::int64_t k = den > 0 ? static_cast<std::int64_t>(std::ceil((c - Y * d) / den)) - 1 : N;
      k = std::min<std::int64_t>(k, (N - d) / b);
      if (k < 1) k = 1;
      while (k > 1 && (c + k * a) <= Y * (d + k * b)) --k;
      c += k * a;
      d += k * b;
    }
  }
  return {{a, b}, {c, d}};
}

/// Calls f(a, b) for every reduced a/b in [lo, hi] with b <= N, ascending,
/// until f returns true.
template <class F>
void for_each_farey_in(double lo, double hi, std::int64_t N, F&& f) {
  if (hi < lo) return;
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  auto [l, r] = farey_bracket(lo, N);
  Fraction cur = l, nxt = r;
  if (static_cast<long double>(cur.a) < static_cast<long double>(lo) * cur.b) {
    if (cur.a == 1 && cur.b == 1) return;
    cur = nxt;
    std::int64_t k = (N + l.b) / cur.b;
    nxt = {k * cur.a - l.a, k * cur.b - l.b};
  }
  while (static_cast<long double>(cur.a) <= static_cast<long double>(hi) * cur.b) {
    if (f(cur.a, cur.b) || cur.a == cur.b) break;
    std::int64_t k = (N + cur.b) / nxt.b;
    Fraction n2{k * nxt.a - cur.a, k * nxt.b - cur.b};
    cur = nxt;
    nxt = n2;
  }
}

}  // namespace limsup
