#pragma once

#include <cstdint>
#include <vector>

#include "errors.hpp"
#include "exact.hpp"
#include "neighborhood.hpp"
#include "rate_function.hpp"
#include "systems.hpp"

namespace limsup {

template <class T>
struct Witness {
  std::vector<std::int64_t> q;
  std::vector<std::int64_t> p;
  T score{};  // max_i |A_i q - p_i| / rho_i
};

/// Minkowski's linear-forms condition prod rho * prod Phi >= 1, or
/// Dirichlet's d = h = 1 box rho (2 Phi + 1) >= 2.
template <class T>
bool minkowski_volume_ok(const std::vector<T>& rho, const std::vector<std::int64_t>& Phi) {
  T vol(1);
  for (const auto& r : rho) vol *= r;
  T lin = vol;
  for (auto P : Phi) lin *= T(P);
  if (!(lin < 1)) return true;
  if (rho.size() == 1 && Phi.size() == 1) return !(T(vol * T(2 * Phi[0] + 1)) < 2);
  return false;
}

/// Exhaustive scan of q in prod [-Phi_k, Phi_k] (first nonzero entry
/// positive), p_i = nearest integer to A_i.q.  Returns the solution with the
/// smallest normalised residual; ties go to smaller max|q|, then to the
/// lexicographically first q.
template <class T>
Witness<T> minkowski_witness(const std::vector<std::vector<T>>& A, const std::vector<std::int64_t>& Phi,
                             const std::vector<T>& rho, std::uint64_t cap = 50'000'000) {
  const std::size_t d = A.size(), h = Phi.size();
  std::vector<std::string> bad;
  if (d == 0 || h == 0) bad.push_back("minkowski_witness: empty matrix");
  if (rho.size() != d) bad.push_back("minkowski_witness: need one radius per row");
  for (const auto& row : A) {
    if (row.size() != h) bad.push_back("minkowski_witness: row length must equal h");
    for (const auto& a : row)
      if (a < 0 || a > 1) bad.push_back("minkowski_witness: entries must lie in [0,1]");
  }
  for (auto P : Phi)
    if (P < 1) bad.push_back("minkowski_witness: Phi_k(u) must be >= 1");
  for (const auto& r : rho)
    if (!(r > 0)) bad.push_back("minkowski_witness: radii must be positive");
  if (!bad.empty()) throw ValidationError(std::move(bad));
  if (!minkowski_volume_ok(rho, Phi))
    throw ValidationError("minkowski_witness: volume condition prod rho * prod Phi >= 1 fails");
  long double box = 1;
  for (auto P : Phi) box *= static_cast<long double>(2 * P + 1);
  if (box > static_cast<long double>(cap))
    throw SizeError("minkowski_witness: q-box exceeds the cap", static_cast<std::uint64_t>(box));

  Witness<T> best;
  bool found = false;
  std::int64_t best_max = 0;
  std::vector<std::int64_t> q(h);
  for (std::size_t k = 0; k < h; ++k) q[k] = -Phi[k];
  std::vector<std::int64_t> p(d);
  while (true) {
    std::size_t first = 0;
    while (first < h && q[first] == 0) ++first;
    if (first < h && q[first] > 0) {
      T score(0);
      for (std::size_t i = 0; i < d; ++i) {
        T v(0);
        for (std::size_t k = 0; k < h; ++k) v += A[i][k] * T(q[k]);
        p[i] = nearest_integer(v);
        T r = T(abs_of(T(v - T(p[i]))) / rho[i]);
        if (score < r) score = r;
      }
      std::int64_t mx = 0;
      for (auto v : q) mx = std::max(mx, v < 0 ? -v : v);
      if (!found || score < best.score || (score == best.score && mx < best_max)) {
        best = {q, p, score};
        best_max = mx;
        found = true;
      }
    }
    std::size_t k = h;
    while (k > 0) {
      --k;
      if (++q[k] <= Phi[k]) break;
      q[k] = -Phi[k];
      if (k == 0) {
        k = h + 1;
        break;
      }
    }
    if (k == h + 1) break;
  }
  if (found && best.score < 1) return best;
  // q = 0 with p = e_1 only works when rho_1 > 1 and Minkowski allows it.
  if (rho[0] > 1) {
    Witness<T> w{std::vector<std::int64_t>(h, 0), std::vector<std::int64_t>(d, 0), T(0)};
    w.p[0] = 1;
    bool ok = true;
    for (std::size_t i = 1; i < d; ++i) ok = ok && rho[i] > 0;
    if (ok) {
      w.score = T(1 / rho[0]);
      return w;
    }
  }
  throw InternalError("minkowski_witness: no solution although the volume condition holds");
}

/// Both inequality systems, evaluated in T.
template <class T>
bool verify_witness(const std::vector<std::vector<T>>& A, const std::vector<std::int64_t>& Phi,
                    const std::vector<T>& rho, const Witness<T>& w) {
  bool nonzero = false;
  for (auto v : w.q) nonzero = nonzero || v != 0;
  for (auto v : w.p) nonzero = nonzero || v != 0;
  if (!nonzero) return false;
  for (std::size_t k = 0; k < Phi.size(); ++k)
    if ((w.q[k] < 0 ? -w.q[k] : w.q[k]) > Phi[k]) return false;
  for (std::size_t i = 0; i < A.size(); ++i) {
    T v(0);
    for (std::size_t k = 0; k < Phi.size(); ++k) v += A[i][k] * T(w.q[k]);
    if (!(abs_of(T(v - T(w.p[i]))) < rho[i])) return false;
  }
  return true;
}

/// Witness as an element of J: Phi_k evaluated at u, beta from the family.
template <class T>
ResonantItem minkowski_item(const std::vector<std::vector<T>>& A, long u, const LinearFormsFamily& lf,
                            const std::vector<T>& rho) {
  std::vector<std::int64_t> Phi;
  for (const auto& P : lf.Phi) Phi.push_back(P.integer_at(u));
  Witness<T> w = minkowski_witness(A, Phi, rho);
  ResonantItem it;
  it.index = w.q;
  it.index.insert(it.index.end(), w.p.begin(), w.p.end());
  for (auto pi : w.p) it.geometry.push_back(AffineGeometry{w.q, pi});
  it.weight = beta(it, Family(lf));
  return it;
}

}  // namespace limsup
