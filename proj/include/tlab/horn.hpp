#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "tlab/errors.hpp"
#include "tlab/matrix.hpp"

namespace tlab {

// Generation is exponential in n; callers must raise the cap explicitly.
inline constexpr int kHornCap = 8;

// Index-set triple (I, J, K) with entries in {1..n}, each strictly
// increasing of length r, satisfying sum(I) + sum(J) = r(r+1)/2 + sum(K).
struct HornTriple {
  std::vector<int> I, J, K;
  int n = 0;
  int r = 0;
};

inline bool operator==(const HornTriple& a, const HornTriple& b) {
  return a.n == b.n && a.r == b.r && a.I == b.I && a.J == b.J && a.K == b.K;
}

inline bool operator<(const HornTriple& a, const HornTriple& b) {
  if (a.I != b.I) return a.I < b.I;
  if (a.J != b.J) return a.J < b.J;
  return a.K < b.K;
}

struct HornViolation {
  HornTriple triple;
  double slack = 0.0;
};

// Outcome of a spectrum-triple check: trace_gap = sum(gamma) - sum(alpha)
// - sum(beta); violations hold every inequality with slack < -tol.
struct HornCertificate {
  bool feasible = false;
  double trace_gap = 0.0;
  std::vector<HornViolation> violations;
  std::size_t checked_count = 0;
};

namespace detail {

// All r-subsets of {1..n} in lexicographic order.
inline std::vector<std::vector<int>> r_subsets(int n, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) cur[static_cast<std::size_t>(j)] = j + 1;
  while (true) {
    out.push_back(cur);
    int j = r - 1;
    while (j >= 0 && cur[static_cast<std::size_t>(j)] == n - (r - 1 - j)) --j;
    if (j < 0) break;
    ++cur[static_cast<std::size_t>(j)];
    for (int t = j + 1; t < r; ++t)
      cur[static_cast<std::size_t>(t)] = cur[static_cast<std::size_t>(t - 1)] + 1;
  }
  return out;
}

inline int index_sum(const std::vector<int>& v) {
  int s = 0;
  for (int x : v) s += x;
  return s;
}

inline void require_horn_range(int n, int r, int cap) {
  if (n < 1 || r < 1 || r > n)
    throw InvalidArgument("horn: need 1 <= r <= n, got n=" + std::to_string(n) +
                          ", r=" + std::to_string(r));
  if (n > cap)
    throw InvalidArgument("horn: n=" + std::to_string(n) +
                          " exceeds the generation cap " + std::to_string(cap));
}

}  // namespace detail

// Candidate triples: all (I, J, K) with the defining index-sum identity,
// ordered lexicographically on (I, J, K).
inline std::vector<HornTriple> gen_U(int n, int r, int cap = kHornCap) {
  detail::require_horn_range(n, r, cap);
  const auto subs = detail::r_subsets(n, r);
  // Bucket K candidates by element sum; buckets stay in lexicographic order.
  std::map<int, std::vector<const std::vector<int>*>> by_sum;
  for (const auto& s : subs) by_sum[detail::index_sum(s)].push_back(&s);
  const int base = r * (r + 1) / 2;
  std::vector<HornTriple> out;
  for (const auto& I : subs) {
    for (const auto& J : subs) {
      const auto it = by_sum.find(detail::index_sum(I) + detail::index_sum(J) - base);
      if (it == by_sum.end()) continue;
      for (const auto* K : it->second) out.push_back(HornTriple{I, J, *K, n, r});
    }
  }
  return out;
}

// Recursive filter: keep candidates that pass, for every p < r and every
// (F, G, H) in the level-(r, p) table, the test
//   sum_{f in F} I[f] + sum_{g in G} J[g] <= p(p+1)/2 + sum_{h in H} K[h]
// with 1-based positional indexing into the candidate's lists.
// Memoized over (n, r); the memo is shared-read, single-writer-per-key.
inline const std::vector<HornTriple>& gen_T(int n, int r, int cap = kHornCap) {
  detail::require_horn_range(n, r, cap);
  using Key = std::pair<int, int>;
  static std::map<Key, std::shared_ptr<const std::vector<HornTriple>>> memo;
  static std::shared_mutex memo_mutex;

  const Key key{n, r};
  {
    std::shared_lock lock(memo_mutex);
    const auto it = memo.find(key);
    if (it != memo.end()) return *it->second;
  }

  auto result = std::make_shared<std::vector<HornTriple>>();
  if (r == 1) {
    *result = gen_U(n, 1, cap);
  } else {
    std::vector<const std::vector<HornTriple>*> filters(static_cast<std::size_t>(r));
    for (int p = 1; p < r; ++p)
      filters[static_cast<std::size_t>(p)] = &gen_T(r, p, cap);
    for (auto& cand : gen_U(n, r, cap)) {
      bool pass = true;
      for (int p = 1; p < r && pass; ++p) {
        const int base = p * (p + 1) / 2;
        for (const auto& fgh : *filters[static_cast<std::size_t>(p)]) {
          int lhs = 0;
          int rhs = base;
          for (int f : fgh.I) lhs += cand.I[static_cast<std::size_t>(f - 1)];
          for (int g : fgh.J) lhs += cand.J[static_cast<std::size_t>(g - 1)];
          for (int h : fgh.K) rhs += cand.K[static_cast<std::size_t>(h - 1)];
          if (lhs > rhs) {
            pass = false;
            break;
          }
        }
      }
      if (pass) result->push_back(std::move(cand));
    }
  }

  std::unique_lock lock(memo_mutex);
  const auto [it, inserted] = memo.emplace(key, std::move(result));
  return *it->second;
}

// Union of the filtered tables over r = 1..n. Redundant members (such as
// the full-set triple at r = n) are kept.
inline std::vector<HornTriple> gen_all(int n, int cap = kHornCap) {
  detail::require_horn_range(n, n, cap);
  std::vector<HornTriple> out;
  for (int r = 1; r <= n; ++r) {
    const auto& table = gen_T(n, r, cap);
    out.insert(out.end(), table.begin(), table.end());
  }
  return out;
}

// Decides the full system for (alpha, beta, gamma): trace identity within
// tol plus one inequality per generated triple, accepted when
// slack = sum_I alpha + sum_J beta - sum_K gamma >= -tol.
inline HornCertificate check_horn(const Spectrum& alpha, const Spectrum& beta,
                                  const Spectrum& gamma, double tol,
                                  int cap = kHornCap) {
  if (alpha.size() != beta.size() || alpha.size() != gamma.size())
    throw DimensionMismatch("check_horn: spectra have mismatched lengths");
  const int n = static_cast<int>(alpha.size());
  HornCertificate cert;
  cert.trace_gap = gamma.sum() - alpha.sum() - beta.sum();
  for (const auto& t : gen_all(n, cap)) {
    double lhs = 0.0;
    double rhs = 0.0;
    for (int i : t.I) lhs += alpha[static_cast<std::size_t>(i - 1)];
    for (int j : t.J) lhs += beta[static_cast<std::size_t>(j - 1)];
    for (int k : t.K) rhs += gamma[static_cast<std::size_t>(k - 1)];
    const double slack = lhs - rhs;
    ++cert.checked_count;
    if (slack < -tol) cert.violations.push_back(HornViolation{t, slack});
  }
  cert.feasible = std::abs(cert.trace_gap) <= tol && cert.violations.empty();
  return cert;
}

}  // namespace tlab
