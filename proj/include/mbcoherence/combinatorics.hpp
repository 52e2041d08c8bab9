#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace mbc {

/// A permutation of {0..k-1} in one-line notation: perm[i] is the image of i.
using Permutation = std::vector<int>;

/// Non-increasing integer partition of k describing the cycle lengths of a permutation.
struct CycleType {
  std::vector<int> parts;

  int order() const { return std::accumulate(parts.begin(), parts.end(), 0); }
  int cycles() const { return static_cast<int>(parts.size()); }

  friend bool operator==(const CycleType&, const CycleType&) = default;
  friend auto operator<=>(const CycleType&, const CycleType&) = default;
};

/// Blocks are sorted internally and ordered by their smallest element.
struct SetPartition {
  std::vector<std::vector<int>> blocks;

  std::size_t size() const { return blocks.size(); }
  friend bool operator==(const SetPartition&, const SetPartition&) = default;
};

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// n!/(n-k)!
inline double falling_factorial(int n, int k) {
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= (n - i);
  return f;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

inline Permutation identity_permutation(int k) {
  Permutation p(k);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

/// All k! permutations in lexicographic order; the identity comes first.
inline std::vector<Permutation> all_permutations(int k) {
  std::vector<Permutation> out;
  Permutation p = identity_permutation(k);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline Permutation inverse(const Permutation& p) {
  Permutation inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<int>(i);
  return inv;
}

/// (a∘b)(i) = a(b(i))
inline Permutation compose(const Permutation& a, const Permutation& b) {
  Permutation c(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) c[i] = a[b[i]];
  return c;
}

inline CycleType cycle_type(const Permutation& p) {
  std::vector<char> seen(p.size(), 0);
  CycleType ct;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (auto j = i; !seen[j]; j = static_cast<std::size_t>(p[j])) {
      seen[j] = 1;
      ++len;
    }
    ct.parts.push_back(len);
  }
  std::sort(ct.parts.begin(), ct.parts.end(), std::greater<>());
  return ct;
}

inline int count_cycles(const Permutation& p) { return cycle_type(p).cycles(); }

/// +1 for even, -1 for odd permutations.
inline int signature(const Permutation& p) {
  const auto ct = cycle_type(p);
  int transpositions = 0;
  for (int len : ct.parts) transpositions += len - 1;
  return transpositions % 2 == 0 ? 1 : -1;
}

/// Signature of the permutation sorting a tuple of distinct values.
template <typename T>
int sorting_signature(const std::vector<T>& values) {
  int inversions = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j)
      if (values[j] < values[i]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

/// Integer partitions of k, each non-increasing, in reverse lexicographic order
/// starting with {k}.
inline std::vector<CycleType> integer_partitions(int k) {
  std::vector<CycleType> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int remaining, int max_part) -> void {
    if (remaining == 0) {
      out.push_back(CycleType{cur});
      return;
    }
    for (int part = std::min(remaining, max_part); part >= 1; --part) {
      cur.push_back(part);
      self(self, remaining - part, part);
      cur.pop_back();
    }
  };
  rec(rec, k, k);
  return out;
}

inline std::uint64_t bell_number(int k) {
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i <= k; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

/// Every set partition of {0..k-1}, generated from restricted growth strings.
/// The first partition is the single block, the last is all singletons.
inline std::vector<SetPartition> enumerate_partitions(int k) {
  detail::require(k >= 1 && k <= 8, "enumerate_partitions: k must lie in [1, 8]");
  std::vector<SetPartition> out;
  std::vector<int> rgs(k, 0);
  auto emit = [&] {
    int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
    SetPartition sp;
    sp.blocks.resize(nblocks);
    for (int i = 0; i < k; ++i) sp.blocks[rgs[i]].push_back(i);
    out.push_back(std::move(sp));
  };
  auto rec = [&](auto&& self, int pos, int max_so_far) -> void {
    if (pos == k) {
      emit();
      return;
    }
    for (int b = 0; b <= max_so_far + 1; ++b) {
      rgs[pos] = b;
      self(self, pos + 1, std::max(max_so_far, b));
    }
  };
  rgs[0] = 0;
  rec(rec, 1, 0);
  return out;
}

/// Lexicographically ordered k-subsets of {0..n-1}.
inline std::vector<std::vector<int>> k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

}  // namespace mbc
