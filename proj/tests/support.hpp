#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "mbcoherence.hpp"

namespace testing_support {

using namespace mbc;

inline CVector random_vector(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(dim);
  for (int a = 0; a < dim; ++a) v(a) = complex(g(rng), g(rng));
  return v;
}

/// N particles on a random subset of d_ext modes with Gaussian internal states.
inline SeparableState random_separable(Statistics st, int n, int d_ext, int d_int, std::mt19937_64& rng) {
  std::vector<int> all(d_ext);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<int> modes(all.begin(), all.begin() + n);
  std::vector<InternalVector> internal;
  for (int i = 0; i < n; ++i) internal.emplace_back(random_vector(d_int, rng));
  return make_separable(st, {d_ext, d_int}, modes, std::move(internal));
}

/// Random superposition of `terms` label lists on modes 0..N-1.
inline SuperpositionState random_superposition(Statistics st, int n, int d_ext, int d_int, int terms,
                                               std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> label(0, d_int - 1);
  std::vector<int> modes(n);
  std::iota(modes.begin(), modes.end(), 0);
  std::vector<SuperpositionTerm> ts;
  for (int t = 0; t < terms; ++t) {
    std::vector<int> labels(n);
    for (auto& l : labels) l = label(rng);
    ts.push_back({complex(g(rng), g(rng)), labels});
  }
  return make_superposition(st, {d_ext, d_int}, modes, std::move(ts));
}

/// Internal vectors all equal to e_0 (indistinguishable) or e_i (distinguishable).
inline SeparableState basis_state(Statistics st, int n, int d_ext, bool distinguishable) {
  std::vector<int> modes(n);
  std::iota(modes.begin(), modes.end(), 0);
  std::vector<InternalVector> internal;
  for (int i = 0; i < n; ++i) internal.push_back(InternalVector::basis(n, distinguishable ? i : 0));
  return make_separable(st, {d_ext, n}, modes, std::move(internal));
}

/// Every permutation summed explicitly: the textbook permanent.
inline complex brute_permanent(const CMatrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  complex total = 0.0;
  do {
    complex prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= a(i, p[i]);
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

/// W^(k) from reduced-density entries assembled with the ladder-operator oracle:
/// (N-k)!/N! Σ_{m,n,α} <ψ|a†_{mα} a_{nα}|ψ> over ordered tuples of distinct occupied modes.
inline double oracle_coherence(const State& s, int k) {
  const auto fock = fock::to_fock(s);
  const auto& occ = occupied_modes(s);
  const int d_int = spaces(s).d_int;
  std::vector<std::vector<int>> tuples;
  for (const auto& subset : k_subsets(static_cast<int>(occ.size()), k)) {
    std::vector<int> modes;
    for (int i : subset) modes.push_back(occ[i]);
    do tuples.push_back(modes);
    while (std::next_permutation(modes.begin(), modes.end()));
  }
  std::vector<std::vector<int>> labels;
  std::vector<int> alpha(k, 0);
  while (true) {
    labels.push_back(alpha);
    int i = k - 1;
    while (i >= 0 && ++alpha[i] == d_int) alpha[i--] = 0;
    if (i < 0) break;
  }
  complex total = 0.0;
  for (const auto& m : tuples)
    for (const auto& n : tuples)
      for (const auto& a : labels) total += fock::matrix_element(fock, m, n, a);
  const int np = static_cast<int>(occ.size());
  return (total / falling_factorial(np, k)).real();
}

}  // namespace testing_support
