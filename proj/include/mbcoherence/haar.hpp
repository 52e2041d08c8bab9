#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "coherence.hpp"
#include "combinatorics.hpp"
#include "correlators.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "states.hpp"
#include "unitary.hpp"

namespace mbc {

/// splitmix64 step; used to derive independent per-item seeds from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
/// diag(R) moved into Q.
template <typename Rng>
ExternalUnitary sample_haar(int d, Rng& rng) {
  detail::require(d >= 1, "sample_haar: dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = complex(re, im);
    }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    const complex rjj = r(j, j);
    q.col(j) *= rjj / std::abs(rjj);
  }
  return ExternalUnitary(std::move(q));
}

/// Deterministic per seed.
inline ExternalUnitary sample_haar(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_haar(d, rng);
}

/// Weingarten function Wg_d on S_k, stored per cycle type.
class WeingartenTable {
public:
  WeingartenTable(int k, int d, std::map<CycleType, double> values)
      : k_(k), d_(d), values_(std::move(values)) {}

  int order() const { return k_; }
  int dim() const { return d_; }
  const std::map<CycleType, double>& values() const { return values_; }

  double operator()(const CycleType& c) const { return values_.at(c); }
  double operator()(const Permutation& p) const { return values_.at(cycle_type(p)); }

  /// max_σ |Σ_τ d^{cycles(σ τ⁻¹)} Wg(τ) - δ_{σ,id}| over all of S_k.
  double residual() const {
    const auto perms = all_permutations(k_);
    std::vector<double> wg;
    std::vector<Permutation> inverses;
    for (const auto& t : perms) {
      wg.push_back((*this)(t));
      inverses.push_back(inverse(t));
    }
    double worst = 0.0;
    for (std::size_t s = 0; s < perms.size(); ++s) {
      double sum = 0.0;
      for (std::size_t t = 0; t < perms.size(); ++t)
        sum += std::pow(static_cast<double>(d_), count_cycles(compose(perms[s], inverses[t]))) * wg[t];
      worst = std::max(worst, std::abs(sum - (s == 0 ? 1.0 : 0.0)));
    }
    return worst;
  }

private:
  int k_;
  int d_;
  std::map<CycleType, double> values_;
};

/// Solves the class-level system G w = e_id with
/// G(c_σ, c_τ) = Σ_{τ ∈ c_τ} d^{cycles(σ τ⁻¹)} for a representative σ of c_σ.
inline WeingartenTable compute_weingarten_table(int k, int d) {
  detail::require(k >= 1 && k <= 7, "Weingarten order must lie in [1, 7]");
  detail::require(d >= 1, "dimension must be positive");
  if (d < k) throw NumericalError("Weingarten system is singular for d < k");

  const auto classes = integer_partitions(k);
  std::map<CycleType, int> class_index;
  for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = static_cast<int>(i);

  const auto perms = all_permutations(k);
  std::vector<int> perm_class;
  std::vector<Permutation> representative(classes.size());
  std::vector<char> have(classes.size(), 0);
  for (const auto& p : perms) {
    const int c = class_index.at(cycle_type(p));
    perm_class.push_back(c);
    if (!have[c]) {
      representative[c] = p;
      have[c] = 1;
    }
  }

  const auto nc = static_cast<Eigen::Index>(classes.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nc, nc);
  for (Eigen::Index row = 0; row < nc; ++row)
    for (std::size_t t = 0; t < perms.size(); ++t) {
      const int cycles = count_cycles(compose(representative[row], inverse(perms[t])));
      g(row, perm_class[t]) += std::pow(static_cast<double>(d), cycles);
    }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
  rhs(class_index.at(cycle_type(identity_permutation(k)))) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  if (!lu.isInvertible()) throw NumericalError("Weingarten system is singular");
  const Eigen::VectorXd w = lu.solve(rhs);

  std::map<CycleType, double> values;
  for (std::size_t i = 0; i < classes.size(); ++i) values[classes[i]] = w(static_cast<Eigen::Index>(i));
  return WeingartenTable(k, d, std::move(values));
}

/// Cached, shared table for (k, d).
inline std::shared_ptr<const WeingartenTable> weingarten_table(int k, int d) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const WeingartenTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{k, d}];
  if (!slot) slot = std::make_shared<const WeingartenTable>(compute_weingarten_table(k, d));
  return slot;
}

/// Haar average of the raw k-point correlator on any k distinct output modes:
/// Σ_{n,m} Wg_d(π) <n|ρ^(k)|m> N!/(N-k)!, with n_i = m_{π(i)}.
inline double haar_avg_raw(const ReducedDensity& rho, const WeingartenTable& wg) {
  detail::require(wg.order() == rho.order(), "Weingarten order mismatch");
  const auto& perms = rho.block_permutations();
  std::vector<Permutation> inv;
  for (const auto& p : perms) inv.push_back(inverse(p));
  const int bs = rho.block_size();
  std::vector<double> weight(static_cast<std::size_t>(bs) * bs);
  for (int r = 0; r < bs; ++r)
    for (int c = 0; c < bs; ++c) weight[static_cast<std::size_t>(r) * bs + c] = wg(compose(inv[c], perms[r]));

  complex total = 0.0;
  for (std::size_t b = 0; b < rho.block_count(); ++b) {
    const CMatrix& blk = rho.block(b);
    for (int r = 0; r < bs; ++r)
      for (int c = 0; c < bs; ++c) total += weight[static_cast<std::size_t>(r) * bs + c] * blk(r, c);
  }
  total *= falling_factorial(rho.particles(), rho.order());
  if (std::abs(total.imag()) > 1e-9) throw NumericalError("Haar-averaged correlator is not real");
  return total.real();
}

inline double haar_avg_raw(const State& s, int k) {
  detail::require(k >= 1 && k <= particles(s), "order must lie in [1, N]");
  detail::require(k <= spaces(s).d_ext, "order must not exceed d_ext");
  return haar_avg_raw(reduced_density(s, k), *weingarten_table(k, spaces(s).d_ext));
}

namespace detail {

/// One nonvanishing pattern in the Haar average of a product of raw correlators.
/// `kernel[i]` labels which positions of the mode multi-index m coincide;
/// the partition fixes which raw correlators are multiplied; the permutation is
/// the Weingarten pairing n_i = m_{π(i)}.
struct CumulantPattern {
  int distinct_values = 0;
  double coefficient = 0.0;  // Möbius weight of the partition
  CycleType pairing;
  // Per partition block: kernel labels for m_B and for n_B.
  std::vector<std::pair<std::vector<int>, std::vector<int>>> blocks;
};

/// All (kernel, partition, pairing) triples that can contribute to the Haar
/// average of the k-th joint cumulant. Depends on k only.
inline const std::vector<CumulantPattern>& cumulant_patterns(int k) {
  static std::mutex mutex;
  static std::map<int, std::vector<CumulantPattern>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(k); it != cache.end()) return it->second;

  std::vector<CumulantPattern> out;
  const auto kernels = enumerate_partitions(k);
  const auto partitions = enumerate_partitions(k);
  const auto perms = all_permutations(k);
  for (const auto& kernel : kernels) {
    std::vector<int> label(k);
    for (std::size_t b = 0; b < kernel.blocks.size(); ++b)
      for (int i : kernel.blocks[b]) label[i] = static_cast<int>(b);

    for (const auto& part : partitions) {
      // Each raw correlator needs distinct modes within its block.
      bool transversal = true;
      for (const auto& block : part.blocks) {
        std::vector<int> seen;
        for (int i : block) seen.push_back(label[i]);
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) transversal = false;
      }
      if (!transversal) continue;

      const auto nblocks = static_cast<int>(part.size());
      const double mobius = (nblocks % 2 == 1 ? 1.0 : -1.0) * factorial(nblocks - 1);

      for (const auto& pi : perms) {
        CumulantPattern pat;
        bool ok = true;
        for (const auto& block : part.blocks) {
          std::vector<int> m_labels, n_labels;
          for (int i : block) {
            m_labels.push_back(label[i]);
            n_labels.push_back(label[pi[i]]);
          }
          auto a = m_labels, b = n_labels;
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
          if (a != b) {
            ok = false;
            break;
          }
          pat.blocks.emplace_back(std::move(m_labels), std::move(n_labels));
        }
        if (!ok) continue;
        pat.distinct_values = static_cast<int>(kernel.blocks.size());
        pat.coefficient = mobius;
        pat.pairing = cycle_type(pi);
        out.push_back(std::move(pat));
      }
    }
  }
  return cache[k] = std::move(out);
}

}  // namespace detail

/// Exact Haar average of the connected k-point correlator. Every product of raw
/// correlators in the cumulant expansion is expanded into one monomial in the
/// entries of the shared unitary before averaging, so cross terms are kept.
/// Restricted to unit filling N = d.
inline double haar_avg_connected(const DensitySet& rho, int k) {
  const int n = rho.particles();
  const int d = rho.d_ext();
  detail::require(n == d, "analytic connected average requires N = d");
  detail::require(k >= 1 && k <= n && k <= 7, "order must lie in [1, min(N, 7)]");
  detail::require(rho.max_order() >= k, "densities missing for requested order");
  const auto wg = weingarten_table(k, d);
  const auto& occupied = rho.order(1).occupied();

  std::vector<double> scale(k + 1);
  for (int j = 1; j <= k; ++j) scale[j] = falling_factorial(n, j);

  // Group patterns by the number of distinct mode values they need.
  const auto& patterns = detail::cumulant_patterns(k);
  std::vector<std::vector<const detail::CumulantPattern*>> by_size(k + 1);
  for (const auto& p : patterns) by_size[p.distinct_values].push_back(&p);

  complex total = 0.0;
  std::vector<int> values;
  std::vector<int> m_tuple, n_tuple;
  for (int size = 1; size <= k; ++size) {
    if (by_size[size].empty() || size > n) continue;
    std::vector<double> weights;
    for (const auto* p : by_size[size]) weights.push_back(p->coefficient * (*wg)(p->pairing));

    // Injective assignments of occupied modes to the kernel labels.
    for (const auto& subset : k_subsets(n, size)) {
      std::vector<int> chosen;
      for (int i : subset) chosen.push_back(occupied[i]);
      do {
        for (std::size_t pi = 0; pi < by_size[size].size(); ++pi) {
          const auto* p = by_size[size][pi];
          complex prod = weights[pi];
          for (const auto& [ml, nl] : p->blocks) {
            m_tuple.clear();
            n_tuple.clear();
            for (int l : ml) m_tuple.push_back(chosen[l]);
            for (int l : nl) n_tuple.push_back(chosen[l]);
            const auto j = static_cast<int>(ml.size());
            prod *= scale[j] * rho.order(j).entry(n_tuple, m_tuple);
            if (prod == complex{0.0}) break;
          }
          total += prod;
        }
      } while (std::next_permutation(chosen.begin(), chosen.end()));
    }
  }
  if (std::abs(total.imag()) > 1e-9) throw NumericalError("Haar-averaged connected correlator is not real");
  return total.real();
}

inline double haar_avg_connected(const State& s, int k) {
  detail::require(particles(s) == spaces(s).d_ext, "analytic connected average requires N = d");
  detail::require(k >= 1 && k <= particles(s) && k <= 7, "order must lie in [1, min(N, 7)]");
  return haar_avg_connected(DensitySet(s, k), k);
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

namespace detail {

template <typename Eval>
MonteCarloEstimate mc_estimate(const DensitySet& densities, std::size_t samples, std::uint64_t seed, Eval eval) {
  require(samples >= 2, "Monte Carlo needs at least two samples");
  std::vector<double> values(samples);
  parallel_for(samples, [&](std::size_t i) {
    values[i] = eval(sample_haar(densities.d_ext(), derive_seed(seed, i)));
  });
  // Fixed summation order keeps the estimate independent of the thread count.
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(samples);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

inline std::vector<int> leading_modes(int k) {
  std::vector<int> modes(k);
  for (int i = 0; i < k; ++i) modes[i] = i;
  return modes;
}

}  // namespace detail

/// Sample mean and standard error of the connected correlator on modes 0..k-1
/// over seeded Haar unitaries. Sample i uses derive_seed(seed, i).
inline MonteCarloEstimate haar_mc_connected(std::shared_ptr<const DensitySet> densities, int k,
                                            std::size_t samples, std::uint64_t seed) {
  detail::require(k >= 1 && k <= densities->max_order() && k <= densities->d_ext(),
                  "order must lie in [1, min(N, d)]");
  const auto modes = detail::leading_modes(k);
  return detail::mc_estimate(*densities, samples, seed, [&](ExternalUnitary u) {
    return CorrelatorEngine(densities, std::move(u)).connected(modes);
  });
}

inline MonteCarloEstimate haar_mc_connected(const State& s, int k, std::size_t samples, std::uint64_t seed) {
  detail::require(k >= 1 && k <= particles(s), "order must lie in [1, N]");
  return haar_mc_connected(std::make_shared<const DensitySet>(s, k), k, samples, seed);
}

/// Same estimator for the raw correlator.
inline MonteCarloEstimate haar_mc_raw(const State& s, int k, std::size_t samples, std::uint64_t seed) {
  detail::require(k >= 1 && k <= particles(s) && k <= spaces(s).d_ext, "order must lie in [1, min(N, d)]");
  auto densities = std::make_shared<const DensitySet>(s, k);
  const auto modes = detail::leading_modes(k);
  return detail::mc_estimate(*densities, samples, seed, [&](ExternalUnitary u) {
    return CorrelatorEngine(densities, std::move(u)).raw(modes);
  });
}

}  // namespace mbc
