#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "coherence.hpp"
#include "combinatorics.hpp"
#include "errors.hpp"
#include "states.hpp"
#include "unitary.hpp"

namespace mbc {

/// Reduced densities of one state for orders 1..max_order, shared read-only
/// between correlator evaluations under different unitaries.
class DensitySet {
public:
  DensitySet(const State& s, int max_order)
      : particles_(mbc::particles(s)), d_ext_(spaces(s).d_ext) {
    detail::require(max_order >= 1 && max_order <= particles_, "density order out of range");
    for (int k = 1; k <= max_order; ++k) rho_.push_back(reduced_density(s, k));
  }

  int particles() const { return particles_; }
  int d_ext() const { return d_ext_; }
  int max_order() const { return static_cast<int>(rho_.size()); }
  const ReducedDensity& order(int k) const { return rho_.at(static_cast<std::size_t>(k - 1)); }

private:
  int particles_;
  int d_ext_;
  std::vector<ReducedDensity> rho_;
};

namespace detail {

inline std::uint64_t mode_mask(const std::vector<int>& modes, int d_ext) {
  require(d_ext <= 64, "correlators support at most 64 external modes");
  std::uint64_t mask = 0;
  for (int p : modes) {
    require(p >= 0 && p < d_ext, "correlator mode out of range");
    const std::uint64_t bit = std::uint64_t{1} << p;
    require((mask & bit) == 0, "correlator modes must be distinct");
    mask |= bit;
  }
  return mask;
}

inline std::vector<int> mask_modes(std::uint64_t mask) {
  std::vector<int> out;
  for (int p = 0; mask != 0; ++p, mask >>= 1)
    if (mask & 1) out.push_back(p);
  return out;
}

inline const std::vector<SetPartition>& partitions_cached(int k) {
  static const auto table = [] {
    std::vector<std::vector<SetPartition>> t(9);
    for (int j = 1; j <= 8; ++j) t[j] = enumerate_partitions(j);
    return t;
  }();
  require(k >= 1 && k <= 8, "partition order out of range");
  return table[k];
}

}  // namespace detail

/// k-point density correlators of one state under one unitary, with memo
/// tables for raw and connected values keyed by the (unordered) mode subset.
/// Not thread-safe; use one engine per worker.
class CorrelatorEngine {
public:
  CorrelatorEngine(std::shared_ptr<const DensitySet> densities, ExternalUnitary u)
      : rho_(std::move(densities)), u_(std::move(u)) {
    detail::require(u_.dim() == rho_->d_ext(), "unitary dimension must equal d_ext");
  }

  CorrelatorEngine(const State& s, ExternalUnitary u, int max_order)
      : CorrelatorEngine(std::make_shared<const DensitySet>(s, max_order), std::move(u)) {}

  const ExternalUnitary& unitary() const { return u_; }
  const DensitySet& densities() const { return *rho_; }

  /// tr[ρ U† N_{p1} ... N_{pk} U] = Σ_{m,n} Π_i U_{p_i m_i} U*_{p_i n_i} <n|ρ^(k)|m> N!/(N-k)!
  double raw(const std::vector<int>& modes) { return raw_mask(detail::mode_mask(modes, rho_->d_ext())); }

  /// Joint cumulant: raw minus the products of lower-order cumulants over every
  /// non-trivial partition of the modes.
  double connected(const std::vector<int>& modes) {
    return connected_mask(detail::mode_mask(modes, rho_->d_ext()));
  }

  /// Σ over all partitions of the products of cumulants; reproduces raw().
  double raw_from_connected(const std::vector<int>& modes) {
    const auto sorted = detail::mask_modes(detail::mode_mask(modes, rho_->d_ext()));
    double total = 0.0;
    for (const auto& part : detail::partitions_cached(static_cast<int>(sorted.size())))
      total += product_over(part, sorted);
    return total;
  }

  /// Mean of the connected correlator over all C(d, k) mode subsets.
  double mode_average_connected(int k) {
    detail::require(k >= 1 && k <= rho_->d_ext(), "order exceeds number of external modes");
    const auto subsets = k_subsets(rho_->d_ext(), k);
    double sum = 0.0;
    for (const auto& s : subsets) sum += connected(s);
    return sum / static_cast<double>(subsets.size());
  }

private:
  double raw_mask(std::uint64_t mask) {
    if (auto it = raw_memo_.find(mask); it != raw_memo_.end()) return it->second;
    const auto modes = detail::mask_modes(mask);
    const int k = static_cast<int>(modes.size());
    // Fewer than k particles can never occupy k distinct modes.
    if (k > rho_->particles()) return raw_memo_[mask] = 0.0;
    detail::require(k <= rho_->max_order(), "correlator order exceeds precomputed densities");
    const ReducedDensity& rho = rho_->order(k);

    const int bs = rho.block_size();
    CVector amp(bs);
    complex total = 0.0;
    for (std::size_t b = 0; b < rho.block_count(); ++b) {
      for (int r = 0; r < bs; ++r) {
        const auto& tuple = rho.support()[b * bs + r];
        complex a = 1.0;
        for (int i = 0; i < k; ++i) a *= u_(modes[i], tuple[i]);
        amp(r) = a;
      }
      total += amp.dot(rho.block(b) * amp);
    }
    total *= falling_factorial(rho_->particles(), k);
    if (std::abs(total.imag()) > 1e-9) throw NumericalError("correlator has a non-negligible imaginary part");
    return raw_memo_[mask] = total.real();
  }

  double connected_mask(std::uint64_t mask) {
    if (auto it = conn_memo_.find(mask); it != conn_memo_.end()) return it->second;
    const auto modes = detail::mask_modes(mask);
    double value = raw_mask(mask);
    const auto& parts = detail::partitions_cached(static_cast<int>(modes.size()));
    // parts[0] is the single block.
    for (std::size_t i = 1; i < parts.size(); ++i) value -= product_over(parts[i], modes);
    return conn_memo_[mask] = value;
  }

  double product_over(const SetPartition& part, const std::vector<int>& modes) {
    double prod = 1.0;
    for (const auto& block : part.blocks) {
      std::uint64_t sub = 0;
      for (int i : block) sub |= std::uint64_t{1} << modes[i];
      prod *= connected_mask(sub);
    }
    return prod;
  }

  std::shared_ptr<const DensitySet> rho_;
  ExternalUnitary u_;
  std::unordered_map<std::uint64_t, double> raw_memo_;
  std::unordered_map<std::uint64_t, double> conn_memo_;
};

namespace detail {

inline CorrelatorEngine engine_for(const State& s, const ExternalUnitary& u, int k) {
  require(k >= 1 && k <= spaces(s).d_ext, "correlator order must lie in [1, d]");
  return CorrelatorEngine(s, u, std::min(k, particles(s)));
}

}  // namespace detail

/// Orders above the particle number give zero raw correlators.
inline double raw_correlator(const State& s, const ExternalUnitary& u, const std::vector<int>& modes) {
  return detail::engine_for(s, u, static_cast<int>(modes.size())).raw(modes);
}

inline double connected_correlator(const State& s, const ExternalUnitary& u, const std::vector<int>& modes) {
  return detail::engine_for(s, u, static_cast<int>(modes.size())).connected(modes);
}

inline double mode_average_connected(const State& s, const ExternalUnitary& u, int k) {
  return detail::engine_for(s, u, k).mode_average_connected(k);
}

}  // namespace mbc
