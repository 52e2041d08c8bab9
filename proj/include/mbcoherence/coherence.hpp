#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include <Eigen/Eigenvalues>

#include "combinatorics.hpp"
#include "errors.hpp"
#include "fock_algebra.hpp"
#include "linalg.hpp"
#include "states.hpp"

namespace mbc {

/// External k-particle reduced density matrix <n|ρ_ext^(k)|m>, restricted to
/// ordered k-tuples of distinct occupied modes. Entries between tuples over
/// different mode sets vanish, so the matrix is stored as one k!×k! block per
/// k-subset of occupied modes. Tuples are numbered subset-major; inside a block
/// they follow the lexicographic order of the permutations of the sorted subset.
class ReducedDensity {
public:
  ReducedDensity(int order, int d_ext, std::vector<int> occupied)
      : k_(order), d_ext_(d_ext), occupied_(std::move(occupied)) {
    const int n = static_cast<int>(occupied_.size());
    detail::require(k_ >= 1 && k_ <= n, "reduced density order out of range");
    perms_ = all_permutations(k_);
    const double codes = std::pow(static_cast<double>(d_ext_), k_);
    if (codes <= kDenseIndexLimit) dense_index_.assign(static_cast<std::size_t>(codes), -1);
    for (const auto& subset : k_subsets(n, k_)) {
      std::vector<int> modes;
      for (int i : subset) modes.push_back(occupied_[i]);
      const int block = static_cast<int>(sets_.size());
      sets_.push_back(modes);
      for (const auto& p : perms_) {
        std::vector<int> tuple(k_);
        for (int i = 0; i < k_; ++i) tuple[i] = modes[p[i]];
        if (!dense_index_.empty()) dense_index_[code(tuple)] = static_cast<int>(support_.size());
        else index_.emplace(code(tuple), static_cast<int>(support_.size()));
        support_.push_back(std::move(tuple));
        block_of_.push_back(block);
      }
      blocks_.push_back(CMatrix::Zero(block_size(), block_size()));
    }
  }

  int order() const { return k_; }
  int particles() const { return static_cast<int>(occupied_.size()); }
  int d_ext() const { return d_ext_; }
  const std::vector<int>& occupied() const { return occupied_; }
  const std::vector<std::vector<int>>& support() const { return support_; }
  std::size_t dim() const { return support_.size(); }

  int block_size() const { return static_cast<int>(perms_.size()); }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<int>& block_modes(std::size_t b) const { return sets_[b]; }
  const CMatrix& block(std::size_t b) const { return blocks_[b]; }
  CMatrix& block(std::size_t b) { return blocks_[b]; }
  const std::vector<Permutation>& block_permutations() const { return perms_; }

  /// Support index of an ordered tuple, or -1 when it lies outside the support.
  int index_of(const std::vector<int>& tuple) const {
    if (static_cast<int>(tuple.size()) != k_) return -1;
    for (int m : tuple)
      if (m < 0 || m >= d_ext_) return -1;
    if (!dense_index_.empty()) return dense_index_[code(tuple)];
    const auto it = index_.find(code(tuple));
    return it == index_.end() ? -1 : it->second;
  }

  /// <support[row]| ρ |support[col]>
  complex entry(std::size_t row, std::size_t col) const {
    const int b = block_of_[row];
    if (b != block_of_[col]) return 0.0;
    const auto bs = static_cast<std::size_t>(block_size());
    return blocks_[b](static_cast<Eigen::Index>(row % bs), static_cast<Eigen::Index>(col % bs));
  }

  complex entry(const std::vector<int>& n, const std::vector<int>& m) const {
    const int r = index_of(n), c = index_of(m);
    return (r < 0 || c < 0) ? complex{0.0} : entry(r, c);
  }

  CMatrix dense() const {
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    const int bs = block_size();
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      out.block(static_cast<Eigen::Index>(b) * bs, static_cast<Eigen::Index>(b) * bs, bs, bs) = blocks_[b];
    return out;
  }

  complex trace() const {
    complex t = 0.0;
    for (const auto& b : blocks_) t += b.trace();
    return t;
  }

  /// Sum of every matrix element.
  complex total() const {
    complex t = 0.0;
    for (const auto& b : blocks_) t += b.sum();
    return t;
  }

private:
  static constexpr double kDenseIndexLimit = 1 << 20;

  std::uint64_t code(const std::vector<int>& tuple) const {
    std::uint64_t c = 0;
    for (int m : tuple) c = c * static_cast<std::uint64_t>(d_ext_) + static_cast<std::uint64_t>(m);
    return c;
  }

  int k_;
  int d_ext_;
  std::vector<int> occupied_;
  std::vector<Permutation> perms_;
  std::vector<std::vector<int>> sets_;
  std::vector<std::vector<int>> support_;
  std::vector<int> block_of_;
  std::vector<CMatrix> blocks_;
  std::vector<int> dense_index_;
  std::unordered_map<std::uint64_t, int> index_;
};

struct DensityDiagnostics {
  double hermiticity_defect = 0.0;  // max |ρ - ρ†|
  double trace_defect = 0.0;        // |tr ρ - 1|
  double min_eigenvalue = 0.0;
};

inline DensityDiagnostics diagnose(const ReducedDensity& rho) {
  DensityDiagnostics d;
  d.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < rho.block_count(); ++b) {
    const CMatrix& m = rho.block(b);
    d.hermiticity_defect = std::max(d.hermiticity_defect, (m - m.adjoint()).cwiseAbs().maxCoeff());
    const CMatrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = std::min(d.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  d.trace_defect = std::abs(rho.trace() - 1.0);
  return d;
}

/// Throws NumericalError unless ρ is Hermitian (1e-12), unit trace (1e-12) and PSD (-1e-10).
inline void check_density(const ReducedDensity& rho) {
  const auto d = diagnose(rho);
  if (d.hermiticity_defect > 1e-12) throw NumericalError("reduced density is not Hermitian");
  if (d.trace_defect > 1e-12) throw NumericalError("reduced density does not have unit trace");
  if (d.min_eigenvalue < -1e-10) throw NumericalError("reduced density is not positive semidefinite");
}

/// Entries (N-k)!/N! sgn(π) Π_i <φ_{m_i}|φ_{n_i}> for m a permutation π of n.
inline ReducedDensity reduced_density(const SeparableState& s, int k) {
  detail::require(k >= 1 && k <= s.particles(), "reduced density order out of range");
  ReducedDensity rho(k, s.spaces().d_ext, s.modes());
  const CMatrix g = s.gram();
  const double norm = 1.0 / falling_factorial(s.particles(), k);
  const auto& perms = rho.block_permutations();
  const bool fermion = s.statistics() == Statistics::Fermion;
  std::vector<int> sig;
  for (const auto& p : perms) sig.push_back(signature(p));

  std::size_t b = 0;
  for (const auto& subset : k_subsets(s.particles(), k)) {
    CMatrix& blk = rho.block(b++);
    for (std::size_t r = 0; r < perms.size(); ++r) {
      for (std::size_t c = 0; c < perms.size(); ++c) {
        complex prod = norm;
        for (int i = 0; i < k; ++i) prod *= g(subset[perms[c][i]], subset[perms[r][i]]);
        if (fermion && sig[r] * sig[c] < 0) prod = -prod;
        blk(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = prod;
      }
    }
  }
  return rho;
}

/// Entries (N-k)!/N! Σ_α <ψ|a†_{mα} a_{nα}|ψ>, evaluated with the ladder-operator algebra.
inline ReducedDensity reduced_density(const SuperpositionState& s, int k) {
  detail::require(k >= 1 && k <= s.particles(), "reduced density order out of range");
  ReducedDensity rho(k, s.spaces().d_ext, s.modes());
  const auto psi = fock::to_fock(s);
  const double norm = 1.0 / falling_factorial(s.particles(), k);

  std::vector<int> position(s.spaces().d_ext, -1);
  for (int i = 0; i < s.particles(); ++i) position[s.modes()[i]] = i;

  // Only label tuples present in some term survive the annihilators.
  struct Reduced {
    std::vector<int> alpha;
    fock::FockState state;
  };
  const int bs = rho.block_size();
  for (std::size_t b = 0; b < rho.block_count(); ++b) {
    std::vector<std::vector<Reduced>> reduced(bs);
    for (int r = 0; r < bs; ++r) {
      const auto& tuple = rho.support()[b * bs + r];
      std::vector<std::vector<int>> alphas;
      for (const auto& t : s.terms()) {
        std::vector<int> a;
        for (int m : tuple) a.push_back(t.labels[position[m]]);
        if (std::find(alphas.begin(), alphas.end(), a) == alphas.end()) alphas.push_back(a);
      }
      for (auto& a : alphas) {
        auto phi = fock::annihilate_tuple(psi, tuple, a);
        if (!phi.is_zero()) reduced[r].push_back({std::move(a), std::move(phi)});
      }
    }
    CMatrix& blk = rho.block(b);
    for (int r = 0; r < bs; ++r)
      for (int c = 0; c < bs; ++c) {
        complex sum = 0.0;
        for (const auto& rm : reduced[c])
          for (const auto& rn : reduced[r])
            if (rm.alpha == rn.alpha) sum += fock::inner(rm.state, rn.state);
        blk(r, c) = norm * sum;
      }
  }
  return rho;
}

inline ReducedDensity reduced_density(const State& s, int k) {
  return std::visit([k](const auto& x) { return reduced_density(x, k); }, s);
}

/// Traces out the last tensor factor: ρ^(k-1)(n',m') = Σ_x ρ^(k)((n',x),(m',x)).
inline ReducedDensity partial_trace_last(const ReducedDensity& rho) {
  detail::require(rho.order() >= 2, "partial trace needs order >= 2");
  ReducedDensity out(rho.order() - 1, rho.d_ext(), rho.occupied());
  const int bs = out.block_size();
  for (std::size_t b = 0; b < out.block_count(); ++b) {
    const auto& set = out.block_modes(b);
    CMatrix& blk = out.block(b);
    for (int r = 0; r < bs; ++r)
      for (int c = 0; c < bs; ++c) {
        auto n = out.support()[b * bs + r];
        auto m = out.support()[b * bs + c];
        complex sum = 0.0;
        for (int x : rho.occupied()) {
          if (std::find(set.begin(), set.end(), x) != set.end()) continue;
          n.push_back(x);
          m.push_back(x);
          sum += rho.entry(n, m);
          n.pop_back();
          m.pop_back();
        }
        blk(r, c) = sum;
      }
  }
  return out;
}

namespace detail {

inline double checked_coherence(complex w) {
  if (std::abs(w.imag()) > 1e-10) throw NumericalError("mean coherence has an imaginary part");
  if (w.real() < -1e-10) throw NumericalError("mean coherence is negative");
  return w.real();
}

}  // namespace detail

/// W^(k) for a separable state as the direct multi-index sum over all pairs of
/// orderings of every k-subset; does not materialize ρ^(k).
inline double mean_coherence(const SeparableState& s, int k) {
  detail::require(k >= 1 && k <= s.particles(), "coherence order out of range");
  const CMatrix g = s.gram();
  const auto perms = all_permutations(k);
  const bool fermion = s.statistics() == Statistics::Fermion;
  std::vector<int> sig;
  for (const auto& p : perms) sig.push_back(signature(p));

  complex total = 0.0;
  for (const auto& subset : k_subsets(s.particles(), k)) {
    for (std::size_t r = 0; r < perms.size(); ++r)
      for (std::size_t c = 0; c < perms.size(); ++c) {
        complex prod = 1.0;
        for (int i = 0; i < k; ++i) prod *= g(subset[perms[c][i]], subset[perms[r][i]]);
        total += (fermion && sig[r] * sig[c] < 0) ? -prod : prod;
      }
  }
  return detail::checked_coherence(total / falling_factorial(s.particles(), k));
}

inline double mean_coherence(const SuperpositionState& s, int k) {
  return detail::checked_coherence(reduced_density(s, k).total());
}

inline double mean_coherence(const State& s, int k) {
  return std::visit([k](const auto& x) { return mean_coherence(x, k); }, s);
}

/// W^(k) = k!(N-k)!/N! Σ_{|S|=k} perm(G_S) (bosons) or det(G_S) (fermions)
/// over principal submatrices of the distinguishability matrix.
inline double mean_coherence_gram(const SeparableState& s, int k) {
  detail::require(k >= 1 && k <= s.particles(), "coherence order out of range");
  const CMatrix g = s.gram();
  const bool fermion = s.statistics() == Statistics::Fermion;
  complex total = 0.0;
  for (const auto& subset : k_subsets(s.particles(), k)) {
    const CMatrix sub = principal_submatrix(g, subset);
    total += fermion ? determinant(sub) : permanent(sub);
  }
  const double w = factorial(k) / falling_factorial(s.particles(), k);
  return detail::checked_coherence(total * w);
}

inline double mean_coherence_gram(const State& s, int k) {
  const auto* sep = std::get_if<SeparableState>(&s);
  detail::require(sep != nullptr, "the Gram-matrix route only applies to separable states");
  return mean_coherence_gram(*sep, k);
}

/// Occupation numbers N_{mα}, rows external modes, columns internal labels.
using OccupationTable = Eigen::MatrixXi;

/// Σ_{m≠n} Σ_α N_{mα} N_{nα} / Σ_{m≠n} N_m N_n
inline double degree_of_indistinguishability(const OccupationTable& occ) {
  detail::require(occ.size() > 0 && occ.minCoeff() >= 0, "occupations must be non-negative");
  const Eigen::VectorXd per_mode = occ.rowwise().sum().cast<double>();
  const Eigen::VectorXd per_label = occ.colwise().sum().transpose().cast<double>();
  const double total = per_mode.sum();
  const double denominator = total * total - per_mode.squaredNorm();
  // Σ_{m≠n} N_{mα}N_{nα} = (Σ_m N_{mα})² - Σ_m N_{mα}²
  const double numerator = per_label.squaredNorm() - occ.cast<double>().squaredNorm();
  detail::require(denominator > 0.0, "degree of indistinguishability needs particles in two or more modes");
  return numerator / denominator;
}

/// Occupation table of a separable state whose internal states are basis vectors.
inline OccupationTable occupation_table(const SeparableState& s) {
  OccupationTable occ = OccupationTable::Zero(s.spaces().d_ext, s.spaces().d_int);
  for (int i = 0; i < s.particles(); ++i) {
    Eigen::Index idx = 0;
    const double peak = s.internal_states()[i].components().cwiseAbs().maxCoeff(&idx);
    detail::require(std::abs(peak - 1.0) < 1e-12, "internal state is not a basis vector");
    occ(s.modes()[i], idx) += 1;
  }
  return occ;
}

/// N(N-1)(W^(2)-1) / Σ_{m≠n} N_m N_n, with W^(2) from the bosonic state.
inline double indistinguishability_from_coherence(const SeparableState& s) {
  detail::require(s.statistics() == Statistics::Boson, "the indistinguishability relation is bosonic");
  detail::require(s.particles() >= 2, "needs at least two particles");
  auto modes = s.modes();
  std::sort(modes.begin(), modes.end());
  detail::require(std::adjacent_find(modes.begin(), modes.end()) == modes.end(), "modes must be singly occupied");
  // Single occupancy: Σ_{m≠n} N_m N_n = N(N-1) cancels the normalisation.
  return mean_coherence(s, 2) - 1.0;
}

struct WitnessResult {
  double w2 = 0.0;
  double threshold = 0.0;
  bool violated = false;
};

/// W^(2) > 2 - 2/N certifies genuine N-particle indistinguishability.
inline WitnessResult witness_genuine_indistinguishability(const SeparableState& s) {
  detail::require(s.particles() >= 2, "the witness needs at least two particles");
  WitnessResult r;
  r.w2 = mean_coherence_gram(s, 2);
  r.threshold = 2.0 - 2.0 / s.particles();
  r.violated = r.w2 > r.threshold + 1e-12;
  return r;
}

/// tr(ρ_ext P_S) with P_S = (1/N!) Σ_π π and π|m> = |m_{π⁻¹(1)} ... m_{π⁻¹(N)}>,
/// applied explicitly to every support tuple of ρ_ext = ρ_ext^(N).
inline double symmetric_projection(const State& s) {
  const int n = particles(s);
  const ReducedDensity rho = reduced_density(s, n);
  const auto perms = all_permutations(n);
  complex total = 0.0;
  for (std::size_t idx = 0; idx < rho.dim(); ++idx) {
    const auto& m = rho.support()[idx];
    for (const auto& p : perms) {
      const Permutation pinv = inverse(p);
      std::vector<int> pm(n);
      for (int i = 0; i < n; ++i) pm[i] = m[pinv[i]];
      total += rho.entry(m, pm);
    }
  }
  total /= factorial(n);
  if (std::abs(total.imag()) > 1e-10) throw NumericalError("symmetric projection is not real");
  return total.real();
}

/// perm(S)/N! for a pure separable state.
inline double symmetric_projection_permanent(const SeparableState& s) {
  const complex p = permanent(s.gram());
  return p.real() / factorial(s.particles());
}

}  // namespace mbc
