#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "combinatorics.hpp"
#include "errors.hpp"
#include "linalg.hpp"

namespace mbc {

enum class Statistics { Boson, Fermion };

inline std::string to_string(Statistics s) { return s == Statistics::Boson ? "boson" : "fermion"; }

/// +1 for bosons; the permutation signature for fermions.
inline int exchange_sign(Statistics s, int perm_signature) {
  return s == Statistics::Fermion ? perm_signature : 1;
}

struct ModeSpaces {
  int d_ext = 1;  // external modes, acted on by the interferometer
  int d_int = 1;  // internal modes, only label distinguishability
};

/// Pure single-particle internal state; always unit norm.
class InternalVector {
public:
  InternalVector() = default;

  /// Renormalizes; throws on a zero vector.
  explicit InternalVector(CVector components) : v_(std::move(components)) {
    const double n = v_.norm();
    detail::require(v_.size() > 0 && n > 0.0 && std::isfinite(n), "internal vector must be nonzero");
    v_ /= n;
  }

  static InternalVector basis(int dim, int index) {
    detail::require(index >= 0 && index < dim, "basis index out of range");
    CVector v = CVector::Zero(dim);
    v(index) = 1.0;
    return InternalVector(std::move(v));
  }

  const CVector& components() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }

  /// <this|other>
  complex overlap(const InternalVector& other) const { return v_.dot(other.v_); }

private:
  CVector v_;
};

/// One particle per occupied external mode, each carrying its own pure internal state.
class SeparableState {
public:
  Statistics statistics() const { return statistics_; }
  ModeSpaces spaces() const { return spaces_; }
  int particles() const { return static_cast<int>(modes_.size()); }
  const std::vector<int>& modes() const { return modes_; }
  const std::vector<InternalVector>& internal_states() const { return internal_; }

  /// Distinguishability matrix S_ij = <phi_i|phi_j>, indexed by particle position.
  CMatrix gram() const {
    const int n = particles();
    CMatrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = internal_[i].overlap(internal_[j]);
    return g;
  }

private:
  friend SeparableState make_separable(Statistics, ModeSpaces, std::vector<int>,
                                       std::vector<InternalVector>);
  Statistics statistics_ = Statistics::Boson;
  ModeSpaces spaces_;
  std::vector<int> modes_;
  std::vector<InternalVector> internal_;
};

struct SuperpositionTerm {
  complex amplitude;
  std::vector<int> labels;  // internal basis label per occupied mode
};

/// Sum of amplitude-weighted product terms a†_{p1 l1} ... a†_{pN lN}|0> over a
/// shared, strictly increasing set of occupied external modes.
class SuperpositionState {
public:
  Statistics statistics() const { return statistics_; }
  ModeSpaces spaces() const { return spaces_; }
  int particles() const { return static_cast<int>(modes_.size()); }
  const std::vector<int>& modes() const { return modes_; }
  const std::vector<SuperpositionTerm>& terms() const { return terms_; }

  /// <psi|psi>; product terms on distinct modes are orthonormal in their label lists.
  double norm_squared() const { return norm_squared_of(terms_); }

private:
  friend SuperpositionState make_superposition(Statistics, ModeSpaces, std::vector<int>,
                                               std::vector<SuperpositionTerm>);
  static double norm_squared_of(const std::vector<SuperpositionTerm>& terms) {
    complex s = 0.0;
    for (const auto& a : terms)
      for (const auto& b : terms)
        if (a.labels == b.labels) s += std::conj(a.amplitude) * b.amplitude;
    return s.real();
  }

  Statistics statistics_ = Statistics::Boson;
  ModeSpaces spaces_;
  std::vector<int> modes_;
  std::vector<SuperpositionTerm> terms_;
};

using State = std::variant<SeparableState, SuperpositionState>;

inline int particles(const State& s) {
  return std::visit([](const auto& x) { return x.particles(); }, s);
}
inline Statistics statistics(const State& s) {
  return std::visit([](const auto& x) { return x.statistics(); }, s);
}
inline ModeSpaces spaces(const State& s) {
  return std::visit([](const auto& x) { return x.spaces(); }, s);
}
inline const std::vector<int>& occupied_modes(const State& s) {
  return std::visit([](const auto& x) -> const std::vector<int>& { return x.modes(); }, s);
}

namespace detail {

inline void check_spaces(ModeSpaces sp) {
  require(sp.d_ext >= 1 && sp.d_int >= 1, "mode space dimensions must be positive");
}

/// Returns the permutation that sorts `modes`, after validating range and distinctness.
inline std::vector<int> sorting_order(const std::vector<int>& modes, int d_ext) {
  require(!modes.empty(), "a state needs at least one particle");
  for (int m : modes) require(m >= 0 && m < d_ext, "external mode index out of range");
  std::vector<int> order(modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return modes[a] < modes[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    require(modes[order[i]] != modes[order[i - 1]], "duplicate external mode index");
  return order;
}

}  // namespace detail

/// Builds an externally separable state; modes may come in any order and are
/// stored sorted together with their internal vectors.
inline SeparableState make_separable(Statistics statistics, ModeSpaces spaces, std::vector<int> modes,
                                     std::vector<InternalVector> internal_states) {
  detail::check_spaces(spaces);
  detail::require(modes.size() == internal_states.size(),
                  "one internal state per occupied mode is required");
  const auto order = detail::sorting_order(modes, spaces.d_ext);
  SeparableState s;
  s.statistics_ = statistics;
  s.spaces_ = spaces;
  for (int i : order) {
    detail::require(internal_states[i].dim() == spaces.d_int, "internal vector has wrong dimension");
    s.modes_.push_back(modes[i]);
    s.internal_.push_back(internal_states[i]);
  }
  return s;
}

/// Builds a superposition over fixed occupied modes. Terms with equal label
/// lists are merged and the state is normalized. Out-of-order modes are sorted;
/// for fermions the reordering sign multiplies every amplitude.
inline SuperpositionState make_superposition(Statistics statistics, ModeSpaces spaces,
                                             std::vector<int> modes,
                                             std::vector<SuperpositionTerm> terms) {
  detail::check_spaces(spaces);
  const auto order = detail::sorting_order(modes, spaces.d_ext);
  const int sign = exchange_sign(statistics, sorting_signature(modes));
  detail::require(!terms.empty(), "superposition needs at least one term");

  SuperpositionState s;
  s.statistics_ = statistics;
  s.spaces_ = spaces;
  for (int i : order) s.modes_.push_back(modes[i]);

  for (auto& t : terms) {
    detail::require(t.labels.size() == modes.size(), "term label count must equal particle count");
    std::vector<int> sorted_labels;
    for (int i : order) {
      detail::require(t.labels[i] >= 0 && t.labels[i] < spaces.d_int, "internal label out of range");
      sorted_labels.push_back(t.labels[i]);
    }
    const complex amp = t.amplitude * static_cast<double>(sign);
    auto same = std::find_if(s.terms_.begin(), s.terms_.end(),
                             [&](const SuperpositionTerm& u) { return u.labels == sorted_labels; });
    if (same != s.terms_.end())
      same->amplitude += amp;
    else
      s.terms_.push_back({amp, std::move(sorted_labels)});
  }
  std::erase_if(s.terms_, [](const SuperpositionTerm& t) { return std::abs(t.amplitude) < 1e-14; });
  const double n2 = SuperpositionState::norm_squared_of(s.terms_);
  detail::require(n2 > 0.0 && std::isfinite(n2), "superposition has zero norm");
  for (auto& t : s.terms_) t.amplitude /= std::sqrt(n2);
  return s;
}

/// (a†_{0,0} a†_{1,1} - a†_{0,1} a†_{1,0}) |0> / sqrt(2)
inline SuperpositionState make_psi2(Statistics statistics, ModeSpaces spaces = {2, 2}) {
  detail::require(spaces.d_ext >= 2 && spaces.d_int >= 2, "psi2 needs d_ext >= 2 and d_int >= 2");
  const double a = 1.0 / std::sqrt(2.0);
  return make_superposition(statistics, spaces, {0, 1}, {{a, {0, 1}}, {-a, {1, 0}}});
}

/// Cyclic three-particle state with labels (0,1,2), (2,0,1), (1,2,0) on modes 0,1,2.
inline SuperpositionState make_psi3(Statistics statistics, ModeSpaces spaces = {3, 3}) {
  detail::require(spaces.d_ext >= 3 && spaces.d_int >= 3, "psi3 needs d_ext >= 3 and d_int >= 3");
  const double a = 1.0 / std::sqrt(3.0);
  return make_superposition(statistics, spaces, {0, 1, 2},
                            {{a, {0, 1, 2}}, {a, {2, 0, 1}}, {a, {1, 2, 0}}});
}

/// Single-term superposition equivalent to a separable state whose internal
/// vectors are all computational basis vectors. Throws otherwise.
inline SuperpositionState as_superposition(const SeparableState& s) {
  std::vector<int> labels;
  complex phase = 1.0;
  for (const auto& v : s.internal_states()) {
    Eigen::Index idx = 0;
    const double peak = v.components().cwiseAbs().maxCoeff(&idx);
    detail::require(std::abs(peak - 1.0) < 1e-12, "internal state is not a basis vector");
    labels.push_back(static_cast<int>(idx));
    phase *= v.components()(idx);
  }
  return make_superposition(s.statistics(), s.spaces(), s.modes(), {{phase, labels}});
}

}  // namespace mbc
