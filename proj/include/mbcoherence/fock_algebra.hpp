#pragma once

// Brute-force second-quantized algebra on term lists. Everything here is
// exponential in the particle number and exists to check the fast paths.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "states.hpp"
#include "unitary.hpp"

namespace mbc::fock {

inline constexpr double kPruneThreshold = 1e-14;

/// Orbital (external mode, internal label).
struct Orbital {
  int mode = 0;
  int label = 0;
  friend bool operator==(const Orbital&, const Orbital&) = default;
};

/// Superposition of normal-ordered monomials a†_{o1} ... a†_{on}|0> with
/// o1 <= ... <= on in the orbital order (mode-major). Monomials are not
/// normalized: a bosonic orbital occupied n times carries norm² n!.
class FockState {
public:
  using Config = std::vector<int>;  // sorted flat orbital indices
  using Terms = std::map<Config, complex>;

  FockState(Statistics statistics, ModeSpaces spaces) : statistics_(statistics), spaces_(spaces) {}

  static FockState vacuum(Statistics statistics, ModeSpaces spaces) {
    FockState s(statistics, spaces);
    s.terms_[{}] = 1.0;
    return s;
  }

  Statistics statistics() const { return statistics_; }
  ModeSpaces spaces() const { return spaces_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int orbital_index(Orbital o) const {
    detail::require(o.mode >= 0 && o.mode < spaces_.d_ext && o.label >= 0 && o.label < spaces_.d_int,
                    "orbital out of range");
    return o.mode * spaces_.d_int + o.label;
  }

  void add(Config c, complex amp) { terms_[std::move(c)] += amp; }

  void prune() {
    std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < kPruneThreshold; });
  }

private:
  Statistics statistics_;
  ModeSpaces spaces_;
  Terms terms_;
};

namespace detail {

/// a†_o on a single monomial. Returns false when the result vanishes.
inline bool create_on(Statistics st, FockState::Config& c, int o, double& sign) {
  if (st == Statistics::Fermion) {
    const auto it = std::lower_bound(c.begin(), c.end(), o);
    if (it != c.end() && *it == o) return false;
    const auto pos = it - c.begin();
    sign = (pos % 2 == 0) ? 1.0 : -1.0;
    c.insert(it, o);
  } else {
    c.insert(std::upper_bound(c.begin(), c.end(), o), o);
    sign = 1.0;
  }
  return true;
}

/// a_o on a single monomial; for bosons the multiplicity becomes the coefficient.
inline bool annihilate_on(Statistics st, FockState::Config& c, int o, double& coeff) {
  const auto lo = std::lower_bound(c.begin(), c.end(), o);
  const auto hi = std::upper_bound(lo, c.end(), o);
  if (lo == hi) return false;
  if (st == Statistics::Fermion) {
    coeff = ((lo - c.begin()) % 2 == 0) ? 1.0 : -1.0;
  } else {
    coeff = static_cast<double>(hi - lo);
  }
  c.erase(lo);
  return true;
}

inline double monomial_norm2(Statistics st, const FockState::Config& c) {
  if (st == Statistics::Fermion) return 1.0;
  double w = 1.0;
  for (std::size_t i = 0; i < c.size();) {
    std::size_t j = i;
    while (j < c.size() && c[j] == c[i]) ++j;
    w *= factorial(static_cast<int>(j - i));
    i = j;
  }
  return w;
}

}  // namespace detail

inline FockState apply_creator(const FockState& s, Orbital o) {
  const int idx = s.orbital_index(o);
  FockState out(s.statistics(), s.spaces());
  for (const auto& [c, amp] : s.terms()) {
    auto next = c;
    double sign = 1.0;
    if (detail::create_on(s.statistics(), next, idx, sign)) out.add(std::move(next), sign * amp);
  }
  out.prune();
  return out;
}

/// a_{mode,label}|s>. Terms annihilated to zero are dropped; an empty result is the zero state.
inline FockState apply_annihilator(const FockState& s, Orbital o) {
  const int idx = s.orbital_index(o);
  FockState out(s.statistics(), s.spaces());
  for (const auto& [c, amp] : s.terms()) {
    auto next = c;
    double coeff = 0.0;
    if (detail::annihilate_on(s.statistics(), next, idx, coeff)) out.add(std::move(next), coeff * amp);
  }
  out.prune();
  return out;
}

inline FockState scaled_sum(const FockState& a, complex wa, const FockState& b, complex wb) {
  FockState out(a.statistics(), a.spaces());
  for (const auto& [c, amp] : a.terms()) out.add(c, wa * amp);
  for (const auto& [c, amp] : b.terms()) out.add(c, wb * amp);
  out.prune();
  return out;
}

/// <a|b>
inline complex inner(const FockState& a, const FockState& b) {
  complex s = 0.0;
  for (const auto& [c, amp] : b.terms()) {
    const auto it = a.terms().find(c);
    if (it != a.terms().end()) s += std::conj(it->second) * amp * detail::monomial_norm2(a.statistics(), c);
  }
  return s;
}

inline FockState to_fock(const SuperpositionState& s) {
  FockState out(s.statistics(), s.spaces());
  const int d_int = s.spaces().d_int;
  for (const auto& t : s.terms()) {
    // Modes are strictly increasing, so the monomial is already normal ordered.
    FockState::Config c;
    for (std::size_t i = 0; i < t.labels.size(); ++i) c.push_back(s.modes()[i] * d_int + t.labels[i]);
    out.add(std::move(c), t.amplitude);
  }
  out.prune();
  return out;
}

/// Expands Π_i (Σ_α φ_i^α a†_{p_i α})|0> into basis monomials.
inline FockState to_fock(const SeparableState& s) {
  const int d_int = s.spaces().d_int;
  const int n = s.particles();
  FockState out(s.statistics(), s.spaces());
  std::vector<int> labels(n, 0);
  while (true) {
    complex amp = 1.0;
    FockState::Config c;
    for (int i = 0; i < n; ++i) {
      amp *= s.internal_states()[i].components()(labels[i]);
      c.push_back(s.modes()[i] * d_int + labels[i]);
    }
    if (std::abs(amp) >= kPruneThreshold) out.add(std::move(c), amp);
    int pos = n - 1;
    while (pos >= 0 && ++labels[pos] == d_int) labels[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

inline FockState to_fock(const State& s) {
  return std::visit([](const auto& x) { return to_fock(x); }, s);
}

enum class LadderKind { Create, Annihilate };

struct LadderFactor {
  LadderKind kind;
  Orbital orbital;
};

/// Product of ladder operators written left to right; applied to a ket the
/// rightmost factor acts first.
struct OperatorString {
  std::vector<LadderFactor> factors;
};

inline FockState apply(const OperatorString& op, FockState s) {
  for (auto it = op.factors.rbegin(); it != op.factors.rend(); ++it)
    s = it->kind == LadderKind::Create ? apply_creator(s, it->orbital) : apply_annihilator(s, it->orbital);
  return s;
}

/// a_{x_k α_k} ... a_{x_1 α_1}|s>, i.e. a_{x_1 α_1} acts first.
inline FockState annihilate_tuple(FockState s, const std::vector<int>& modes, const std::vector<int>& labels) {
  for (std::size_t i = 0; i < modes.size() && !s.is_zero(); ++i)
    s = apply_annihilator(s, {modes[i], labels[i]});
  return s;
}

/// <ψ| a†_{m1 α1} ... a†_{mk αk} a_{nk αk} ... a_{n1 α1} |ψ>
inline complex matrix_element(const FockState& psi, const std::vector<int>& m, const std::vector<int>& n,
                              const std::vector<int>& alpha) {
  mbc::detail::require(m.size() == n.size() && n.size() == alpha.size(),
                       "matrix_element: tuple lengths differ");
  return inner(annihilate_tuple(psi, m, alpha), annihilate_tuple(psi, n, alpha));
}

inline complex matrix_element(const State& psi, const std::vector<int>& m, const std::vector<int>& n,
                              const std::vector<int>& alpha) {
  mbc::detail::require(m.size() <= static_cast<std::size_t>(particles(psi)),
                       "matrix_element: order exceeds particle number");
  return matrix_element(to_fock(psi), m, n, alpha);
}

/// U† N_p U |s> = Σ_{m,n,α} U_{pm} U*_{pn} a†_{mα} a_{nα} |s>, applied exactly.
inline FockState apply_evolved_number(const FockState& s, const ExternalUnitary& u, int p) {
  const auto [d_ext, d_int] = s.spaces();
  const Statistics st = s.statistics();
  FockState out(st, s.spaces());
  for (const auto& [c, amp] : s.terms()) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j > 0 && c[j] == c[j - 1]) continue;  // multiplicity comes from annihilate_on
      const int n_mode = c[j] / d_int;
      const int alpha = c[j] % d_int;
      auto reduced = c;
      double coeff = 0.0;
      detail::annihilate_on(st, reduced, c[j], coeff);
      const complex left = amp * coeff * std::conj(u(p, n_mode));
      for (int m = 0; m < d_ext; ++m) {
        const complex w = left * u(p, m);
        if (std::abs(w) < kPruneThreshold) continue;
        auto next = reduced;
        double sign = 1.0;
        if (detail::create_on(st, next, m * d_int + alpha, sign)) out.add(std::move(next), sign * w);
      }
    }
  }
  out.prune();
  return out;
}

/// tr[ρ U† N_{p1} ... N_{pk} U] by exact operator application.
inline double correlator_oracle(const State& psi, const ExternalUnitary& u, const std::vector<int>& modes) {
  mbc::detail::require(u.dim() == spaces(psi).d_ext, "unitary dimension must equal d_ext");
  auto sorted = modes;
  std::sort(sorted.begin(), sorted.end());
  mbc::detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                       "correlator modes must be distinct");
  for (int p : modes) mbc::detail::require(p >= 0 && p < u.dim(), "mode out of range");

  const FockState ket0 = to_fock(psi);
  FockState ket = ket0;
  for (auto it = modes.rbegin(); it != modes.rend(); ++it) ket = apply_evolved_number(ket, u, *it);
  const complex value = inner(ket0, ket);
  if (std::abs(value.imag()) > 1e-10) throw NumericalError("correlator_oracle: non-real expectation value");
  return value.real();
}

}  // namespace mbc::fock
