#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "haar.hpp"
#include "states.hpp"

namespace mbc {

enum class SamplingRegime { NearIndistinguishable, NearDistinguishable };

inline std::string to_string(SamplingRegime r) {
  return r == SamplingRegime::NearIndistinguishable ? "near_indistinguishable" : "near_distinguishable";
}

struct SamplerConfig {
  SamplingRegime regime = SamplingRegime::NearIndistinguishable;
  double epsilon = 1e-2;  // variance of each real and imaginary perturbation component
  int n_particles = 2;
  int d_int = 2;
  std::uint64_t seed = 0;
};

inline void validate(const SamplerConfig& c) {
  detail::require(c.epsilon > 0.0 && std::isfinite(c.epsilon), "epsilon must be positive");
  detail::require(c.n_particles >= 1 && c.d_int >= 1, "particle number and d_int must be positive");
  if (c.regime == SamplingRegime::NearDistinguishable)
    detail::require(c.d_int >= c.n_particles, "near-distinguishable sampling needs d_int >= N");
}

/// Internal states |φ_i> = |e_i> + |f_i>, renormalized. The anchor e_i is the
/// first basis vector for every particle (near indistinguishable) or the i-th
/// basis vector (near distinguishable); f_i has Gaussian components of variance
/// epsilon in both real and imaginary parts.
inline std::vector<InternalVector> sample_internal_states(const SamplerConfig& c) {
  validate(c);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(c.epsilon));
  std::vector<InternalVector> out;
  for (int i = 0; i < c.n_particles; ++i) {
    CVector v = CVector::Zero(c.d_int);
    v(c.regime == SamplingRegime::NearIndistinguishable ? 0 : i) = 1.0;
    for (int a = 0; a < c.d_int; ++a) {
      const double re = normal(rng);
      const double im = normal(rng);
      v(a) += complex(re, im);
    }
    out.emplace_back(std::move(v));
  }
  return out;
}

struct SampledState {
  SeparableState state;
  SamplingRegime regime;
  double epsilon;
  std::uint64_t seed;
};

/// Log-spaced grid of `points` values on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int points) {
  detail::require(lo > 0.0 && hi >= lo && points >= 1, "invalid log grid");
  std::vector<double> g;
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    g.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
  }
  return g;
}

/// 24 log-spaced points in [1e-4, 1e2].
inline std::vector<double> default_epsilon_grid() { return log_grid(1e-4, 1e2, 24); }

/// Separable N-particle states on modes 0..N-1 (d_ext = N). State j uses the
/// (regime, epsilon) pair j mod (2·|grid|), alternating regimes within each
/// epsilon, and seed derive_seed(seed, j).
inline std::vector<SampledState> sweep_transition(int n_states, int n_particles, int d_int,
                                                  const std::vector<double>& epsilon_grid,
                                                  Statistics statistics, std::uint64_t seed) {
  detail::require(!epsilon_grid.empty(), "epsilon grid must be nonempty");
  detail::require(n_states >= 0, "state count must be non-negative");
  std::vector<int> modes(n_particles);
  for (int i = 0; i < n_particles; ++i) modes[i] = i;

  std::vector<SampledState> out;
  out.reserve(static_cast<std::size_t>(n_states));
  const auto combos = 2 * epsilon_grid.size();
  for (int j = 0; j < n_states; ++j) {
    const auto slot = static_cast<std::size_t>(j) % combos;
    SamplerConfig c;
    c.regime = slot % 2 == 0 ? SamplingRegime::NearIndistinguishable : SamplingRegime::NearDistinguishable;
    c.epsilon = epsilon_grid[slot / 2];
    c.n_particles = n_particles;
    c.d_int = d_int;
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(j));
    auto internal = sample_internal_states(c);
    out.push_back({make_separable(statistics, {n_particles, d_int}, modes, std::move(internal)), c.regime,
                   c.epsilon, c.seed});
  }
  return out;
}

}  // namespace mbc
