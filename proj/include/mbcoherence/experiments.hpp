#pragma once

// End-to-end pipelines: the W^(k)-vs-W^(2) transition sweep, the averaged
// connected correlators vs W^(k), and the entangled-state demonstration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "coherence.hpp"
#include "correlators.hpp"
#include "errors.hpp"
#include "haar.hpp"
#include "parallel.hpp"
#include "sampling.hpp"
#include "states.hpp"

namespace mbc::experiments {

using nlohmann::json;

struct RunConfig {
  int n_states = 1000;  // per statistics
  int n_particles = 7;
  int d_ext = 7;
  int d_int = 7;
  std::vector<int> k_list;  // empty: every order 2..N
  int n_unitaries = 5;
  std::size_t mc_samples = 10000;
  std::uint64_t seed = 2021;
  std::string output_dir = ".";
  std::vector<double> epsilon_grid = default_epsilon_grid();
  double fit_window = 0.05;  // fermionic power-law fit uses W^(2) below this

  std::vector<int> orders() const {
    if (!k_list.empty()) return k_list;
    std::vector<int> ks;
    for (int k = 2; k <= n_particles; ++k) ks.push_back(k);
    return ks;
  }
};

inline RunConfig fig1_defaults() { return RunConfig{}; }

inline RunConfig fig2_defaults() {
  RunConfig c;
  c.n_states = 100;
  c.n_particles = 6;
  c.d_ext = 6;
  c.d_int = 6;
  c.k_list = {4, 5};
  return c;
}

/// Overrides fields present in `j`; unknown keys are rejected.
inline void apply_json(RunConfig& c, const json& j) {
  detail::require(j.is_object(), "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_states") c.n_states = value.get<int>();
      else if (key == "N" || key == "n_particles") c.n_particles = value.get<int>();
      else if (key == "d_ext") c.d_ext = value.get<int>();
      else if (key == "d_int") c.d_int = value.get<int>();
      else if (key == "k_list") c.k_list = value.get<std::vector<int>>();
      else if (key == "n_unitaries") c.n_unitaries = value.get<int>();
      else if (key == "mc_samples") c.mc_samples = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "output_dir") c.output_dir = value.get<std::string>();
      else if (key == "epsilon_grid") c.epsilon_grid = value.get<std::vector<double>>();
      else if (key == "fit_window") c.fit_window = value.get<double>();
      else throw InvalidArgument("unknown config key: " + key);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
}

inline void validate_common(const RunConfig& c) {
  detail::require(c.n_states >= 1, "n_states must be positive");
  detail::require(c.n_particles >= 2, "N must be at least 2");
  detail::require(c.d_ext == c.n_particles, "sampled states occupy every external mode: d_ext must equal N");
  detail::require(c.d_int >= c.n_particles, "d_int must be at least N");
  detail::require(!c.epsilon_grid.empty(), "epsilon grid must be nonempty");
  for (double e : c.epsilon_grid) detail::require(e > 0.0, "epsilon values must be positive");
  for (int k : c.orders()) detail::require(k >= 2 && k <= c.n_particles, "k_list must lie in {2, ..., N}");
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Ensemble of sampled separable states for one statistics; stream 0 for bosons, 1 for fermions.
inline std::vector<SampledState> sample_ensemble(const RunConfig& c, Statistics st) {
  const std::uint64_t stream = st == Statistics::Boson ? 0 : 1;
  return sweep_transition(c.n_states, c.n_particles, c.d_int, c.epsilon_grid, st, derive_seed(c.seed, stream));
}

// ---------------------------------------------------------------------------
// Mean coherences of every order against W^(2).

struct Fig1Row {
  int state_id = 0;
  Statistics statistics = Statistics::Boson;
  double epsilon = 0.0;
  SamplingRegime regime = SamplingRegime::NearIndistinguishable;
  std::vector<double> w;  // w[k-2] = W^(k), k = 2..N
};

struct Fig1Result {
  RunConfig config;
  std::vector<Fig1Row> rows;
  json report;

  void write_csv(std::ostream& out) const {
    out << "state_id,statistics,epsilon,regime";
    for (int k = 2; k <= config.n_particles; ++k) out << ",W" << k;
    out << '\n';
    for (const auto& r : rows) {
      out << r.state_id << ',' << to_string(r.statistics) << ',' << format_double(r.epsilon) << ','
          << to_string(r.regime);
      for (double v : r.w) out << ',' << format_double(v);
      out << '\n';
    }
  }
};

inline json fig1_statistics_report(const RunConfig& c, const std::vector<const Fig1Row*>& rows, Statistics st) {
  json rep;
  rep["n_states"] = rows.size();
  std::vector<double> w2;
  for (const auto* r : rows) w2.push_back(r->w[0]);
  rep["W2_min"] = *std::min_element(w2.begin(), w2.end());
  rep["W2_max"] = *std::max_element(w2.begin(), w2.end());

  std::size_t violations = 0;
  for (const auto* r : rows)
    for (double v : r->w)
      if (st == Statistics::Fermion ? v > 1.0 + 1e-9 : v < 1.0 - 1e-9) ++violations;
  rep["ordering_violations"] = violations;

  for (int k : c.orders()) {
    if (k == 2) continue;
    std::vector<double> wk;
    for (const auto* r : rows) wk.push_back(r->w[k - 2]);
    rep["spearman"][std::to_string(k)] = rows.size() >= 2 ? analysis::spearman(wk, w2) : 0.0;

    if (st == Statistics::Fermion) {
      std::vector<double> lx, ly;
      for (const auto* r : rows)
        if (r->w[0] < c.fit_window && r->w[0] > 0.0 && r->w[k - 2] > 0.0) {
          lx.push_back(std::log(r->w[0]));
          ly.push_back(std::log(r->w[k - 2]));
        }
      json fit{{"points", lx.size()}, {"expected", k - 1}};
      if (lx.size() >= 3) {
        const auto f = analysis::linear_fit(lx, ly);
        fit["slope"] = f.slope;
        fit["r_squared"] = f.r_squared;
      } else {
        fit["slope"] = nullptr;
      }
      rep["loglog_slope"][std::to_string(k)] = fit;
    }
  }
  return rep;
}

/// W^(k), k = 2..N, for n_states sampled states per statistics, via the Gram route.
inline Fig1Result run_fig1(const RunConfig& c) {
  validate_common(c);
  Fig1Result res;
  res.config = c;
  std::vector<SampledState> states;
  for (auto st : {Statistics::Boson, Statistics::Fermion}) {
    auto part = sample_ensemble(c, st);
    states.insert(states.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  res.rows.resize(states.size());
  parallel_for(states.size(), [&](std::size_t i) {
    const auto& s = states[i];
    Fig1Row row;
    row.state_id = static_cast<int>(i);
    row.statistics = s.state.statistics();
    row.epsilon = s.epsilon;
    row.regime = s.regime;
    for (int k = 2; k <= c.n_particles; ++k) row.w.push_back(mean_coherence_gram(s.state, k));
    if (row.w[0] < -1e-10 || row.w[0] > 2.0 + 1e-9) throw NumericalError("W^(2) outside [0, 2]");
    res.rows[i] = std::move(row);
  });

  for (auto st : {Statistics::Boson, Statistics::Fermion}) {
    std::vector<const Fig1Row*> sel;
    for (const auto& r : res.rows)
      if (r.statistics == st) sel.push_back(&r);
    res.report[to_string(st)] = fig1_statistics_report(c, sel, st);
  }
  res.report["N"] = c.n_particles;
  res.report["fit_window"] = c.fit_window;
  return res;
}

// ---------------------------------------------------------------------------
// Averaged connected correlators against W^(k).

inline constexpr int kAnalyticId = -1;

struct Fig2Row {
  int state_id = 0;
  int k = 0;
  double wk = 0.0;
  int unitary_id = kAnalyticId;  // kAnalyticId marks the Haar-integrated value
  double avg_connected = 0.0;
};

struct Fig2Result {
  RunConfig config;
  std::vector<Fig2Row> rows;
  json report;

  void write_csv(std::ostream& out) const {
    out << "state_id,k,Wk,unitary_id,avg_connected\n";
    for (const auto& r : rows) {
      out << r.state_id << ',' << r.k << ',' << format_double(r.wk) << ','
          << (r.unitary_id == kAnalyticId ? std::string("analytic") : std::to_string(r.unitary_id)) << ','
          << format_double(r.avg_connected) << '\n';
    }
  }
};

inline json fig2_order_report(const RunConfig& c, const std::vector<Fig2Row>& rows, int k) {
  // rows are ordered state-major, so each series lists states in the same order.
  std::vector<double> wk, analytic;
  std::vector<std::vector<double>> per_unitary(static_cast<std::size_t>(c.n_unitaries));
  for (const auto& r : rows) {
    if (r.k != k) continue;
    if (r.unitary_id == kAnalyticId) {
      wk.push_back(r.wk);
      analytic.push_back(r.avg_connected);
    } else {
      per_unitary[static_cast<std::size_t>(r.unitary_id)].push_back(r.avg_connected);
    }
  }
  json rep;
  const auto fa = analysis::linear_fit(wk, analytic);
  const double analytic_residual = analysis::mean_abs(fa.residuals);
  rep["analytic"] = {{"slope", fa.slope},
                     {"intercept", fa.intercept},
                     {"r_squared", fa.r_squared},
                     {"mean_abs_residual", analytic_residual}};
  if (k == 2 || k == 3) {
    double worst = 0.0;
    const double n = c.n_particles;
    for (std::size_t i = 0; i < wk.size(); ++i) {
      const double closed = k == 2 ? -wk[i] / (n + 1) : 2.0 * wk[i] / ((n + 1) * (n + 2));
      worst = std::max(worst, std::abs(analytic[i] - closed));
    }
    rep["analytic"]["closed_form_max_deviation"] = worst;
  }
  json units = json::array();
  for (int u = 0; u < c.n_unitaries; ++u) {
    const auto& y = per_unitary[static_cast<std::size_t>(u)];
    const auto fu = analysis::linear_fit(wk, y);
    std::size_t larger = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (std::abs(fu.residuals[i]) > std::abs(fa.residuals[i])) ++larger;
    units.push_back({{"unitary_id", u},
                     {"slope", fu.slope},
                     {"intercept", fu.intercept},
                     {"r_squared", fu.r_squared},
                     {"mean_abs_residual", analysis::mean_abs(fu.residuals)},
                     {"residual_larger_count", larger},
                     {"sign_test_p", analysis::sign_test_p_value(larger, y.size())},
                     {"residual_correlation", analysis::pearson(fu.residuals, fa.residuals)}});
  }
  rep["unitaries"] = std::move(units);
  return rep;
}

/// For each sampled state and k: W^(k), the Haar-integrated connected correlator,
/// and for each of n_unitaries seeded Haar unitaries the mean connected
/// correlator over all C(d, k) output-mode subsets.
inline Fig2Result run_fig2(const RunConfig& c) {
  validate_common(c);
  detail::require(c.n_unitaries >= 1, "n_unitaries must be positive");
  for (int k : c.orders()) detail::require(k <= 7, "analytic connected averages support k <= 7");
  const auto ks = c.orders();
  const int kmax = *std::max_element(ks.begin(), ks.end());

  std::vector<SampledState> states;
  for (auto st : {Statistics::Boson, Statistics::Fermion}) {
    auto part = sample_ensemble(c, st);
    states.insert(states.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  std::vector<ExternalUnitary> unitaries;
  for (int u = 0; u < c.n_unitaries; ++u)
    unitaries.push_back(sample_haar(c.d_ext, derive_seed(c.seed, 1000 + static_cast<std::uint64_t>(u))));

  std::vector<std::vector<Fig2Row>> per_state(states.size());
  parallel_for(states.size(), [&](std::size_t i) {
    const auto& s = states[i].state;
    auto densities = std::make_shared<const DensitySet>(State{s}, kmax);
    std::vector<CorrelatorEngine> engines;
    for (const auto& u : unitaries) engines.emplace_back(densities, u);
    for (int k : ks) {
      const double wk = mean_coherence_gram(s, k);
      per_state[i].push_back({static_cast<int>(i), k, wk, kAnalyticId, haar_avg_connected(*densities, k)});
      for (int u = 0; u < c.n_unitaries; ++u)
        per_state[i].push_back({static_cast<int>(i), k, wk, u, engines[static_cast<std::size_t>(u)].mode_average_connected(k)});
    }
  });

  Fig2Result res;
  res.config = c;
  for (auto& v : per_state) res.rows.insert(res.rows.end(), v.begin(), v.end());

  for (const auto& r : res.rows) {
    if (r.unitary_id != kAnalyticId || (r.k != 2 && r.k != 3)) continue;
    const double n = c.n_particles;
    const double closed = r.k == 2 ? -r.wk / (n + 1) : 2.0 * r.wk / ((n + 1) * (n + 2));
    if (std::abs(r.avg_connected - closed) > 1e-10)
      throw NumericalError("Haar-averaged connected correlator deviates from the closed form");
  }
  for (int k : ks) res.report[std::to_string(k)] = fig2_order_report(c, res.rows, k);
  res.report["N"] = c.n_particles;
  res.report["n_states"] = states.size();
  return res;
}

// ---------------------------------------------------------------------------
// Entangled states against the separable envelope.

struct Envelope {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;
  double half_width() const { return 0.5 * (hi - lo); }
};

/// Min/max of W^(k) over separable samples with |W^(2) - target| within a
/// window that starts at 0.05 and doubles until it holds at least five points.
inline Envelope separable_envelope(const std::vector<std::pair<double, double>>& w2_wk, double target_w2) {
  detail::require(!w2_wk.empty(), "envelope needs sampled points");
  for (double window = 0.05;; window *= 2.0) {
    Envelope e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0};
    for (const auto& [w2, wk] : w2_wk)
      if (std::abs(w2 - target_w2) <= window) {
        e.lo = std::min(e.lo, wk);
        e.hi = std::max(e.hi, wk);
        ++e.points;
      }
    if (e.points >= 5 || e.points == w2_wk.size()) return e;
  }
}

/// Flagged when the distance outside the envelope exceeds its half-width.
inline bool outside_envelope(const Envelope& e, double wk) {
  const double distance = std::max({0.0, wk - e.hi, e.lo - wk});
  return distance > e.half_width();
}

inline json run_entangled_demo(std::uint64_t seed = 2021, int ensemble_size = 300) {
  json out;
  for (auto st : {Statistics::Boson, Statistics::Fermion}) {
    const State psi2 = make_psi2(st);
    out["psi2"][to_string(st)] = {{"W2", mean_coherence(psi2, 2)}};
  }

  RunConfig ens;
  ens.n_states = ensemble_size;
  ens.n_particles = ens.d_ext = ens.d_int = 3;
  ens.seed = seed;
  std::vector<std::pair<double, double>> points;
  for (auto st : {Statistics::Boson, Statistics::Fermion})
    for (const auto& s : sample_ensemble(ens, st))
      points.emplace_back(mean_coherence_gram(s.state, 2), mean_coherence_gram(s.state, 3));

  for (auto st : {Statistics::Boson, Statistics::Fermion}) {
    const State psi3 = make_psi3(st);
    const double w2 = mean_coherence(psi3, 2);
    const double w3 = mean_coherence(psi3, 3);
    const auto env = separable_envelope(points, w2);
    out["psi3"][to_string(st)] = {{"W2", w2},
                                  {"W3", w3},
                                  {"envelope", {env.lo, env.hi}},
                                  {"envelope_points", env.points},
                                  {"entanglement_flag", outside_envelope(env, w3)}};
  }
  return out;
}

}  // namespace mbc::experiments
