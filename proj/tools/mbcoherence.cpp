// mbcoherence command-line front end.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical-invariant violation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbcoherence.hpp"

namespace {

using nlohmann::json;
using namespace mbc;

/// JSON keys accepted by --config for one subcommand, each bound to a setter.
class Overrides {
 public:
  template <typename T>
  void bind(const std::string& key, T& target) {
    setters_[key] = [&target](const json& v) { target = v.get<T>(); };
  }
  void bind_fn(const std::string& key, std::function<void(const json&)> fn) { setters_[key] = std::move(fn); }

  void apply(const json& j) const {
    detail::require(j.is_object(), "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      auto it = setters_.find(key);
      if (it == setters_.end()) throw InvalidArgument("unknown config key: " + key);
      try {
        it->second(value);
      } catch (const json::exception& e) {
        throw InvalidArgument("bad value for config key " + key + ": " + e.what());
      }
    }
  }

 private:
  std::map<std::string, std::function<void(const json&)>> setters_;
};

std::string join_modes(const std::vector<int>& modes) {
  std::string s;
  for (std::size_t i = 0; i < modes.size(); ++i) s += (i ? " " : "") + std::to_string(modes[i]);
  return s;
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw InvalidArgument("cannot create output directory " + dir);
  return p;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  body(out);
}

struct PipelineFlags {
  std::optional<int> n_states, n_particles, d_int, n_unitaries;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<double> fit_window;
  std::vector<int> k_list;

  void add_to(CLI::App* app, bool with_unitaries) {
    app->add_option("--n-states", n_states, "States per statistics");
    app->add_option("--N", n_particles, "Particle number (also the number of external modes)");
    app->add_option("--d-int", d_int, "Internal dimension");
    app->add_option("--k", k_list, "Orders to analyse")->delimiter(',');
    app->add_option("--seed", seed, "Base seed");
    app->add_option("--out-dir", output_dir, "Output directory");
    app->add_option("--fit-window", fit_window, "Fermionic power-law window in W^(2)");
    if (with_unitaries) app->add_option("--n-unitaries", n_unitaries, "Haar unitaries per state");
  }

  void apply_to(experiments::RunConfig& c) const {
    if (n_states) c.n_states = *n_states;
    if (n_particles) c.n_particles = c.d_ext = *n_particles;
    if (d_int) c.d_int = *d_int;
    if (n_unitaries) c.n_unitaries = *n_unitaries;
    if (seed) c.seed = *seed;
    if (output_dir) c.output_dir = *output_dir;
    if (fit_window) c.fit_window = *fit_window;
    if (!k_list.empty()) c.k_list = k_list;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Many-body coherence measures and randomized correlators"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON file whose values override individual flags");

  // fig1 / fig2
  PipelineFlags fig1_flags, fig2_flags;
  auto* fig1 = app.add_subcommand("fig1", "W^(k) against W^(2) over sampled separable states");
  fig1_flags.add_to(fig1, false);
  auto* fig2 = app.add_subcommand("fig2", "Averaged connected correlators against W^(k)");
  fig2_flags.add_to(fig2, true);

  // demo-entangled
  std::uint64_t demo_seed = 2021;
  int demo_ensemble = 300;
  auto* demo = app.add_subcommand("demo-entangled", "Entangled states against the separable envelope");
  demo->add_option("--seed", demo_seed, "Seed of the separable ensemble");
  demo->add_option("--ensemble", demo_ensemble, "Separable states per statistics");

  // coherence
  std::string state_path;
  std::vector<int> orders;
  auto* coherence = app.add_subcommand("coherence", "Mean coherences W^(k) of a state");
  coherence->add_option("--state", state_path, "State JSON file");
  coherence->add_option("--k", orders, "Orders (default 2..N)")->delimiter(',');

  // correlate
  std::string unitary_path;
  std::optional<std::uint64_t> haar_seed;
  int n_unitaries = 1;
  int corr_k = 2;
  std::vector<int> modes;
  bool all_subsets = false;
  auto* correlate = app.add_subcommand("correlate", "Raw and connected correlators under a unitary");
  correlate->add_option("--state", state_path, "State JSON file");
  auto* unitary_opt = correlate->add_option("--unitary", unitary_path, "Unitary JSON file");
  auto* seed_opt = correlate->add_option("--haar-seed", haar_seed, "Seed for Haar-random unitaries");
  unitary_opt->excludes(seed_opt);
  correlate->add_option("--n-unitaries", n_unitaries, "Number of Haar unitaries (with --haar-seed)");
  correlate->add_option("--k", corr_k, "Correlator order");
  auto* modes_opt = correlate->add_option("--modes", modes, "Output modes")->delimiter(',');
  auto* subsets_opt = correlate->add_flag("--all-subsets", all_subsets, "Every k-subset of output modes");
  modes_opt->excludes(subsets_opt);

  // haar-average
  int avg_k = 2;
  std::string method = "analytic";
  std::size_t samples = 10000;
  std::uint64_t avg_seed = 0;
  auto* haar_avg = app.add_subcommand("haar-average", "Haar-averaged connected correlator");
  haar_avg->add_option("--state", state_path, "State JSON file");
  haar_avg->add_option("--k", avg_k, "Correlator order");
  haar_avg->add_option("--method", method, "analytic or mc")->check(CLI::IsMember({"analytic", "mc"}));
  haar_avg->add_option("--samples", samples, "Monte-Carlo samples");
  haar_avg->add_option("--seed", avg_seed, "Monte-Carlo seed");

  // sample-states
  int ss_states = 10, ss_n = 3, ss_d_int = 3;
  std::string ss_stats = "boson", ss_out;
  std::uint64_t ss_seed = 0;
  std::vector<double> ss_eps;
  auto* sample = app.add_subcommand("sample-states", "Sampled separable states as JSON lines");
  sample->add_option("--n-states", ss_states, "Number of states");
  sample->add_option("--N", ss_n, "Particle number (also the number of external modes)");
  sample->add_option("--d-int", ss_d_int, "Internal dimension");
  sample->add_option("--statistics", ss_stats, "boson or fermion")->check(CLI::IsMember({"boson", "fermion"}));
  sample->add_option("--epsilon", ss_eps, "Perturbation variances (default 24-point grid)")->delimiter(',');
  sample->add_option("--seed", ss_seed, "Base seed");
  sample->add_option("--out", ss_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::optional<json> config;
  if (!config_path.empty()) config = io::read_json_file(config_path);

  if (fig1->parsed() || fig2->parsed()) {
    const bool first = fig1->parsed();
    auto c = first ? experiments::fig1_defaults() : experiments::fig2_defaults();
    (first ? fig1_flags : fig2_flags).apply_to(c);
    if (config) experiments::apply_json(c, *config);
    const auto dir = prepare_dir(c.output_dir);
    json report;
    if (first) {
      const auto res = experiments::run_fig1(c);
      write_file(dir / "fig1.csv", [&](std::ostream& o) { res.write_csv(o); });
      report = res.report;
    } else {
      const auto res = experiments::run_fig2(c);
      write_file(dir / "fig2.csv", [&](std::ostream& o) { res.write_csv(o); });
      report = res.report;
    }
    write_file(dir / (first ? "fig1_report.json" : "fig2_report.json"),
               [&](std::ostream& o) { o << report.dump(2) << '\n'; });
    std::cout << report.dump(2) << '\n';
    return 0;
  }

  Overrides ov;
  ov.bind("state", state_path);

  if (demo->parsed()) {
    Overrides d;
    d.bind("seed", demo_seed);
    d.bind("ensemble", demo_ensemble);
    if (config) d.apply(*config);
    detail::require(demo_ensemble >= 5, "ensemble must hold at least five states");
    std::cout << experiments::run_entangled_demo(demo_seed, demo_ensemble).dump(2) << '\n';
    return 0;
  }

  if (coherence->parsed()) {
    ov.bind("k", orders);
    if (config) ov.apply(*config);
    detail::require(!state_path.empty(), "--state is required");
    const State s = io::state_from_json(io::read_json_file(state_path));
    if (orders.empty())
      for (int k = 2; k <= particles(s); ++k) orders.push_back(k);
    json out = json::array();
    for (int k : orders) out.push_back({{"k", k}, {"W", mean_coherence(s, k)}});
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  if (correlate->parsed()) {
    ov.bind("unitary", unitary_path);
    ov.bind_fn("haar_seed", [&](const json& v) { haar_seed = v.get<std::uint64_t>(); });
    ov.bind("n_unitaries", n_unitaries);
    ov.bind("k", corr_k);
    ov.bind("modes", modes);
    ov.bind("all_subsets", all_subsets);
    if (config) ov.apply(*config);
    detail::require(!state_path.empty(), "--state is required");
    detail::require(unitary_path.empty() != !haar_seed.has_value(), "give exactly one of --unitary or --haar-seed");
    detail::require(modes.empty() == all_subsets, "give exactly one of --modes or --all-subsets");
    detail::require(n_unitaries >= 1, "--n-unitaries must be positive");
    const State s = io::state_from_json(io::read_json_file(state_path));
    const int d = spaces(s).d_ext;
    if (!modes.empty()) corr_k = static_cast<int>(modes.size());
    detail::require(corr_k >= 1 && corr_k <= d, "k must lie in [1, d]");

    std::vector<ExternalUnitary> unitaries;
    if (haar_seed) {
      for (int u = 0; u < n_unitaries; ++u)
        unitaries.push_back(sample_haar(d, derive_seed(*haar_seed, static_cast<std::uint64_t>(u))));
    } else {
      unitaries.push_back(io::unitary_from_json(io::read_json_file(unitary_path)));
      detail::require(unitaries.back().dim() == d, "unitary dimension must equal d_ext");
    }
    const std::vector<std::vector<int>> subsets = all_subsets ? k_subsets(d, corr_k) : std::vector<std::vector<int>>{modes};
    auto densities = std::make_shared<const DensitySet>(s, std::min(corr_k, particles(s)));
    std::cout << "unitary_id,modes,raw,connected\n";
    for (std::size_t u = 0; u < unitaries.size(); ++u) {
      CorrelatorEngine engine(densities, unitaries[u]);
      for (const auto& m : subsets)
        std::cout << u << ',' << join_modes(m) << ',' << experiments::format_double(engine.raw(m)) << ','
                  << experiments::format_double(engine.connected(m)) << '\n';
    }
    return 0;
  }

  if (haar_avg->parsed()) {
    ov.bind("k", avg_k);
    ov.bind("method", method);
    ov.bind("samples", samples);
    ov.bind("seed", avg_seed);
    if (config) ov.apply(*config);
    detail::require(!state_path.empty(), "--state is required");
    detail::require(method == "analytic" || method == "mc", "method must be analytic or mc");
    const State s = io::state_from_json(io::read_json_file(state_path));
    json out{{"k", avg_k}};
    if (method == "analytic") {
      out["value"] = haar_avg_connected(s, avg_k);
      out["stderr"] = nullptr;
    } else {
      const auto est = haar_mc_connected(s, avg_k, samples, avg_seed);
      out["value"] = est.mean;
      out["stderr"] = est.stderr_;
    }
    std::cout << out.dump() << '\n';
    return 0;
  }

  if (sample->parsed()) {
    Overrides so;
    so.bind("n_states", ss_states);
    so.bind("N", ss_n);
    so.bind("d_int", ss_d_int);
    so.bind("statistics", ss_stats);
    so.bind("epsilon", ss_eps);
    so.bind("seed", ss_seed);
    so.bind("out", ss_out);
    if (config) so.apply(*config);
    const Statistics st = io::parse_statistics(json(ss_stats));
    detail::require(ss_n >= 1 && ss_d_int >= ss_n, "sampling needs N >= 1 and d_int >= N");
    const auto grid = ss_eps.empty() ? default_epsilon_grid() : ss_eps;
    const auto states = sweep_transition(ss_states, ss_n, ss_d_int, grid, st, ss_seed);
    std::ofstream file;
    if (!ss_out.empty()) {
      file.open(ss_out);
      if (!file) throw InvalidArgument("cannot write " + ss_out);
    }
    std::ostream& out = ss_out.empty() ? std::cout : file;
    for (const auto& rec : states) {
      json j = io::state_to_json(rec.state);
      j["regime"] = to_string(rec.regime);
      j["epsilon"] = rec.epsilon;
      j["seed"] = rec.seed;
      out << j.dump() << '\n';
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mbc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
