#pragma once

// JSON encoding of states and unitaries.
//
// Separable:     {"statistics": "boson"|"fermion", "d_ext": int, "d_int": int,
//                 "modes": [int], "internal": [[[re, im], ...], ...]}
// Superposition: same header with "terms": [{"amp": [re, im], "labels": [int]}]
// Unitary:       {"entries": [[[re, im], ...], ...]} or the bare nested array.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "linalg.hpp"
#include "states.hpp"
#include "unitary.hpp"

namespace mbc::io {

using nlohmann::json;

inline complex parse_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  detail::require(j.is_array() && j.size() == 2, "complex numbers are encoded as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json complex_json(complex z) { return json::array({z.real(), z.imag()}); }

inline Statistics parse_statistics(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "boson") return Statistics::Boson;
  if (s == "fermion") return Statistics::Fermion;
  throw InvalidArgument("statistics must be \"boson\" or \"fermion\"");
}

inline State state_from_json(const json& j) {
  try {
    detail::require(j.is_object(), "state description must be a JSON object");
    const Statistics st = parse_statistics(j.at("statistics"));
    const ModeSpaces sp{j.at("d_ext").get<int>(), j.at("d_int").get<int>()};
    const auto modes = j.at("modes").get<std::vector<int>>();
    const bool has_internal = j.contains("internal");
    const bool has_terms = j.contains("terms");
    detail::require(has_internal != has_terms, "state needs exactly one of \"internal\" or \"terms\"");
    if (has_internal) {
      std::vector<InternalVector> internal;
      for (const auto& vec : j.at("internal")) {
        CVector v(static_cast<Eigen::Index>(vec.size()));
        for (std::size_t a = 0; a < vec.size(); ++a) v(static_cast<Eigen::Index>(a)) = parse_complex(vec[a]);
        internal.emplace_back(std::move(v));
      }
      return make_separable(st, sp, modes, std::move(internal));
    }
    std::vector<SuperpositionTerm> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back({parse_complex(t.at("amp")), t.at("labels").get<std::vector<int>>()});
    return make_superposition(st, sp, modes, std::move(terms));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed state description: ") + e.what());
  }
}

inline json state_to_json(const SeparableState& s) {
  json internal = json::array();
  for (const auto& v : s.internal_states()) {
    json vec = json::array();
    for (Eigen::Index a = 0; a < v.components().size(); ++a) vec.push_back(complex_json(v.components()(a)));
    internal.push_back(std::move(vec));
  }
  return {{"statistics", to_string(s.statistics())},
          {"d_ext", s.spaces().d_ext},
          {"d_int", s.spaces().d_int},
          {"modes", s.modes()},
          {"internal", std::move(internal)}};
}

inline json state_to_json(const SuperpositionState& s) {
  json terms = json::array();
  for (const auto& t : s.terms()) terms.push_back({{"amp", complex_json(t.amplitude)}, {"labels", t.labels}});
  return {{"statistics", to_string(s.statistics())},
          {"d_ext", s.spaces().d_ext},
          {"d_int", s.spaces().d_int},
          {"modes", s.modes()},
          {"terms", std::move(terms)}};
}

inline json state_to_json(const State& s) {
  return std::visit([](const auto& x) { return state_to_json(x); }, s);
}

inline ExternalUnitary unitary_from_json(const json& j) {
  try {
    const json& rows = j.is_object() ? j.at("entries") : j;
    detail::require(rows.is_array() && !rows.empty(), "unitary entries must be a nonempty array of rows");
    const auto d = static_cast<Eigen::Index>(rows.size());
    CMatrix u(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      detail::require(rows[r].size() == rows.size(), "unitary must be square");
      for (Eigen::Index c = 0; c < d; ++c) u(r, c) = parse_complex(rows[r][c]);
    }
    return ExternalUnitary(std::move(u));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed unitary: ") + e.what());
  }
}

inline json unitary_to_json(const ExternalUnitary& u) {
  json rows = json::array();
  for (int r = 0; r < u.dim(); ++r) {
    json row = json::array();
    for (int c = 0; c < u.dim(); ++c) row.push_back(complex_json(u(r, c)));
    rows.push_back(std::move(row));
  }
  return {{"entries", std::move(rows)}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace mbc::io
