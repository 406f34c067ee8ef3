#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergolab/circle_map.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/equilibrium.hpp"
#include "ergolab/errors.hpp"
#include "ergolab/measures.hpp"
#include "ergolab/srb_like.hpp"

namespace ergolab {

using json = nlohmann::json;

/// Wire format for a map: {"family": ..., "degree": d, "c": amplitude}.
/// Persisted into every result file for provenance.
inline json map_spec_json(const CircleMap& map) {
  return json{{"family", family_name(map.family())},
              {"degree", map.degree()},
              {"c", map.params().c}};
}

inline CircleMap parse_map_spec(const json& spec) {
  if (!spec.is_object()) throw ConfigError("map spec must be an object");
  for (const auto& [key, value] : spec.items()) {
    (void)value;
    if (key != "family" && key != "degree" && key != "c")
      throw ConfigError("map spec: unknown key '" + key + "'");
  }
  if (!spec.contains("family") || !spec["family"].is_string())
    throw ConfigError("map spec: missing family");
  if (!spec.contains("degree") || !spec["degree"].is_number_integer())
    throw ConfigError("map spec: missing integer degree");
  std::string fam = spec["family"].get<std::string>();
  MapParams params;
  params.degree = spec["degree"].get<int>();
  params.c = spec.value("c", 0.0);
  if (fam == "linear") return make_map(MapFamily::linear, params);
  if (fam == "smooth_perturbed") return make_map(MapFamily::smooth_perturbed, params);
  if (fam == "nonhoelder") return make_map(MapFamily::nonhoelder, params);
  throw ConfigError("map spec: unknown family '" + fam + "'");
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << body;
}

inline void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path.string());
  return json::parse(in);
}

/// CSV files start with two comment lines: the artifact kind and the resolved
/// configuration that produced them.
inline std::string csv_preamble(const std::string& kind, const json& provenance) {
  return "# ergolab " + kind + "\n# config: " + provenance.dump() + "\n";
}

inline void write_grid_csv(const std::filesystem::path& path, const GridMeasure& mu,
                           const json& provenance) {
  std::ostringstream out;
  out << csv_preamble("grid_measure", provenance) << "cell_index,mass\n";
  for (std::size_t i = 0; i < mu.k; ++i)
    out << i << ',' << format_double(mu.mass[i]) << '\n';
  write_text_file(path, out.str());
}

inline void write_matrix_csv(const std::filesystem::path& path, const UlamMatrix& m,
                             const json& provenance) {
  std::ostringstream out;
  out << csv_preamble("ulam_matrix", provenance) << "i,j,p\n";
  for (std::size_t i = 0; i < m.k; ++i)
    for (const auto& [col, p] : m.rows[i])
      out << i << ',' << col << ',' << format_double(p) << '\n';
  write_text_file(path, out.str());
}

inline void write_decay_csv(const std::filesystem::path& path,
                            const std::vector<DecayPoint>& points,
                            const json& provenance) {
  std::ostringstream out;
  out << csv_preamble("decay_curve", provenance) << "n,fraction,analytic_bound\n";
  for (const auto& p : points)
    out << p.n << ',' << format_double(p.fraction) << ','
        << format_double(p.bound) << '\n';
  write_text_file(path, out.str());
}

inline json grid_json(const GridMeasure& mu) {
  return json{{"k", mu.k}, {"mass", mu.mass}};
}

inline json pesin_json(const PesinReport& rep) {
  return json{{"lyapunov", rep.lyapunov},
              {"entropy_est", rep.entropy_est},
              {"residual", rep.residual},
              {"q_used", rep.q_used},
              {"diagnostics", rep.diagnostics},
              {"pesin_holds", rep.pesin_holds},
              {"tolerance", rep.tolerance}};
}

inline json pressure_json(const PressureEstimate& est) {
  return json{{"markov_entropy", est.markov_entropy},
              {"entropy_est", est.entropy_est},
              {"lyapunov", est.lyapunov},
              {"pressure", est.pressure},
              {"k", est.k},
              {"q_used", est.q_used}};
}

inline json srb_report_json(const SrbLikeReport& rep) {
  json candidates = json::array();
  for (const auto& c : rep.candidates) {
    candidates.push_back(json{{"basin_weight", c.basin_weight},
                              {"members", c.members},
                              {"atomic_profile", c.atomic_profile},
                              {"srb_like", c.srb_like},
                              {"pesin", pesin_json(c.pesin)},
                              {"measure", grid_json(c.measure)}});
  }
  return json{{"sample_count", rep.sample_count},
              {"n", rep.n},
              {"grid_k", rep.grid_k},
              {"epsilon_cluster", rep.epsilon_cluster},
              {"seed", rep.seed},
              {"non_convergent", rep.non_convergent},
              {"flag_threshold", rep.flag_threshold},
              {"candidates", candidates}};
}

}  // namespace ergolab
