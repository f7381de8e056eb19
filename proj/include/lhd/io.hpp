#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lhd/constructions.hpp"
#include "lhd/criteria.hpp"
#include "lhd/csv.hpp"
#include "lhd/design.hpp"
#include "lhd/error.hpp"
#include "lhd/search.hpp"

namespace lhd {

using json = nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

/// Reads a design CSV without validating it.
inline IntMatrix read_design_csv(const std::filesystem::path& path) {
  auto cells = parse_int_csv(read_text_file(path));
  if (cells.rows() == 0) fail(ErrorCode::io, path.string() + " holds no rows");
  return cells;
}

inline void write_design_csv(const std::filesystem::path& path, const DesignMatrix& design) {
  write_text_file(path, to_csv(design.cells()));
}

/// Sidecar path: same stem, .json extension.
inline std::filesystem::path sidecar_path(std::filesystem::path design_path) {
  return design_path.replace_extension(".json");
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- criteria -------------------------------------------------------------

inline json to_json(const CriterionSpec& spec) {
  json j{{"kind", spec.name()}, {"p", spec.p}, {"q", spec.q}};
  if (spec.kind == CriterionKind::weighted_combo) {
    j["weight"] = spec.weight;
    if (spec.phi_upper) j["phi_upper"] = *spec.phi_upper;
  }
  return j;
}

inline CriterionSpec criterion_from_json(const json& j) {
  try {
    if (j.is_string()) return CriterionSpec::of(parse_criterion_kind(j.get<std::string>()));
    CriterionSpec spec = CriterionSpec::of(parse_criterion_kind(j.at("kind").get<std::string>()));
    spec.p = j.value("p", spec.p);
    spec.q = j.value("q", spec.q);
    spec.weight = j.value("weight", spec.weight);
    if (j.contains("phi_upper")) spec.phi_upper = j.at("phi_upper").get<double>();
    spec.check();
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_config, std::string("bad criterion: ") + e.what());
  }
}

/// phi_p, maxpro, and (for k >= 2) avgcor and maxcor.
template <DesignLike D>
json standard_criteria(const D& design, int p = 15, int q = 1) {
  json j{{"phi_p", phi_p(design, p, q)}, {"maxpro", maxpro_psi(design)}};
  if (design.factors() >= 2) {
    const auto corr = correlation_summary(design);
    j["avgcor"] = corr.avg_abs;
    j["maxcor"] = corr.max_abs;
  }
  return j;
}

// --- optimizer configuration ---------------------------------------------

inline json to_json(const OrthogonalArray& oa) {
  json rows = json::array();
  for (std::size_t r = 0; r < oa.runs(); ++r) {
    const auto row = oa.cells().row(r);
    rows.push_back(std::vector<level_t>(row.begin(), row.end()));
  }
  return {{"runs", oa.runs()}, {"columns", oa.columns()}, {"levels", oa.levels()}, {"strength", oa.strength()},
          {"cells", rows}};
}

inline OrthogonalArray oa_from_json(const json& j) {
  const auto rows = j.at("cells").get<std::vector<std::vector<level_t>>>();
  if (rows.empty()) fail(ErrorCode::invalid_oa, "empty orthogonal array");
  IntMatrix cells(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cells.cols()) fail(ErrorCode::invalid_oa, "ragged orthogonal array");
    for (std::size_t c = 0; c < cells.cols(); ++c) cells(r, c) = rows[r][c];
  }
  return OrthogonalArray::from_cells(std::move(cells), j.at("levels").get<int>(), j.value("strength", 2));
}

inline json to_json(const OptimizerConfig& c) {
  json j{{"algorithm", std::string(to_string(c.algorithm))},
         {"max_evaluations", c.max_evaluations},
         {"seed", c.seed},
         {"stream_id", c.stream_id}};
  json sa{{"alpha", c.sa.alpha}, {"random_column", c.sa.random_column}};
  if (c.sa.t0) sa["t0"] = *c.sa.t0;
  if (c.sa.moves_per_temperature) sa["moves_per_temperature"] = *c.sa.moves_per_temperature;
  j["sa"] = sa;
  json ga{{"population", c.ga.population}};
  if (c.ga.pmut) ga["pmut"] = *c.ga.pmut;
  j["ga"] = ga;
  json pso{{"swarm", c.lapso.swarm}};
  if (c.lapso.same_p) pso["same_p"] = *c.lapso.same_p;
  if (c.lapso.same_g) pso["same_g"] = *c.lapso.same_g;
  if (c.lapso.pmut) pso["pmut"] = *c.lapso.pmut;
  j["lapso"] = pso;
  j["weight"] = c.weight;
  if (c.slices) j["slices"] = {{"t", c.slices->t}, {"m", c.slices->m}, {"assignment", c.slices->assignment}};
  if (c.oa) j["oa"] = to_json(*c.oa);
  return j;
}

inline OptimizerConfig config_from_json(const json& j) {
  try {
    OptimizerConfig c;
    c.algorithm = parse_algorithm(j.value("algorithm", std::string("sa")));
    c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
    c.seed = j.value("seed", c.seed);
    c.stream_id = j.value("stream_id", c.stream_id);
    if (j.contains("sa")) {
      const auto& sa = j.at("sa");
      c.sa.alpha = sa.value("alpha", c.sa.alpha);
      c.sa.random_column = sa.value("random_column", false);
      if (sa.contains("t0")) c.sa.t0 = sa.at("t0").get<double>();
      if (sa.contains("moves_per_temperature")) c.sa.moves_per_temperature = sa.at("moves_per_temperature").get<std::size_t>();
    }
    if (j.contains("ga")) {
      const auto& ga = j.at("ga");
      c.ga.population = ga.value("population", c.ga.population);
      if (ga.contains("pmut")) c.ga.pmut = ga.at("pmut").get<double>();
    }
    if (j.contains("lapso")) {
      const auto& pso = j.at("lapso");
      c.lapso.swarm = pso.value("swarm", c.lapso.swarm);
      if (pso.contains("same_p")) c.lapso.same_p = pso.at("same_p").get<std::size_t>();
      if (pso.contains("same_g")) c.lapso.same_g = pso.at("same_g").get<std::size_t>();
      if (pso.contains("pmut")) c.lapso.pmut = pso.at("pmut").get<double>();
    }
    c.weight = j.value("weight", c.weight);
    if (j.contains("slices")) {
      const auto& s = j.at("slices");
      SliceStructure slices{s.at("t").get<std::size_t>(), s.at("m").get<std::size_t>(),
                            s.at("assignment").get<std::vector<std::size_t>>()};
      check_slices(slices);
      c.slices = std::move(slices);
    }
    if (j.contains("oa")) c.oa = oa_from_json(j.at("oa"));
    c.check();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_config, std::string("bad optimizer config: ") + e.what());
  }
}

inline std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string out = "evaluation_index,best_value\n";
  for (const auto& t : trace) out += std::to_string(t.evaluation) + "," + format_double(t.best_value) + "\n";
  return out;
}

/// Sidecar for a search run; holds everything needed to replay it.
inline json search_metadata(const SearchResult& r) {
  json j{{"n", r.best.runs()},
         {"k", r.best.factors()},
         {"generator", "search"},
         {"algorithm", std::string(to_string(r.config_echo.algorithm))},
         {"criterion", to_json(r.criterion)},
         {"value", r.value},
         {"evaluations", r.evaluations_used},
         {"elapsed_ms", r.elapsed.count()},
         {"seed", r.config_echo.seed},
         {"config", to_json(r.config_echo)},
         {"criteria", standard_criteria(r.best, r.criterion.p, r.criterion.q)}};
  if (!r.components.empty()) j["components"] = r.components;
  return j;
}

}  // namespace lhd
