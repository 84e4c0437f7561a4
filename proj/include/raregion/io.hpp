#pragma once

// Problem files and reports, both JSON.
//
// Problem file keys (all others rejected):
//   dimension      integer n
//   surfaces       [{ "label": str, "poly": str, "support": [int]?, "block": int? }]   block is 1-based
//   blocks         [[int]]                       coordinate blocks, 1-based indices
//   seed           [number] (n)                  point of the region; optional when block_seeds given
//   block_seeds    [[number]]                    one per block, in block coordinates
//   box            [[lo, hi]] (n)
//   tolerances     { zero, rank, grid_res, newton_max_iter, activation_band, coincidence_band }
//   theorem        { mode: "thm1" | "thm3", b: int }
//   moment_map     { groups: [int] (1-based, one per surface), d: [int] (one per group) }
//   reeb           { coord: int }
//   classify       { N: [[int]] }

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "raregion/decomposition.hpp"
#include "raregion/momentmap.hpp"
#include "raregion/reeb.hpp"

namespace raregion {

using json = nlohmann::json;

struct Problem {
  int dimension = 0;
  std::vector<CylinderSurface> surfaces;
  std::vector<VarSet> blocks;
  std::vector<int> assignment;
  std::optional<Point> seed;
  std::vector<Point> block_seeds;
  Box box;
  Tolerances tol;
  TheoremMode mode = TheoremMode::thm1;
  int b = 1;
  std::optional<std::vector<int>> groups;
  std::optional<std::vector<int>> sphere_dims;
  int reeb_coord = 1;
  std::vector<VarSet> classify_sets;

  Point region_seed() const {
    if (seed) return *seed;
    if (!block_seeds.empty()) return decomposition().ambient_seed();
    throw InputError("problem: no seed given");
  }

  RegionSpec region() const {
    RegionSpec s;
    s.nvars = dimension;
    s.surfaces = surfaces;
    s.seed = region_seed();
    s.box = box;
    s.tol = tol;
    return s;
  }

  DecompositionInput decomposition() const {
    if (blocks.empty()) throw InputError("problem: no blocks given");
    DecompositionInput in;
    in.nvars = dimension;
    in.surfaces = surfaces;
    in.blocks = blocks;
    in.assignment = assignment;
    in.block_seeds = block_seeds;
    in.box = box;
    in.tol = tol;
    return in;
  }

  MomentMapInput moment_map() const {
    MomentMapInput in;
    in.region = region();
    if (groups) {
      in.groups = *groups;
    } else {
      for (std::size_t j = 0; j < surfaces.size(); ++j) in.groups.push_back(static_cast<int>(j));
    }
    if (sphere_dims) {
      in.sphere_dims = *sphere_dims;
    } else {
      int count = 0;
      for (int g : in.groups) count = std::max(count, g + 1);
      in.sphere_dims.assign(count, 0);
    }
    return in;
  }
};

namespace detail {

inline void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw InputError(where + ": unknown key '" + it.key() + "'");
  }
}

inline VarSet var_set(const json& j, int n, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an index list");
  std::vector<int> idx;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw InputError(where + ": indices must be integers");
    const int i = v.get<int>();
    if (i < 1 || i > n) throw InputError(where + ": index " + std::to_string(i) + " out of range");
    idx.push_back(i);
  }
  const std::size_t before = idx.size();
  VarSet s(idx);
  if (static_cast<std::size_t>(s.size()) != before) throw InputError(where + ": repeated index");
  return s;
}

inline Point point(const json& j, std::size_t len, const std::string& where) {
  if (!j.is_array() || j.size() != len) throw InputError(where + ": expected " + std::to_string(len) + " numbers");
  Point p;
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError(where + ": expected numbers");
    p.push_back(v.get<double>());
  }
  return p;
}

}  // namespace detail

inline Problem load_problem(const json& j) {
  using detail::only_keys;
  only_keys(j, {"dimension", "surfaces", "blocks", "seed", "block_seeds", "box", "tolerances", "theorem", "moment_map",
                "reeb", "classify"},
            "problem");
  Problem p;
  try {
    if (!j.contains("dimension") || !j["dimension"].is_number_integer()) throw InputError("problem: 'dimension' required");
    p.dimension = j["dimension"].get<int>();
    const int n = p.dimension;
    if (n < 1 || n > 16) throw InputError("problem: dimension must lie in 1..16");

    if (!j.contains("box")) throw InputError("problem: 'box' required");
    if (!j["box"].is_array() || static_cast<int>(j["box"].size()) != n) throw InputError("box: one interval per coordinate");
    std::vector<Interval> axes;
    for (const auto& iv : j["box"]) {
      const Point lh = detail::point(iv, 2, "box");
      axes.push_back({lh[0], lh[1]});
    }
    try {
      p.box = Box(axes);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }

    if (j.contains("blocks")) {
      if (!j["blocks"].is_array()) throw InputError("blocks: expected a list");
      for (const auto& bl : j["blocks"]) p.blocks.push_back(detail::var_set(bl, n, "blocks"));
    }

    if (!j.contains("surfaces") || !j["surfaces"].is_array() || j["surfaces"].empty())
      throw InputError("problem: 'surfaces' must be a non-empty list");
    std::set<std::string> labels;
    for (const auto& s : j["surfaces"]) {
      only_keys(s, {"label", "poly", "support", "block"}, "surface");
      if (!s.contains("poly") || !s["poly"].is_string()) throw InputError("surface: 'poly' string required");
      const std::string label =
          s.contains("label") ? s["label"].get<std::string>() : "S" + std::to_string(p.surfaces.size() + 1);
      if (!labels.insert(label).second) throw InputError("surface: duplicate label " + label);
      Polynomial f = parse(s["poly"].get<std::string>(), n);
      if (s.contains("support")) p.surfaces.emplace_back(label, std::move(f), detail::var_set(s["support"], n, "support"));
      else p.surfaces.emplace_back(label, std::move(f));
      if (s.contains("block")) {
        if (!s["block"].is_number_integer()) throw InputError("surface: 'block' must be an integer");
        const int b = s["block"].get<int>();
        if (b < 1 || b > static_cast<int>(p.blocks.size())) throw InputError("surface " + label + ": block out of range");
        p.assignment.push_back(b - 1);
      } else {
        p.assignment.push_back(-1);
      }
    }

    if (j.contains("seed")) p.seed = detail::point(j["seed"], n, "seed");
    if (j.contains("block_seeds")) {
      if (!j["block_seeds"].is_array() || j["block_seeds"].size() != p.blocks.size())
        throw InputError("block_seeds: one seed per block required");
      for (std::size_t i = 0; i < p.blocks.size(); ++i)
        p.block_seeds.push_back(detail::point(j["block_seeds"][i], p.blocks[i].size(), "block_seeds"));
    }

    if (j.contains("tolerances")) {
      const auto& t = j["tolerances"];
      only_keys(t, {"zero", "rank", "grid_res", "newton_max_iter", "activation_band", "coincidence_band"}, "tolerances");
      if (t.contains("zero")) p.tol.zero_tol = t["zero"].get<double>();
      if (t.contains("rank")) p.tol.rank_rel_tol = t["rank"].get<double>();
      if (t.contains("grid_res")) p.tol.grid_res = t["grid_res"].get<int>();
      if (t.contains("newton_max_iter")) p.tol.newton_max_iter = t["newton_max_iter"].get<int>();
      if (t.contains("activation_band")) p.tol.activation_band = t["activation_band"].get<double>();
      if (t.contains("coincidence_band")) p.tol.coincidence_band = t["coincidence_band"].get<double>();
    }

    if (j.contains("theorem")) {
      const auto& t = j["theorem"];
      only_keys(t, {"mode", "b"}, "theorem");
      if (t.contains("mode")) {
        const std::string m = t["mode"].get<std::string>();
        if (m == "thm1") p.mode = TheoremMode::thm1;
        else if (m == "thm3") p.mode = TheoremMode::thm3;
        else throw InputError("theorem: mode must be thm1 or thm3");
      }
      if (t.contains("b")) p.b = t["b"].get<int>();
    }

    if (j.contains("moment_map")) {
      const auto& m = j["moment_map"];
      only_keys(m, {"groups", "d"}, "moment_map");
      if (m.contains("groups")) {
        std::vector<int> g;
        for (const auto& v : m["groups"]) g.push_back(v.get<int>() - 1);
        p.groups = g;
      }
      if (m.contains("d")) p.sphere_dims = m["d"].get<std::vector<int>>();
    }

    if (j.contains("reeb")) {
      only_keys(j["reeb"], {"coord"}, "reeb");
      if (j["reeb"].contains("coord")) p.reeb_coord = j["reeb"]["coord"].get<int>();
    }

    if (j.contains("classify")) {
      only_keys(j["classify"], {"N"}, "classify");
      if (j["classify"].contains("N"))
        for (const auto& s : j["classify"]["N"]) p.classify_sets.push_back(detail::var_set(s, n, "classify"));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("problem: ") + e.what());
  }
  return p;
}

inline Problem load_problem_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return load_problem(j);
}

// ---------------------------------------------------------------------------
// Reports

inline double round9(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

inline json point_json(const Point& p) {
  json a = json::array();
  for (double v : p) a.push_back(round9(v));
  return a;
}

inline json witnesses_json(const std::vector<Witness>& ws) {
  json out = json::array();
  for (const auto& w : ws) {
    json pts = json::array();
    for (const auto& p : w.points) pts.push_back(point_json(p));
    out.push_back({{"condition", w.condition}, {"diagnostic", w.diagnostic}, {"points", pts}});
  }
  return out;
}

inline json report_json(const ConditionReport& r) {
  json conds = json::array();
  for (const auto& e : r.conditions) conds.push_back({{"name", e.name}, {"verdict", to_string(e.verdict)}});
  json margins = json::object();
  for (const auto& [k, v] : r.margins) margins[k] = round9(v);
  return {{"overall", to_string(r.overall())},
          {"exit_code", exit_code(r.overall())},
          {"conditions", conds},
          {"witnesses", witnesses_json(r.witnesses)},
          {"caveats", r.caveats},
          {"margins", margins}};
}

inline ConditionReport region_report(const Definition1Report& d) {
  ConditionReport r;
  r.set("def1-cond1", d.cond1);
  r.set("def1-cond2", d.cond2);
  r.witnesses = d.witnesses;
  r.caveats = d.caveats;
  r.margins["min-rank-ratio"] = d.min_rank_ratio;
  r.margins["boundary-points"] = static_cast<double>(d.boundary_points);
  r.margins["multi-active-points"] = static_cast<double>(d.multi_active_points);
  return r;
}

inline std::string format_point(const Point& p) {
  std::string s;
  char buf[32];
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.9g", std::abs(p[k]) < 1e-12 ? 0.0 : p[k]);
    s += (k ? " " : "") + std::string(buf);
  }
  return s;
}

// One line per point: coordinates ; active labels ; N:flag entries.
inline std::string point_dump(const std::vector<BoundaryPointRecord>& recs, const std::vector<CylinderSurface>& surfaces) {
  std::string out = "# coordinates ; active surfaces ; classification\n";
  for (const auto& r : recs) {
    out += format_point(r.point) + " ; " + active_labels(r.active, surfaces) + " ; " + (r.is_normal() ? "normal" : "non-normal");
    for (const auto& [N, f] : r.flags) out += " " + N.to_string() + ":" + to_string(f);
    out += "\n";
  }
  return out;
}

inline json reeb_json(const ReebDigraph& g) {
  json vs = json::array(), es = json::array();
  for (const auto& v : g.vertices)
    vs.push_back({{"value", round9(v.value)}, {"kind", to_string(v.kind)}, {"component", v.component}, {"snapped", v.snapped}});
  for (const auto& e : g.edges) es.push_back({{"from", e.from}, {"to", e.to}, {"lo", round9(e.lo)}, {"hi", round9(e.hi)}});
  return {{"coord", g.coord},
          {"vertices", vs},
          {"edges", es},
          {"warnings", g.warnings},
          {"acyclic", g.acyclic()},
          {"monotone", g.monotone()},
          {"euler_consistent", g.euler_consistent()},
          {"ambiguous_order", g.ambiguous_order}};
}

}  // namespace raregion
