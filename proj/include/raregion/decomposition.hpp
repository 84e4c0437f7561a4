#pragma once

// Regions assembled from coordinate blocks: each block carries a lower-dimensional region,
// and the ambient region is the intersection of their preimages. Verifies the structural
// conditions on the blocks and the cross-block conditions on critical, singular and
// non-normal boundary points.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "raregion/region.hpp"

namespace raregion {

struct BlockFamily {
  int n = 0;
  std::vector<VarSet> blocks;

  void validate() const {
    if (blocks.empty()) throw InputError("blocks: empty family");
    VarSet all;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].empty()) throw InputError("blocks: block " + std::to_string(i + 1) + " is empty");
      if (blocks[i].front() < 1 || blocks[i].back() > n)
        throw InputError("blocks: block " + blocks[i].to_string() + " out of range");
      all = all.unite(blocks[i]);
      for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (i == j) continue;
        if (blocks[i] == blocks[j]) throw InputError("blocks: duplicate block " + blocks[i].to_string());
        if (blocks[i].subset_of(blocks[j]))
          throw InputError("blocks: " + blocks[i].to_string() + " is contained in " + blocks[j].to_string());
      }
    }
    if (!(all == VarSet::range(1, n))) throw InputError("blocks: union does not cover every coordinate");
  }
};

inline VarSet to_local(const VarSet& N, const VarSet& A) {
  std::vector<int> out;
  for (int i : N) {
    const int p = A.position(i);
    if (p < 0) throw std::invalid_argument("to_local: " + N.to_string() + " not inside " + A.to_string());
    out.push_back(p + 1);
  }
  return VarSet(out);
}

struct DecompositionInput {
  int nvars = 0;
  std::vector<CylinderSurface> surfaces;
  std::vector<VarSet> blocks;
  std::vector<int> assignment;      // surface -> block (0-based); -1 when unassigned
  std::vector<Point> block_seeds;   // in block coordinates
  Box box;
  Tolerances tol;

  BlockFamily family() const { return {nvars, blocks}; }

  void validate() const {
    family().validate();
    if (box.dim() != nvars) throw InputError("decomposition: box dimension differs from ambient dimension");
    try {
      tol.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    if (assignment.size() != surfaces.size()) throw InputError("decomposition: assignment length differs from surface count");
    for (std::size_t j = 0; j < surfaces.size(); ++j) {
      if (surfaces[j].f.nvars() != nvars) throw InputError("decomposition: surface " + surfaces[j].label + " has the wrong dimension");
      if (assignment[j] < -1 || assignment[j] >= static_cast<int>(blocks.size()))
        throw InputError("decomposition: surface " + surfaces[j].label + " assigned to a missing block");
    }
    if (block_seeds.size() != blocks.size()) throw InputError("decomposition: one seed per block required");
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (static_cast<int>(block_seeds[i].size()) != blocks[i].size())
        throw InputError("decomposition: seed of block " + blocks[i].to_string() + " has the wrong length");
    ambient_seed();
  }

  Point ambient_seed() const {
    Point seed(nvars, 0.0);
    std::vector<std::uint8_t> set(nvars, 0);
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (int k = 0; k < blocks[i].size(); ++k) {
        const int c = blocks[i].indices()[k] - 1;
        const double v = block_seeds[i][k];
        if (set[c] && seed[c] != v)
          throw InputError("decomposition: block seeds disagree on coordinate x" + std::to_string(c + 1));
        seed[c] = v;
        set[c] = 1;
      }
    return seed;
  }

  std::vector<int> surfaces_of(int block) const {
    std::vector<int> out;
    for (std::size_t j = 0; j < assignment.size(); ++j)
      if (assignment[j] == block) out.push_back(static_cast<int>(j));
    return out;
  }

  RegionSpec ambient_spec() const {
    RegionSpec s;
    s.nvars = nvars;
    s.surfaces = surfaces;
    s.seed = ambient_seed();
    s.box = box;
    s.tol = tol;
    return s;
  }

  // Region of block i in block coordinates; nullopt when the block has no surfaces or a
  // surface depends on coordinates outside the block.
  std::optional<RegionSpec> block_spec(int i) const {
    const VarSet& A = blocks[i];
    RegionSpec s;
    s.nvars = A.size();
    for (int j : surfaces_of(i)) {
      if (!support(surfaces[j].f).subset_of(A)) return std::nullopt;
      s.surfaces.emplace_back(surfaces[j].label, relabel(surfaces[j].f, A));
    }
    if (s.surfaces.empty()) return std::nullopt;
    s.seed = block_seeds[i];
    s.box = box.project(A);
    s.tol = tol;
    return s;
  }
};

// A point of a block boundary with the system that characterizes it: zero set of the stratum C,
// plus the criticality condition for N (block coordinates) when present.
struct SpecialPoint {
  Point x;
  std::vector<int> C;
  std::optional<VarSet> N;
};

enum class Overall { certified, refuted, indeterminate };

inline const char* to_string(Overall o) {
  switch (o) {
    case Overall::certified: return "certified within box";
    case Overall::refuted: return "refuted";
    case Overall::indeterminate: return "indeterminate";
  }
  return "?";
}

inline int exit_code(Overall o) {
  switch (o) {
    case Overall::certified: return 0;
    case Overall::refuted: return 1;
    case Overall::indeterminate: return 2;
  }
  return 2;
}

struct ConditionEntry {
  std::string name;
  Verdict verdict = Verdict::not_applicable;
};

struct ConditionReport {
  std::vector<ConditionEntry> conditions;
  std::vector<Witness> witnesses;
  std::vector<std::string> caveats;
  std::map<std::string, double> margins;

  void set(const std::string& name, Verdict v) {
    for (auto& e : conditions)
      if (e.name == name) {
        e.verdict = v;
        return;
      }
    conditions.push_back({name, v});
  }
  Verdict get(const std::string& name) const {
    for (const auto& e : conditions)
      if (e.name == name) return e.verdict;
    throw std::out_of_range("no condition " + name);
  }
  bool has(const std::string& name) const {
    for (const auto& e : conditions)
      if (e.name == name) return true;
    return false;
  }
  void caveat(const std::string& c) {
    if (std::find(caveats.begin(), caveats.end(), c) == caveats.end()) caveats.push_back(c);
  }

  Overall overall() const {
    Verdict v = Verdict::not_applicable;
    for (const auto& e : conditions) v = combine(v, e.verdict);
    if (v == Verdict::fail) return Overall::refuted;
    if (v == Verdict::indeterminate) return Overall::indeterminate;
    return Overall::certified;
  }
};

class Decomposition {
 public:
  explicit Decomposition(DecompositionInput in) : in_(std::move(in)) {
    in_.validate();
    analyses_.resize(in_.blocks.size());
    built_.assign(in_.blocks.size(), 0);
  }

  const DecompositionInput& input() const { return in_; }
  int block_count() const { return static_cast<int>(in_.blocks.size()); }
  const VarSet& block(int i) const { return in_.blocks[i]; }

  bool block_available(int i) const { return analysis(i) != nullptr; }

  const RegionAnalysis* analysis(int i) const {
    if (!built_[i]) {
      built_[i] = 1;
      if (auto spec = in_.block_spec(i)) analyses_[i].emplace(std::move(*spec));
    }
    return analyses_[i] ? &*analyses_[i] : nullptr;
  }

  // Points of block i critical for the ambient coordinate set N (N inside the block);
  // every point of a stratum too small to be anything but critical is included.
  const std::vector<SpecialPoint>& critical(int i, const VarSet& N) const {
    const auto key = std::make_pair(i, N);
    auto it = critical_.find(key);
    if (it != critical_.end()) return it->second;
    std::vector<SpecialPoint> out;
    if (const RegionAnalysis* a = analysis(i)) {
      const VarSet local = to_local(N, in_.blocks[i]);
      const CriticalSet cs = find_critical(*a, local);
      for (const auto& p : cs.points) out.push_back({p.point, p.active, local});
      for (const auto& r : a->records())
        if (std::find(cs.degenerate_strata.begin(), cs.degenerate_strata.end(), r.active) != cs.degenerate_strata.end())
          out.push_back({r.point, r.active, std::nullopt});
    }
    return critical_.emplace(key, std::move(out)).first->second;
  }

  // Critical points restricted to normal points (one active surface).
  std::vector<SpecialPoint> singular_normal(int i, const VarSet& N) const {
    std::vector<SpecialPoint> out;
    for (const auto& p : critical(i, N))
      if (p.C.size() == 1) out.push_back(p);
    return out;
  }

  std::vector<SpecialPoint> non_normal(int i) const {
    std::vector<SpecialPoint> out;
    if (const RegionAnalysis* a = analysis(i))
      for (const auto& r : a->records())
        if (r.active.size() >= 2) out.push_back({r.point, r.active, std::nullopt});
    return out;
  }

  // Critical points for every one-element subset of `coords` together with non-normal points.
  std::vector<SpecialPoint> non_n_points(int i, const VarSet& coords) const {
    std::vector<SpecialPoint> out = non_normal(i);
    for (int k : coords) {
      const auto& c = critical(i, VarSet{k});
      out.insert(out.end(), c.begin(), c.end());
    }
    return out;
  }

  double spacing(int i) const {
    const RegionAnalysis* a = analysis(i);
    return a ? a->grid().max_spacing() : 0.0;
  }

 private:
  DecompositionInput in_;
  mutable std::vector<std::optional<RegionAnalysis>> analyses_;
  mutable std::vector<std::uint8_t> built_;
  mutable std::map<std::pair<int, VarSet>, std::vector<SpecialPoint>> critical_;
};

// ---------------------------------------------------------------------------
// Coincidences between special points of two blocks on shared ambient coordinates.

struct Coincidence {
  bool hit = false;
  bool near_miss = false;
  Point a, b;  // block-local points (refined on a hit)
  double gap = std::numeric_limits<double>::infinity();
};

inline double coupling_gap(const Point& p, const VarSet& A, const Point& q, const VarSet& B, const VarSet& P) {
  double g = 0;
  for (int c : P) g = std::max(g, std::abs(p[A.position(c)] - q[B.position(c)]));
  return g;
}

inline bool valid_special(const RegionAnalysis& a, const Point& x, const std::vector<int>& C) {
  return a.interior_of_box(x) && a.in_closure(x) && a.active_at(x, a.tol().zero_tol) == C;
}

// Solves both point systems together with equality on the coupled coordinates.
inline std::optional<std::pair<Point, Point>> joint_solve(const Decomposition& d, int i, const SpecialPoint& p, int j,
                                                          const SpecialPoint& q, const VarSet& P) {
  const RegionAnalysis& ai = *d.analysis(i);
  const RegionAnalysis& aj = *d.analysis(j);
  const VarSet& A = d.block(i);
  const VarSet& B = d.block(j);
  const StratumSystem si(ai.models(), p.C, p.N, A.size());
  const StratumSystem sj(aj.models(), q.C, q.N, B.size());
  const int ui = si.unknowns(), uj = sj.unknowns(), ei = si.equations(), ej = sj.equations();
  const int eq = ei + ej + P.size();
  auto fn = [&](const Eigen::VectorXd& z, Eigen::VectorXd& F, Eigen::MatrixXd& J) {
    F.setZero(eq);
    J.setZero(eq, ui + uj);
    si.eval(z.data(), F.segment(0, ei), J.block(0, 0, ei, ui));
    sj.eval(z.data() + ui, F.segment(ei, ej), J.block(ei, ui, ej, uj));
    int row = ei + ej;
    for (int c : P) {
      const int a = A.position(c), b = B.position(c);
      F[row] = z[a] - z[ui + b];
      J(row, a) = 1.0;
      J(row, ui + b) = -1.0;
      ++row;
    }
  };
  Eigen::VectorXd z(ui + uj);
  si.initial(p.x, z.data());
  sj.initial(q.x, z.data() + ui);
  const Tolerances& t = ai.tol();
  const SolveResult res = gauss_newton(fn, z, t.newton_max_iter, t.zero_tol * 1e-4);
  if (!(res.residual <= t.zero_tol)) return std::nullopt;
  Point x(res.x.data(), res.x.data() + A.size());
  Point y(res.x.data() + ui, res.x.data() + ui + B.size());
  if (!valid_special(ai, x, p.C) || !valid_special(aj, y, q.C)) return std::nullopt;
  return std::make_pair(std::move(x), std::move(y));
}

inline Coincidence find_coincidence(const Decomposition& d, int i, const SpecialPoint& p, int j,
                                    const std::vector<SpecialPoint>& targets, const VarSet& P) {
  Coincidence out;
  if (targets.empty()) return out;
  if (P.empty()) {
    out.hit = true;
    out.a = p.x;
    out.b = targets.front().x;
    out.gap = 0;
    return out;
  }
  const Tolerances& t = d.input().tol;
  std::vector<std::pair<double, std::size_t>> gaps;
  for (std::size_t k = 0; k < targets.size(); ++k)
    gaps.emplace_back(coupling_gap(p.x, d.block(i), targets[k].x, d.block(j), P), k);
  std::sort(gaps.begin(), gaps.end());
  out.gap = gaps.front().first;
  if (out.gap <= t.dedup_radius()) {
    out.hit = true;
    out.a = p.x;
    out.b = targets[gaps.front().second].x;
    return out;
  }
  const double reach = 5.0 * std::max(d.spacing(i), d.spacing(j));
  for (std::size_t k = 0; k < std::min<std::size_t>(3, gaps.size()) && gaps[k].first <= reach; ++k) {
    if (auto sol = joint_solve(d, i, p, j, targets[gaps[k].second], P)) {
      out.hit = true;
      out.gap = coupling_gap(sol->first, d.block(i), sol->second, d.block(j), P);
      out.a = std::move(sol->first);
      out.b = std::move(sol->second);
      return out;
    }
  }
  out.near_miss = out.gap <= t.coincidence_band;
  return out;
}

inline std::string point_text(const Point& p) {
  std::string s = "(";
  char buf[32];
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.9g", std::abs(p[k]) < 1e-12 ? 0.0 : p[k]);
    s += (k ? ", " : "") + std::string(buf);
  }
  return s + ")";
}

// Scans sources of block i against targets of block j; fail on any coincidence.
inline Verdict scan_pairs(const Decomposition& d, const std::string& cond, int i, const std::vector<SpecialPoint>& sources,
                          const std::string& source_kind, int j, const std::vector<SpecialPoint>& targets,
                          const std::string& target_kind, const VarSet& P, ConditionReport& rep) {
  Verdict v = Verdict::pass;
  int reported = 0;
  std::vector<Point> seen;
  for (const auto& s : sources) {
    const Coincidence c = find_coincidence(d, i, s, j, targets, P);
    if (c.hit) {
      v = Verdict::fail;
      bool dup = false;
      for (const auto& q : seen) dup = dup || euclidean(q, c.a) <= 1e-6;
      if (dup || reported >= 4) continue;
      seen.push_back(c.a);
      ++reported;
      rep.witnesses.push_back({cond, {c.a, c.b},
                               source_kind + " of block " + d.block(i).to_string() + " at " + point_text(c.a) + " meets " +
                                   target_kind + " of block " + d.block(j).to_string() + " at " + point_text(c.b) +
                                   " on coordinates " + P.to_string()});
    } else if (c.near_miss) {
      v = combine(v, Verdict::indeterminate);
      rep.witnesses.push_back({cond, {s.x}, source_kind + " of block " + d.block(i).to_string() +
                                                " lies within the coincidence band of block " + d.block(j).to_string()});
    }
  }
  return v;
}

// Sampled fiber check: boundary of block j sliced at the coupled values of each source.
inline Verdict slice_corroborate(const Decomposition& d, const std::string& cond, int i,
                                 const std::vector<SpecialPoint>& sources, int j, const VarSet& P,
                                 const std::vector<VarSet>& Ns_ambient, bool require_normal, ConditionReport& rep) {
  if (P.empty() || sources.empty()) return Verdict::pass;
  const RegionAnalysis& aj = *d.analysis(j);
  const VarSet& A = d.block(i);
  const VarSet& B = d.block(j);
  std::vector<VarSet> Ns;
  for (const auto& N : Ns_ambient) Ns.push_back(to_local(N, B));
  Verdict v = Verdict::pass;
  const std::size_t step = std::max<std::size_t>(1, sources.size() / 16);
  for (std::size_t k = 0; k < sources.size(); k += step) {
    std::vector<std::pair<int, double>> pins;
    for (int c : P) pins.emplace_back(B.position(c), sources[k].x[A.position(c)]);
    const SliceResult sl = slice_boundary(aj, pins, Ns);
    for (const auto& r : sl.points) {
      bool bad = require_normal && !r.is_normal();
      bool ambiguous = false;
      for (const auto& N : Ns) {
        const PointFlag f = r.flag(N);
        if (f == PointFlag::critical || f == PointFlag::not_applicable) bad = true;
        if (f == PointFlag::indeterminate) ambiguous = true;
      }
      if (bad || ambiguous) {
        v = combine(v, Verdict::indeterminate);
        rep.witnesses.push_back({cond, {sources[k].x, r.point},
                                 std::string(bad ? "sampled fiber point fails the point test"
                                                 : "sampled fiber point is within the rank ambiguity band") +
                                     " in block " + B.to_string()});
        return v;
      }
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Conditions

inline void check_prar(const Decomposition& d, ConditionReport& rep) {
  const auto& in = d.input();
  Verdict v1 = Verdict::pass, v2 = Verdict::pass, v3 = Verdict::pass, v4 = Verdict::pass;
  for (std::size_t j = 0; j < in.surfaces.size(); ++j)
    if (in.assignment[j] < 0) {
      v1 = Verdict::fail;
      rep.witnesses.push_back({"prar-1", {}, "surface " + in.surfaces[j].label + " is not assigned to a block"});
    }
  for (int i = 0; i < d.block_count(); ++i) {
    const auto own = in.surfaces_of(i);
    if (own.empty()) {
      v1 = Verdict::fail;
      rep.witnesses.push_back({"prar-1", {}, "block " + d.block(i).to_string() + " has no surface"});
    }
    bool full = false;
    for (int j : own) {
      const CylinderSurface& s = in.surfaces[j];
      if (!s.support.subset_of(d.block(i))) {
        v2 = Verdict::fail;
        rep.witnesses.push_back({"prar-2", {}, "support " + s.support.to_string() + " of " + s.label +
                                                   " is not inside block " + d.block(i).to_string()});
      }
      if (s.support == d.block(i)) full = true;
      if (s.support_overridden)
        rep.caveat("support of " + s.label + " overridden to " + s.support.to_string());
    }
    if (!own.empty() && !full) {
      v3 = Verdict::fail;
      rep.witnesses.push_back({"prar-3", {}, "no surface of block " + d.block(i).to_string() + " depends on all its variables"});
    }
    if (own.empty()) continue;
    const RegionAnalysis* a = d.analysis(i);
    if (!a) {
      v4 = combine(v4, Verdict::indeterminate);
      rep.witnesses.push_back({"prar-4", {}, "block " + d.block(i).to_string() + " region cannot be formed in block coordinates"});
      continue;
    }
    const Definition1Report r = check_definition1(*a);
    v4 = combine(v4, r.overall());
    for (const auto& w : r.witnesses)
      rep.witnesses.push_back({"prar-4", w.points, "block " + d.block(i).to_string() + " " + w.condition + ": " + w.diagnostic});
    for (const auto& c : r.caveats) rep.caveat("block " + d.block(i).to_string() + ": " + c);
  }
  rep.set("prar-1", v1);
  rep.set("prar-2", v2);
  rep.set("prar-3", v3);
  rep.set("prar-4", v4);
}

inline Verdict check_b_intersection(const DecompositionInput& in, int b, ConditionReport* rep = nullptr) {
  Verdict v = Verdict::pass;
  for (std::size_t i = 0; i < in.blocks.size(); ++i)
    for (std::size_t j = i + 1; j < in.blocks.size(); ++j) {
      const VarSet common = in.blocks[i].intersect(in.blocks[j]);
      if (common.size() > b) {
        v = Verdict::fail;
        if (rep)
          rep->witnesses.push_back({"b-intersection", {}, in.blocks[i].to_string() + " and " + in.blocks[j].to_string() +
                                                              " share " + common.to_string()});
      }
    }
  return v;
}

inline bool all_blocks_available(const Decomposition& d) {
  for (int i = 0; i < d.block_count(); ++i)
    if (!d.block_available(i)) return false;
  return true;
}

inline bool shared_elsewhere(const Decomposition& d, int i, const VarSet& N) {
  for (int j = 0; j < d.block_count(); ++j)
    if (j != i && N.subset_of(d.block(j))) return true;
  return false;
}

inline Verdict check_cond6(const Decomposition& d, ConditionReport& rep) {
  Verdict v = Verdict::pass;
  for (int i = 0; i < d.block_count(); ++i)
    for (int k : d.block(i)) {
      const VarSet N{k};
      if (!shared_elsewhere(d, i, N)) continue;
      const auto& sources = d.critical(i, N);
      for (int j = 0; j < d.block_count(); ++j) {
        if (j == i) continue;
        const VarSet P = d.block(i).intersect(d.block(j));
        if (N.subset_of(d.block(j))) {
          const auto& crit = d.critical(j, N);
          auto targets = d.non_normal(j);
          targets.insert(targets.end(), crit.begin(), crit.end());
          v = combine(v, scan_pairs(d, "cond-6", i, sources, N.to_string() + "-critical point", j, targets,
                                    N.to_string() + "-critical or non-normal point", P, rep));
          v = combine(v, slice_corroborate(d, "cond-6", i, sources, j, P, {N}, false, rep));
        } else {
          v = combine(v, scan_pairs(d, "cond-6", i, sources, N.to_string() + "-critical point", j,
                                    d.non_n_points(j, d.block(j)), "one-coordinate critical or non-normal point", P, rep));
        }
      }
    }
  return v;
}

inline Verdict check_cond7(const Decomposition& d, ConditionReport& rep) {
  Verdict v = Verdict::pass;
  for (int i = 0; i < d.block_count(); ++i) {
    const auto sources = d.non_normal(i);
    if (sources.empty()) continue;
    for (int j = 0; j < d.block_count(); ++j) {
      if (j == i) continue;
      const VarSet P = d.block(i).intersect(d.block(j));
      if (P.empty()) continue;
      v = combine(v, scan_pairs(d, "cond-7", i, sources, "non-normal point", j, d.non_n_points(j, P),
                                "one-coordinate critical or non-normal point", P, rep));
      std::vector<VarSet> Ns;
      for (int k : P) Ns.push_back(VarSet{k});
      v = combine(v, slice_corroborate(d, "cond-7", i, sources, j, P, Ns, false, rep));
    }
  }
  return v;
}

// Two-coordinate blocks: special values of a shared coordinate are the values at critical
// and non-normal points; blocks sharing the coordinate must have disjoint special values.
inline Verdict check_thm2(const Decomposition& d, ConditionReport& rep) {
  for (int i = 0; i < d.block_count(); ++i)
    if (d.block(i).size() > 2) return Verdict::not_applicable;
  const double sep = d.input().tol.dedup_radius();
  auto values = [&](int i, int k) {
    std::vector<double> out;
    const int pos = d.block(i).position(k);
    for (const auto& p : d.critical(i, VarSet{k})) out.push_back(p.x[pos]);
    for (const auto& p : d.non_normal(i)) out.push_back(p.x[pos]);
    std::sort(out.begin(), out.end());
    return out;
  };
  Verdict v = Verdict::pass;
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.block_count(); ++i)
    for (int j = i + 1; j < d.block_count(); ++j)
      for (int k : d.block(i).intersect(d.block(j))) {
        const auto u = values(i, k), w = values(j, k);
        double best = std::numeric_limits<double>::infinity(), at = 0;
        for (double a : u)
          for (double b : w)
            if (std::abs(a - b) < best) {
              best = std::abs(a - b);
              at = a;
            }
        margin = std::min(margin, best);
        if (best <= sep) {
          v = Verdict::fail;
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.9g", at);
          rep.witnesses.push_back({"thm2", {}, "blocks " + d.block(i).to_string() + " and " + d.block(j).to_string() +
                                                   " share the special value x" + std::to_string(k) + " = " + buf});
        } else if (best <= d.input().tol.coincidence_band) {
          v = combine(v, Verdict::indeterminate);
          rep.witnesses.push_back({"thm2", {}, "special values of x" + std::to_string(k) + " in blocks " +
                                                   d.block(i).to_string() + " and " + d.block(j).to_string() +
                                                   " lie within the coincidence band"});
        }
      }
  if (std::isfinite(margin)) rep.margins["thm2-min-separation"] = margin;
  return v;
}

inline Verdict check_cond8(const Decomposition& d, int b, ConditionReport& rep) {
  Verdict v = Verdict::pass;
  for (int i = 0; i < d.block_count(); ++i)
    for (int size = 1; size <= std::min(b, d.block(i).size()); ++size)
      for (const VarSet& N : subsets_of_size(d.block(i), size)) {
        if (!shared_elsewhere(d, i, N)) continue;
        const auto sources = d.singular_normal(i, N);
        if (sources.empty()) continue;
        for (int j = 0; j < d.block_count(); ++j) {
          if (j == i) continue;
          const VarSet P = d.block(i).intersect(d.block(j));
          if (N.subset_of(d.block(j))) {
            v = combine(v, scan_pairs(d, "cond-8", i, sources, N.to_string() + "-singular normal point", j,
                                      d.non_normal(j), "non-normal point", P, rep));
            v = combine(v, slice_corroborate(d, "cond-8", i, sources, j, P, {}, true, rep));
          } else {
            v = combine(v, scan_pairs(d, "cond-8", i, sources, N.to_string() + "-singular normal point", j,
                                      d.non_n_points(j, d.block(j)), "one-coordinate critical or non-normal point", P,
                                      rep));
          }
        }
      }
  return v;
}

inline NormalFrame ambient_frame(const Decomposition& d, int i, const Point& x, const std::vector<int>& C) {
  const RegionAnalysis& a = *d.analysis(i);
  const VarSet& A = d.block(i);
  NormalFrame f = normal_frame(x, C, a.models(), a.tol());
  const int n = d.input().nvars;
  Point amb(n, 0.0);
  for (int k = 0; k < A.size(); ++k) amb[A.indices()[k] - 1] = x[k];
  for (auto& g : f.gradients) {
    Eigen::VectorXd lifted = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < A.size(); ++k) lifted[A.indices()[k] - 1] = g[k];
    g = std::move(lifted);
  }
  f.point = std::move(amb);
  return f;
}

inline Verdict check_cond9(const Decomposition& d, int b, ConditionReport& rep) {
  Verdict v = Verdict::pass;
  const Tolerances& t = d.input().tol;
  double margin = std::numeric_limits<double>::infinity();
  std::set<VarSet> done;
  for (int i = 0; i < d.block_count(); ++i)
    for (int size = 1; size <= std::min(b, d.block(i).size()); ++size)
      for (const VarSet& N : subsets_of_size(d.block(i), size)) {
        if (!shared_elsewhere(d, i, N) || !done.insert(N).second) continue;
        std::vector<int> holders;
        for (int j = 0; j < d.block_count(); ++j)
          if (N.subset_of(d.block(j))) holders.push_back(j);
        for (std::size_t x = 0; x < holders.size(); ++x)
          for (std::size_t y = x + 1; y < holders.size(); ++y) {
            const int bi = holders[x], bj = holders[y];
            const auto sources = d.singular_normal(bi, N);
            const auto targets = d.singular_normal(bj, N);
            std::vector<Point> seen;
            for (const auto& s : sources) {
              const Coincidence c = find_coincidence(d, bi, s, bj, targets, N);
              if (c.near_miss) {
                v = combine(v, Verdict::indeterminate);
                rep.witnesses.push_back({"cond-9", {s.x}, "singular points of " + N.to_string() +
                                                              " lie within the coincidence band"});
              }
              if (!c.hit) continue;
              bool dup = false;
              for (const auto& q : seen) dup = dup || euclidean(q, c.a) <= 1e-6;
              if (dup) continue;
              seen.push_back(c.a);
              const Point ya = c.a, yb = c.b;
              const std::vector<int> ca = d.analysis(bi)->active_at(ya, t.zero_tol);
              const std::vector<int> cb = d.analysis(bj)->active_at(yb, t.zero_tol);
              const NormalFrame frames[] = {ambient_frame(d, bi, ya, ca), ambient_frame(d, bj, yb, cb)};
              const IndependenceResult r = projected_independence(frames, N, t);
              margin = std::min(margin, r.smallest_singular);
              const std::string where = "blocks " + d.block(bi).to_string() + " and " + d.block(bj).to_string() +
                                        " at " + point_text(ya) + " / " + point_text(yb);
              char buf[48];
              std::snprintf(buf, sizeof buf, "%.3g", r.smallest_singular);
              if (!r.independent) {
                v = Verdict::fail;
                rep.witnesses.push_back({"cond-9", {ya, yb}, "projected normals dependent on " + N.to_string() + " for " +
                                                                 where + " (smallest singular value " + buf + ")" +
                                                                 (r.diagnostic.empty() ? "" : "; " + r.diagnostic)});
              } else if (r.indeterminate) {
                v = combine(v, Verdict::indeterminate);
                rep.witnesses.push_back({"cond-9", {ya, yb}, "projected normals nearly dependent for " + where});
              } else {
                rep.witnesses.push_back({"cond-9-margin", {ya, yb}, "projected normals on " + N.to_string() +
                                                                        " independent for " + where +
                                                                        " (smallest singular value " + buf + ")"});
              }
            }
          }
      }
  if (std::isfinite(margin)) rep.margins["cond9-min-singular"] = margin;
  return v;
}

enum class TheoremMode { thm1, thm3 };

inline ConditionReport assemble(const DecompositionInput& input, TheoremMode mode, int b) {
  const Decomposition d(input);
  const int n = input.nvars;
  if (mode == TheoremMode::thm3 && (b < 1 || (n > 1 && b > n - 1)))
    throw InputError("b must lie between 1 and n-1");
  ConditionReport rep;
  if (mode == TheoremMode::thm1 && b != 1) rep.caveat("first mode uses the 1-intersection condition; b ignored");
  const int bb = mode == TheoremMode::thm1 ? 1 : b;
  check_prar(d, rep);
  rep.set("b-intersection", check_b_intersection(input, bb, &rep));
  const bool structural = rep.get("prar-1") == Verdict::pass && rep.get("prar-2") == Verdict::pass &&
                          all_blocks_available(d);
  if (mode == TheoremMode::thm1) {
    if (structural) {
      const Verdict c6 = check_cond6(d, rep);
      const Verdict c7 = check_cond7(d, rep);
      rep.set("cond-6", c6);
      rep.set("cond-7", c7);
      const Verdict t2 = check_thm2(d, rep);
      rep.set("thm2", t2);
      const Verdict both = combine(c6, c7);
      if (t2 != Verdict::not_applicable && t2 != Verdict::indeterminate && both != Verdict::indeterminate &&
          t2 != both) {
        rep.set("thm2-consistency", Verdict::indeterminate);
        rep.witnesses.push_back({"thm2-consistency", {}, "special-value test disagrees with conditions 6 and 7"});
      }
    } else {
      rep.set("cond-6", Verdict::not_applicable);
      rep.set("cond-7", Verdict::not_applicable);
    }
  } else {
    rep.caveat("singular points: some nonzero normal vector lies in the coordinate subspace");
    if (structural) {
      rep.set("cond-7", check_cond7(d, rep));
      rep.set("cond-8", check_cond8(d, bb, rep));
      rep.set("cond-9", check_cond9(d, bb, rep));
    } else {
      rep.set("cond-7", Verdict::not_applicable);
      rep.set("cond-8", Verdict::not_applicable);
      rep.set("cond-9", Verdict::not_applicable);
    }
  }

  // Independent check of the assembled region.
  try {
    const RegionAnalysis amb(input.ambient_spec());
    const Definition1Report r = check_definition1(amb);
    rep.set("def1-direct-cond1", r.cond1);
    rep.set("def1-direct-cond2", r.cond2);
    rep.margins["def1-direct-min-rank-ratio"] = r.min_rank_ratio;
    for (const auto& w : r.witnesses) rep.witnesses.push_back({"def1-direct", w.points, w.condition + ": " + w.diagnostic});
    for (const auto& c : r.caveats) rep.caveat(c);
  } catch (const InputError& e) {
    rep.set("def1-direct-cond1", Verdict::not_applicable);
    rep.set("def1-direct-cond2", Verdict::not_applicable);
    rep.caveat(std::string("assembled region not checked: ") + e.what());
  }
  return rep;
}

}  // namespace raregion
