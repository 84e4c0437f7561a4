#pragma once

// Reeb digraph of a coordinate function on the sampled closure of a region: sweep the grid
// slice by slice, track slice components by overlap, and emit a vertex at every change.

#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "raregion/region.hpp"

namespace raregion {

enum class ReebKind { birth, death, merge, split, regular_endpoint };

inline const char* to_string(ReebKind k) {
  switch (k) {
    case ReebKind::birth: return "birth";
    case ReebKind::death: return "death";
    case ReebKind::merge: return "merge";
    case ReebKind::split: return "split";
    case ReebKind::regular_endpoint: return "regular-endpoint";
  }
  return "?";
}

struct ReebVertex {
  double value = 0.0;
  int component = 0;
  ReebKind kind = ReebKind::birth;
  bool snapped = false;  // value taken from a special point rather than the slice midpoint
};

struct ReebEdge {
  int from = 0;
  int to = 0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ReebDigraph {
  int coord = 1;
  std::vector<ReebVertex> vertices;
  std::vector<ReebEdge> edges;
  std::vector<std::string> warnings;
  bool ambiguous_order = false;
  int entering = 0;  // components on the first slice
  int leaving = 0;   // components on the last slice

  int count(ReebKind k) const {
    return static_cast<int>(std::count_if(vertices.begin(), vertices.end(), [&](const ReebVertex& v) { return v.kind == k; }));
  }

  bool monotone() const {
    for (const auto& e : edges)
      if (!(vertices[e.from].value < vertices[e.to].value)) return false;
    return true;
  }

  bool acyclic() const {
    std::vector<int> indeg(vertices.size(), 0);
    std::vector<std::vector<int>> out(vertices.size());
    for (const auto& e : edges) {
      ++indeg[e.to];
      out[e.from].push_back(e.to);
    }
    std::vector<int> ready;
    for (std::size_t v = 0; v < vertices.size(); ++v)
      if (!indeg[v]) ready.push_back(static_cast<int>(v));
    std::size_t seen = 0;
    while (!ready.empty()) {
      const int v = ready.back();
      ready.pop_back();
      ++seen;
      for (int w : out[v])
        if (--indeg[w] == 0) ready.push_back(w);
    }
    return seen == vertices.size();
  }

  // Component count bookkeeping: entering + births - deaths + split gains - merge losses = leaving.
  bool euler_consistent() const {
    std::vector<int> in(vertices.size(), 0), out(vertices.size(), 0);
    for (const auto& e : edges) {
      ++out[e.from];
      ++in[e.to];
    }
    int count = entering;
    for (std::size_t v = 0; v < vertices.size(); ++v) {
      if (vertices[v].kind == ReebKind::regular_endpoint) continue;
      count += out[v] - in[v];
    }
    return count == leaving;
  }
};

namespace detail {

struct SliceComponents {
  std::vector<std::size_t> cells;
  std::vector<int> label;  // per entry of cells
  int count = 0;
};

inline SliceComponents slice_components(const RegionAnalysis& a, int axis, int s) {
  const Grid& g = a.grid();
  SliceComponents out;
  const int n = g.dim();
  // enumerate cells with index s along axis
  std::vector<int> idx(n, 0);
  idx[axis] = s;
  while (true) {
    std::size_t flat = 0;
    for (int i = 0; i < n; ++i) flat += static_cast<std::size_t>(idx[i]) * g.stride(i);
    if (a.in_region(flat)) out.cells.push_back(flat);
    int i = 0;
    while (i < n && (i == axis || idx[i] == g.res() - 1)) {
      if (i != axis) idx[i] = 0;
      ++i;
    }
    if (i == n) break;
    ++idx[i];
  }
  out.label.assign(out.cells.size(), -1);
  auto find = [&](std::size_t flat) {
    auto it = std::lower_bound(out.cells.begin(), out.cells.end(), flat);
    return (it != out.cells.end() && *it == flat) ? static_cast<int>(it - out.cells.begin()) : -1;
  };
  std::vector<int> stack;
  for (std::size_t k = 0; k < out.cells.size(); ++k) {
    if (out.label[k] >= 0) continue;
    out.label[k] = out.count;
    stack.push_back(static_cast<int>(k));
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const std::size_t flat = out.cells[cur];
      for (int i = 0; i < n; ++i) {
        if (i == axis) continue;
        const int k2 = g.index_along(flat, i);
        for (int dir : {-1, 1}) {
          if ((dir < 0 && k2 == 0) || (dir > 0 && k2 == g.res() - 1)) continue;
          const std::size_t nb = dir < 0 ? flat - g.stride(i) : flat + g.stride(i);
          const int pos = find(nb);
          if (pos >= 0 && out.label[pos] < 0) {
            out.label[pos] = out.count;
            stack.push_back(pos);
          }
        }
      }
    }
    ++out.count;
  }
  return out;
}

}  // namespace detail

inline ReebDigraph reeb_digraph(const RegionAnalysis& a, int coord) {
  if (coord < 1 || coord > a.nvars()) throw InputError("reeb: coordinate out of range");
  ReebDigraph gph;
  gph.coord = coord;
  if (!a.seed_resolved()) {
    gph.warnings.push_back("region not resolved at this grid resolution");
    return gph;
  }
  const Grid& g = a.grid();
  const int axis = coord - 1;
  const int res = g.res();
  const double h = g.spacing(axis);

  std::vector<detail::SliceComponents> slices(res);
  parallel_for(
      static_cast<std::size_t>(res), [&](std::size_t s) { slices[s] = detail::slice_components(a, axis, static_cast<int>(s)); },
      1);

  // Special values of the coordinate: critical points of every stratum, and every sampled point
  // of strata too small to carry a criticality condition.
  struct Special {
    double value;
    Point point;
  };
  std::vector<Special> specials;
  const CriticalSet cs = find_critical(a, VarSet{coord});
  for (const auto& p : cs.points) specials.push_back({p.point[axis], p.point});
  for (const auto& r : a.records()) {
    const bool degenerate = std::find(cs.degenerate_strata.begin(), cs.degenerate_strata.end(), r.active) !=
                            cs.degenerate_strata.end();
    if (degenerate) specials.push_back({r.point[axis], r.point});
  }

  auto snap = [&](int s, const std::vector<std::size_t>& cells, ReebVertex& v) {
    const double lo = g.value_at(axis, s), hi = g.value_at(axis, s + 1);
    v.value = 0.5 * (lo + hi);
    const double reach = 3.0 * g.max_spacing() * std::sqrt(double(g.dim()));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sp : specials) {
      if (sp.value < lo - 2 * h || sp.value > hi + 2 * h) continue;
      double dmin = std::numeric_limits<double>::infinity();
      Point q(g.dim());
      for (std::size_t c : cells) {
        g.point(c, q);
        dmin = std::min(dmin, euclidean(q, sp.point));
        if (dmin <= reach) break;
      }
      if (dmin > reach) continue;
      const double off = std::abs(sp.value - 0.5 * (lo + hi));
      if (off < best) {
        best = off;
        v.value = sp.value;
        v.snapped = true;
      }
    }
    if (!v.snapped) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "event between %.6f and %.6f not matched to a special point", lo, hi);
      gph.warnings.push_back(buf);
    }
  };

  std::vector<int> origin;  // per component of the current slice: vertex its edge starts from
  int next_component = 0;
  std::vector<int> event_slices;

  auto add_vertex = [&](double value, ReebKind kind) {
    gph.vertices.push_back({value, next_component++, kind, false});
    return static_cast<int>(gph.vertices.size()) - 1;
  };
  auto add_edge = [&](int from, int to) {
    gph.edges.push_back({from, to, gph.vertices[from].value, gph.vertices[to].value});
  };

  gph.entering = slices[0].count;
  origin.assign(slices[0].count, -1);
  for (int c = 0; c < slices[0].count; ++c) origin[c] = add_vertex(g.value_at(axis, 0), ReebKind::regular_endpoint);

  for (int s = 0; s + 1 < res; ++s) {
    const auto& A = slices[s];
    const auto& B = slices[s + 1];
    // union-find over A components [0, A.count) and B components [A.count, A.count + B.count)
    std::vector<int> parent(A.count + B.count);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
    const std::size_t step = g.stride(axis);
    for (std::size_t k = 0; k < A.cells.size(); ++k) {
      const std::size_t up = A.cells[k] + step;
      auto it = std::lower_bound(B.cells.begin(), B.cells.end(), up);
      if (it != B.cells.end() && *it == up) {
        const int x = root(A.label[k]), y = root(A.count + B.label[it - B.cells.begin()]);
        if (x != y) parent[x] = y;
      }
    }
    std::map<int, std::pair<std::vector<int>, std::vector<int>>> groups;
    for (int c = 0; c < A.count; ++c) groups[root(c)].first.push_back(c);
    for (int c = 0; c < B.count; ++c) groups[root(A.count + c)].second.push_back(c);

    std::vector<int> next_origin(B.count, -1);
    for (auto& [r, grp] : groups) {
      const auto& [as, bs] = grp;
      if (as.size() == 1 && bs.size() == 1) {
        next_origin[bs[0]] = origin[as[0]];
        continue;
      }
      std::vector<std::size_t> cells;
      for (std::size_t k = 0; k < A.cells.size(); ++k)
        if (std::find(as.begin(), as.end(), A.label[k]) != as.end()) cells.push_back(A.cells[k]);
      for (std::size_t k = 0; k < B.cells.size(); ++k)
        if (std::find(bs.begin(), bs.end(), B.label[k]) != bs.end()) cells.push_back(B.cells[k]);
      ReebKind kind;
      if (as.empty()) kind = ReebKind::birth;
      else if (bs.empty()) kind = ReebKind::death;
      else if (bs.size() == 1) kind = ReebKind::merge;
      else kind = ReebKind::split;
      if (as.size() >= 2 && bs.size() >= 2) gph.warnings.push_back("simultaneous merge and split recorded as one split vertex");
      const int v = add_vertex(0.0, kind);
      snap(s, cells, gph.vertices[v]);
      for (int c : as) add_edge(origin[c], v);
      for (int c : bs) next_origin[c] = v;
      event_slices.push_back(s);
    }
    origin.swap(next_origin);
  }
  gph.leaving = slices[res - 1].count;
  for (int c = 0; c < slices[res - 1].count; ++c) {
    const int v = add_vertex(g.value_at(axis, res - 1), ReebKind::regular_endpoint);
    add_edge(origin[c], v);
  }
  for (auto& e : gph.edges) {
    e.lo = gph.vertices[e.from].value;
    e.hi = gph.vertices[e.to].value;
  }

  std::sort(event_slices.begin(), event_slices.end());
  for (std::size_t k = 1; k < event_slices.size(); ++k)
    if (event_slices[k] - event_slices[k - 1] <= 1) {
      gph.ambiguous_order = true;
      gph.warnings.push_back("events within one grid cell of each other; ordering indeterminate");
      break;
    }
  if (!gph.monotone()) {
    gph.ambiguous_order = true;
    gph.warnings.push_back("refined event values break the sweep order");
  }
  return gph;
}

inline std::string export_dot(const ReebDigraph& gph) {
  std::string out = "digraph reeb {\n";
  char buf[128];
  for (std::size_t v = 0; v < gph.vertices.size(); ++v) {
    std::snprintf(buf, sizeof buf, "  v%zu [label=\"%.6f %s\"];\n", v, gph.vertices[v].value, to_string(gph.vertices[v].kind));
    out += buf;
  }
  for (const auto& e : gph.edges) {
    std::snprintf(buf, sizeof buf, "  v%d -> v%d;\n", e.from, e.to);
    out += buf;
  }
  return out + "}\n";
}

}  // namespace raregion
