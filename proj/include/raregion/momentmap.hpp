#pragma once

// The manifold cut out by  ∏_{j in group i} f_j(x) - Σ_m y_{i,m}^2 = 0  (one equation per group)
// over closure(D), and its projection to the x coordinates.

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "raregion/region.hpp"

namespace raregion {

class OutsideRegion : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct MomentMapInput {
  RegionSpec region;
  std::vector<int> groups;     // surface -> group (0-based)
  std::vector<int> sphere_dims;  // per group, dimension of the y-sphere

  int group_count() const { return static_cast<int>(sphere_dims.size()); }

  void validate() const {
    region.validate();
    if (groups.size() != region.surfaces.size()) throw InputError("moment map: one group per surface required");
    if (sphere_dims.empty()) throw InputError("moment map: no groups");
    std::vector<int> used(sphere_dims.size(), 0);
    for (int g : groups) {
      if (g < 0 || g >= group_count()) throw InputError("moment map: group index out of range");
      used[g] = 1;
    }
    for (std::size_t g = 0; g < used.size(); ++g)
      if (!used[g]) throw InputError("moment map: group " + std::to_string(g + 1) + " has no surface");
    for (int d : sphere_dims)
      if (d < 0) throw InputError("moment map: negative sphere dimension");
  }
};

// Surfaces sharing a group must not meet inside closure(D).
struct GroupCheck {
  Verdict verdict = Verdict::pass;
  std::vector<Witness> witnesses;
  std::vector<std::string> caveats;
};

inline GroupCheck validate_groups(const RegionAnalysis& a, const std::vector<int>& groups) {
  GroupCheck out;
  if (a.touches_box()) out.caveats.push_back("verified within box only");
  const auto& s = a.spec().surfaces;
  std::set<std::pair<int, int>> reported;
  auto consider = [&](const Point& p, const std::vector<int>& active) {
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const int j = active[x], k = active[y];
        if (groups[j] != groups[k] || !reported.insert({j, k}).second) continue;
        out.verdict = Verdict::fail;
        out.witnesses.push_back({"groups", {p}, s[j].label + " and " + s[k].label + " meet in the closure but share group " +
                                                    std::to_string(groups[j] + 1)});
      }
  };
  for (const auto& r : a.records())
    if (r.active.size() >= 2) consider(r.point, r.active);
  for (const auto& p : a.tangency_candidates()) {
    const auto near = a.active_at(p, a.tol().activation_band);
    const auto ptrs = a.model_ptrs(near);
    const RefineResult rr = newton_refine(p, ptrs, a.tol());
    if ((rr.status == SolveStatus::converged || rr.status == SolveStatus::rank_deficient) && a.in_closure(rr.point) &&
        a.active_at(rr.point, a.tol().zero_tol).size() >= 2)
      consider(rr.point, a.active_at(rr.point, a.tol().zero_tol));
  }
  return out;
}

struct MomentMapSystem {
  int n = 0;
  int total_vars = 0;
  std::vector<Polynomial> equations;          // in total_vars variables
  std::vector<Polynomial> products;           // ∏ f_j over each group, in n variables
  std::vector<std::pair<int, int>> y_blocks;  // 1-based first and last variable of each y block

  int group_count() const { return static_cast<int>(equations.size()); }
};

inline MomentMapSystem build_system(const MomentMapInput& in) {
  in.validate();
  MomentMapSystem sys;
  sys.n = in.region.nvars;
  sys.total_vars = sys.n;
  for (int d : in.sphere_dims) {
    sys.y_blocks.emplace_back(sys.total_vars + 1, sys.total_vars + d + 1);
    sys.total_vars += d + 1;
  }
  for (int g = 0; g < in.group_count(); ++g) {
    Polynomial prod = Polynomial::constant(sys.n, 1);
    for (std::size_t j = 0; j < in.groups.size(); ++j)
      if (in.groups[j] == g) prod *= in.region.surfaces[j].f;
    Polynomial eq = extend(prod, sys.total_vars);
    for (int v = sys.y_blocks[g].first; v <= sys.y_blocks[g].second; ++v)
      eq -= Polynomial::variable(sys.total_vars, v).pow(2);
    sys.products.push_back(std::move(prod));
    sys.equations.push_back(std::move(eq));
  }
  return sys;
}

// Deterministic points on the unit sphere S^d in R^{d+1}.
inline std::vector<Point> sphere_points(int d, int per_dim = 8) {
  if (d == 0) return {{1.0}, {-1.0}};
  const int count = per_dim * d;
  std::vector<Point> out;
  if (d == 1) {
    for (int k = 0; k < count; ++k) {
      const double t = 2 * std::numbers::pi * k / count;
      out.push_back({std::cos(t), std::sin(t)});
    }
    return out;
  }
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (d + 1 > 16) throw std::invalid_argument("sphere_points: dimension too large");
  auto radical_inverse = [](int k, int base) {
    double f = 1.0, r = 0.0;
    for (; k > 0; k /= base) {
      f /= base;
      r += f * (k % base);
    }
    return r;
  };
  for (int k = 1; static_cast<int>(out.size()) < count; ++k) {
    Point p(d + 1);
    double s = 0;
    for (int i = 0; i <= d; ++i) {
      const double u = radical_inverse(k, primes[i]);
      p[i] = std::sqrt(2.0) * boost::math::erf_inv(2 * u - 1);
      s += p[i] * p[i];
    }
    s = std::sqrt(s);
    if (!(s > 1e-3)) continue;
    for (double& v : p) v /= s;
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<double> group_values(const MomentMapSystem& sys, std::span<const double> x) {
  std::vector<double> out;
  for (const auto& p : sys.products) out.push_back(evaluate(p, x));
  return out;
}

inline std::vector<Point> sample_fiber(const MomentMapSystem& sys, std::span<const double> x, const Tolerances& tol,
                                       int per_dim = 8) {
  if (static_cast<int>(x.size()) != sys.n) throw std::invalid_argument("sample_fiber: point dimension mismatch");
  const auto vals = group_values(sys, x);
  std::vector<std::vector<Point>> pieces;
  for (int g = 0; g < sys.group_count(); ++g) {
    if (vals[g] < -tol.zero_tol) throw OutsideRegion("sample_fiber: point lies outside the closure of the region");
    const int d = sys.y_blocks[g].second - sys.y_blocks[g].first;
    const double rho = std::sqrt(std::max(vals[g], 0.0));
    std::vector<Point> piece;
    if (rho == 0.0) {
      piece.push_back(Point(d + 1, 0.0));
    } else {
      for (auto p : sphere_points(d, per_dim)) {
        for (double& v : p) v *= rho;
        piece.push_back(std::move(p));
      }
    }
    pieces.push_back(std::move(piece));
  }
  std::vector<Point> out{Point(x.begin(), x.end())};
  for (const auto& piece : pieces) {
    std::vector<Point> next;
    for (const auto& head : out)
      for (const auto& tail : piece) {
        Point p = head;
        p.insert(p.end(), tail.begin(), tail.end());
        next.push_back(std::move(p));
      }
    out.swap(next);
  }
  return out;
}

inline double system_residual(const MomentMapSystem& sys, std::span<const double> point) {
  double r = 0;
  for (const auto& e : sys.equations) r = std::max(r, std::abs(evaluate(e, point)));
  return r;
}

inline Point project(const MomentMapSystem& sys, std::span<const double> point, const Tolerances& tol) {
  if (static_cast<int>(point.size()) != sys.total_vars) throw std::invalid_argument("project: point dimension mismatch");
  if (system_residual(sys, point) > tol.zero_tol) throw std::domain_error("project: point is not on the manifold");
  return Point(point.begin(), point.begin() + sys.n);
}

inline RankInfo jacobian_rank(const MomentMapSystem& sys, std::span<const double> point, const Tolerances& tol) {
  Eigen::MatrixXd jt(sys.total_vars, sys.group_count());
  for (int g = 0; g < sys.group_count(); ++g) {
    const auto grad = gradient(sys.equations[g]);
    for (int v = 0; v < sys.total_vars; ++v) jt(v, g) = evaluate(grad[v], point);
  }
  return column_rank(jt, tol);
}

inline std::string export_system(const MomentMapSystem& sys) {
  std::string out = "vars: " + std::to_string(sys.total_vars) + "\n";
  for (const auto& e : sys.equations) out += to_string(e) + "\n";
  return out;
}

inline std::pair<int, std::vector<Polynomial>> parse_system(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("vars:", 0) != 0) throw ParseError("missing 'vars:' header", 0);
  const int total = std::stoi(line.substr(5));
  if (total < 1) throw ParseError("variable count must be positive", 5);
  std::vector<Polynomial> eqs;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) eqs.push_back(parse(line, total));
  return {total, std::move(eqs)};
}

}  // namespace raregion
