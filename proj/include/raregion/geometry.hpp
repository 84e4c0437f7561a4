#pragma once

// Numerical primitives: grid sampling of sign conditions, Newton refinement onto
// zero sets, normal frames and the rank / subspace tests built on them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "raregion/parallel.hpp"
#include "raregion/poly.hpp"

namespace raregion {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> axes) : axes_(std::move(axes)) {
    for (std::size_t i = 0; i < axes_.size(); ++i)
      if (!(axes_[i].lo < axes_[i].hi))
        throw std::invalid_argument("Box: axis " + std::to_string(i + 1) + " has lo >= hi");
  }

  static Box cube(int n, double lo, double hi) { return Box(std::vector<Interval>(n, Interval{lo, hi})); }

  int dim() const { return static_cast<int>(axes_.size()); }
  const Interval& operator[](int i) const { return axes_[i]; }
  const std::vector<Interval>& axes() const { return axes_; }

  bool contains(std::span<const double> x, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] < axes_[i].lo - slack || x[i] > axes_[i].hi + slack) return false;
    return true;
  }

  // True when x lies within eps of some face (or outside the box).
  bool near_face(std::span<const double> x, double eps) const {
    for (int i = 0; i < dim(); ++i)
      if (x[i] <= axes_[i].lo + eps || x[i] >= axes_[i].hi - eps) return true;
    return false;
  }

  // Box on the coordinates in A (1-based), in increasing order.
  Box project(const VarSet& A) const {
    std::vector<Interval> out;
    for (int i : A) out.push_back(axes_.at(i - 1));
    return Box(std::move(out));
  }

 private:
  std::vector<Interval> axes_;
};

struct Tolerances {
  double zero_tol = 1e-9;        // |f̂(p)| at or below this counts as on the zero set
  double rank_rel_tol = 1e-6;    // singular values at or below this fraction of the largest are zero
  int newton_max_iter = 50;
  int grid_res = 64;             // samples per axis, box faces included
  double activation_band = 1e-3; // pre-refinement activity threshold on |f̂|
  double indeterminate_factor = 100.0;  // rank ratios in (tol, factor·tol] are ambiguous
  double coincidence_band = 1e-6;       // special values closer than this (but not equal) are ambiguous
  double slice_band_cells = 5.0;        // fiber slab half-width in grid spacings

  void validate() const {
    if (!(zero_tol > 0) || !(zero_tol < 1e-4)) throw std::invalid_argument("tolerances: zero_tol must lie in (0, 1e-4)");
    if (!(rank_rel_tol > 0)) throw std::invalid_argument("tolerances: rank_rel_tol must be positive");
    if (newton_max_iter < 1) throw std::invalid_argument("tolerances: newton_max_iter must be positive");
    if (grid_res < 8) throw std::invalid_argument("tolerances: grid_res must be at least 8");
    if (!(activation_band > 0)) throw std::invalid_argument("tolerances: activation_band must be positive");
    if (!(indeterminate_factor >= 1)) throw std::invalid_argument("tolerances: indeterminate_factor must be >= 1");
    if (!(coincidence_band > 0)) throw std::invalid_argument("tolerances: coincidence_band must be positive");
    if (!(slice_band_cells > 0)) throw std::invalid_argument("tolerances: slice_band_cells must be positive");
  }

  double dedup_radius() const { return 10.0 * zero_tol; }
};

// ---------------------------------------------------------------------------
// Regular grid over a box; axis 0 varies fastest.

class Grid {
 public:
  Grid() = default;
  Grid(Box box, int res) : box_(std::move(box)), res_(res) {
    if (res < 2) throw std::invalid_argument("Grid: resolution must be at least 2");
    const int n = box_.dim();
    stride_.resize(n);
    spacing_.resize(n);
    std::size_t s = 1;
    for (int i = 0; i < n; ++i) {
      stride_[i] = s;
      s *= static_cast<std::size_t>(res);
      spacing_[i] = (box_[i].hi - box_[i].lo) / (res - 1);
    }
    size_ = s;
  }

  const Box& box() const { return box_; }
  int dim() const { return box_.dim(); }
  int res() const { return res_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return stride_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

  int index_along(std::size_t flat, int axis) const {
    return static_cast<int>((flat / stride_[axis]) % static_cast<std::size_t>(res_));
  }

  double coordinate(std::size_t flat, int axis) const {
    const int k = index_along(flat, axis);
    if (k == res_ - 1) return box_[axis].hi;
    return box_[axis].lo + k * spacing_[axis];
  }

  double value_at(int axis, int k) const {
    return k == res_ - 1 ? box_[axis].hi : box_[axis].lo + k * spacing_[axis];
  }

  void point(std::size_t flat, std::span<double> out) const {
    for (int i = 0; i < dim(); ++i) out[i] = coordinate(flat, i);
  }
  Point point(std::size_t flat) const {
    Point p(dim());
    point(flat, p);
    return p;
  }

  bool on_face(std::size_t flat) const {
    for (int i = 0; i < dim(); ++i) {
      const int k = index_along(flat, i);
      if (k == 0 || k == res_ - 1) return true;
    }
    return false;
  }

  // Calls fn(neighbor) for the 2n axis neighbours inside the grid.
  template <typename Fn>
  void for_each_axis_neighbor(std::size_t flat, Fn&& fn) const {
    for (int i = 0; i < dim(); ++i) {
      const int k = index_along(flat, i);
      if (k > 0) fn(flat - stride_[i]);
      if (k < res_ - 1) fn(flat + stride_[i]);
    }
  }

  // Calls fn(neighbor) for every grid point at Chebyshev index distance <= radius (self excluded).
  template <typename Fn>
  void for_each_box_neighbor(std::size_t flat, int radius, Fn&& fn) const {
    const int n = dim();
    std::vector<int> base(n), off(n, -radius);
    for (int i = 0; i < n; ++i) base[i] = index_along(flat, i);
    while (true) {
      bool inside = true, self = true;
      std::size_t idx = 0;
      for (int i = 0; i < n; ++i) {
        const int k = base[i] + off[i];
        if (k < 0 || k >= res_) {
          inside = false;
          break;
        }
        if (off[i] != 0) self = false;
        idx += static_cast<std::size_t>(k) * stride_[i];
      }
      if (inside && !self) fn(idx);
      int i = 0;
      while (i < n && off[i] == radius) off[i++] = -radius;
      if (i == n) break;
      ++off[i];
    }
  }

 private:
  Box box_;
  int res_ = 0;
  std::size_t size_ = 0;
  std::vector<std::size_t> stride_;
  std::vector<double> spacing_;
};

// ---------------------------------------------------------------------------
// Surfaces compiled for numerics. All numerics use f̂ = f / max|coeff|, which makes
// every threshold decision invariant under positive rescaling of f.

class SurfaceModel {
 public:
  explicit SurfaceModel(const Polynomial& p) : exact_(p), unit_(normalized(p)), f_(unit_) {
    const int n = p.nvars();
    const auto g = gradient(unit_);
    for (int i = 0; i < n; ++i) grad_.emplace_back(g[i]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) hess_.emplace_back(g[i].derivative(j + 1));
  }

  int nvars() const { return exact_.nvars(); }
  const Polynomial& exact() const { return exact_; }
  const Polynomial& unit() const { return unit_; }

  double value(std::span<const double> x) const { return f_(x); }
  int sign(std::span<const double> x) const { return sign_at(exact_, f_, x); }

  Eigen::VectorXd gradient_at(std::span<const double> x) const {
    Eigen::VectorXd g(nvars());
    for (int i = 0; i < nvars(); ++i) g[i] = grad_[i](x);
    return g;
  }
  double partial(int i, std::span<const double> x) const { return grad_[i](x); }

  Eigen::MatrixXd hessian_at(std::span<const double> x) const {
    const int n = nvars();
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) = hess_[i * n + j](x);
    return h;
  }

 private:
  Polynomial exact_;
  Polynomial unit_;
  CompiledPolynomial f_;
  std::vector<CompiledPolynomial> grad_;
  std::vector<CompiledPolynomial> hess_;
};

inline std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// ---------------------------------------------------------------------------
// Grid sampling of strict sign conditions with connected-component labels.

struct SignConstraint {
  Polynomial poly;
  int sign = 1;  // +1: poly > 0, -1: poly < 0
};

struct GridSample {
  Grid grid;
  std::vector<std::uint8_t> member;
  std::vector<std::int32_t> label;  // -1 for non-members
  int components = 0;

  bool empty() const { return components == 0; }

  // Label of the member corner nearest to x among the corners of x's cell, or -1.
  int label_near(std::span<const double> x) const {
    const int n = grid.dim();
    std::vector<int> base(n);
    for (int i = 0; i < n; ++i) {
      const double t = (x[i] - grid.box()[i].lo) / grid.spacing(i);
      base[i] = std::clamp(static_cast<int>(std::floor(t)), 0, grid.res() - 2);
    }
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (unsigned corner = 0; corner < (1u << n); ++corner) {
      std::size_t idx = 0;
      double d = 0;
      for (int i = 0; i < n; ++i) {
        const int k = base[i] + ((corner >> i) & 1u);
        idx += static_cast<std::size_t>(k) * grid.stride(i);
        const double c = grid.value_at(i, k) - x[i];
        d += c * c;
      }
      if (member[idx] && d < best_d) {
        best_d = d;
        best = label[idx];
      }
    }
    return best;
  }

  std::size_t count(int lbl) const {
    return static_cast<std::size_t>(std::count(label.begin(), label.end(), lbl));
  }
};

// Flood fill over 2n-adjacent members; labels assigned in increasing flat-index order.
inline int label_components(const Grid& grid, const std::vector<std::uint8_t>& member,
                            std::vector<std::int32_t>& label) {
  label.assign(grid.size(), -1);
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < grid.size(); ++start) {
    if (!member[start] || label[start] >= 0) continue;
    label[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      grid.for_each_axis_neighbor(cur, [&](std::size_t nb) {
        if (member[nb] && label[nb] < 0) {
          label[nb] = next;
          stack.push_back(nb);
        }
      });
    }
    ++next;
  }
  return next;
}

inline GridSample sample_grid(std::span<const SignConstraint> signs, const Box& box, const Tolerances& tol) {
  tol.validate();
  std::vector<SurfaceModel> models;
  for (const auto& s : signs) {
    if (s.poly.nvars() != box.dim())
      throw std::invalid_argument("sample_grid: polynomial dimension differs from box dimension");
    if (s.sign != 1 && s.sign != -1) throw std::invalid_argument("sample_grid: required sign must be +1 or -1");
    models.emplace_back(s.poly);
  }
  GridSample out;
  out.grid = Grid(box, tol.grid_res);
  out.member.assign(out.grid.size(), 0);
  const int n = box.dim();
  parallel_for(out.grid.size(), [&](std::size_t idx) {
    double buf[32];
    std::span<double> x(buf, static_cast<std::size_t>(n));
    out.grid.point(idx, x);
    bool ok = true;
    for (std::size_t j = 0; j < models.size() && ok; ++j) ok = models[j].sign(x) == signs[j].sign;
    out.member[idx] = ok ? 1 : 0;
  });
  out.components = label_components(out.grid, out.member, out.label);
  return out;
}

// ---------------------------------------------------------------------------
// Rank decisions

struct RankInfo {
  int rank = 0;
  double ratio = 0.0;  // smallest singular value over largest; 0 if there are fewer rows than columns
  bool indeterminate = false;
};

// Numerical rank of the column set, with each nonzero column scaled to unit length first.
inline RankInfo column_rank(Eigen::MatrixXd m, const Tolerances& tol) {
  RankInfo info;
  if (m.cols() == 0) return info;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double nrm = m.col(c).norm();
    if (nrm > 0) m.col(c) /= nrm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  if (!(smax > 0)) return info;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol.rank_rel_tol * smax) {
      ++info.rank;
      if (s[i] <= tol.indeterminate_factor * tol.rank_rel_tol * smax) info.indeterminate = true;
    }
  }
  info.ratio = (m.rows() < m.cols()) ? 0.0 : s[s.size() - 1] / smax;
  return info;
}

struct NormalFrame {
  Point point;
  std::vector<int> active;                    // 0-based surface indices
  std::vector<Eigen::VectorXd> gradients;     // ∇f̂ per active surface
  int numerical_rank = 0;
  double rank_ratio = 0.0;
  bool indeterminate = false;

  bool full_rank() const { return numerical_rank == static_cast<int>(active.size()); }
};

inline NormalFrame normal_frame(std::span<const double> q, std::span<const int> active,
                                std::span<const SurfaceModel> models, const Tolerances& tol) {
  NormalFrame fr;
  fr.point.assign(q.begin(), q.end());
  fr.active.assign(active.begin(), active.end());
  const int n = static_cast<int>(q.size());
  Eigen::MatrixXd g(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) {
    fr.gradients.push_back(models[active[k]].gradient_at(q));
    g.col(static_cast<Eigen::Index>(k)) = fr.gradients.back();
  }
  const RankInfo r = column_rank(g, tol);
  fr.numerical_rank = std::min(r.rank, std::min(n, static_cast<int>(active.size())));
  fr.rank_ratio = r.ratio;
  fr.indeterminate = r.indeterminate;
  return fr;
}

// Orthonormal basis of span(gradients), numerical rank at tol.
inline Eigen::MatrixXd normal_basis(const NormalFrame& frame, const Tolerances& tol) {
  const int n = static_cast<int>(frame.point.size());
  Eigen::MatrixXd g(n, static_cast<Eigen::Index>(frame.gradients.size()));
  for (std::size_t k = 0; k < frame.gradients.size(); ++k) {
    const double nrm = frame.gradients[k].norm();
    g.col(static_cast<Eigen::Index>(k)) = nrm > 0 ? Eigen::VectorXd(frame.gradients[k] / nrm) : frame.gradients[k];
  }
  if (g.cols() == 0) return Eigen::MatrixXd(n, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[0] > 0 && s[i] > tol.rank_rel_tol * s[0]) ++r;
  return svd.matrixU().leftCols(r);
}

struct MeetResult {
  bool meets = false;
  bool indeterminate = false;
  double sine = 1.0;  // sine of the smallest principal angle between the two subspaces
};

// Does span(gradients) contain a nonzero vector of span{e_j : j in N}?
inline MeetResult subspace_meets(const NormalFrame& frame, const VarSet& N, const Tolerances& tol) {
  MeetResult out;
  const int n = static_cast<int>(frame.point.size());
  const Eigen::MatrixXd q = normal_basis(frame, tol);
  const int r = static_cast<int>(q.cols());
  if (r == 0) return out;
  std::vector<int> rest;
  for (int i = 1; i <= n; ++i)
    if (!N.contains(i)) rest.push_back(i - 1);
  if (static_cast<int>(rest.size()) < r) {
    out.sine = 0.0;
  } else {
    Eigen::MatrixXd qc(static_cast<Eigen::Index>(rest.size()), r);
    for (std::size_t k = 0; k < rest.size(); ++k) qc.row(static_cast<Eigen::Index>(k)) = q.row(rest[k]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qc);
    out.sine = svd.singularValues()[r - 1];
  }
  out.meets = out.sine <= tol.rank_rel_tol;
  out.indeterminate = !out.meets && out.sine <= tol.indeterminate_factor * tol.rank_rel_tol;
  return out;
}

struct IndependenceResult {
  bool independent = false;
  bool indeterminate = false;
  double smallest_singular = 0.0;  // of the stacked truncated unit normals
  std::string diagnostic;
};

// Truncates one unit normal per frame to the coordinates in N and tests linear independence.
inline IndependenceResult projected_independence(std::span<const NormalFrame> frames, const VarSet& N,
                                                 const Tolerances& tol) {
  IndependenceResult out;
  if (frames.empty()) {
    out.independent = true;
    return out;
  }
  for (const auto& f : frames)
    if (f.active.size() != 1) {
      out.diagnostic = "frame is not a normal point (active surfaces: " + std::to_string(f.active.size()) + ")";
      return out;
    }
  if (static_cast<int>(frames.size()) > N.size()) {
    out.diagnostic = std::to_string(frames.size()) + " vectors cannot be independent in " +
                     std::to_string(N.size()) + " coordinates";
    return out;
  }
  Eigen::MatrixXd m(N.size(), static_cast<Eigen::Index>(frames.size()));
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const Eigen::VectorXd& g = frames[k].gradients[0];
    const double nrm = g.norm();
    for (int r = 0; r < N.size(); ++r)
      m(r, static_cast<Eigen::Index>(k)) = nrm > 0 ? g[N.indices()[r] - 1] / nrm : 0.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  out.smallest_singular = svd.singularValues()[svd.singularValues().size() - 1];
  out.independent = out.smallest_singular > tol.rank_rel_tol;
  out.indeterminate = out.independent && out.smallest_singular <= tol.indeterminate_factor * tol.rank_rel_tol;
  return out;
}

// ---------------------------------------------------------------------------
// Solvers

enum class SolveStatus { converged, non_convergence, rank_deficient, escaped };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::non_convergence: return "non-convergence";
    case SolveStatus::rank_deficient: return "rank-deficient";
    case SolveStatus::escaped: return "escaped";
  }
  return "?";
}

struct SolveResult {
  Eigen::VectorXd x;
  SolveStatus status = SolveStatus::non_convergence;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
};

// Gauss-Newton with minimum-norm pseudo-inverse steps and backtracking.
// fn(x, F, J) fills residuals and Jacobian; converged when max|F| <= tol.
template <typename Fn>
SolveResult gauss_newton(Fn&& fn, Eigen::VectorXd x, int max_iter, double tol) {
  SolveResult out;
  Eigen::VectorXd F, Ft;
  Eigen::MatrixXd J, Jt;
  fn(x, F, J);
  for (int it = 0;; ++it) {
    out.residual = F.size() ? F.cwiseAbs().maxCoeff() : 0.0;
    out.iterations = it;
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= tol) {
      out.status = SolveStatus::converged;
      break;
    }
    if (it == max_iter) break;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    const Eigen::VectorXd dx = -svd.solve(F);
    const double fnorm = F.norm();
    double t = 1.0;
    bool moved = false;
    for (int h = 0; h < 12; ++h, t *= 0.5) {
      const Eigen::VectorXd xt = x + t * dx;
      fn(xt, Ft, Jt);
      if (Ft.allFinite() && Ft.norm() < fnorm) {
        x = xt;
        F.swap(Ft);
        J.swap(Jt);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out.x = std::move(x);
  return out;
}

struct RefineResult {
  Point point;
  SolveStatus status = SolveStatus::non_convergence;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  double first_step = 0.0;
  double displacement = 0.0;
  double rank_ratio = 1.0;
};

// Newton onto {f̂_j = 0 : j in active}, minimum-norm steps, optional coordinates held fixed.
// Reports rank deficiency of the Jacobian (checked before every step, including at p0)
// and escape beyond twice the first Newton step from p0.
inline RefineResult newton_refine(std::span<const double> p0, std::span<const SurfaceModel* const> active,
                                  const Tolerances& tol, std::span<const int> pinned = {}) {
  RefineResult out;
  const int n = static_cast<int>(p0.size());
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (std::find(pinned.begin(), pinned.end(), i) == pinned.end()) free.push_back(i);
  const int k = static_cast<int>(active.size());
  out.point.assign(p0.begin(), p0.end());
  if (k == 0) {
    out.status = SolveStatus::converged;
    out.residual = 0;
    return out;
  }
  if (k > static_cast<int>(free.size())) {
    out.status = SolveStatus::rank_deficient;
    out.rank_ratio = 0;
    return out;
  }
  Point& x = out.point;
  Eigen::VectorXd F(k);
  Eigen::MatrixXd J(k, static_cast<Eigen::Index>(free.size()));
  auto eval = [&](const Point& at, Eigen::VectorXd& f) {
    for (int j = 0; j < k; ++j) f[j] = active[j]->value(at);
  };
  eval(x, F);
  for (int it = 0;; ++it) {
    out.iterations = it;
    out.residual = F.cwiseAbs().maxCoeff();
    for (int j = 0; j < k; ++j)
      for (std::size_t c = 0; c < free.size(); ++c) J(j, static_cast<Eigen::Index>(c)) = active[j]->partial(free[c], x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    out.rank_ratio = s[0] > 0 ? s[s.size() - 1] / s[0] : 0.0;
    if (out.rank_ratio <= tol.rank_rel_tol) {
      out.status = SolveStatus::rank_deficient;
      return out;
    }
    if (!std::isfinite(out.residual)) {
      out.status = SolveStatus::non_convergence;
      return out;
    }
    if (out.residual <= tol.zero_tol) {
      out.status = SolveStatus::converged;
      break;
    }
    if (it == tol.newton_max_iter) {
      out.status = SolveStatus::non_convergence;
      return out;
    }
    const Eigen::VectorXd dx = -svd.solve(F);
    if (it == 0) out.first_step = dx.norm();
    double t = 1.0;
    Point xt(x);
    Eigen::VectorXd Ft(k);
    for (int h = 0; h < 8; ++h, t *= 0.5) {
      for (std::size_t c = 0; c < free.size(); ++c) xt[free[c]] = x[free[c]] + t * dx[static_cast<Eigen::Index>(c)];
      eval(xt, Ft);
      if (Ft.cwiseAbs().maxCoeff() < out.residual || h == 7) break;
    }
    x.swap(xt);
    F.swap(Ft);
  }
  double d2 = 0;
  for (int i = 0; i < n; ++i) d2 += (x[i] - p0[i]) * (x[i] - p0[i]);
  out.displacement = std::sqrt(d2);
  if (out.iterations > 0 && out.displacement > 2.0 * out.first_step + tol.dedup_radius())
    out.status = SolveStatus::escaped;
  return out;
}

// ---------------------------------------------------------------------------
// Point-set helpers

inline double chebyshev(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d);
}

// Indices of `pts` sorted lexicographically, keeping the first of any cluster within radius
// (Euclidean) among points sharing the same key.
template <typename Key>
std::vector<std::size_t> dedup_sorted(const std::vector<Point>& pts, const std::vector<Key>& keys, double radius) {
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a] != pts[b]) return pts[a] < pts[b];
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return a < b;
  });
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      if (pts[idx][0] - pts[*it][0] > radius) break;
      if (keys[*it] == keys[idx] && euclidean(pts[*it], pts[idx]) <= radius) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(idx);
  }
  return kept;
}

}  // namespace raregion
