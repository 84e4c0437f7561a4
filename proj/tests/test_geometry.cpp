#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "raregion/geometry.hpp"

using namespace raregion;

namespace {

std::vector<SurfaceModel> models_of(std::initializer_list<const char*> polys, int n) {
  std::vector<SurfaceModel> out;
  for (const char* p : polys) out.emplace_back(parse(p, n));
  return out;
}

NormalFrame frame_at(const std::vector<SurfaceModel>& ms, const Point& q, std::vector<int> active) {
  return normal_frame(q, active, ms, Tolerances{});
}

}  // namespace

TEST(Box, ContainsAndFaces) {
  const Box b = Box::cube(2, -1, 1);
  const double in[] = {0.0, 0.5}, edge[] = {1.0, 0.0}, out[] = {1.5, 0.0};
  EXPECT_TRUE(b.contains(in));
  EXPECT_TRUE(b.contains(edge));
  EXPECT_FALSE(b.contains(out));
  EXPECT_TRUE(b.near_face(edge, 0.0));
  EXPECT_FALSE(b.near_face(in, 0.1));
  EXPECT_THROW(Box({Interval{1, 1}}), std::invalid_argument);
  const Box p = Box::cube(3, -2, 2).project(VarSet{1, 3});
  EXPECT_EQ(p.dim(), 2);
}

TEST(Grid, IndexingAndEndpoints) {
  const Grid g(Box::cube(3, -1, 2), 7);
  EXPECT_EQ(g.size(), 343u);
  EXPECT_DOUBLE_EQ(g.spacing(0), 0.5);
  const std::size_t flat = 2 + 3 * 7 + 6 * 49;
  EXPECT_EQ(g.index_along(flat, 0), 2);
  EXPECT_EQ(g.index_along(flat, 1), 3);
  EXPECT_EQ(g.index_along(flat, 2), 6);
  const Point p = g.point(flat);
  EXPECT_DOUBLE_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_EQ(p[2], 2.0);  // last sample is exactly the face
  EXPECT_TRUE(g.on_face(flat));
  int axis_nb = 0, box_nb = 0;
  g.for_each_axis_neighbor(2 + 3 * 7 + 3 * 49, [&](std::size_t) { ++axis_nb; });
  g.for_each_box_neighbor(2 + 3 * 7 + 3 * 49, 1, [&](std::size_t) { ++box_nb; });
  EXPECT_EQ(axis_nb, 6);
  EXPECT_EQ(box_nb, 26);
  int corner_nb = 0;
  g.for_each_box_neighbor(0, 2, [&](std::size_t) { ++corner_nb; });
  EXPECT_EQ(corner_nb, 26);
}

TEST(SampleGrid, AnnulusIsOneComponentTwoDisksAreTwo) {
  Tolerances t;
  t.grid_res = 65;
  const std::vector<SignConstraint> annulus{{parse("1 - x1^2 - x2^2", 2), 1}, {parse("x1^2 + x2^2 - 1/4", 2), 1}};
  const GridSample a = sample_grid(annulus, Box::cube(2, -1.5, 1.5), t);
  EXPECT_EQ(a.components, 1);
  const std::vector<SignConstraint> disks{{parse("(x1^2 + x2^2 - 1)*(-1)", 2), 1},
                                          {parse("x1^2 - 1/4", 2), 1}};
  const GridSample d = sample_grid(disks, Box::cube(2, -1.5, 1.5), t);
  EXPECT_EQ(d.components, 2);
  const double left[] = {-0.75, 0.0}, right[] = {0.75, 0.0}, mid[] = {0.0, 0.0};
  EXPECT_NE(d.label_near(left), d.label_near(right));
  EXPECT_EQ(d.label_near(mid), -1);
}

TEST(SampleGrid, CellCountApproximatesArea) {
  Tolerances t;
  t.grid_res = 201;
  const std::vector<SignConstraint> disk{{parse("1 - x1^2 - x2^2", 2), 1}};
  const GridSample s = sample_grid(disk, Box::cube(2, -1.5, 1.5), t);
  const double h = 3.0 / 200;
  EXPECT_NEAR(s.count(0) * h * h, std::numbers::pi, 0.05);
}

TEST(ColumnRank, UnitNormalizationMakesRankScaleFree) {
  Eigen::MatrixXd m(3, 2);
  m << 1e-8, 0, 0, 1e6, 0, 0;
  const RankInfo r = column_rank(m, Tolerances{});
  EXPECT_EQ(r.rank, 2);
  EXPECT_NEAR(r.ratio, 1.0, 1e-12);
  m << 1, 2, 1, 2, 0, 0;
  EXPECT_EQ(column_rank(m, Tolerances{}).rank, 1);
  m << 1, 1, 0, 1e-5, 0, 0;  // ratio ~ 7e-6, inside the ambiguity band
  const RankInfo amb = column_rank(m, Tolerances{});
  EXPECT_EQ(amb.rank, 2);
  EXPECT_TRUE(amb.indeterminate);
}

TEST(NormalFrame, TransversalAndTangentCircles) {
  const auto ms = models_of({"1 - (x1-1/2)^2 - x2^2", "1 - (x1+1/2)^2 - x2^2", "1/4 - (x1-1)^2 - x2^2"}, 2);
  const double s = std::sqrt(0.75);
  const NormalFrame crossing = frame_at(ms, {0.0, s}, {0, 1});
  EXPECT_EQ(crossing.numerical_rank, 2);
  EXPECT_TRUE(crossing.full_rank());
  const NormalFrame tangent = frame_at(ms, {1.5, 0.0}, {0, 2});
  EXPECT_EQ(tangent.numerical_rank, 1);
  EXPECT_FALSE(tangent.full_rank());
}

TEST(SubspaceMeets, CoordinateDirections) {
  const auto ms = models_of({"1 - x1^2 - x2^2 - x3^2"}, 3);
  const NormalFrame pole = frame_at(ms, {0, 0, 1}, {0});
  EXPECT_TRUE(subspace_meets(pole, VarSet{3}, Tolerances{}).meets);
  EXPECT_FALSE(subspace_meets(pole, VarSet{1, 2}, Tolerances{}).meets);
  const double c = 1 / std::sqrt(2.0);
  const NormalFrame eq = frame_at(ms, {c, c, 0}, {0});
  EXPECT_TRUE(subspace_meets(eq, VarSet{1, 2}, Tolerances{}).meets);
  const MeetResult m = subspace_meets(eq, VarSet{1}, Tolerances{});
  EXPECT_FALSE(m.meets);
  EXPECT_NEAR(m.sine, c, 1e-12);
}

TEST(ProjectedIndependence, TruncatedNormals) {
  const auto ms = models_of({"1 - (x1-1/2)^2 - x2^2 - x3^2", "1 - (x1+1/2)^2 - x2^2 - x4^2"}, 4);
  const double s = std::sqrt(0.75);
  const std::vector<NormalFrame> same{frame_at(ms, {0, s, 0, 0}, {0}), frame_at(ms, {0, s, 0, 0}, {1})};
  const IndependenceResult r = projected_independence(same, VarSet{1, 2}, Tolerances{});
  EXPECT_TRUE(r.independent);
  EXPECT_NEAR(r.smallest_singular, std::sqrt(0.5), 1e-12);
  const std::vector<NormalFrame> poles{frame_at(ms, {0.5, 1, 0, 0}, {0}), frame_at(ms, {-0.5, 1, 0, 0}, {1})};
  EXPECT_FALSE(projected_independence(poles, VarSet{1, 2}, Tolerances{}).independent);
  EXPECT_FALSE(projected_independence(poles, VarSet{2}, Tolerances{}).independent);
}

TEST(NewtonRefine, ConvergesQuadraticallyOntoCircle) {
  const auto ms = models_of({"1 - x1^2 - x2^2"}, 2);
  const SurfaceModel* one[] = {&ms[0]};
  const double p0[] = {0.9, 0.5};
  const RefineResult r = newton_refine(p0, one, Tolerances{});
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_NEAR(std::hypot(r.point[0], r.point[1]), 1.0, 1e-9);
  EXPECT_LE(r.iterations, 6);
}

TEST(NewtonRefine, CrossingPointOfTwoCircles) {
  const auto ms = models_of({"1 - (x1-1/2)^2 - x2^2", "1 - (x1+1/2)^2 - x2^2"}, 2);
  const SurfaceModel* both[] = {&ms[0], &ms[1]};
  const double p0[] = {0.05, 0.9};
  const RefineResult r = newton_refine(p0, both, Tolerances{});
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_NEAR(r.point[0], 0.0, 1e-9);
  EXPECT_NEAR(r.point[1], std::sqrt(0.75), 1e-9);
}

TEST(NewtonRefine, TangencyIsRankDeficient) {
  const auto ms = models_of({"1 - (x1-1/2)^2 - x2^2", "1/4 - (x1-1)^2 - x2^2"}, 2);
  const SurfaceModel* both[] = {&ms[0], &ms[1]};
  const double p0[] = {1.5, 0.0};
  EXPECT_EQ(newton_refine(p0, both, Tolerances{}).status, SolveStatus::rank_deficient);
}

TEST(NewtonRefine, PinnedCoordinateStaysFixed) {
  const auto ms = models_of({"1 - x1^2 - x2^2"}, 2);
  const SurfaceModel* one[] = {&ms[0]};
  const double p0[] = {0.3, 0.8};
  const int pin[] = {0};
  const RefineResult r = newton_refine(p0, one, Tolerances{}, pin);
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_EQ(r.point[0], 0.3);
  EXPECT_NEAR(r.point[1], std::sqrt(1 - 0.09), 1e-9);
}

TEST(GaussNewton, SolvesOverdeterminedConsistentSystem) {
  auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& F, Eigen::MatrixXd& J) {
    F.resize(3);
    J.resize(3, 2);
    F << x[0] * x[0] - 4, x[1] - 1, x[0] * x[1] - 2;
    J << 2 * x[0], 0, 0, 1, x[1], x[0];
  };
  const SolveResult r = gauss_newton(fn, Eigen::Vector2d(3, 3), 50, 1e-12);
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_NEAR(r.x[0], 2, 1e-10);
  EXPECT_NEAR(r.x[1], 1, 1e-10);
}

TEST(Dedup, KeepsOnePerClusterAndKey) {
  const std::vector<Point> pts{{0, 0}, {1e-10, 0}, {0, 0}, {1, 1}};
  const std::vector<int> keys{0, 0, 1, 0};
  const auto kept = dedup_sorted(pts, keys, 1e-8);
  EXPECT_EQ(kept.size(), 3u);
}

TEST(SurfaceModel, NormalizedValuesAreScaleInvariant) {
  const SurfaceModel a(parse("1 - x1^2 - x2^2", 2)), b(parse("1000 - 1000*x1^2 - 1000*x2^2", 2));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 20; ++k) {
    const double x[] = {u(rng), u(rng)};
    EXPECT_DOUBLE_EQ(a.value(x), b.value(x));
    EXPECT_EQ(a.sign(x), b.sign(x));
  }
  const double x[] = {0.3, -0.2};
  const Eigen::MatrixXd h = a.hessian_at(x);
  EXPECT_DOUBLE_EQ(h(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.0);
}
