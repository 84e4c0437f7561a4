#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace raregion;
using namespace testsupport;

namespace {

RegionSpec spec2(std::vector<std::pair<std::string, std::string>> polys, Point seed, double half = 2.0) {
  RegionSpec s;
  s.nvars = static_cast<int>(seed.size());
  for (auto& [label, p] : polys) s.surfaces.emplace_back(label, parse(p, s.nvars));
  s.seed = std::move(seed);
  s.box = Box::cube(s.nvars, -half, half);
  return s;
}

bool has_witness_near(const Definition1Report& r, const Point& q, double tol) {
  for (const auto& w : r.witnesses)
    for (const auto& p : w.points)
      if (euclidean(p, q) <= tol) return true;
  return false;
}

}  // namespace

TEST(RegionSpec, RejectsBadSeeds) {
  EXPECT_THROW(RegionAnalysis(spec2({{"S", "1-x1^2-x2^2"}}, {1.5, 0})), InputError);
  EXPECT_THROW(RegionAnalysis(spec2({{"S", "1-x1^2-x2^2"}}, {1, 0})), InputError);  // on the zero set
  EXPECT_THROW(RegionAnalysis(spec2({{"S", "7"}}, {0, 0})), InputError);
  RegionSpec bad = spec2({{"S", "1-x1^2-x2^2"}}, {0, 0});
  bad.box = Box::cube(3, -1, 1);
  EXPECT_THROW(RegionAnalysis{bad}, InputError);
}

TEST(RegionAnalysis, DiskRecordsLieOnTheCircle) {
  const RegionAnalysis a(problem("disk.json").region());
  ASSERT_TRUE(a.seed_resolved());
  EXPECT_FALSE(a.touches_box());
  EXPECT_GT(a.records().size(), 60u);
  for (const auto& r : a.records()) {
    EXPECT_NEAR(std::hypot(r.point[0], r.point[1]), 1.0, 1e-8);
    EXPECT_EQ(r.active, std::vector<int>{0});
  }
  const Definition1Report rep = check_definition1(a);
  EXPECT_EQ(rep.cond1, Verdict::pass);
  EXPECT_EQ(rep.cond2, Verdict::pass);
}

TEST(Definition1, ExampleOnePasses) {
  const RegionAnalysis a(problem("example1.json").region());
  const Definition1Report rep = check_definition1(a);
  EXPECT_EQ(rep.overall(), Verdict::pass);
  EXPECT_GT(rep.multi_active_points, 0u);
  // crossing curves of the two cylinders meet at angle with sine sqrt(3)/2 or more
  EXPECT_GT(rep.min_rank_ratio, 0.5);
}

TEST(Definition1, TangentialCylindersFailTransversality) {
  const RegionAnalysis a(problem("example1_tangential.json").region());
  const Definition1Report rep = check_definition1(a);
  EXPECT_EQ(rep.cond2, Verdict::fail);
  EXPECT_TRUE(has_witness_near(rep, {-0.5, 0, 0}, 1e-3));
  EXPECT_TRUE(has_witness_near(rep, {1.5, 0, 0}, 1e-3));
}

TEST(Definition1, SurfaceMissingTheClosureFails) {
  const RegionAnalysis a(spec2({{"S1", "1-x1^2-x2^2"}, {"S2", "10-x1^2"}}, {0, 0}, 2.0));
  const Definition1Report rep = check_definition1(a);
  EXPECT_EQ(rep.cond1, Verdict::fail);
}

TEST(Definition1, NodeOnTheBoundaryFails) {
  // loop of the nodal cubic; the node at the origin is a singular point of the zero set
  const RegionAnalysis a(spec2({{"S", "x1^2*(x1+1)-x2^2"}}, {-0.5, 0}, 2.0));
  const Definition1Report rep = check_definition1(a);
  EXPECT_EQ(rep.cond1, Verdict::fail);
  EXPECT_TRUE(has_witness_near(rep, {0, 0}, 1e-6));
}

TEST(Definition1, AnnulusPassesAndIsPermutationInvariant) {
  const RegionAnalysis a(problem("annulus.json").region());
  EXPECT_EQ(check_definition1(a).overall(), Verdict::pass);
  const RegionAnalysis b(spec2({{"inner", "x1^2+x2^2-1/4"}, {"outer", "1-x1^2-x2^2"}}, {0, 0.75}));
  EXPECT_EQ(check_definition1(b).overall(), Verdict::pass);
  EXPECT_EQ(a.records().size(), b.records().size());
}

TEST(FindCritical, DiskExtremesOfEachCoordinate) {
  const RegionAnalysis a(problem("disk.json").region());
  const CriticalSet c1 = find_critical(a, VarSet{1});
  ASSERT_EQ(c1.points.size(), 2u);
  EXPECT_NEAR(c1.points[0].point[0], -1.0, 1e-9);
  EXPECT_NEAR(c1.points[1].point[0], 1.0, 1e-9);
  EXPECT_NEAR(c1.points[0].point[1], 0.0, 1e-9);
  const CriticalSet c2 = find_critical(a, VarSet{2});
  ASSERT_EQ(c2.points.size(), 2u);
  EXPECT_NEAR(std::abs(c2.points[0].point[1]), 1.0, 1e-9);
  // a stratum of dimension 1 is critical for a two-coordinate projection everywhere
  EXPECT_EQ(find_critical(a, VarSet{1, 2}).degenerate_strata.size(), 1u);
  EXPECT_THROW(find_critical(a, VarSet{3}), InputError);
}

TEST(FindCritical, CrossingStratumOfExampleOne) {
  // on the crossing curve x2 is extremal where the second cylinder turns: (1/2, ±1, 0).
  // There x2 - 1 is quartic in x3 along the curve, so x3 is only resolved to about 1e-6.
  const RegionAnalysis a(problem("example1.json").region());
  const CriticalSet c = find_critical(a, VarSet{2});
  bool crossing = false;
  for (const auto& p : c.points)
    if (p.active.size() == 2) {
      crossing = true;
      EXPECT_NEAR(p.point[0], 0.5, 1e-8);
      EXPECT_NEAR(std::abs(p.point[1]), 1.0, 1e-8);
      EXPECT_NEAR(p.point[2], 0.0, 1e-4);
    }
  EXPECT_TRUE(crossing);
}

TEST(SolveSpecial, TangencyPointOfTwoCircles) {
  std::vector<SurfaceModel> ms{SurfaceModel(parse("1-(x1-1/2)^2-x2^2", 2)), SurfaceModel(parse("1/4-(x1-1)^2-x2^2", 2))};
  const double x0[] = {1.45, 0.05};
  const SpecialSolution s = solve_special(ms, {0, 1}, VarSet{}, x0, Tolerances{});
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(s.x[0], 1.5, 1e-8);
  EXPECT_NEAR(s.x[1], 0.0, 1e-8);
}

TEST(StratumSystem, JacobianMatchesFiniteDifferences) {
  std::vector<SurfaceModel> ms{SurfaceModel(parse("1-(x1-1/2)^2-x2^2-x3^2", 3)),
                               SurfaceModel(parse("1-(x1+1/2)^2-x2^2+x1*x3^3", 3))};
  const StratumSystem sys(ms, {0, 1}, VarSet{1}, 3);
  ASSERT_EQ(sys.unknowns(), 5);
  ASSERT_EQ(sys.equations(), 2 + 2 + 1);
  Eigen::VectorXd z(5), F(5), Fp(5), Fm(5);
  z << 0.3, -0.4, 0.2, 0.6, -0.8;
  Eigen::MatrixXd J(5, 5), dummy(5, 5);
  sys.eval(z.data(), F, J);
  const double h = 1e-6;
  for (int c = 0; c < 5; ++c) {
    Eigen::VectorXd zp = z, zm = z;
    zp[c] += h;
    zm[c] -= h;
    sys.eval(zp.data(), Fp, dummy);
    sys.eval(zm.data(), Fm, dummy);
    const Eigen::VectorXd fd = (Fp - Fm) / (2 * h);
    EXPECT_LT((fd - J.col(c)).norm(), 1e-6) << "column " << c;
  }
}

TEST(Classify, SpherePolesAreTheOnlyThirdCoordinateCriticalPoints) {
  RegionSpec s = spec2({{"S", "1-x1^2-x2^2-x3^2"}}, {0, 0, 0}, 1.5);
  s.tol.grid_res = 33;
  const RegionAnalysis a(s);
  const auto recs = classify_boundary(a, {VarSet{3}, VarSet{1, 2}});
  int poles = 0;
  for (const auto& r : recs) {
    if (r.flag(VarSet{3}) == PointFlag::critical) {
      ++poles;
      EXPECT_NEAR(std::abs(r.point[2]), 1.0, 1e-8);
    }
    if (r.flag(VarSet{1, 2}) == PointFlag::critical) EXPECT_NEAR(r.point[2], 0.0, 1e-4);
  }
  EXPECT_EQ(poles, 2);
}

TEST(Slice, PinnedCoordinateOnTheDisk) {
  const RegionAnalysis a(problem("disk.json").region());
  const SliceResult s = slice_boundary(a, {{0, 0.5}}, {VarSet{2}});
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_NEAR(s.points[0].point[1], -std::sqrt(0.75), 1e-9);
  EXPECT_NEAR(s.points[1].point[1], std::sqrt(0.75), 1e-9);
  for (const auto& p : s.points) EXPECT_EQ(p.point[0], 0.5);
}

TEST(Definition1, BoxTruncationIsReported) {
  // half plane clipped by the box; every check holds within the box only
  const RegionAnalysis a(spec2({{"S", "x1"}}, {1, 0}));
  const Definition1Report rep = check_definition1(a);
  EXPECT_TRUE(a.touches_box());
  EXPECT_EQ(rep.overall(), Verdict::pass);
  EXPECT_NE(std::find(rep.caveats.begin(), rep.caveats.end(), "verified within box only"), rep.caveats.end());
}
