#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace raregion;
using namespace testsupport;

TEST(SpherePoints, UnitNormAndCounts) {
  EXPECT_EQ(sphere_points(0).size(), 2u);
  EXPECT_EQ(sphere_points(1).size(), 8u);
  const auto s3 = sphere_points(3);
  EXPECT_EQ(s3.size(), 24u);
  for (const auto& p : s3) {
    double n = 0;
    for (double v : p) n += v * v;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
}

TEST(BuildSystem, ExampleOneEquations) {
  const MomentMapSystem sys = build_system(problem("example1.json").moment_map());
  EXPECT_EQ(sys.total_vars, 5);
  ASSERT_EQ(sys.group_count(), 2);
  EXPECT_EQ(sys.equations[0], parse("1-(x1-1/2)^2-x2^2-x4^2", 5));
  EXPECT_EQ(sys.equations[1], parse("1-(x1+1/2)^2-x3^2-x5^2", 5));
  EXPECT_EQ(sys.y_blocks[1], std::make_pair(5, 5));
}

TEST(BuildSystem, GroupedProductsAndSphereDimensions) {
  MomentMapInput in = problem("annulus.json").moment_map();
  in.groups = {0, 0};
  in.sphere_dims = {2};
  const MomentMapSystem sys = build_system(in);
  EXPECT_EQ(sys.total_vars, 5);
  EXPECT_EQ(sys.equations[0], parse("(1-x1^2-x2^2)*(x1^2+x2^2-1/4)-x3^2-x4^2-x5^2", 5));
  const double x[] = {0, 0.75};
  for (const auto& y : sample_fiber(sys, x, Tolerances{})) EXPECT_LE(system_residual(sys, y), 1e-14);
}

TEST(Fiber, SizesAtInteriorAndBoundaryPoints) {
  const MomentMapSystem sys = build_system(problem("example1.json").moment_map());
  const double inside[] = {0, 0.1, -0.2};
  EXPECT_EQ(sample_fiber(sys, inside, Tolerances{}).size(), 4u);
  const double on_first[] = {1.5, 0, 0};  // S1 = 0, S2 < 0: outside
  EXPECT_THROW(sample_fiber(sys, on_first, Tolerances{}), OutsideRegion);
  const double corner[] = {0.5, 1.0, 0.0};  // both zero: single fiber point
  const auto f = sample_fiber(sys, corner, Tolerances{});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0][3], 0.0);
}

TEST(Project, RejectsPointsOffTheManifold) {
  const MomentMapSystem sys = build_system(problem("example1.json").moment_map());
  const double x[] = {0, 0, 0};
  const auto fiber = sample_fiber(sys, x, Tolerances{});
  const Point base = project(sys, fiber[0], Tolerances{});
  EXPECT_EQ(base, (Point{0, 0, 0}));
  Point off = fiber[0];
  off[3] += 0.1;
  EXPECT_THROW(project(sys, off, Tolerances{}), std::domain_error);
}

TEST(JacobianRank, FullInsideAndOnTheBoundary) {
  const MomentMapSystem sys = build_system(problem("example1.json").moment_map());
  const double x[] = {0, 0, 0};
  const auto fiber = sample_fiber(sys, x, Tolerances{});
  for (const auto& y : fiber) EXPECT_EQ(jacobian_rank(sys, y, Tolerances{}).rank, 2);
  // y1 = 0 there, but the circle gradient does not vanish
  const double edge[] = {-0.5, 0, 0};
  const auto boundary = sample_fiber(sys, edge, Tolerances{});
  EXPECT_EQ(boundary.size(), 2u);
  for (const auto& y : boundary) EXPECT_EQ(jacobian_rank(sys, y, Tolerances{}).rank, 2);
}

TEST(ExportSystem, RoundTrip) {
  const MomentMapSystem sys = build_system(problem("example1.json").moment_map());
  const auto [total, eqs] = parse_system(export_system(sys));
  EXPECT_EQ(total, sys.total_vars);
  EXPECT_EQ(eqs, sys.equations);
  EXPECT_THROW(parse_system("x1\n"), ParseError);
}

TEST(Groups, SurfacesMeetingInClosureCannotShareAGroup) {
  const Problem p = problem("example1_constant_groups.json");
  const MomentMapInput in = p.moment_map();
  const RegionAnalysis a(in.region);
  EXPECT_EQ(validate_groups(a, in.groups).verdict, Verdict::fail);
  EXPECT_EQ(validate_groups(a, {0, 1}).verdict, Verdict::pass);
  // disjoint zero sets in the closure may share a group
  const RegionAnalysis ann(problem("annulus.json").region());
  EXPECT_EQ(validate_groups(ann, {0, 0}).verdict, Verdict::pass);
}

TEST(MomentMapInput, Validation) {
  MomentMapInput in = problem("example1.json").moment_map();
  in.groups = {0, 2};
  EXPECT_THROW(in.validate(), InputError);
  in.groups = {0, 0};
  in.sphere_dims = {0, 0};
  EXPECT_THROW(in.validate(), InputError);  // group 2 unused
}
