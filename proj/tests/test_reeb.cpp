#include <gtest/gtest.h>

#include "support.hpp"

using namespace raregion;
using namespace testsupport;

namespace {

void expect_well_formed(const ReebDigraph& g) {
  EXPECT_TRUE(g.acyclic());
  EXPECT_TRUE(g.monotone());
  EXPECT_TRUE(g.euler_consistent());
  EXPECT_FALSE(g.ambiguous_order);
  for (const auto& v : g.vertices)
    if (v.kind != ReebKind::regular_endpoint) EXPECT_TRUE(v.snapped);
}

}  // namespace

TEST(Reeb, DiskIsOneEdge) {
  const RegionAnalysis a(problem("disk.json").region());
  const ReebDigraph g = reeb_digraph(a, 1);
  ASSERT_EQ(g.vertices.size(), 2u);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.vertices[0].kind, ReebKind::birth);
  EXPECT_EQ(g.vertices[1].kind, ReebKind::death);
  EXPECT_NEAR(g.vertices[0].value, -1.0, 1e-9);
  EXPECT_NEAR(g.vertices[1].value, 1.0, 1e-9);
  expect_well_formed(g);
}

TEST(Reeb, AnnulusSplitsAndMerges) {
  const RegionAnalysis a(problem("annulus.json").region());
  const ReebDigraph g = reeb_digraph(a, 1);
  ASSERT_EQ(g.vertices.size(), 4u);
  EXPECT_EQ(g.edges.size(), 4u);
  EXPECT_EQ(g.count(ReebKind::split), 1);
  EXPECT_EQ(g.count(ReebKind::merge), 1);
  std::vector<double> values;
  for (const auto& v : g.vertices) values.push_back(v.value);
  std::sort(values.begin(), values.end());
  const double expected[] = {-1.0, -0.5, 0.5, 1.0};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(values[k], expected[k], 1e-9);
  expect_well_formed(g);
}

TEST(Reeb, AnnulusAlongSecondCoordinate) {
  const RegionAnalysis a(problem("annulus.json").region());
  const ReebDigraph g = reeb_digraph(a, 2);
  EXPECT_EQ(g.vertices.size(), 4u);
  EXPECT_EQ(g.edges.size(), 4u);
  expect_well_formed(g);
}

TEST(Reeb, ExampleOneLensAlongFirstCoordinate) {
  const RegionAnalysis a(problem("example1.json").region());
  const ReebDigraph g = reeb_digraph(a, 1);
  ASSERT_EQ(g.vertices.size(), 2u);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_NEAR(g.vertices[0].value, -0.5, 1e-9);
  EXPECT_NEAR(g.vertices[1].value, 0.5, 1e-9);
  expect_well_formed(g);
}

TEST(Reeb, BoxTruncationGivesRegularEndpoints) {
  RegionSpec s;
  s.nvars = 2;
  s.surfaces.emplace_back("S", parse("1-x2^2", 2));
  s.seed = {0, 0};
  s.box = Box::cube(2, -2, 2);
  const ReebDigraph g = reeb_digraph(RegionAnalysis(s), 1);
  ASSERT_EQ(g.vertices.size(), 2u);
  EXPECT_EQ(g.count(ReebKind::regular_endpoint), 2);
  EXPECT_TRUE(g.euler_consistent());
}

TEST(Reeb, CoordinateRangeChecked) {
  const RegionAnalysis a(problem("disk.json").region());
  EXPECT_THROW(reeb_digraph(a, 3), InputError);
}

TEST(Reeb, DotExport) {
  const RegionAnalysis a(problem("disk.json").region());
  const std::string dot = export_dot(reeb_digraph(a, 1));
  EXPECT_EQ(dot,
            "digraph reeb {\n"
            "  v0 [label=\"-1.000000 birth\"];\n"
            "  v1 [label=\"1.000000 death\"];\n"
            "  v0 -> v1;\n"
            "}\n");
}
