// Command-line front end: check-region, check-decomposition, moment-map, reeb, classify.
// Exit codes: 0 certified, 1 refuted, 2 indeterminate, 3 input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raregion/io.hpp"

namespace fs = std::filesystem;
using namespace raregion;

namespace {

struct Common {
  std::string file;
  std::optional<double> tol_zero, tol_rank;
  std::optional<int> grid_res;
  std::string out;
  bool emit_points = false;
  bool emit_dot = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("file", c.file, "problem file (JSON)")->required();
  sub->add_option("--tol-zero", c.tol_zero, "zero-set tolerance on normalized polynomials");
  sub->add_option("--tol-rank", c.tol_rank, "relative singular-value threshold");
  sub->add_option("--grid-res", c.grid_res, "grid samples per axis");
  sub->add_option("--out", c.out, "directory for report files");
}

Problem load(const Common& c) {
  Problem p = load_problem_file(c.file);
  if (c.tol_zero) p.tol.zero_tol = *c.tol_zero;
  if (c.tol_rank) p.tol.rank_rel_tol = *c.tol_rank;
  if (c.grid_res) p.tol.grid_res = *c.grid_res;
  try {
    p.tol.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return p;
}

// Writes to <out>/<name> when --out is given, otherwise to stdout when `fallback` is set.
void emit(const Common& c, const std::string& name, const std::string& text, bool fallback) {
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream f(fs::path(c.out) / name);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(c.out) / name).string());
    f << text;
  } else if (fallback) {
    std::cout << text;
  }
}

void print_table(const ConditionReport& r) {
  for (const auto& e : r.conditions) std::printf("  %-20s %s\n", e.name.c_str(), to_string(e.verdict));
  for (const auto& w : r.witnesses) {
    std::printf("  witness [%s] %s", w.condition.c_str(), w.diagnostic.c_str());
    if (w.points.size() == 1) std::printf(" at (%s)", format_point(w.points[0]).c_str());
    std::printf("\n");
  }
  for (const auto& cv : r.caveats) std::printf("  caveat: %s\n", cv.c_str());
  std::printf("overall: %s\n", to_string(r.overall()));
}

int check_region(const Common& c) {
  const Problem p = load(c);
  const RegionAnalysis a(p.region());
  const ConditionReport r = region_report(check_definition1(a));
  print_table(r);
  json j = report_json(r);
  j["command"] = "check-region";
  emit(c, "report.json", j.dump(2) + "\n", false);
  if (c.emit_points) emit(c, "points.txt", point_dump(classify_boundary(a, {}), a.spec().surfaces), true);
  return exit_code(r.overall());
}

int check_decomposition(const Common& c, const std::optional<std::string>& mode, const std::optional<int>& b) {
  Problem p = load(c);
  if (mode) {
    if (*mode == "thm1") p.mode = TheoremMode::thm1;
    else if (*mode == "thm3") p.mode = TheoremMode::thm3;
    else throw InputError("--mode must be thm1 or thm3");
  }
  if (b) p.b = *b;
  const ConditionReport r = assemble(p.decomposition(), p.mode, p.b);
  print_table(r);
  json j = report_json(r);
  j["command"] = "check-decomposition";
  j["mode"] = p.mode == TheoremMode::thm1 ? "thm1" : "thm3";
  j["b"] = p.b;
  emit(c, "report.json", j.dump(2) + "\n", false);
  return exit_code(r.overall());
}

int moment_map(const Common& c, int base_points) {
  const Problem p = load(c);
  const MomentMapInput in = p.moment_map();
  in.validate();
  const RegionAnalysis a(in.region);
  const GroupCheck g = validate_groups(a, in.groups);
  if (g.verdict == Verdict::fail) {
    for (const auto& w : g.witnesses) std::fprintf(stderr, "error: %s\n", w.diagnostic.c_str());
    return 3;
  }
  const MomentMapSystem sys = build_system(in);
  std::cout << export_system(sys);
  emit(c, "system.txt", export_system(sys), false);

  std::vector<std::size_t> interior;
  for (std::size_t idx = 0; idx < a.grid().size(); ++idx)
    if (a.in_region(idx)) interior.push_back(idx);
  std::string fibers = "# base point ; fiber point (all coordinates)\n";
  double worst = 0;
  int rank_checks = 0, rank_full = 0;
  std::size_t count = 0;
  const std::size_t step = std::max<std::size_t>(1, interior.size() / std::max(1, base_points));
  for (std::size_t k = 0; k < interior.size() && count < static_cast<std::size_t>(base_points); k += step, ++count) {
    const Point x = a.grid().point(interior[k]);
    for (const auto& y : sample_fiber(sys, x, p.tol)) {
      worst = std::max(worst, system_residual(sys, y));
      const RankInfo ri = jacobian_rank(sys, y, p.tol);
      ++rank_checks;
      if (ri.rank == sys.group_count()) ++rank_full;
      fibers += format_point(x) + " ; " + format_point(y) + "\n";
    }
  }
  emit(c, "fibers.txt", fibers, false);
  json j = {{"command", "moment-map"},
            {"total_vars", sys.total_vars},
            {"equations", sys.group_count()},
            {"base_points", count},
            {"max_residual", round9(worst)},
            {"jacobian_full_rank", rank_full},
            {"jacobian_checks", rank_checks},
            {"caveats", g.caveats}};
  emit(c, "report.json", j.dump(2) + "\n", false);
  std::printf("# base points %zu, max residual %.3g, full-rank Jacobians %d/%d\n", count, worst, rank_full, rank_checks);
  return 0;
}

int reeb(const Common& c, const std::optional<int>& coord) {
  const Problem p = load(c);
  const RegionAnalysis a(p.region());
  const Definition1Report d = check_definition1(a);
  if (d.overall() == Verdict::fail) {
    std::fprintf(stderr, "region fails the region conditions; no digraph computed\n");
    return 1;
  }
  const ReebDigraph g = reeb_digraph(a, coord.value_or(p.reeb_coord));
  const std::string dot = export_dot(g);
  emit(c, "reeb.dot", dot, c.emit_dot || c.out.empty());
  json j = reeb_json(g);
  j["command"] = "reeb";
  emit(c, "report.json", j.dump(2) + "\n", false);
  for (const auto& w : g.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (d.overall() == Verdict::indeterminate || g.ambiguous_order) return 2;
  return 0;
}

int classify(const Common& c, const std::vector<std::string>& sets) {
  Problem p = load(c);
  std::vector<VarSet> Ns = p.classify_sets;
  if (!sets.empty()) {
    Ns.clear();
    for (const auto& s : sets) {
      std::vector<int> idx;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) idx.push_back(std::stoi(tok));
      Ns.emplace_back(idx);
    }
  }
  const RegionAnalysis a(p.region());
  const auto recs = classify_boundary(a, Ns);
  emit(c, "points.txt", point_dump(recs, a.spec().surfaces), true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for regions bounded by real algebraic hypersurfaces"};
  app.require_subcommand(1);
  Common common;
  std::optional<std::string> mode;
  std::optional<int> b, coord;
  int base_points = 10;
  std::vector<std::string> sets;

  auto* region = app.add_subcommand("check-region", "check the two region conditions");
  add_common(region, common);
  region->add_flag("--emit-points", common.emit_points, "write the boundary point dump");

  auto* decomp = app.add_subcommand("check-decomposition", "check the block conditions and the assembled region");
  add_common(decomp, common);
  decomp->add_option("--mode", mode, "thm1 or thm3");
  decomp->add_option("--b", b, "intersection bound for thm3");

  auto* mm = app.add_subcommand("moment-map", "build the manifold system and sample fibers");
  add_common(mm, common);
  mm->add_option("--fibers", base_points, "number of interior base points to sample");

  auto* rb = app.add_subcommand("reeb", "Reeb digraph of a coordinate on the region closure");
  add_common(rb, common);
  rb->add_option("--coord", coord, "coordinate index (1-based)");
  rb->add_flag("--emit-dot", common.emit_dot, "print the digraph text");

  auto* cl = app.add_subcommand("classify", "classify boundary points against coordinate sets");
  add_common(cl, common);
  cl->add_option("--N", sets, "coordinate set, comma separated (repeatable)");
  cl->add_flag("--emit-points", common.emit_points, "accepted for symmetry; the dump is always written");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (region->parsed()) return check_region(common);
    if (decomp->parsed()) return check_decomposition(common, mode, b);
    if (mm->parsed()) return moment_map(common, base_points);
    if (rb->parsed()) return reeb(common, coord);
    if (cl->parsed()) return classify(common, sets);
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 3;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 3;
}
