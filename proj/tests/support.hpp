#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "raregion/io.hpp"

namespace testsupport {

using namespace raregion;

inline std::string problem_path(const std::string& name) { return std::string(RAREGION_PROBLEMS_DIR) + "/" + name; }

inline Problem problem(const std::string& name) { return load_problem_file(problem_path(name)); }

// r² - (x_a - ca)² - (x_b - cb)² in n variables (a, b 1-based); inside-positive disk.
inline Polynomial disk(int n, int a, double ca, int b, double cb, double r) {
  const Polynomial xa = Polynomial::variable(n, a) - Polynomial::constant(n, Rational(ca));
  const Polynomial xb = Polynomial::variable(n, b) - Polynomial::constant(n, Rational(cb));
  return Polynomial::constant(n, Rational(r * r)) - xa * xa - xb * xb;
}

inline Polynomial scaled(const Polynomial& p, const Rational& c) { return Polynomial::constant(p.nvars(), c) * p; }

struct Circle {
  double cx, cy, r;
};

// Two blocks {1,2} and {1,3} in R³, each an intersection of disks.
struct TwoBlockConfig {
  std::vector<Circle> first, second;
  double seed1 = 0, seed2 = 0, seed3 = 0;
};

inline bool strictly_inside(const std::vector<Circle>& cs, double x, double y) {
  for (const auto& c : cs)
    if ((x - c.cx) * (x - c.cx) + (y - c.cy) * (y - c.cy) >= c.r * c.r) return false;
  return true;
}

// Random lattice configuration: centers on the half-integer lattice in [-3/2, 3/2]²,
// radii in {1/2, 1, 3/2}, one or two circles per block, seeds on the quarter lattice.
inline bool random_config(std::mt19937& rng, TwoBlockConfig& cfg) {
  std::uniform_int_distribution<int> center(-3, 3), radius(1, 3), count(1, 2);
  auto draw = [&](std::vector<Circle>& cs) {
    cs.clear();
    const int k = count(rng);
    for (int i = 0; i < k; ++i) cs.push_back({center(rng) / 2.0, center(rng) / 2.0, radius(rng) / 2.0});
  };
  draw(cfg.first);
  draw(cfg.second);
  for (int ix = -12; ix <= 12; ++ix) {
    const double x = ix / 4.0;
    bool y_found = false, z_found = false;
    double y = 0, z = 0;
    for (int iy = -12; iy <= 12 && !y_found; ++iy)
      if (strictly_inside(cfg.first, x, iy / 4.0)) y = iy / 4.0, y_found = true;
    for (int iz = -12; iz <= 12 && !z_found; ++iz)
      if (strictly_inside(cfg.second, x, iz / 4.0)) z = iz / 4.0, z_found = true;
    if (y_found && z_found) {
      cfg.seed1 = x;
      cfg.seed2 = y;
      cfg.seed3 = z;
      return true;
    }
  }
  return false;
}

inline DecompositionInput two_block_input(const TwoBlockConfig& cfg) {
  DecompositionInput in;
  in.nvars = 3;
  in.blocks = {VarSet{1, 2}, VarSet{1, 3}};
  int label = 1;
  for (const auto& c : cfg.first) {
    in.surfaces.emplace_back("S" + std::to_string(label++), disk(3, 1, c.cx, 2, c.cy, c.r));
    in.assignment.push_back(0);
  }
  for (const auto& c : cfg.second) {
    in.surfaces.emplace_back("S" + std::to_string(label++), disk(3, 1, c.cx, 3, c.cy, c.r));
    in.assignment.push_back(1);
  }
  in.block_seeds = {{cfg.seed1, cfg.seed2}, {cfg.seed1, cfg.seed3}};
  in.box = Box::cube(3, -3, 3);
  return in;
}

inline std::vector<Point> crit_x(const Decomposition& d, int block, const VarSet& N) {
  std::vector<Point> out;
  for (const auto& p : d.critical(block, N)) out.push_back(p.x);
  return out;
}

}  // namespace testsupport
