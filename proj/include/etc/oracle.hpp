#pragma once

#include "etc/grid.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace etc {

struct OracleResult {
  std::string name;
  bool passed = false;
  int cases = 0;
  double worst = 0.0;  // largest observed error (or ratio) against the tolerance
  double tolerance = 0.0;
};

/// Field with log-uniform per-cell, per-axis conductivities in [1, contrast].
OrthotropicField random_field(const GridSpec& grid, double contrast, std::mt19937_64& rng);

/// Transform, preconditioner and dense-solver cross-checks on grids with every extent <= max_n.
/// Dense checks need max_n^3 <= 4096.
std::vector<OracleResult> run_oracles(Index max_n, std::uint64_t seed = 7);

}  // namespace etc
