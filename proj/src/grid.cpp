#include "etc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace etc {

GridSpec::GridSpec(Index nx_, Index ny_, Index nz_, double lx_, double ly_, double lz_)
    : nx(nx_), ny(ny_), nz(nz_), lx(lx_), ly(ly_), lz(lz_) {
  if (nx < 1 || ny < 1 || nz < 1) throw ContractError("grid cell counts must be >= 1");
  if (!(lx > 0.0 && ly > 0.0 && lz > 0.0) || !std::isfinite(lx) || !std::isfinite(ly) ||
      !std::isfinite(lz))
    throw ContractError("grid edge lengths must be positive and finite");
}

Index linear_index(Index i, Index j, Index k, const GridSpec& grid) {
  if (i < 0 || i >= grid.nx || j < 0 || j >= grid.ny || k < 0 || k >= grid.nz) {
    std::ostringstream msg;
    msg << "cell index (" << i << "," << j << "," << k << ") outside " << grid.nx << "x"
        << grid.ny << "x" << grid.nz;
    throw ContractError(msg.str());
  }
  return flat(i, j, k, grid);
}

Axis parse_axis(std::string_view s) {
  if (s == "x" || s == "X") return Axis::X;
  if (s == "y" || s == "Y") return Axis::Y;
  if (s == "z" || s == "Z") return Axis::Z;
  throw ConfigError("axis must be one of x, y, z");
}

const char* to_string(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "?";
}

BoundaryConfig::BoundaryConfig(Axis axis_, double p_in_, double p_out_)
    : axis(axis_), p_in(p_in_), p_out(p_out_) {
  if (!std::isfinite(p_in) || !std::isfinite(p_out))
    throw ConfigError("boundary potentials must be finite");
  if (p_in == p_out) throw ConfigError("p_in must differ from p_out (p_in != p_out)");
}

OrthotropicField::OrthotropicField(GridSpec grid, std::vector<double> kx, std::vector<double> ky,
                                   std::vector<double> kz)
    : grid_(grid), kx_(std::move(kx)), ky_(std::move(ky)), kz_(std::move(kz)) {
  const auto n = static_cast<std::size_t>(grid_.cells());
  if (kx_.size() != n || ky_.size() != n || kz_.size() != n)
    throw ContractError("conductivity arrays must have nx*ny*nz entries");
  for (const auto* arr : {&kx_, &ky_, &kz_}) {
    for (std::size_t c = 0; c < n; ++c) {
      const double v = (*arr)[c];
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "conductivity entry " << c << " is not positive and finite (" << v << ")";
        throw ContractError(msg.str());
      }
    }
  }
}

OrthotropicField OrthotropicField::constant(const GridSpec& grid, double kx, double ky,
                                            double kz) {
  const auto n = static_cast<std::size_t>(grid.cells());
  return {grid, std::vector<double>(n, kx), std::vector<double>(n, ky),
          std::vector<double>(n, kz)};
}

const std::vector<double>& OrthotropicField::component(int axis) const {
  switch (axis) {
    case 0: return kx_;
    case 1: return ky_;
    case 2: return kz_;
  }
  throw ContractError("component axis must be 0, 1 or 2");
}

double OrthotropicField::min_component(int axis) const {
  const auto& a = component(axis);
  return *std::min_element(a.begin(), a.end());
}

double OrthotropicField::max_component(int axis) const {
  const auto& a = component(axis);
  return *std::max_element(a.begin(), a.end());
}

namespace {

void require_cube_resolution(Index n) {
  if (n < 2) throw ConfigError("generator resolution n must be >= 2");
}

// Uniform double in [0,1) from the top 53 bits; stable across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

SmoothProblem gen_smooth_problem(Index n) {
  require_cube_resolution(n);
  constexpr double pi = std::numbers::pi;
  const GridSpec grid = GridSpec::cube(n);
  std::vector<double> kx(grid.cells()), ky(grid.cells()), kz(grid.cells());
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const auto [x, y, z] = grid.center(i, j, k);
        const Index c = flat(i, j, k, grid);
        kx[c] = std::cos(pi * y) + 2.0;
        ky[c] = 2.0 * std::exp(z);
        kz[c] = 3.0 * std::cos(pi * x) + 4.0;
      }

  auto exact = [](double x, double y, double z) {
    return std::cos(pi * x) * std::cos(pi * y) * std::exp(z);
  };
  // K = Diag(a(y), b(z), c(x)) with a = cos(pi y) + 2, b = 2 e^z, c = 3 cos(pi x) + 4.
  // Each coefficient is constant along the derivative direction it multiplies, so
  //   d/dx(a dp/dx) = -pi^2 a p,   d/dy(b dp/dy) = -pi^2 b p,   d/dz(c dp/dz) = c p,
  // and f = -div(K grad p) = p * (pi^2 (cos(pi y) + 2) + 2 pi^2 e^z - 3 cos(pi x) - 4).
  auto source = [](double x, double y, double z) {
    const double p = std::cos(pi * x) * std::cos(pi * y) * std::exp(z);
    return p * (pi * pi * (std::cos(pi * y) + 2.0) + 2.0 * pi * pi * std::exp(z) -
                3.0 * std::cos(pi * x) - 4.0);
  };
  return {OrthotropicField(grid, std::move(kx), std::move(ky), std::move(kz)), exact, source};
}

OrthotropicField voxelize_balls(const GridSpec& grid, const std::vector<Ball>& balls,
                                double kappa_inc) {
  if (!(kappa_inc > 0.0) || !std::isfinite(kappa_inc))
    throw ConfigError("kappa_inc must be positive and finite");
  std::vector<double> k(grid.cells(), 1.0);
  for (Index kk = 0; kk < grid.nz; ++kk)
    for (Index j = 0; j < grid.ny; ++j)
      for (Index i = 0; i < grid.nx; ++i) {
        const auto [x, y, z] = grid.center(i, j, kk);
        for (const Ball& b : balls) {
          const double dx = x - b.cx, dy = y - b.cy, dz = z - b.cz;
          if (dx * dx + dy * dy + dz * dz <= b.radius * b.radius) {
            k[flat(i, j, kk, grid)] = kappa_inc;
            break;
          }
        }
      }
  return {grid, k, k, k};
}

OrthotropicField gen_center_ball(Index n, double kappa_inc) {
  require_cube_resolution(n);
  return voxelize_balls(GridSpec::cube(n), {Ball{0.5, 0.5, 0.5, 0.25}}, kappa_inc);
}

std::vector<Ball> sample_balls(Index count, double r_min, double r_max, std::uint64_t seed) {
  if (count < 1) throw ConfigError("ball count must be >= 1");
  if (!(r_min > 0.0 && r_min <= r_max && r_max < 0.5))
    throw ConfigError("ball radii must satisfy 0 < r_min <= r_max < 1/2");
  std::mt19937_64 rng(seed);
  std::vector<Ball> balls;
  balls.reserve(static_cast<std::size_t>(count));
  for (Index b = 0; b < count; ++b) {
    Ball ball{};
    ball.cx = unit_uniform(rng);
    ball.cy = unit_uniform(rng);
    ball.cz = unit_uniform(rng);
    ball.radius = r_min + (r_max - r_min) * unit_uniform(rng);
    balls.push_back(ball);
  }
  return balls;
}

OrthotropicField gen_random_balls(Index n, Index count, double r_min, double r_max,
                                  double kappa_inc, std::uint64_t seed) {
  require_cube_resolution(n);
  return voxelize_balls(GridSpec::cube(n), sample_balls(count, r_min, r_max, seed), kappa_inc);
}

const std::array<RandomBallPreset, 3>& random_ball_presets() {
  static const std::array<RandomBallPreset, 3> presets{{
      {"a", 40, 0.08, 0.14, 20240501ULL},
      {"b", 160, 0.04, 0.08, 20240502ULL},
      {"c", 16, 0.12, 0.20, 20240503ULL},
  }};
  return presets;
}

const RandomBallPreset& random_ball_preset(std::string_view name) {
  for (const auto& p : random_ball_presets())
    if (name == p.name) return p;
  throw ConfigError("unknown random-ball preset '" + std::string(name) + "' (expected a, b or c)");
}

OrthotropicField gen_channels(Index cells_per_period, Index periods, double psi) {
  if (cells_per_period < 8 || cells_per_period % 8 != 0)
    throw ConfigError("cells_per_period must be a positive multiple of 8");
  if (periods < 1) throw ConfigError("periods must be >= 1");
  if (!(psi > 0.0) || !std::isfinite(psi)) throw ConfigError("psi must be positive");

  const Index n = cells_per_period * periods;
  const GridSpec grid = GridSpec::cube(n);
  // Band (3/8, 5/8) of the unit cell in local cell units.
  const Index lo = 3 * cells_per_period / 8, hi = 5 * cells_per_period / 8;
  auto in_band = [&](Index idx) {
    const Index local = idx % cells_per_period;
    return local >= lo && local < hi;
  };
  const std::array<double, 3> channel{std::pow(2.0, psi), std::pow(5.0, psi),
                                      std::pow(10.0, psi)};
  const std::array<double, 3> matrix{0.01, 0.1, 1.0};

  std::vector<double> kx(grid.cells()), ky(grid.cells()), kz(grid.cells());
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) {
        const bool bx = in_band(i), by = in_band(j), bz = in_band(k);
        const bool inside = (by && bz) || (bx && bz) || (bx && by);
        const auto& v = inside ? channel : matrix;
        const Index c = flat(i, j, k, grid);
        kx[c] = v[0];
        ky[c] = v[1];
        kz[c] = v[2];
      }
  return {grid, std::move(kx), std::move(ky), std::move(kz)};
}

}  // namespace etc
