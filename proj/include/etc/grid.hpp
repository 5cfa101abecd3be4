#pragma once

#include "etc/types.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace etc {

/// Uniform voxel grid over the box (0,lx) x (0,ly) x (0,lz).
struct GridSpec {
  Index nx = 1, ny = 1, nz = 1;
  double lx = 1.0, ly = 1.0, lz = 1.0;

  GridSpec() = default;
  GridSpec(Index nx, Index ny, Index nz, double lx = 1.0, double ly = 1.0, double lz = 1.0);

  static GridSpec cube(Index n) { return GridSpec(n, n, n); }

  double hx() const { return lx / static_cast<double>(nx); }
  double hy() const { return ly / static_cast<double>(ny); }
  double hz() const { return lz / static_cast<double>(nz); }
  double cell_volume() const { return hx() * hy() * hz(); }

  Index cells() const { return nx * ny * nz; }
  Index slice_cells() const { return nx * ny; }

  std::array<double, 3> center(Index i, Index j, Index k) const {
    return {(static_cast<double>(i) + 0.5) * hx(), (static_cast<double>(j) + 0.5) * hy(),
            (static_cast<double>(k) + 0.5) * hz()};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Flat offset of cell (i,j,k); x runs fastest. Throws ContractError when out of range.
Index linear_index(Index i, Index j, Index k, const GridSpec& grid);

/// Unchecked variant for inner loops.
inline Index flat(Index i, Index j, Index k, const GridSpec& g) { return (k * g.ny + j) * g.nx + i; }

enum class Axis { X, Y, Z };

Axis parse_axis(std::string_view s);
const char* to_string(Axis a);

/// Dirichlet data on the pair of faces normal to `axis`; the other four faces are zero-flux.
struct BoundaryConfig {
  Axis axis = Axis::Z;
  double p_in = 1.0;
  double p_out = 0.0;

  BoundaryConfig() = default;
  BoundaryConfig(Axis axis, double p_in, double p_out);
};

/// Per-cell diagonal conductivity Diag(kx, ky, kz). Entries are validated positive and finite.
class OrthotropicField {
 public:
  OrthotropicField() = default;
  OrthotropicField(GridSpec grid, std::vector<double> kx, std::vector<double> ky,
                   std::vector<double> kz);

  /// Same value on every cell.
  static OrthotropicField constant(const GridSpec& grid, double kx, double ky, double kz);

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& kx() const { return kx_; }
  const std::vector<double>& ky() const { return ky_; }
  const std::vector<double>& kz() const { return kz_; }
  const std::vector<double>& component(int axis) const;

  double min_component(int axis) const;
  double max_component(int axis) const;

  friend bool operator==(const OrthotropicField&, const OrthotropicField&) = default;

 private:
  GridSpec grid_;
  std::vector<double> kx_, ky_, kz_;
};

using Sampler = std::function<double(double x, double y, double z)>;

/// Manufactured smooth problem on the unit cube with a known exact potential.
struct SmoothProblem {
  OrthotropicField field;
  Sampler exact;
  Sampler source;
};

SmoothProblem gen_smooth_problem(Index n);

OrthotropicField gen_center_ball(Index n, double kappa_inc);

struct Ball {
  double cx, cy, cz, radius;
};

/// Cells whose center lies inside any ball get kappa_inc on all three axes, others get 1.
OrthotropicField voxelize_balls(const GridSpec& grid, const std::vector<Ball>& balls,
                                double kappa_inc);

/// Ball centers uniform in the unit cube, radii uniform in [r_min, r_max], overlaps allowed.
std::vector<Ball> sample_balls(Index count, double r_min, double r_max, std::uint64_t seed);

OrthotropicField gen_random_balls(Index n, Index count, double r_min, double r_max,
                                  double kappa_inc, std::uint64_t seed);

struct RandomBallPreset {
  const char* name;
  Index count;
  double r_min, r_max;
  std::uint64_t seed;
};

/// Fixed stand-ins for the three random packs "a", "b", "c".
const std::array<RandomBallPreset, 3>& random_ball_presets();
const RandomBallPreset& random_ball_preset(std::string_view name);

/// Periodic tiling of a unit cell with three orthogonal channels of conductivity
/// Diag(2^psi, 5^psi, 10^psi) in a Diag(0.01, 0.1, 1) matrix.
OrthotropicField gen_channels(Index cells_per_period, Index periods, double psi);

// Voxel container ("ETCVOX01"), little-endian.

enum class VoxDtype : std::uint8_t { F64 = 0, F32 = 1 };

class VoxParseError : public std::runtime_error {
 public:
  VoxParseError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

inline constexpr std::string_view kVoxMagic = "ETCVOX01";
inline constexpr std::size_t kVoxHeaderBytes = 8 + 12 + 24 + 1;

void write_vox(const OrthotropicField& field, std::ostream& out, VoxDtype dtype = VoxDtype::F64);
void write_vox(const OrthotropicField& field, const std::string& path,
               VoxDtype dtype = VoxDtype::F64);

struct VoxFile {
  OrthotropicField field;
  VoxDtype dtype;
};

VoxFile read_vox(std::istream& in);
VoxFile read_vox(const std::string& path);

}  // namespace etc
