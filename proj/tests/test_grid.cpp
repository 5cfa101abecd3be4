#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "etc/grid.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

using namespace etc;

TEST_CASE("grid spacing and indexing") {
  const GridSpec g(4, 3, 2, 2.0, 1.5, 1.0);
  CHECK(g.hx() == 0.5);
  CHECK(g.hy() == 0.5);
  CHECK(g.hz() == 0.5);
  CHECK(g.cells() == 24);
  CHECK(linear_index(0, 0, 0, g) == 0);
  CHECK(linear_index(1, 0, 0, g) == 1);
  CHECK(linear_index(0, 1, 0, g) == 4);
  CHECK(linear_index(0, 0, 1, g) == 12);
  CHECK(linear_index(3, 2, 1, g) == 23);
  CHECK_THROWS_AS(linear_index(4, 0, 0, g), ContractError);
  CHECK_THROWS_AS(linear_index(0, -1, 0, g), ContractError);
  CHECK_THROWS_AS(GridSpec(0, 1, 1), ContractError);
  CHECK_THROWS_AS(GridSpec(1, 1, 1, -1.0), ContractError);
  const auto c = g.center(1, 2, 1);
  CHECK(c[0] == doctest::Approx(0.75));
  CHECK(c[1] == doctest::Approx(1.25));
  CHECK(c[2] == doctest::Approx(0.75));
}

TEST_CASE("boundary config rejects equal potentials") {
  CHECK_THROWS_WITH_AS(BoundaryConfig(Axis::Z, 1.0, 1.0), doctest::Contains("p_in != p_out"),
                       ConfigError);
  CHECK_NOTHROW(BoundaryConfig(Axis::X, 0.0, 1.0));
  CHECK(parse_axis("y") == Axis::Y);
  CHECK_THROWS_AS(parse_axis("w"), ConfigError);
}

TEST_CASE("field validation") {
  const GridSpec g(2, 1, 1);
  CHECK_THROWS_AS(OrthotropicField(g, {1, 1}, {1, 1}, {1}), ContractError);
  CHECK_THROWS_AS(OrthotropicField(g, {1, 0}, {1, 1}, {1, 1}), ContractError);
  CHECK_THROWS_AS(OrthotropicField(g, {1, NAN}, {1, 1}, {1, 1}), ContractError);
  const auto f = OrthotropicField::constant(g, 2, 3, 4);
  CHECK(f.min_component(2) == 4.0);
  CHECK(f.max_component(0) == 2.0);
}

TEST_CASE("center ball volume fraction approaches the ball volume") {
  const Index n = 64;
  const auto f = gen_center_ball(n, 10.0);
  Index inside = 0;
  for (double v : f.kx()) inside += v == 10.0;
  const double frac = static_cast<double>(inside) / static_cast<double>(f.grid().cells());
  const double exact = 4.0 / 3.0 * std::numbers::pi / 64.0;
  CHECK(std::abs(frac - exact) / exact < 0.02);
  CHECK(f.kx() == f.ky());
  CHECK(f.ky() == f.kz());
  CHECK_THROWS_AS(gen_center_ball(1, 10.0), ConfigError);
  CHECK_THROWS_AS(gen_center_ball(8, -1.0), ConfigError);
}

TEST_CASE("center ball is symmetric under reflection") {
  const auto f = gen_center_ball(12, 0.1);
  const GridSpec& g = f.grid();
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i)
        REQUIRE(f.kx()[flat(i, j, k, g)] == f.kx()[flat(g.nx - 1 - i, j, g.nz - 1 - k, g)]);
}

TEST_CASE("random balls are reproducible from the seed") {
  const auto a = gen_random_balls(16, 10, 0.05, 0.1, 100.0, 42);
  const auto b = gen_random_balls(16, 10, 0.05, 0.1, 100.0, 42);
  const auto c = gen_random_balls(16, 10, 0.05, 0.1, 100.0, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  const auto balls = sample_balls(200, 0.05, 0.1, 9);
  for (const auto& ball : balls) {
    CHECK(ball.radius >= 0.05);
    CHECK(ball.radius <= 0.1);
    CHECK(ball.cx >= 0.0);
    CHECK(ball.cx < 1.0);
  }
  CHECK_THROWS_AS(sample_balls(0, 0.1, 0.2, 1), ConfigError);
  CHECK_THROWS_AS(sample_balls(3, 0.2, 0.1, 1), ConfigError);
  CHECK(random_ball_preset("b").count == 160);
  CHECK_THROWS_AS(random_ball_preset("d"), ConfigError);
}

TEST_CASE("voxelize_balls marks exactly the cells whose centers are inside") {
  const GridSpec g = GridSpec::cube(10);
  const Ball ball{0.3, 0.6, 0.5, 0.22};
  const auto f = voxelize_balls(g, {ball}, 5.0);
  for (Index k = 0; k < 10; ++k)
    for (Index j = 0; j < 10; ++j)
      for (Index i = 0; i < 10; ++i) {
        const auto c = g.center(i, j, k);
        const double d2 = (c[0] - 0.3) * (c[0] - 0.3) + (c[1] - 0.6) * (c[1] - 0.6) +
                          (c[2] - 0.5) * (c[2] - 0.5);
        REQUIRE(f.kz()[flat(i, j, k, g)] == (d2 <= 0.22 * 0.22 ? 5.0 : 1.0));
      }
}

TEST_CASE("channels unit cell") {
  const Index cpp = 8;
  const auto f = gen_channels(cpp, 2, 2.0);
  const GridSpec& g = f.grid();
  CHECK(g.nx == 16);
  auto band = [](Index i) { return i % 8 >= 3 && i % 8 < 5; };
  Index channel_cells = 0;
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index c = flat(i, j, k, g);
        const int hits = band(i) + band(j) + band(k);
        if (hits >= 2) {
          ++channel_cells;
          REQUIRE(f.kx()[c] == doctest::Approx(4.0));
          REQUIRE(f.ky()[c] == doctest::Approx(25.0));
          REQUIRE(f.kz()[c] == doctest::Approx(100.0));
        } else {
          REQUIRE(f.kx()[c] == 0.01);
          REQUIRE(f.ky()[c] == 0.1);
          REQUIRE(f.kz()[c] == 1.0);
        }
      }
  // three bars of 2x2x8 per unit cell, overlapping in one 2x2x2 block counted once
  CHECK(channel_cells == 8 * (3 * 32 - 2 * 8));
  CHECK_THROWS_AS(gen_channels(6, 1, 1.0), ConfigError);
  CHECK_THROWS_AS(gen_channels(8, 1, 0.0), ConfigError);
}

TEST_CASE("smooth problem coefficients") {
  const auto p = gen_smooth_problem(8);
  const GridSpec& g = p.field.grid();
  const auto c = g.center(2, 5, 7);
  const Index idx = flat(2, 5, 7, g);
  CHECK(p.field.kx()[idx] == doctest::Approx(std::cos(std::numbers::pi * c[1]) + 2.0));
  CHECK(p.field.ky()[idx] == doctest::Approx(2.0 * std::exp(c[2])));
  CHECK(p.field.kz()[idx] == doctest::Approx(3.0 * std::cos(std::numbers::pi * c[0]) + 4.0));
}

TEST_CASE("smooth source matches a finite-difference divergence of the flux") {
  const auto p = gen_smooth_problem(4);
  constexpr double pi = std::numbers::pi;
  auto kx = [](double, double y, double) { return std::cos(pi * y) + 2.0; };
  auto ky = [](double, double, double z) { return 2.0 * std::exp(z); };
  auto kz = [](double x, double, double) { return 3.0 * std::cos(pi * x) + 4.0; };
  const double h = 1e-3;
  for (double x : {0.13, 0.5, 0.77})
    for (double y : {0.21, 0.64})
      for (double z : {0.05, 0.58, 0.93}) {
        auto flux = [&](auto k, double ax, double ay, double az, int dir) {
          const double dx = dir == 0 ? h : 0, dy = dir == 1 ? h : 0, dz = dir == 2 ? h : 0;
          const double grad = (p.exact(ax + dx / 2, ay + dy / 2, az + dz / 2) -
                               p.exact(ax - dx / 2, ay - dy / 2, az - dz / 2)) / h;
          return k(ax, ay, az) * grad;
        };
        const double div =
            (flux(kx, x + h / 2, y, z, 0) - flux(kx, x - h / 2, y, z, 0)) / h +
            (flux(ky, x, y + h / 2, z, 1) - flux(ky, x, y - h / 2, z, 1)) / h +
            (flux(kz, x, y, z + h / 2, 2) - flux(kz, x, y, z - h / 2, 2)) / h;
        CHECK(p.source(x, y, z) == doctest::Approx(-div).epsilon(1e-5));
      }
}

TEST_CASE("vox round trip is bit exact") {
  const auto f = gen_random_balls(9, 5, 0.1, 0.3, 3.7, 11);
  std::stringstream ss;
  write_vox(f, ss);
  CHECK(ss.str().size() == kVoxHeaderBytes + 3 * 9 * 9 * 9 * 8);
  const VoxFile back = read_vox(ss);
  CHECK(back.dtype == VoxDtype::F64);
  CHECK(back.field == f);

  const GridSpec g(3, 2, 1, 0.5, 2.0, 1.25);
  const auto aniso = OrthotropicField(g, {1, 2, 3, 4, 5, 6}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6},
                                      {7, 8, 9, 10, 11, 12.5});
  std::stringstream s32;
  write_vox(aniso, s32, VoxDtype::F32);
  const VoxFile b32 = read_vox(s32);
  CHECK(b32.dtype == VoxDtype::F32);
  CHECK(b32.field.grid() == g);
  for (std::size_t c = 0; c < 6; ++c)
    CHECK(b32.field.ky()[c] == static_cast<double>(static_cast<float>(aniso.ky()[c])));
}

TEST_CASE("vox parse errors carry the byte offset") {
  const auto f = OrthotropicField::constant(GridSpec(2, 2, 2), 1, 2, 3);
  std::stringstream ss;
  write_vox(f, ss);
  const std::string good = ss.str();

  auto parse = [](std::string bytes) {
    std::stringstream in(bytes);
    return read_vox(in);
  };
  auto offset_of = [&](const std::string& bytes) -> std::uint64_t {
    try {
      parse(bytes);
    } catch (const VoxParseError& e) {
      return e.offset();
    }
    FAIL("expected a parse error");
    return 0;
  };

  std::string bad_magic = good;
  bad_magic[3] = 'X';
  CHECK(offset_of(bad_magic) == 0);

  CHECK(offset_of(good.substr(0, good.size() - 3)) == good.size() - 3);
  CHECK(offset_of(good.substr(0, 10)) == 10);

  std::string zero_extent = good;
  std::memset(zero_extent.data() + 12, 0, 4);
  CHECK(offset_of(zero_extent) == 8);

  std::string bad_len = good;
  const double neg = -1.0;
  std::memcpy(bad_len.data() + 28, &neg, 8);
  CHECK(offset_of(bad_len) == 20);

  std::string bad_dtype = good;
  bad_dtype[44] = 7;
  CHECK(offset_of(bad_dtype) == 44);

  std::string bad_entry = good;
  const double zero = 0.0;
  std::memcpy(bad_entry.data() + kVoxHeaderBytes + 8 * 9, &zero, 8);
  CHECK(offset_of(bad_entry) == kVoxHeaderBytes + 8 * 9);

  CHECK_THROWS_AS(read_vox(std::string("/nonexistent/dir/x.vox")), IoError);
}
