#include "etc/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace etc {

VoxParseError::VoxParseError(const std::string& what, std::uint64_t offset)
    : std::runtime_error("vox parse error at byte " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(bytes[a], bytes[b]);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get(const char* what) {
    unsigned char bytes[sizeof(T)];
    in_.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T)))
      throw VoxParseError(std::string("truncated payload reading ") + what,
                          offset_ + static_cast<std::uint64_t>(in_.gcount()));
    if constexpr (std::endian::native == std::endian::big)
      for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(bytes[a], bytes[b]);
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    offset_ += sizeof(T);
    return value;
  }

  void read_bytes(char* dst, std::size_t count, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(count));
    if (in_.gcount() != static_cast<std::streamsize>(count))
      throw VoxParseError(std::string("truncated payload reading ") + what,
                          offset_ + static_cast<std::uint64_t>(in_.gcount()));
    offset_ += count;
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_vox(const OrthotropicField& field, std::ostream& out, VoxDtype dtype) {
  const GridSpec& g = field.grid();
  constexpr auto u32max = std::numeric_limits<std::uint32_t>::max();
  if (g.nx > u32max || g.ny > u32max || g.nz > u32max)
    throw ContractError("grid extent does not fit the u32 header fields");
  out.write(kVoxMagic.data(), static_cast<std::streamsize>(kVoxMagic.size()));
  put_le(out, static_cast<std::uint32_t>(g.nx));
  put_le(out, static_cast<std::uint32_t>(g.ny));
  put_le(out, static_cast<std::uint32_t>(g.nz));
  put_le(out, g.lx);
  put_le(out, g.ly);
  put_le(out, g.lz);
  put_le(out, static_cast<std::uint8_t>(dtype));
  for (const auto* arr : {&field.kx(), &field.ky(), &field.kz()}) {
    for (double v : *arr) {
      if (dtype == VoxDtype::F64)
        put_le(out, v);
      else
        put_le(out, static_cast<float>(v));
    }
  }
  if (!out) throw IoError("failed writing voxel container");
}

void write_vox(const OrthotropicField& field, const std::string& path, VoxDtype dtype) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_vox(field, out, dtype);
}

VoxFile read_vox(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.read_bytes(magic, sizeof(magic), "magic");
  if (std::string_view(magic, 8) != kVoxMagic) throw VoxParseError("magic mismatch", 0);

  const auto nx = r.get<std::uint32_t>("nx");
  const auto ny = r.get<std::uint32_t>("ny");
  const auto nz = r.get<std::uint32_t>("nz");
  if (nx == 0 || ny == 0 || nz == 0) throw VoxParseError("zero grid extent", 8);
  const std::uint64_t lengths_at = r.offset();
  const auto lx = r.get<double>("lx");
  const auto ly = r.get<double>("ly");
  const auto lz = r.get<double>("lz");
  if (!(lx > 0 && ly > 0 && lz > 0) || !std::isfinite(lx) || !std::isfinite(ly) ||
      !std::isfinite(lz))
    throw VoxParseError("non-positive edge length", lengths_at);
  const std::uint64_t dtype_at = r.offset();
  const auto code = r.get<std::uint8_t>("dtype");
  if (code > 1) throw VoxParseError("unknown dtype code " + std::to_string(code), dtype_at);
  const auto dtype = static_cast<VoxDtype>(code);

  const GridSpec grid(nx, ny, nz, lx, ly, lz);
  const auto n = static_cast<std::size_t>(grid.cells());
  std::array<std::vector<double>, 3> arrays;
  const char* names[3] = {"kx", "ky", "kz"};
  for (int a = 0; a < 3; ++a) {
    arrays[a].resize(n);
    for (std::size_t c = 0; c < n; ++c) {
      const std::uint64_t at = r.offset();
      const double v = dtype == VoxDtype::F64 ? r.get<double>(names[a])
                                              : static_cast<double>(r.get<float>(names[a]));
      if (!(v > 0.0) || !std::isfinite(v))
        throw VoxParseError(std::string("non-positive or non-finite entry in ") + names[a], at);
      arrays[a][c] = v;
    }
  }
  return {OrthotropicField(grid, std::move(arrays[0]), std::move(arrays[1]), std::move(arrays[2])),
          dtype};
}

VoxFile read_vox(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_vox(in);
}

}  // namespace etc
