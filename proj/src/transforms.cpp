#include "etc/transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace etc {

std::vector<double> dct1d_ref_forward(std::span<const double> u) {
  const auto n = u.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += u[i] * std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) /
                             (2.0 * static_cast<double>(n)));
    out[k] = acc;
  }
  return out;
}

std::vector<double> dct1d_ref_backward(std::span<const double> u_hat) {
  const auto n = u_hat.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      acc += u_hat[k] * dct_alpha(static_cast<Index>(k)) *
             std::cos(std::numbers::pi * static_cast<double>((2 * i + 1) * k) /
                      (2.0 * static_cast<double>(n)));
    out[i] = 2.0 / static_cast<double>(n) * acc;
  }
  return out;
}

namespace {

template <typename Fn>
std::vector<double> tensor_apply(std::span<const double> v, Index nx, Index ny, Fn&& fn) {
  if (static_cast<Index>(v.size()) != nx * ny) throw ContractError("slice size mismatch");
  std::vector<double> tmp(v.begin(), v.end()), line;
  for (Index j = 0; j < ny; ++j) {
    line.assign(tmp.begin() + j * nx, tmp.begin() + (j + 1) * nx);
    const auto r = fn(std::span<const double>(line));
    std::copy(r.begin(), r.end(), tmp.begin() + j * nx);
  }
  for (Index i = 0; i < nx; ++i) {
    line.resize(ny);
    for (Index j = 0; j < ny; ++j) line[j] = tmp[j * nx + i];
    const auto r = fn(std::span<const double>(line));
    for (Index j = 0; j < ny; ++j) tmp[j * nx + i] = r[j];
  }
  return tmp;
}

}  // namespace

std::vector<double> dct2d_ref_forward(std::span<const double> v, Index nx, Index ny) {
  return tensor_apply(v, nx, ny, [](std::span<const double> s) { return dct1d_ref_forward(s); });
}

std::vector<double> dct2d_ref_backward(std::span<const double> v_hat, Index nx, Index ny) {
  return tensor_apply(v_hat, nx, ny,
                      [](std::span<const double> s) { return dct1d_ref_backward(s); });
}

template <typename Scalar>
void fct_pre_permute(std::span<const Scalar> v, std::span<Scalar> w, Index nx, Index ny) {
  if (static_cast<Index>(v.size()) != nx * ny || static_cast<Index>(w.size()) != nx * ny)
    throw ContractError("fct_pre_permute: slice size mismatch");
  for (Index j = 0; j < ny; ++j) {
    const Index sj = fct_source_index(j, ny);
    for (Index i = 0; i < nx; ++i) w[j * nx + i] = v[sj * nx + fct_source_index(i, nx)];
  }
}

template <typename Scalar>
void ifct_post_permute(std::span<const Scalar> w, std::span<Scalar> v, Index nx, Index ny) {
  if (static_cast<Index>(v.size()) != nx * ny || static_cast<Index>(w.size()) != nx * ny)
    throw ContractError("ifct_post_permute: slice size mismatch");
  for (Index j = 0; j < ny; ++j) {
    const Index sj = fct_source_index(j, ny);
    for (Index i = 0; i < nx; ++i) v[sj * nx + fct_source_index(i, nx)] = w[j * nx + i];
  }
}

template void fct_pre_permute<double>(std::span<const double>, std::span<double>, Index, Index);
template void fct_pre_permute<float>(std::span<const float>, std::span<float>, Index, Index);
template void ifct_post_permute<double>(std::span<const double>, std::span<double>, Index, Index);
template void ifct_post_permute<float>(std::span<const float>, std::span<float>, Index, Index);

namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename Scalar>
struct Fftw;

template <>
struct Fftw<double> {
  using plan = fftw_plan;
  using complex = fftw_complex;
  static void* malloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void free(void* p) { fftw_free(p); }
  static plan r2c(int n[2], int howmany, double* in, complex* out, int idist, int odist) {
    return fftw_plan_many_dft_r2c(2, n, howmany, in, nullptr, 1, idist, out, nullptr, 1, odist,
                                  FFTW_ESTIMATE);
  }
  static plan c2r(int n[2], int howmany, complex* in, double* out, int idist, int odist) {
    return fftw_plan_many_dft_c2r(2, n, howmany, in, nullptr, 1, idist, out, nullptr, 1, odist,
                                  FFTW_ESTIMATE);
  }
  static void execute(plan p) { fftw_execute(p); }
  static void destroy(plan p) { fftw_destroy_plan(p); }
};

template <>
struct Fftw<float> {
  using plan = fftwf_plan;
  using complex = fftwf_complex;
  static void* malloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void free(void* p) { fftwf_free(p); }
  static plan r2c(int n[2], int howmany, float* in, complex* out, int idist, int odist) {
    return fftwf_plan_many_dft_r2c(2, n, howmany, in, nullptr, 1, idist, out, nullptr, 1, odist,
                                   FFTW_ESTIMATE);
  }
  static plan c2r(int n[2], int howmany, complex* in, float* out, int idist, int odist) {
    return fftwf_plan_many_dft_c2r(2, n, howmany, in, nullptr, 1, idist, out, nullptr, 1, odist,
                                   FFTW_ESTIMATE);
  }
  static void execute(plan p) { fftwf_execute(p); }
  static void destroy(plan p) { fftwf_destroy_plan(p); }
};

}  // namespace

template <typename Scalar>
struct FctPlan<Scalar>::Impl {
  using F = Fftw<Scalar>;
  using Complex = std::complex<Scalar>;

  // Reshuffled planes, stored y-fastest so the FFT halves the y dimension.
  Scalar* work = nullptr;
  // Half spectrum, nx * (ny/2+1) per plane, y-fastest.
  Complex* spec = nullptr;
  typename F::plan r2c = nullptr;
  typename F::plan c2r = nullptr;
  std::vector<Index> src_x, src_y;
  std::vector<Complex> twiddle_x, twiddle_y;  // exp(-i pi k / 2N)

  ~Impl() {
    if (r2c) F::destroy(r2c);
    if (c2r) F::destroy(c2r);
    F::free(work);
    F::free(spec);
  }
};

template <typename Scalar>
FctPlan<Scalar>::FctPlan(Index nx, Index ny, Index nz)
    : nx_(nx), ny_(ny), nz_(nz), nyh_(ny / 2 + 1), impl_(std::make_unique<Impl>()) {
  if (nx < 1 || ny < 1 || nz < 1) throw ContractError("FctPlan: extents must be >= 1");
  using F = Fftw<Scalar>;
  auto& im = *impl_;
  im.work = static_cast<Scalar*>(F::malloc(sizeof(Scalar) * nx * ny * nz));
  im.spec = reinterpret_cast<std::complex<Scalar>*>(
      F::malloc(sizeof(typename F::complex) * nx * nyh_ * nz));
  if (!im.work || !im.spec) throw std::bad_alloc();

  int n[2] = {static_cast<int>(nx), static_cast<int>(ny)};
  {
    std::lock_guard lock(planner_mutex());
    im.r2c = F::r2c(n, static_cast<int>(nz), im.work,
                    reinterpret_cast<typename F::complex*>(im.spec), static_cast<int>(nx * ny),
                    static_cast<int>(nx * nyh_));
    im.c2r = F::c2r(n, static_cast<int>(nz), reinterpret_cast<typename F::complex*>(im.spec),
                    im.work, static_cast<int>(nx * nyh_), static_cast<int>(nx * ny));
  }
  if (!im.r2c || !im.c2r) throw std::runtime_error("FctPlan: FFTW planning failed");

  im.src_x.resize(nx);
  im.src_y.resize(ny);
  for (Index i = 0; i < nx; ++i) im.src_x[i] = fct_source_index(i, nx);
  for (Index j = 0; j < ny; ++j) im.src_y[j] = fct_source_index(j, ny);
  im.twiddle_x.resize(nx);
  im.twiddle_y.resize(ny);
  for (Index i = 0; i < nx; ++i)
    im.twiddle_x[i] = std::polar(Scalar(1), static_cast<Scalar>(-std::numbers::pi * i / (2.0 * nx)));
  for (Index j = 0; j < ny; ++j)
    im.twiddle_y[j] = std::polar(Scalar(1), static_cast<Scalar>(-std::numbers::pi * j / (2.0 * ny)));
}

template <typename Scalar>
FctPlan<Scalar>::~FctPlan() = default;
template <typename Scalar>
FctPlan<Scalar>::FctPlan(FctPlan&&) noexcept = default;
template <typename Scalar>
FctPlan<Scalar>& FctPlan<Scalar>::operator=(FctPlan&&) noexcept = default;

template <typename Scalar>
void FctPlan<Scalar>::forward(const Scalar* in, Scalar* out) {
  using Complex = std::complex<Scalar>;
  auto& im = *impl_;
  const Index nx = nx_, ny = ny_, nyh = nyh_, plane = nx * ny, splane = nx * nyh;

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < nz_; ++k) {
    const Scalar* v = in + k * plane;
    Scalar* w = im.work + k * plane;
    for (Index i = 0; i < nx; ++i) {
      const Index si = im.src_x[i];
      for (Index j = 0; j < ny; ++j) w[i * ny + j] = v[im.src_y[j] * nx + si];
    }
  }

  Impl::F::execute(im.r2c);

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < nz_; ++k) {
    const Complex* s = im.spec + k * splane;
    Scalar* o = out + k * plane;
    // Full-spectrum read; the upper half in y comes from conjugate symmetry.
    auto W = [&](Index a, Index b) -> Complex {
      if (b < nyh) return s[a * nyh + b];
      const Index ma = a == 0 ? 0 : nx - a;
      return std::conj(s[ma * nyh + (ny - b)]);
    };
    for (Index i = 0; i < nx; ++i) {
      const Complex tx = im.twiddle_x[i];
      o[i] = (tx * W(i, 0)).real();
      for (Index j = 1; j < ny; ++j) {
        const Complex ty = im.twiddle_y[j];
        const Complex z = tx * (ty * W(i, j) + std::conj(ty) * W(i, ny - j));
        o[j * nx + i] = Scalar(0.5) * z.real();
      }
    }
  }
}

template <typename Scalar>
void FctPlan<Scalar>::backward(const Scalar* in, Scalar* out) {
  using Complex = std::complex<Scalar>;
  auto& im = *impl_;
  const Index nx = nx_, ny = ny_, nyh = nyh_, plane = nx * ny, splane = nx * nyh;
  const Scalar scale = Scalar(1) / static_cast<Scalar>(plane);

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < nz_; ++k) {
    const Scalar* v = in + k * plane;
    Complex* s = im.spec + k * splane;
    // Coefficients with index N along an axis are zero.
    auto V = [&](Index a, Index b) -> Scalar {
      return (a == nx || b == ny) ? Scalar(0) : v[b * nx + a];
    };
    for (Index i = 0; i < nx; ++i) {
      const Index mi = nx - i;
      const Complex tx = std::conj(im.twiddle_x[i]);
      for (Index j = 0; j < nyh; ++j) {
        const Index mj = ny - j;
        const Complex z(V(i, j) - V(mi, mj), -(V(mi, j) + V(i, mj)));
        s[i * nyh + j] = tx * std::conj(im.twiddle_y[j]) * z;
      }
    }
  }

  Impl::F::execute(im.c2r);

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < nz_; ++k) {
    const Scalar* w = im.work + k * plane;
    Scalar* o = out + k * plane;
    for (Index i = 0; i < nx; ++i) {
      const Index si = im.src_x[i];
      for (Index j = 0; j < ny; ++j) o[im.src_y[j] * nx + si] = scale * w[i * ny + j];
    }
  }
}

template <typename Scalar>
void FctPlan<Scalar>::check(const SlabBuffer<Scalar>& buf) const {
  if (buf.nx != nx_ || buf.ny != ny_ || buf.nz != nz_ || buf.data.size() != cells())
    throw ContractError("FctPlan: buffer shape does not match the plan");
}

template <typename Scalar>
void FctPlan<Scalar>::forward(SlabBuffer<Scalar>& buf) {
  check(buf);
  forward(buf.data.data(), buf.data.data());
}

template <typename Scalar>
void FctPlan<Scalar>::backward(SlabBuffer<Scalar>& buf) {
  check(buf);
  backward(buf.data.data(), buf.data.data());
}

template class FctPlan<double>;
template class FctPlan<float>;

}  // namespace etc
