#pragma once

#include "etc/types.hpp"

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace etc {

// DCT-II pair used throughout:
//   forward   U[k] = sum_i u[i] cos(pi (2i+1) k / 2N)
//   backward  u[i] = (2/N) sum_k alpha_k U[k] cos(pi (2i+1) k / 2N),  alpha_0 = 1/2, else 1.

/// O(N^2) direct summation.
std::vector<double> dct1d_ref_forward(std::span<const double> u);
std::vector<double> dct1d_ref_backward(std::span<const double> u_hat);

/// Tensor-product reference on one x-fastest nx*ny slice (x pass, then y pass).
std::vector<double> dct2d_ref_forward(std::span<const double> v, Index nx, Index ny);
std::vector<double> dct2d_ref_backward(std::span<const double> v_hat, Index nx, Index ny);

inline double dct_alpha(Index k) { return k == 0 ? 0.5 : 1.0; }

/// Even/odd reshuffle: position i of the permuted sequence reads element fct_source_index(i, n).
inline Index fct_source_index(Index i, Index n) {
  return i <= (n - 1) / 2 ? 2 * i : 2 * n - 2 * i - 1;
}

/// Two-dimensional reshuffle of an x-fastest nx*ny slice into `w` (same layout).
template <typename Scalar>
void fct_pre_permute(std::span<const Scalar> v, std::span<Scalar> w, Index nx, Index ny);

/// Inverse of fct_pre_permute.
template <typename Scalar>
void ifct_post_permute(std::span<const Scalar> w, std::span<Scalar> v, Index nx, Index ny);

/// A stack of nz x-fastest nx*ny slices.
template <typename Scalar>
struct SlabBuffer {
  Index nx = 0, ny = 0, nz = 0;
  CellVector<Scalar> data;

  SlabBuffer() = default;
  SlabBuffer(Index nx_, Index ny_, Index nz_)
      : nx(nx_), ny(ny_), nz(nz_), data(CellVector<Scalar>::Zero(nx_ * ny_ * nz_)) {}

  Index plane() const { return nx * ny; }
  std::span<Scalar> slice(Index k) { return {data.data() + k * plane(), static_cast<std::size_t>(plane())}; }
  std::span<const Scalar> slice(Index k) const {
    return {data.data() + k * plane(), static_cast<std::size_t>(plane())};
  }
};

/// Batched 2D fast cosine transform over the (x,y)-planes of an nx*ny*nz slab.
///
/// Each plane goes through the reshuffle, a real-to-complex 2D FFT whose halved
/// dimension is y (nx * (ny/2+1) complex values per plane), and a twiddle pass that
/// reads the missing half of the spectrum through conjugate symmetry. Planning
/// allocates all workspace; forward/backward do not allocate.
template <typename Scalar>
class FctPlan {
 public:
  FctPlan(Index nx, Index ny, Index nz);
  ~FctPlan();
  FctPlan(const FctPlan&) = delete;
  FctPlan& operator=(const FctPlan&) = delete;
  FctPlan(FctPlan&&) noexcept;
  FctPlan& operator=(FctPlan&&) noexcept;

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index nz() const { return nz_; }
  Index cells() const { return nx_ * ny_ * nz_; }

  /// Physical -> DCT coefficients per plane. `in` and `out` may be the same array.
  void forward(const Scalar* in, Scalar* out);
  /// DCT coefficients -> physical per plane. `in` and `out` may be the same array.
  void backward(const Scalar* in, Scalar* out);

  void forward(SlabBuffer<Scalar>& buf);
  void backward(SlabBuffer<Scalar>& buf);

 private:
  struct Impl;
  void check(const SlabBuffer<Scalar>& buf) const;

  Index nx_, ny_, nz_, nyh_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace etc
