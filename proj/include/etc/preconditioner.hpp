#pragma once

#include "etc/tpfa.hpp"
#include "etc/transforms.hpp"
#include "etc/types.hpp"

#include <array>
#include <limits>
#include <string_view>
#include <vector>

namespace etc {

/// The five coefficient groups of the bilinear form: x/y/z interior faces, inflow and
/// outflow boundary faces.
enum class FaceGroup { X = 0, Y = 1, Z = 2, In = 3, Out = 4 };
inline constexpr std::array<FaceGroup, 5> kFaceGroups{FaceGroup::X, FaceGroup::Y, FaceGroup::Z,
                                                      FaceGroup::In, FaceGroup::Out};
const char* to_string(FaceGroup g);

struct ValueRange {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  /// False for a group without faces (e.g. x faces when nx == 1).
  bool present() const { return min <= max; }
  void include(double v) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
};

/// Min/max of the scaled interior transmissibilities per axis and of the scaled boundary
/// conductivities kz/hz^2 (without the factor 2 carried by the boundary terms).
struct CoefficientStats {
  std::array<ValueRange, 5> groups;

  ValueRange& operator[](FaceGroup g) { return groups[static_cast<int>(g)]; }
  const ValueRange& operator[](FaceGroup g) const { return groups[static_cast<int>(g)]; }

  /// Multiply every bound by c > 0.
  CoefficientStats scaled(double c) const;
};

struct ReferenceParams {
  double kx = 1.0, ky = 1.0, kz = 1.0, kin = 1.0, kout = 1.0;
  double lambda_lo = 1.0;  // largest L' with L' a_ref <= a
  double lambda_hi = 1.0;  // smallest L'' with a <= L'' a_ref

  double objective() const { return lambda_hi / lambda_lo; }
  double& operator[](FaceGroup g);
  double operator[](FaceGroup g) const;
};

template <typename Scalar>
CoefficientStats coefficient_stats(const DiscreteSystem<Scalar>& sys);

/// Lambda' = min_g min_g / ref_g and Lambda'' = max_g max_g / ref_g over present groups.
void compute_spectral_bounds(const CoefficientStats& stats, ReferenceParams& refs);

/// Optimal value of the log-space linear program: max_g log(max_g / min_g).
double lp_optimal_value(const CoefficientStats& stats);

/// Reference constants minimizing Lambda''/Lambda'. Each group gets the geometric mean of
/// its bounds; groups without faces keep 1.
ReferenceParams solve_reference_lp(const CoefficientStats& stats);

/// All five constants equal to 1; bounds are filled when stats are given.
ReferenceParams ones_reference();
ReferenceParams ones_reference(const CoefficientStats& stats);

/// The homogeneous reference operator A_ref as a stencil system.
template <typename Scalar>
DiscreteSystem<Scalar> reference_system(const GridSpec& grid, const ReferenceParams& refs);

/// Tridiagonal blocks T(i',j') of A_ref in the cosine basis of the (x,y)-planes:
///   T = (ex[i'] kx + ey[j'] ky) I + tridiag(-kz; kz + 2 kin, 2 kz, ..., 2 kz, kz + 2 kout)
/// with ex[i'] = 2(1 - cos(i' pi / nx)), ey[j'] = 2(1 - cos(j' pi / ny)). For nz == 1 the
/// single diagonal entry is ex kx + ey ky + 2 kin + 2 kout. Columns are generated on demand.
template <typename Scalar>
struct TridiagFactors {
  Index nx = 0, ny = 0, nz = 0;
  ReferenceParams refs;
  std::vector<double> eig_x, eig_y;

  double shift(Index ip, Index jp) const { return eig_x[ip] * refs.kx + eig_y[jp] * refs.ky; }
  double diag(Index ip, Index jp, Index k) const;
  double off_diag() const { return -refs.kz; }
  DenseMatrix dense_block(Index ip, Index jp) const;
};

template <typename Scalar>
TridiagFactors<Scalar> build_tridiag(const GridSpec& grid, const ReferenceParams& refs);

/// Solve T(i',j') x = rhs in place for every column of an x-fastest spectral slab.
/// `scratch` needs nz entries per thread.
template <typename Scalar>
void thomas_solve_batch(const TridiagFactors<Scalar>& factors, Scalar* data,
                        std::span<Scalar> scratch);

template <typename Scalar>
void thomas_solve_batch(const TridiagFactors<Scalar>& factors, SlabBuffer<Scalar>& buf);

/// Exact solve with A_ref: plane-wise forward FCT, tridiagonal solves along z, backward FCT.
template <typename Scalar>
class FctPreconditioner {
 public:
  FctPreconditioner(const GridSpec& grid, const ReferenceParams& refs);

  const ReferenceParams& refs() const { return factors_.refs; }
  const TridiagFactors<Scalar>& factors() const { return factors_; }

  /// z = A_ref^{-1} r. `z` must not alias `r`.
  void apply(const CellVector<Scalar>& r, CellVector<Scalar>& z);

 private:
  FctPlan<Scalar> plan_;
  TridiagFactors<Scalar> factors_;
  std::vector<Scalar> scratch_;
};

template <typename Scalar>
CellVector<Scalar> fct_precond_apply(const GridSpec& grid, const ReferenceParams& refs,
                                     const CellVector<Scalar>& r);

/// Symmetric SOR on the stencil in lexicographic order, scaled as a preconditioner:
///   z = w(2-w) (D + wU)^{-1} D (D + wL)^{-1} r.
template <typename Scalar>
class SsorPreconditioner {
 public:
  SsorPreconditioner(const DiscreteSystem<Scalar>& sys, double omega);
  void apply(const CellVector<Scalar>& r, CellVector<Scalar>& z) const;
  double omega() const { return omega_; }

 private:
  const DiscreteSystem<Scalar>* sys_;
  double omega_;
  CellVector<Scalar> diag_;
};

template <typename Scalar>
class JacobiPreconditioner {
 public:
  explicit JacobiPreconditioner(const DiscreteSystem<Scalar>& sys);
  void apply(const CellVector<Scalar>& r, CellVector<Scalar>& z) const;

 private:
  CellVector<Scalar> inv_diag_;
};

struct IdentityPreconditioner {
  template <typename Scalar>
  void apply(const CellVector<Scalar>& r, CellVector<Scalar>& z) const {
    z = r;
  }
};

template <typename Scalar>
CellVector<Scalar> ssor_apply(const DiscreteSystem<Scalar>& sys, double omega,
                              const CellVector<Scalar>& r);
template <typename Scalar>
CellVector<Scalar> jacobi_apply(const DiscreteSystem<Scalar>& sys, const CellVector<Scalar>& r);
template <typename Scalar>
CellVector<Scalar> identity_apply(const CellVector<Scalar>& r) {
  return r;
}

enum class PreconditionerKind { Fct, Ssor, Jacobi, None };
PreconditionerKind parse_preconditioner(std::string_view s);
const char* to_string(PreconditionerKind k);

enum class RefMode { Opt, One };
RefMode parse_ref_mode(std::string_view s);
const char* to_string(RefMode m);

}  // namespace etc
