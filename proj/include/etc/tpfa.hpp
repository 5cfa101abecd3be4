#pragma once

#include "etc/grid.hpp"
#include "etc/types.hpp"

#include <span>
#include <vector>

namespace etc {

/// kappa / h^2 per cell and per axis.
struct ScaledField {
  GridSpec grid;
  std::vector<double> kx, ky, kz;
};

ScaledField scale_field(const OrthotropicField& field);

/// Matrix-free TPFA operator for Dirichlet data on the z-faces and zero flux elsewhere.
///
/// Interior transmissibilities are harmonic means of the two adjacent scaled cells:
///   tx[(k*ny + j)*(nx-1) + i-1]  face between (i-1,j,k) and (i,j,k),
///   ty[(k*(ny-1) + j-1)*nx + i]  face between (i,j-1,k) and (i,j,k),
///   tz[((k-1)*ny + j)*nx + i]    face between (i,j,k-1) and (i,j,k).
/// t_in[j*nx+i] and t_out[j*nx+i] hold 2*kappa_z/hz^2 of the cell touching the face.
template <typename Scalar>
struct DiscreteSystem {
  GridSpec grid;
  std::vector<Scalar> tx, ty, tz;
  std::vector<Scalar> t_in, t_out;
  BoundaryConfig boundary;

  Index tx_index(Index i, Index j, Index k) const { return (k * grid.ny + j) * (grid.nx - 1) + i - 1; }
  Index ty_index(Index i, Index j, Index k) const { return (k * (grid.ny - 1) + j - 1) * grid.nx + i; }
  Index tz_index(Index i, Index j, Index k) const { return ((k - 1) * grid.ny + j) * grid.nx + i; }
};

inline double harmonic_mean(double a, double b) { return 2.0 / (1.0 / a + 1.0 / b); }

/// Requires boundary.axis == Z; other axes are handled by permuting the field first.
template <typename Scalar>
DiscreteSystem<Scalar> build_system(const OrthotropicField& field, const BoundaryConfig& boundary);

/// Homogeneous system with the given transmissibilities on every face.
template <typename Scalar>
DiscreteSystem<Scalar> uniform_system(const GridSpec& grid, double tx, double ty, double tz,
                                      double t_in, double t_out,
                                      const BoundaryConfig& boundary = {});

/// out = A u. `out` must not alias `u`.
template <typename Scalar>
void apply_operator(const DiscreteSystem<Scalar>& sys, const CellVector<Scalar>& u,
                    CellVector<Scalar>& out);

template <typename Scalar>
CellVector<Scalar> apply_operator(const DiscreteSystem<Scalar>& sys, const CellVector<Scalar>& u) {
  CellVector<Scalar> out(u.size());
  apply_operator(sys, u, out);
  return out;
}

/// Diagonal entries of A.
template <typename Scalar>
CellVector<Scalar> operator_diagonal(const DiscreteSystem<Scalar>& sys);

/// Right-hand side for the constant potentials in sys.boundary.
template <typename Scalar>
CellVector<Scalar> build_rhs(const DiscreteSystem<Scalar>& sys);

/// Right-hand side for face-varying Dirichlet data (one value per (i,j) on each face).
template <typename Scalar>
CellVector<Scalar> build_rhs(const DiscreteSystem<Scalar>& sys, std::span<const double> p_in_face,
                             std::span<const double> p_out_face);

/// b += f(cell center), the midpoint rule in the h^3-scaled variational form.
template <typename Scalar>
void add_source(const DiscreteSystem<Scalar>& sys, CellVector<Scalar>& b, const Sampler& f);

inline constexpr Index kDenseLimit = 4096;

/// Dense copy of A for oracle checks; throws ContractError above kDenseLimit cells.
template <typename Scalar>
DenseMatrix assemble_dense(const DiscreteSystem<Scalar>& sys);

/// Unscaled +z flux through each Gamma_out face, v = 2 kz (p - p_out) / hz.
template <typename Scalar>
std::vector<double> reconstruct_boundary_flux(const DiscreteSystem<Scalar>& sys,
                                              const CellVector<Scalar>& p);

/// Outward-normal flux through each Gamma_in face, 2 kz (p - p_in) / hz.
/// Its sum cancels the sum of reconstruct_boundary_flux for a converged solve.
template <typename Scalar>
std::vector<double> reconstruct_inflow_flux(const DiscreteSystem<Scalar>& sys,
                                            const CellVector<Scalar>& p);

template <typename Scalar>
double effective_conductivity(const DiscreteSystem<Scalar>& sys, std::span<const double> fluxes);

/// Midpoint-rule L2 distance between cell values and an exact solution.
template <typename Scalar>
double l2_error_midpoint(const GridSpec& grid, const CellVector<Scalar>& p, const Sampler& exact);

}  // namespace etc
