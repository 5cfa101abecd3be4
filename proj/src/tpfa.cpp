#include "etc/tpfa.hpp"

#include <cmath>
#include <string>

namespace etc {

ScaledField scale_field(const OrthotropicField& field) {
  const GridSpec& g = field.grid();
  const double sx = 1.0 / (g.hx() * g.hx());
  const double sy = 1.0 / (g.hy() * g.hy());
  const double sz = 1.0 / (g.hz() * g.hz());
  ScaledField out{g, field.kx(), field.ky(), field.kz()};
  for (auto& v : out.kx) v *= sx;
  for (auto& v : out.ky) v *= sy;
  for (auto& v : out.kz) v *= sz;
  return out;
}

template <typename Scalar>
DiscreteSystem<Scalar> build_system(const OrthotropicField& field, const BoundaryConfig& boundary) {
  if (boundary.axis != Axis::Z)
    throw ContractError("build_system expects the Dirichlet axis to be z; permute the field first");
  const ScaledField s = scale_field(field);
  const GridSpec& g = s.grid;
  DiscreteSystem<Scalar> sys;
  sys.grid = g;
  sys.boundary = boundary;
  sys.tx.resize((g.nx - 1) * g.ny * g.nz);
  sys.ty.resize(g.nx * (g.ny - 1) * g.nz);
  sys.tz.resize(g.nx * g.ny * (g.nz - 1));
  sys.t_in.resize(g.slice_cells());
  sys.t_out.resize(g.slice_cells());

  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index c = flat(i, j, k, g);
        if (i > 0)
          sys.tx[sys.tx_index(i, j, k)] = static_cast<Scalar>(harmonic_mean(s.kx[c - 1], s.kx[c]));
        if (j > 0)
          sys.ty[sys.ty_index(i, j, k)] =
              static_cast<Scalar>(harmonic_mean(s.ky[c - g.nx], s.ky[c]));
        if (k > 0)
          sys.tz[sys.tz_index(i, j, k)] =
              static_cast<Scalar>(harmonic_mean(s.kz[c - g.slice_cells()], s.kz[c]));
      }
  const Index top = (g.nz - 1) * g.slice_cells();
  for (Index f = 0; f < g.slice_cells(); ++f) {
    sys.t_in[f] = static_cast<Scalar>(2.0 * s.kz[f]);
    sys.t_out[f] = static_cast<Scalar>(2.0 * s.kz[top + f]);
  }
  return sys;
}

template <typename Scalar>
DiscreteSystem<Scalar> uniform_system(const GridSpec& g, double tx, double ty, double tz,
                                      double t_in, double t_out, const BoundaryConfig& boundary) {
  DiscreteSystem<Scalar> sys;
  sys.grid = g;
  sys.boundary = boundary;
  sys.tx.assign((g.nx - 1) * g.ny * g.nz, static_cast<Scalar>(tx));
  sys.ty.assign(g.nx * (g.ny - 1) * g.nz, static_cast<Scalar>(ty));
  sys.tz.assign(g.nx * g.ny * (g.nz - 1), static_cast<Scalar>(tz));
  sys.t_in.assign(g.slice_cells(), static_cast<Scalar>(t_in));
  sys.t_out.assign(g.slice_cells(), static_cast<Scalar>(t_out));
  return sys;
}

template <typename Scalar>
void apply_operator(const DiscreteSystem<Scalar>& sys, const CellVector<Scalar>& u,
                    CellVector<Scalar>& out) {
  const GridSpec& g = sys.grid;
  if (u.size() != g.cells())
    throw ContractError("apply_operator: vector length " + std::to_string(u.size()) +
                        " does not match " + std::to_string(g.cells()) + " cells");
  if (out.size() != g.cells()) out.resize(g.cells());
  const Index nx = g.nx, ny = g.ny, nz = g.nz, plane = g.slice_cells();
  const Scalar* up = u.data();
  Scalar* op = out.data();

#pragma omp parallel for schedule(static)
  for (Index k = 0; k < nz; ++k) {
    for (Index j = 0; j < ny; ++j) {
      const Index row = (k * ny + j) * nx;
      const Scalar* txr = nx > 1 ? sys.tx.data() + (k * ny + j) * (nx - 1) : nullptr;
      for (Index i = 0; i < nx; ++i) {
        const Index c = row + i;
        const Scalar uc = up[c];
        Scalar acc = 0;
        if (i > 0) acc += txr[i - 1] * (uc - up[c - 1]);
        if (i + 1 < nx) acc += txr[i] * (uc - up[c + 1]);
        if (j > 0) acc += sys.ty[sys.ty_index(i, j, k)] * (uc - up[c - nx]);
        if (j + 1 < ny) acc += sys.ty[sys.ty_index(i, j + 1, k)] * (uc - up[c + nx]);
        if (k > 0) acc += sys.tz[c - plane] * (uc - up[c - plane]);
        if (k + 1 < nz) acc += sys.tz[c] * (uc - up[c + plane]);
        if (k == 0) acc += sys.t_in[j * nx + i] * uc;
        if (k == nz - 1) acc += sys.t_out[j * nx + i] * uc;
        op[c] = acc;
      }
    }
  }
}

template <typename Scalar>
CellVector<Scalar> operator_diagonal(const DiscreteSystem<Scalar>& sys) {
  const GridSpec& g = sys.grid;
  CellVector<Scalar> d(g.cells());
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        Scalar acc = 0;
        if (i > 0) acc += sys.tx[sys.tx_index(i, j, k)];
        if (i + 1 < g.nx) acc += sys.tx[sys.tx_index(i + 1, j, k)];
        if (j > 0) acc += sys.ty[sys.ty_index(i, j, k)];
        if (j + 1 < g.ny) acc += sys.ty[sys.ty_index(i, j + 1, k)];
        if (k > 0) acc += sys.tz[sys.tz_index(i, j, k)];
        if (k + 1 < g.nz) acc += sys.tz[sys.tz_index(i, j, k + 1)];
        if (k == 0) acc += sys.t_in[j * g.nx + i];
        if (k == g.nz - 1) acc += sys.t_out[j * g.nx + i];
        d[flat(i, j, k, g)] = acc;
      }
  return d;
}

template <typename Scalar>
CellVector<Scalar> build_rhs(const DiscreteSystem<Scalar>& sys, std::span<const double> p_in_face,
                             std::span<const double> p_out_face) {
  const GridSpec& g = sys.grid;
  const auto faces = static_cast<std::size_t>(g.slice_cells());
  if (p_in_face.size() != faces || p_out_face.size() != faces)
    throw ContractError("build_rhs: face data must have nx*ny entries per face");
  CellVector<Scalar> b = CellVector<Scalar>::Zero(g.cells());
  const Index top = (g.nz - 1) * g.slice_cells();
  // With nz == 1 both faces touch the same layer and their contributions add.
  for (Index f = 0; f < g.slice_cells(); ++f) {
    b[f] += static_cast<Scalar>(static_cast<double>(sys.t_in[f]) * p_in_face[f]);
    b[top + f] += static_cast<Scalar>(static_cast<double>(sys.t_out[f]) * p_out_face[f]);
  }
  return b;
}

template <typename Scalar>
CellVector<Scalar> build_rhs(const DiscreteSystem<Scalar>& sys) {
  const auto faces = static_cast<std::size_t>(sys.grid.slice_cells());
  const std::vector<double> in(faces, sys.boundary.p_in), out(faces, sys.boundary.p_out);
  return build_rhs(sys, std::span<const double>(in), std::span<const double>(out));
}

template <typename Scalar>
void add_source(const DiscreteSystem<Scalar>& sys, CellVector<Scalar>& b, const Sampler& f) {
  const GridSpec& g = sys.grid;
  if (b.size() != g.cells()) throw ContractError("add_source: vector length mismatch");
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const auto [x, y, z] = g.center(i, j, k);
        const double v = f(x, y, z);
        if (!std::isfinite(v)) throw ContractError("add_source: source is not finite");
        b[flat(i, j, k, g)] += static_cast<Scalar>(v);
      }
}

template <typename Scalar>
DenseMatrix assemble_dense(const DiscreteSystem<Scalar>& sys) {
  const GridSpec& g = sys.grid;
  const Index n = g.cells();
  if (n > kDenseLimit)
    throw ContractError("assemble_dense: " + std::to_string(n) + " cells exceeds the dense limit " +
                        std::to_string(kDenseLimit));
  DenseMatrix D = DenseMatrix::Zero(n, n);
  auto couple = [&D](Index a, Index b, double t) {
    D(a, a) += t;
    D(b, b) += t;
    D(a, b) -= t;
    D(b, a) -= t;
  };
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const Index c = flat(i, j, k, g);
        if (i > 0) couple(c, flat(i - 1, j, k, g), sys.tx[sys.tx_index(i, j, k)]);
        if (j > 0) couple(c, flat(i, j - 1, k, g), sys.ty[sys.ty_index(i, j, k)]);
        if (k > 0) couple(c, flat(i, j, k - 1, g), sys.tz[sys.tz_index(i, j, k)]);
        if (k == 0) D(c, c) += sys.t_in[j * g.nx + i];
        if (k == g.nz - 1) D(c, c) += sys.t_out[j * g.nx + i];
      }
  return D;
}

template <typename Scalar>
std::vector<double> reconstruct_boundary_flux(const DiscreteSystem<Scalar>& sys,
                                              const CellVector<Scalar>& p) {
  const GridSpec& g = sys.grid;
  if (p.size() != g.cells()) throw ContractError("reconstruct_boundary_flux: length mismatch");
  // t_out = 2 kz / hz^2, so 2 kz / hz = t_out * hz.
  const double hz = g.hz();
  const Index top = (g.nz - 1) * g.slice_cells();
  std::vector<double> v(g.slice_cells());
  for (Index f = 0; f < g.slice_cells(); ++f)
    v[f] = static_cast<double>(sys.t_out[f]) * hz *
           (static_cast<double>(p[top + f]) - sys.boundary.p_out);
  return v;
}

template <typename Scalar>
std::vector<double> reconstruct_inflow_flux(const DiscreteSystem<Scalar>& sys,
                                            const CellVector<Scalar>& p) {
  const GridSpec& g = sys.grid;
  if (p.size() != g.cells()) throw ContractError("reconstruct_inflow_flux: length mismatch");
  const double hz = g.hz();
  std::vector<double> v(g.slice_cells());
  for (Index f = 0; f < g.slice_cells(); ++f)
    v[f] = static_cast<double>(sys.t_in[f]) * hz *
           (static_cast<double>(p[f]) - sys.boundary.p_in);
  return v;
}

template <typename Scalar>
double effective_conductivity(const DiscreteSystem<Scalar>& sys, std::span<const double> fluxes) {
  const GridSpec& g = sys.grid;
  if (static_cast<Index>(fluxes.size()) != g.slice_cells())
    throw ContractError("effective_conductivity: expected one flux per outflow face");
  double total = 0.0;
  for (double v : fluxes) total += v;
  return g.lz * total /
         (static_cast<double>(g.slice_cells()) * (sys.boundary.p_in - sys.boundary.p_out));
}

template <typename Scalar>
double l2_error_midpoint(const GridSpec& g, const CellVector<Scalar>& p, const Sampler& exact) {
  if (p.size() != g.cells()) throw ContractError("l2_error_midpoint: length mismatch");
  double acc = 0.0;
  for (Index k = 0; k < g.nz; ++k)
    for (Index j = 0; j < g.ny; ++j)
      for (Index i = 0; i < g.nx; ++i) {
        const auto [x, y, z] = g.center(i, j, k);
        const double d = static_cast<double>(p[flat(i, j, k, g)]) - exact(x, y, z);
        acc += d * d;
      }
  return std::sqrt(acc * g.cell_volume());
}

#define ETC_INSTANTIATE_TPFA(S)                                                                   \
  template DiscreteSystem<S> build_system<S>(const OrthotropicField&, const BoundaryConfig&);     \
  template DiscreteSystem<S> uniform_system<S>(const GridSpec&, double, double, double, double,   \
                                               double, const BoundaryConfig&);                    \
  template void apply_operator<S>(const DiscreteSystem<S>&, const CellVector<S>&,                 \
                                  CellVector<S>&);                                                \
  template CellVector<S> operator_diagonal<S>(const DiscreteSystem<S>&);                          \
  template CellVector<S> build_rhs<S>(const DiscreteSystem<S>&);                                  \
  template CellVector<S> build_rhs<S>(const DiscreteSystem<S>&, std::span<const double>,          \
                                      std::span<const double>);                                   \
  template void add_source<S>(const DiscreteSystem<S>&, CellVector<S>&, const Sampler&);          \
  template DenseMatrix assemble_dense<S>(const DiscreteSystem<S>&);                               \
  template std::vector<double> reconstruct_boundary_flux<S>(const DiscreteSystem<S>&,             \
                                                            const CellVector<S>&);                \
  template std::vector<double> reconstruct_inflow_flux<S>(const DiscreteSystem<S>&,               \
                                                          const CellVector<S>&);                  \
  template double effective_conductivity<S>(const DiscreteSystem<S>&, std::span<const double>);   \
  template double l2_error_midpoint<S>(const GridSpec&, const CellVector<S>&, const Sampler&);

ETC_INSTANTIATE_TPFA(double)
ETC_INSTANTIATE_TPFA(float)

#undef ETC_INSTANTIATE_TPFA

}  // namespace etc
