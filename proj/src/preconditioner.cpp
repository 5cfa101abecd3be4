#include "etc/preconditioner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace etc {

const char* to_string(FaceGroup g) {
  switch (g) {
    case FaceGroup::X: return "x";
    case FaceGroup::Y: return "y";
    case FaceGroup::Z: return "z";
    case FaceGroup::In: return "in";
    case FaceGroup::Out: return "out";
  }
  return "?";
}

CoefficientStats CoefficientStats::scaled(double c) const {
  CoefficientStats s = *this;
  for (auto& r : s.groups)
    if (r.present()) {
      r.min *= c;
      r.max *= c;
    }
  return s;
}

double& ReferenceParams::operator[](FaceGroup g) {
  switch (g) {
    case FaceGroup::X: return kx;
    case FaceGroup::Y: return ky;
    case FaceGroup::Z: return kz;
    case FaceGroup::In: return kin;
    case FaceGroup::Out: return kout;
  }
  throw ContractError("unknown face group");
}

double ReferenceParams::operator[](FaceGroup g) const {
  return const_cast<ReferenceParams&>(*this)[g];
}

template <typename Scalar>
CoefficientStats coefficient_stats(const DiscreteSystem<Scalar>& sys) {
  CoefficientStats s;
  for (Scalar t : sys.tx) s[FaceGroup::X].include(t);
  for (Scalar t : sys.ty) s[FaceGroup::Y].include(t);
  for (Scalar t : sys.tz) s[FaceGroup::Z].include(t);
  // Boundary arrays hold 2*kz~; the statistics use kz~ itself.
  for (Scalar t : sys.t_in) s[FaceGroup::In].include(0.5 * static_cast<double>(t));
  for (Scalar t : sys.t_out) s[FaceGroup::Out].include(0.5 * static_cast<double>(t));
  return s;
}

void compute_spectral_bounds(const CoefficientStats& stats, ReferenceParams& refs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (FaceGroup g : kFaceGroups) {
    const ValueRange& r = stats[g];
    if (!r.present()) continue;
    lo = std::min(lo, r.min / refs[g]);
    hi = std::max(hi, r.max / refs[g]);
  }
  if (!(hi > 0.0)) throw ContractError("coefficient statistics contain no face group");
  refs.lambda_lo = lo;
  refs.lambda_hi = hi;
}

double lp_optimal_value(const CoefficientStats& stats) {
  double best = 0.0;
  for (const ValueRange& r : stats.groups)
    if (r.present()) best = std::max(best, std::log(r.max) - std::log(r.min));
  return best;
}

// In log space the program reads: minimize l'' - l' subject to
// c_g + l' <= log min_g and c_g + l'' >= log max_g for every group g. For fixed
// (l', l'') a feasible c_g exists iff log max_g - log min_g <= l'' - l', so the optimum is
// L = max_g log(max_g / min_g). Centering every c_g at the midpoint of its log interval
// with l' = -L/2, l'' = L/2 attains it: refs are geometric means of the group bounds.
ReferenceParams solve_reference_lp(const CoefficientStats& stats) {
  ReferenceParams refs;
  for (FaceGroup g : kFaceGroups) {
    const ValueRange& r = stats[g];
    refs[g] = r.present() ? std::sqrt(r.min * r.max) : 1.0;
  }
  compute_spectral_bounds(stats, refs);
  return refs;
}

ReferenceParams ones_reference() { return ReferenceParams{}; }

ReferenceParams ones_reference(const CoefficientStats& stats) {
  ReferenceParams refs;
  compute_spectral_bounds(stats, refs);
  return refs;
}

template <typename Scalar>
DiscreteSystem<Scalar> reference_system(const GridSpec& grid, const ReferenceParams& refs) {
  return uniform_system<Scalar>(grid, refs.kx, refs.ky, refs.kz, 2.0 * refs.kin, 2.0 * refs.kout);
}

template <typename Scalar>
double TridiagFactors<Scalar>::diag(Index ip, Index jp, Index k) const {
  double d = shift(ip, jp);
  if (nz == 1) return d + 2.0 * refs.kin + 2.0 * refs.kout;
  d += (k == 0 || k == nz - 1) ? refs.kz : 2.0 * refs.kz;
  if (k == 0) d += 2.0 * refs.kin;
  if (k == nz - 1) d += 2.0 * refs.kout;
  return d;
}

template <typename Scalar>
DenseMatrix TridiagFactors<Scalar>::dense_block(Index ip, Index jp) const {
  DenseMatrix T = DenseMatrix::Zero(nz, nz);
  for (Index k = 0; k < nz; ++k) {
    T(k, k) = diag(ip, jp, k);
    if (k > 0) T(k, k - 1) = T(k - 1, k) = off_diag();
  }
  return T;
}

template <typename Scalar>
TridiagFactors<Scalar> build_tridiag(const GridSpec& grid, const ReferenceParams& refs) {
  for (FaceGroup g : kFaceGroups)
    if (!(refs[g] > 0.0) || !std::isfinite(refs[g]))
      throw ContractError(std::string("reference constant for group ") + to_string(g) +
                          " must be positive");
  TridiagFactors<Scalar> f;
  f.nx = grid.nx;
  f.ny = grid.ny;
  f.nz = grid.nz;
  f.refs = refs;
  f.eig_x.resize(grid.nx);
  f.eig_y.resize(grid.ny);
  for (Index i = 0; i < grid.nx; ++i)
    f.eig_x[i] = 2.0 * (1.0 - std::cos(static_cast<double>(i) * std::numbers::pi / grid.nx));
  for (Index j = 0; j < grid.ny; ++j)
    f.eig_y[j] = 2.0 * (1.0 - std::cos(static_cast<double>(j) * std::numbers::pi / grid.ny));
  return f;
}

namespace {

// Thomas elimination along one strided column; `cp` holds the modified super-diagonal.
template <typename Scalar>
void thomas_column(const TridiagFactors<Scalar>& f, Index ip, Index jp, Scalar* x, Index stride,
                   Scalar* cp) {
  const Index nz = f.nz;
  const Scalar off = static_cast<Scalar>(f.off_diag());
  Scalar m = static_cast<Scalar>(f.diag(ip, jp, 0));
  if (!(m > Scalar(0))) throw std::logic_error("Thomas elimination hit a non-positive pivot");
  cp[0] = off / m;
  x[0] = x[0] / m;
  for (Index k = 1; k < nz; ++k) {
    m = static_cast<Scalar>(f.diag(ip, jp, k)) - off * cp[k - 1];
    if (!(m > Scalar(0))) throw std::logic_error("Thomas elimination hit a non-positive pivot");
    cp[k] = off / m;
    x[k * stride] = (x[k * stride] - off * x[(k - 1) * stride]) / m;
  }
  for (Index k = nz - 2; k >= 0; --k) x[k * stride] -= cp[k] * x[(k + 1) * stride];
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

}  // namespace

template <typename Scalar>
void thomas_solve_batch(const TridiagFactors<Scalar>& f, Scalar* data, std::span<Scalar> scratch) {
  const Index plane = f.nx * f.ny;
  const Index threads = static_cast<Index>(scratch.size()) / std::max<Index>(f.nz, 1);
  if (threads < 1) throw ContractError("thomas_solve_batch: scratch smaller than nz");
#pragma omp parallel num_threads(static_cast<int>(std::min<Index>(threads, max_threads())))
  {
    Scalar* cp = scratch.data() + thread_id() * f.nz;
#pragma omp for schedule(static)
    for (Index c = 0; c < plane; ++c) thomas_column(f, c % f.nx, c / f.nx, data + c, plane, cp);
  }
}

template <typename Scalar>
void thomas_solve_batch(const TridiagFactors<Scalar>& f, SlabBuffer<Scalar>& buf) {
  if (buf.nx != f.nx || buf.ny != f.ny || buf.nz != f.nz)
    throw ContractError("thomas_solve_batch: buffer shape does not match the factors");
  std::vector<Scalar> scratch(static_cast<std::size_t>(f.nz * max_threads()));
  thomas_solve_batch(f, buf.data.data(), std::span<Scalar>(scratch));
}

template <typename Scalar>
FctPreconditioner<Scalar>::FctPreconditioner(const GridSpec& grid, const ReferenceParams& refs)
    : plan_(grid.nx, grid.ny, grid.nz),
      factors_(build_tridiag<Scalar>(grid, refs)),
      scratch_(static_cast<std::size_t>(grid.nz * max_threads())) {}

template <typename Scalar>
void FctPreconditioner<Scalar>::apply(const CellVector<Scalar>& r, CellVector<Scalar>& z) {
  if (r.size() != plan_.cells()) throw ContractError("FctPreconditioner: length mismatch");
  if (z.size() != r.size()) z.resize(r.size());
  plan_.forward(r.data(), z.data());
  thomas_solve_batch(factors_, z.data(), std::span<Scalar>(scratch_));
  plan_.backward(z.data(), z.data());
}

template <typename Scalar>
CellVector<Scalar> fct_precond_apply(const GridSpec& grid, const ReferenceParams& refs,
                                     const CellVector<Scalar>& r) {
  FctPreconditioner<Scalar> pc(grid, refs);
  CellVector<Scalar> z(r.size());
  pc.apply(r, z);
  return z;
}

template <typename Scalar>
SsorPreconditioner<Scalar>::SsorPreconditioner(const DiscreteSystem<Scalar>& sys, double omega)
    : sys_(&sys), omega_(omega), diag_(operator_diagonal(sys)) {
  if (!(omega > 0.0 && omega < 2.0)) throw ConfigError("SSOR relaxation omega must lie in (0, 2)");
}

template <typename Scalar>
void SsorPreconditioner<Scalar>::apply(const CellVector<Scalar>& r, CellVector<Scalar>& z) const {
  const DiscreteSystem<Scalar>& s = *sys_;
  const GridSpec& g = s.grid;
  if (r.size() != g.cells()) throw ContractError("SsorPreconditioner: length mismatch");
  if (z.size() != r.size()) z.resize(r.size());
  const Scalar w = static_cast<Scalar>(omega_);
  const Index nx = g.nx, ny = g.ny, nz = g.nz, plane = g.slice_cells();

  // Forward sweep: (D + wL) y = r, stored in z.
  for (Index k = 0; k < nz; ++k)
    for (Index j = 0; j < ny; ++j)
      for (Index i = 0; i < nx; ++i) {
        const Index c = flat(i, j, k, g);
        Scalar acc = 0;
        if (i > 0) acc += s.tx[s.tx_index(i, j, k)] * z[c - 1];
        if (j > 0) acc += s.ty[s.ty_index(i, j, k)] * z[c - nx];
        if (k > 0) acc += s.tz[c - plane] * z[c - plane];
        z[c] = (r[c] + w * acc) / diag_[c];
      }
  // Backward sweep: (D + wU) z = D y.
  for (Index k = nz - 1; k >= 0; --k)
    for (Index j = ny - 1; j >= 0; --j)
      for (Index i = nx - 1; i >= 0; --i) {
        const Index c = flat(i, j, k, g);
        Scalar acc = 0;
        if (i + 1 < nx) acc += s.tx[s.tx_index(i + 1, j, k)] * z[c + 1];
        if (j + 1 < ny) acc += s.ty[s.ty_index(i, j + 1, k)] * z[c + nx];
        if (k + 1 < nz) acc += s.tz[c] * z[c + plane];
        z[c] = (diag_[c] * z[c] + w * acc) / diag_[c];
      }
  z *= w * (Scalar(2) - w);
}

template <typename Scalar>
JacobiPreconditioner<Scalar>::JacobiPreconditioner(const DiscreteSystem<Scalar>& sys)
    : inv_diag_(operator_diagonal(sys).cwiseInverse()) {}

template <typename Scalar>
void JacobiPreconditioner<Scalar>::apply(const CellVector<Scalar>& r, CellVector<Scalar>& z) const {
  if (r.size() != inv_diag_.size()) throw ContractError("JacobiPreconditioner: length mismatch");
  z = r.cwiseProduct(inv_diag_);
}

template <typename Scalar>
CellVector<Scalar> ssor_apply(const DiscreteSystem<Scalar>& sys, double omega,
                              const CellVector<Scalar>& r) {
  CellVector<Scalar> z(r.size());
  SsorPreconditioner<Scalar>(sys, omega).apply(r, z);
  return z;
}

template <typename Scalar>
CellVector<Scalar> jacobi_apply(const DiscreteSystem<Scalar>& sys, const CellVector<Scalar>& r) {
  CellVector<Scalar> z(r.size());
  JacobiPreconditioner<Scalar>(sys).apply(r, z);
  return z;
}

PreconditionerKind parse_preconditioner(std::string_view s) {
  if (s == "fct") return PreconditionerKind::Fct;
  if (s == "ssor") return PreconditionerKind::Ssor;
  if (s == "jacobi") return PreconditionerKind::Jacobi;
  if (s == "none") return PreconditionerKind::None;
  throw ConfigError("preconditioner must be one of fct, ssor, jacobi, none");
}

const char* to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::Fct: return "fct";
    case PreconditionerKind::Ssor: return "ssor";
    case PreconditionerKind::Jacobi: return "jacobi";
    case PreconditionerKind::None: return "none";
  }
  return "?";
}

RefMode parse_ref_mode(std::string_view s) {
  if (s == "opt") return RefMode::Opt;
  if (s == "one") return RefMode::One;
  throw ConfigError("reference mode must be opt or one");
}

const char* to_string(RefMode m) { return m == RefMode::Opt ? "opt" : "one"; }

#define ETC_INSTANTIATE_PC(S)                                                                     \
  template CoefficientStats coefficient_stats<S>(const DiscreteSystem<S>&);                       \
  template DiscreteSystem<S> reference_system<S>(const GridSpec&, const ReferenceParams&);        \
  template struct TridiagFactors<S>;                                                              \
  template TridiagFactors<S> build_tridiag<S>(const GridSpec&, const ReferenceParams&);           \
  template void thomas_solve_batch<S>(const TridiagFactors<S>&, S*, std::span<S>);                \
  template void thomas_solve_batch<S>(const TridiagFactors<S>&, SlabBuffer<S>&);                  \
  template class FctPreconditioner<S>;                                                            \
  template CellVector<S> fct_precond_apply<S>(const GridSpec&, const ReferenceParams&,            \
                                              const CellVector<S>&);                              \
  template class SsorPreconditioner<S>;                                                           \
  template class JacobiPreconditioner<S>;                                                         \
  template CellVector<S> ssor_apply<S>(const DiscreteSystem<S>&, double, const CellVector<S>&);   \
  template CellVector<S> jacobi_apply<S>(const DiscreteSystem<S>&, const CellVector<S>&);

ETC_INSTANTIATE_PC(double)
ETC_INSTANTIATE_PC(float)

#undef ETC_INSTANTIATE_PC

}  // namespace etc
