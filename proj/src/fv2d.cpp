#include "sspsde/fv2d.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace sspsde::fv2d {

namespace {
constexpr double kGaussOffset = 0.28867513459481288225;  // 1 / (2 sqrt 3)
constexpr double kPi = std::numbers::pi;
}  // namespace

Grid2D Grid2D::unit(int nx, int ny) {
  if (nx < 4 || ny < 4) throw std::invalid_argument("grid needs at least 4 cells per side");
  Grid2D g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 1.0 / nx;
  g.dy = 1.0 / ny;
  return g;
}

CellField::CellField(const Grid2D& g, std::vector<double> data)
    : nx(g.nx), ny(g.ny), v(std::move(data)) {
  if (static_cast<int>(v.size()) != g.cells())
    throw std::invalid_argument("field data size does not match grid");
}

Stencil stencil_from_string(const std::string& name) {
  if (name == "five_point" || name == "5pt" || name == "5") return Stencil::five_point;
  if (name == "thirteen_point" || name == "13pt" || name == "13") return Stencil::thirteen_point;
  throw std::invalid_argument("unknown limiter stencil: " + name);
}

EdgeStates reconstruct(const Grid2D& g, const CellField& q) {
  EdgeStates e;
  e.nx = g.nx;
  e.ny = g.ny;
  for (auto& a : e.vals) a.assign(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double qc = q.at(i, j);
      // half-cell slope contributions: (dq/dx) * dx/2 and tangential
      // Gauss-node offsets (dq/dy) * dy * (+-delta)
      const double sx = 0.25 * (q.atp(i + 1, j) - q.atp(i - 1, j));
      const double sy = 0.25 * (q.atp(i, j + 1) - q.atp(i, j - 1));
      const double tx = 2.0 * sx * kGaussOffset;  // (dq/dx) dx delta
      const double ty = 2.0 * sy * kGaussOffset;
      e.at(Side::right, 0, i, j) = qc + sx - ty;
      e.at(Side::right, 1, i, j) = qc + sx + ty;
      e.at(Side::left, 0, i, j) = qc - sx - ty;
      e.at(Side::left, 1, i, j) = qc - sx + ty;
      e.at(Side::up, 0, i, j) = qc + sy - tx;
      e.at(Side::up, 1, i, j) = qc + sy + tx;
      e.at(Side::down, 0, i, j) = qc - sy - tx;
      e.at(Side::down, 1, i, j) = qc - sy + tx;
    }
  }
  return e;
}

namespace {

void stencil_bounds(const CellField& q, int i, int j, Stencil stencil, double& lo,
                    double& hi) {
  lo = q.at(i, j);
  hi = lo;
  auto take = [&](int a, int b) {
    const double w = q.atp(a, b);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  };
  take(i + 1, j);
  take(i - 1, j);
  take(i, j + 1);
  take(i, j - 1);
  if (stencil == Stencil::thirteen_point) {
    take(i + 2, j);
    take(i - 2, j);
    take(i, j + 2);
    take(i, j - 2);
    take(i + 1, j + 1);
    take(i + 1, j - 1);
    take(i - 1, j + 1);
    take(i - 1, j - 1);
  }
}

}  // namespace

EdgeStates limit_lmp(const Grid2D& g, const CellField& q, const EdgeStates& e,
                     Stencil stencil) {
  EdgeStates out = e;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double lo, hi;
      stencil_bounds(q, i, j, stencil, lo, hi);
      const double qc = q.at(i, j);
      double theta = 1.0;
      for (const auto& a : e.vals) {
        const double w = a[j * g.nx + i];
        const double d = w - qc;
        if (w > hi && d > 0.0)
          theta = std::min(theta, (hi - qc) / d);
        else if (w < lo && d < 0.0)
          theta = std::min(theta, (lo - qc) / d);
      }
      if (theta < 1.0) {
        theta = std::max(theta, 0.0);
        for (auto& a : out.vals) {
          double& w = a[j * g.nx + i];
          w = qc + theta * (w - qc);
        }
      }
    }
  }
  return out;
}

double llf_wave_speed(double qL, double qR, double v) {
  return std::max(std::abs(v + qL), std::abs(v + qR));
}

double llf_em_flux(double qL, double qR, double v) {
  const double fL = 0.5 * qL * qL + v * qL;
  const double fR = 0.5 * qR * qR + v * qR;
  const double alpha = llf_wave_speed(qL, qR, v);
  return 0.5 * (fL + fR) - 0.5 * alpha * (qR - qL);
}

double godunov_burgers_flux(double qL, double qR) {
  auto f = [](double q) { return 0.5 * q * q; };
  if (qL > qR) {  // shock, Rankine-Hugoniot speed
    const double s = 0.5 * (qL + qR);
    return s > 0.0 ? f(qL) : (s < 0.0 ? f(qR) : f(qL));
  }
  if (qL < qR) {  // rarefaction
    if (qL >= 0.0) return f(qL);
    if (qR <= 0.0) return f(qR);
    return 0.0;  // transonic
  }
  return f(qL);
}

double upwind_cgrid_flux(double qL, double qR, double u_face) {
  return u_face >= 0.0 ? u_face * qL : u_face * qR;
}

double edge_flux_integral(double qL0, double qR0, double qL1, double qR1,
                          const std::function<double(double, double)>& rule) {
  return 0.5 * (rule(qL0, qR0) + rule(qL1, qR1));
}

CellField evolve_flux_form(const Grid2D& g, const CellField& q, const FaceFluxes& f,
                           double dt) {
  CellField out(g);
  const double lx = dt / g.dx;
  const double ly = dt / g.dy;
  for (int j = 0; j < g.ny; ++j) {
    const int jm = wrap(j - 1, g.ny);
    for (int i = 0; i < g.nx; ++i) {
      const int im = wrap(i - 1, g.nx);
      out.at(i, j) = q.at(i, j) - lx * (f.fx[g.idx(i, j)] - f.fx[g.idx(im, j)]) -
                     ly * (f.fy[g.idx(i, j)] - f.fy[g.idx(i, jm)]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// spectral Poisson solver

struct PoissonSolver::Impl {
  Grid2D g;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

namespace {
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

PoissonSolver::PoissonSolver(const Grid2D& g) : impl_(new Impl) {
  impl_->g = g;
  const int nc = g.ny * (g.nx / 2 + 1);
  impl_->real = fftw_alloc_real(static_cast<size_t>(g.cells()));
  impl_->spec = fftw_alloc_complex(static_cast<size_t>(nc));
  std::lock_guard<std::mutex> lock(fftw_plan_mutex());  // plan calls are not thread-safe
  impl_->fwd = fftw_plan_dft_r2c_2d(g.ny, g.nx, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_c2r_2d(g.ny, g.nx, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

PoissonSolver::~PoissonSolver() {
  if (!impl_) return;
  std::lock_guard<std::mutex> lock(fftw_plan_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->bwd);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

CellField PoissonSolver::solve(const CellField& q) const {
  const Grid2D& g = impl_->g;
  if (q.nx != g.nx || q.ny != g.ny) throw std::invalid_argument("field/grid mismatch");
  std::copy(q.v.begin(), q.v.end(), impl_->real);
  fftw_execute(impl_->fwd);
  const int nkx = g.nx / 2 + 1;
  const double norm = 1.0 / g.cells();
  for (int kj = 0; kj < g.ny; ++kj) {
    const int fj = kj <= g.ny / 2 ? kj : kj - g.ny;
    const double ky = 2.0 * kPi * fj;
    for (int ki = 0; ki < nkx; ++ki) {
      const double kx = 2.0 * kPi * ki;
      fftw_complex& c = impl_->spec[kj * nkx + ki];
      const double k2 = kx * kx + ky * ky;
      if (k2 == 0.0) {
        c[0] = 0.0;
        c[1] = 0.0;
      } else {
        const double s = norm / k2;
        c[0] *= s;
        c[1] *= s;
      }
    }
  }
  fftw_execute(impl_->bwd);
  CellField psi(g);
  std::copy(impl_->real, impl_->real + g.cells(), psi.v.begin());
  return psi;
}

CellField spectral_poisson(const Grid2D& g, const CellField& q) {
  PoissonSolver solver(g);
  return solver.solve(q);
}

// ---------------------------------------------------------------------------
// C-grid velocities

namespace {

/// Face velocities from corner streamfunction values: u = -dpsi/dy along the
/// right face of each cell, v = +dpsi/dx along the top face. Corner (i,j)
/// sits at (i dx, j dy); corners[idx(i,j)].
VelocityFields faces_from_corners(const Grid2D& g, const std::vector<double>& corners) {
  VelocityFields vel;
  vel.nx = g.nx;
  vel.ny = g.ny;
  vel.u.assign(g.cells(), 0.0);
  vel.v.assign(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    const int jp = wrap(j + 1, g.ny);
    for (int i = 0; i < g.nx; ++i) {
      const int ip = wrap(i + 1, g.nx);
      const double c_pp = corners[g.idx(ip, jp)];
      const double c_p0 = corners[g.idx(ip, j)];
      const double c_0p = corners[g.idx(i, jp)];
      vel.u[g.idx(i, j)] = -(c_pp - c_p0) / g.dy;
      vel.v[g.idx(i, j)] = (c_pp - c_0p) / g.dx;
    }
  }
  return vel;
}

}  // namespace

VelocityFields cgrid_velocities(const Grid2D& g, const CellField& psi_cells) {
  std::vector<double> corners(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      corners[g.idx(i, j)] = 0.25 * (psi_cells.atp(i - 1, j - 1) + psi_cells.atp(i, j - 1) +
                                     psi_cells.atp(i - 1, j) + psi_cells.atp(i, j));
    }
  }
  return faces_from_corners(g, corners);
}

VelocityFields velocities_from_streamfunction(
    const Grid2D& g, const std::function<double(double, double)>& psi) {
  std::vector<double> corners(g.cells(), 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) corners[g.idx(i, j)] = psi(i * g.dx, j * g.dy);
  return faces_from_corners(g, corners);
}

double max_divergence(const Grid2D& g, const VelocityFields& vel) {
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const int jm = wrap(j - 1, g.ny);
    for (int i = 0; i < g.nx; ++i) {
      const int im = wrap(i - 1, g.nx);
      const double div = (vel.u[g.idx(i, j)] - vel.u[g.idx(im, j)]) / g.dx +
                         (vel.v[g.idx(i, j)] - vel.v[g.idx(i, jm)]) / g.dy;
      worst = std::max(worst, std::abs(div));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// initial data

CellField leveque_initial(const Grid2D& g) {
  CellField q(g);
  for (int j = 0; j < g.ny; ++j) {
    const double y = g.yc(j);
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.xc(i);
      double val = 0.0;
      const double r_cyl = std::hypot(x - 0.5, y - 0.75);
      const double r_cone = std::hypot(x - 0.5, y - 0.25);
      const double r_cos = std::hypot(x - 0.25, y - 0.5);
      if (r_cyl <= 0.15 && (x <= 0.475 || x > 0.525 || y >= 0.85))
        val = 1.0;  // slotted cylinder
      else if (r_cone <= 0.15)
        val = 1.0 - r_cone / 0.15;
      else if (r_cos <= 0.15)
        val = 0.5 * (1.0 + std::cos(kPi * r_cos / 0.15));
      q.at(i, j) = val;
    }
  }
  return q;
}

CellField square_initial(const Grid2D& g) {
  CellField q(g);
  for (int j = 0; j < g.ny; ++j) {
    const double y = g.yc(j);
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.xc(i);
      q.at(i, j) = (x >= 0.1 && x <= 0.6 && y >= 0.1 && y <= 0.6) ? 1.0 : 0.0;
    }
  }
  return q;
}

// ---------------------------------------------------------------------------
// EM flow maps

namespace {

CellField field_from_state(const Grid2D& g, const integrators::State& q) {
  if (static_cast<int>(q.size()) != g.cells())
    throw std::invalid_argument("state size does not match grid");
  CellField f;
  f.nx = g.nx;
  f.ny = g.ny;
  f.v = q;
  return f;
}

EdgeStates edge_states(const Grid2D& g, const CellField& q, const FvOptions& opt) {
  if (opt.first_order) {
    EdgeStates e;
    e.nx = g.nx;
    e.ny = g.ny;
    for (auto& a : e.vals) a = q.v;
    return e;
  }
  EdgeStates e = reconstruct(g, q);
  if (opt.limiter) e = limit_lmp(g, q, e, opt.stencil);
  return e;
}

/// One upwind advection update by fixed face velocities; dt_eff already
/// carries the convex-combination scale.
CellField advect_upwind(const Grid2D& g, const CellField& q, const VelocityFields& vel,
                        const FvOptions& opt, double dt_eff, CflAudit* audit) {
  const EdgeStates e = edge_states(g, q, opt);
  FaceFluxes f;
  f.fx.assign(g.cells(), 0.0);
  f.fy.assign(g.cells(), 0.0);
  double umax = 0.0, vmax = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const int jp = wrap(j + 1, g.ny);
    for (int i = 0; i < g.nx; ++i) {
      const int ip = wrap(i + 1, g.nx);
      const double uf = vel.u[g.idx(i, j)];
      const double vf = vel.v[g.idx(i, j)];
      umax = std::max(umax, std::abs(uf));
      vmax = std::max(vmax, std::abs(vf));
      f.fx[g.idx(i, j)] =
          0.5 * (upwind_cgrid_flux(e.at(Side::right, 0, i, j), e.at(Side::left, 0, ip, j), uf) +
                 upwind_cgrid_flux(e.at(Side::right, 1, i, j), e.at(Side::left, 1, ip, j), uf));
      f.fy[g.idx(i, j)] =
          0.5 * (upwind_cgrid_flux(e.at(Side::up, 0, i, j), e.at(Side::down, 0, i, jp), vf) +
                 upwind_cgrid_flux(e.at(Side::up, 1, i, j), e.at(Side::down, 1, i, jp), vf));
    }
  }
  if (audit) audit->record(dt_eff * std::max(umax / g.dx, vmax / g.dy));
  return evolve_flux_form(g, q, f, dt_eff);
}

VelocityFields combined_velocities(const Grid2D& g, const VelocityFields* det,
                                   const std::vector<VelocityFields>& xi,
                                   const integrators::Increment& dS, double dt) {
  VelocityFields vel;
  vel.nx = g.nx;
  vel.ny = g.ny;
  if (det) {
    vel.u = det->u;
    vel.v = det->v;
  } else {
    vel.u.assign(g.cells(), 0.0);
    vel.v.assign(g.cells(), 0.0);
  }
  const size_t np = std::min(xi.size(), dS.size());
  for (size_t p = 0; p < np; ++p) {
    const double rate = dS[p] / dt;
    if (rate == 0.0) continue;
    for (int c = 0; c < g.cells(); ++c) {
      vel.u[c] += rate * xi[p].u[c];
      vel.v[c] += rate * xi[p].v[c];
    }
  }
  return vel;
}

}  // namespace

integrators::EmFlowMap burgers_const_noise_map(const Grid2D& g, double a, double b,
                                               const FvOptions& opt,
                                               std::shared_ptr<CflAudit> audit) {
  return [g, a, b, opt, audit](const integrators::State& q, double scale, double dt,
                               const integrators::Increment& dS) {
    const CellField qf = field_from_state(g, q);
    const double rate = dS.empty() ? 0.0 : dS[0] / dt;
    const double vx = a * rate;
    const double vy = b * rate;
    const EdgeStates e = edge_states(g, qf, opt);
    FaceFluxes f;
    f.fx.assign(g.cells(), 0.0);
    f.fy.assign(g.cells(), 0.0);
    double ax_max = 0.0, ay_max = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      const int jp = wrap(j + 1, g.ny);
      for (int i = 0; i < g.nx; ++i) {
        const int ip = wrap(i + 1, g.nx);
        for (int n = 0; n < 2; ++n) {
          const double qLx = e.at(Side::right, n, i, j);
          const double qRx = e.at(Side::left, n, ip, j);
          f.fx[g.idx(i, j)] += 0.5 * llf_em_flux(qLx, qRx, vx);
          ax_max = std::max(ax_max, llf_wave_speed(qLx, qRx, vx));
          const double qLy = e.at(Side::up, n, i, j);
          const double qRy = e.at(Side::down, n, i, jp);
          f.fy[g.idx(i, j)] += 0.5 * llf_em_flux(qLy, qRy, vy);
          ay_max = std::max(ay_max, llf_wave_speed(qLy, qRy, vy));
        }
      }
    }
    const double dt_eff = scale * dt;
    if (audit) audit->record(dt_eff * std::max(ax_max / g.dx, ay_max / g.dy));
    return evolve_flux_form(g, qf, f, dt_eff).v;
  };
}

integrators::EmFlowMap advection_map(const Grid2D& g, VelocityFields u_det,
                                     std::vector<VelocityFields> xi, const FvOptions& opt,
                                     std::shared_ptr<CflAudit> audit) {
  auto det = std::make_shared<VelocityFields>(std::move(u_det));
  auto noise = std::make_shared<std::vector<VelocityFields>>(std::move(xi));
  return [g, det, noise, opt, audit](const integrators::State& q, double scale, double dt,
                                     const integrators::Increment& dS) {
    const CellField qf = field_from_state(g, q);
    const VelocityFields vel = combined_velocities(g, det.get(), *noise, dS, dt);
    return advect_upwind(g, qf, vel, opt, scale * dt, audit.get()).v;
  };
}

integrators::EmFlowMap euler_salt_map(const Grid2D& g,
                                      std::vector<CellField> psi_noise_cells,
                                      const FvOptions& opt,
                                      std::shared_ptr<CflAudit> audit) {
  auto solver = std::make_shared<PoissonSolver>(g);
  auto noise = std::make_shared<std::vector<CellField>>(std::move(psi_noise_cells));
  return [g, solver, noise, opt, audit](const integrators::State& q, double scale, double dt,
                                        const integrators::Increment& dS) {
    const CellField qf = field_from_state(g, q);
    CellField psi = solver->solve(qf);
    const size_t np = std::min(noise->size(), dS.size());
    for (size_t p = 0; p < np; ++p) {
      const double rate = dS[p] / dt;
      if (rate == 0.0) continue;
      const CellField& w = (*noise)[p];
      for (int c = 0; c < g.cells(); ++c) psi.v[c] += rate * w.v[c];
    }
    const VelocityFields vel = cgrid_velocities(g, psi);
    if (audit) audit->record_divergence(max_divergence(g, vel));
    return advect_upwind(g, qf, vel, opt, scale * dt, audit.get()).v;
  };
}

integrators::EmFlowMap burgers_godunov_drift_map(const Grid2D& g, const FvOptions& opt,
                                                 std::shared_ptr<CflAudit> audit) {
  return [g, opt, audit](const integrators::State& q, double scale, double dt,
                         const integrators::Increment& /*dS*/) {
    const CellField qf = field_from_state(g, q);
    const EdgeStates e = edge_states(g, qf, opt);
    FaceFluxes f;
    f.fx.assign(g.cells(), 0.0);
    f.fy.assign(g.cells(), 0.0);
    double amax = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      const int jp = wrap(j + 1, g.ny);
      for (int i = 0; i < g.nx; ++i) {
        const int ip = wrap(i + 1, g.nx);
        for (int n = 0; n < 2; ++n) {
          const double qLx = e.at(Side::right, n, i, j);
          const double qRx = e.at(Side::left, n, ip, j);
          f.fx[g.idx(i, j)] += 0.5 * godunov_burgers_flux(qLx, qRx);
          const double qLy = e.at(Side::up, n, i, j);
          const double qRy = e.at(Side::down, n, i, jp);
          f.fy[g.idx(i, j)] += 0.5 * godunov_burgers_flux(qLy, qRy);
          amax = std::max({amax, std::abs(qLx), std::abs(qRx), std::abs(qLy), std::abs(qRy)});
        }
      }
    }
    const double dt_eff = scale * dt;
    if (audit) audit->record(dt_eff * amax / std::min(g.dx, g.dy));
    return evolve_flux_form(g, qf, f, dt_eff).v;
  };
}

integrators::EmFlowMap transport_noise_diffusion_map(const Grid2D& g,
                                                     std::vector<VelocityFields> xi,
                                                     const FvOptions& opt,
                                                     std::shared_ptr<CflAudit> audit) {
  auto noise = std::make_shared<std::vector<VelocityFields>>(std::move(xi));
  return [g, noise, opt, audit](const integrators::State& q, double scale, double dt,
                                const integrators::Increment& dS) {
    const CellField qf = field_from_state(g, q);
    const VelocityFields vel = combined_velocities(g, nullptr, *noise, dS, dt);
    return advect_upwind(g, qf, vel, opt, scale * dt, audit.get()).v;
  };
}

}  // namespace sspsde::fv2d
