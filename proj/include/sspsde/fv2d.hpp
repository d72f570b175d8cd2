#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sspsde/integrators.hpp"

namespace sspsde::fv2d {

/// Periodic Cartesian grid on [0,1]^2.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  static Grid2D unit(int nx, int ny);
  int cells() const { return nx * ny; }
  int idx(int i, int j) const { return j * nx + i; }
  double xc(int i) const { return (i + 0.5) * dx; }  // cell center
  double yc(int j) const { return (j + 0.5) * dy; }
};

inline int wrap(int i, int n) { return i < 0 ? i + n : (i >= n ? i - n : i); }

/// Row-major cell-mean field.
struct CellField {
  int nx = 0;
  int ny = 0;
  std::vector<double> v;

  CellField() = default;
  CellField(const Grid2D& g, double fill = 0.0) : nx(g.nx), ny(g.ny), v(g.cells(), fill) {}
  CellField(const Grid2D& g, std::vector<double> data);

  double& at(int i, int j) { return v[j * nx + i]; }
  double at(int i, int j) const { return v[j * nx + i]; }
  double atp(int i, int j) const { return v[wrap(j, ny) * nx + wrap(i, nx)]; }
};

enum class Side { right = 0, left = 1, up = 2, down = 3 };

/// Reconstructed edge values at the two Gauss nodes of each cell edge.
/// node 0 sits at tangential offset -1/(2 sqrt 3), node 1 at +1/(2 sqrt 3).
struct EdgeStates {
  int nx = 0;
  int ny = 0;
  std::array<std::vector<double>, 8> vals;  // [side*2 + node]

  double& at(Side s, int node, int i, int j) {
    return vals[static_cast<int>(s) * 2 + node][j * nx + i];
  }
  double at(Side s, int node, int i, int j) const {
    return vals[static_cast<int>(s) * 2 + node][j * nx + i];
  }
};

enum class Stencil { five_point, thirteen_point };

Stencil stencil_from_string(const std::string& name);

/// Linear subcell reconstruction from the centered stencil
/// q_x = (q_{i+1} - q_{i-1}) / (2 dx); edge values by evaluating the plane
/// at the edge Gauss nodes.
EdgeStates reconstruct(const Grid2D& g, const CellField& q);

/// Clamp every edge value of each cell into [min, max] of the cell means
/// over the chosen stencil by scaling all of that cell's edge deviations
/// with one factor theta in [0,1]; the cell mean is untouched.
EdgeStates limit_lmp(const Grid2D& g, const CellField& q, const EdgeStates& e,
                     Stencil stencil);

/// Stochastic local Lax-Friedrichs flux for F(q) = q^2/2 + v q with
/// wave speed alpha = max(|v + qL|, |v + qR|); v is the per-step noise
/// rate a dW/dt.
double llf_em_flux(double qL, double qR, double v);

/// Wave speed used by llf_em_flux; exposed for CFL audits.
double llf_wave_speed(double qL, double qR, double v);

/// Exact Godunov flux for the deterministic Burgers flux q^2/2.
double godunov_burgers_flux(double qL, double qR);

/// Donor-cell flux u qL (u >= 0) or u qR (u < 0).
double upwind_cgrid_flux(double qL, double qR, double u_face);

/// Equal-weight 2-point Gauss average of a pointwise flux rule over the
/// two node state pairs of one edge.
double edge_flux_integral(double qL0, double qR0, double qL1, double qR1,
                          const std::function<double(double, double)>& rule);

/// Per-face fluxes: fx[idx(i,j)] lives on the face between (i,j) and
/// (i+1,j); fy[idx(i,j)] between (i,j) and (i,j+1).
struct FaceFluxes {
  std::vector<double> fx, fy;
};

/// Conservative flux-form update q - dt (div of face fluxes).
CellField evolve_flux_form(const Grid2D& g, const CellField& q,
                           const FaceFluxes& f, double dt);

/// Face-normal velocities on a C-grid: u[idx(i,j)] at (i+1/2, j),
/// v[idx(i,j)] at (i, j+1/2).
struct VelocityFields {
  int nx = 0;
  int ny = 0;
  std::vector<double> u, v;
};

/// Inverse Laplacian with zero-mean gauge: psi solves -lap psi = q - mean(q)
/// spectrally on the periodic grid, zero wavenumber set to zero.
/// Thread-safe across instances; one instance per concurrent worker.
class PoissonSolver {
 public:
  explicit PoissonSolver(const Grid2D& g);
  ~PoissonSolver();
  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  CellField solve(const CellField& q) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CellField spectral_poisson(const Grid2D& g, const CellField& q);

/// Corner-average the cell-centered streamfunction, then difference along
/// faces; discretely divergence-free by telescoping.
VelocityFields cgrid_velocities(const Grid2D& g, const CellField& psi_cells);

/// Face velocities by differencing an analytic streamfunction sampled at
/// cell corners (corner (i,j) at (i dx, j dy)); exactly divergence-free.
VelocityFields velocities_from_streamfunction(
    const Grid2D& g, const std::function<double(double, double)>& psi);

/// Max absolute discrete divergence over cells; should sit at roundoff.
double max_divergence(const Grid2D& g, const VelocityFields& vel);

/// LeVeque slotted-cylinder / cone / cosine-lump composite on [0,1]^2.
CellField leveque_initial(const Grid2D& g);

/// Indicator of [0.1,0.6]x[0.1,0.6].
CellField square_initial(const Grid2D& g);

/// Per-run CFL audit shared by every EM invocation of one experiment run.
struct CflAudit {
  double max_cfl = 0.0;
  double step_max = 0.0;  // running max since the last take_step_max()
  int breaches = 0;       // calls with effective CFL > 1
  double div_max = 0.0;   // worst face-velocity divergence seen

  void record(double cfl) {
    if (cfl > max_cfl) max_cfl = cfl;
    if (cfl > step_max) step_max = cfl;
    if (cfl > 1.0) ++breaches;
  }
  double take_step_max() {
    const double r = step_max;
    step_max = 0.0;
    return r;
  }
  void record_divergence(double d) {
    if (d > div_max) div_max = d;
  }
};

struct FvOptions {
  bool limiter = true;
  Stencil stencil = Stencil::thirteen_point;
  // Donor-cell edge values (no reconstruction). Slope-reconstructed upwind
  // updates keep the local maximum principle only up to CFL 1/2; donor cell
  // holds it up to combined CFL 1, which the split transport-noise substeps
  // need.
  bool first_order = false;
};

/// Monotone EM flow maps for the experiment suite. All honor the
/// (q, a, dt, dS) EmFlowMap contract with noise weighted linearly by a.
integrators::EmFlowMap burgers_const_noise_map(const Grid2D& g, double a, double b,
                                               const FvOptions& opt,
                                               std::shared_ptr<CflAudit> audit);

/// Upwind advection by fixed deterministic face velocities plus noise
/// velocities xi_p dS^p / dt.
integrators::EmFlowMap advection_map(const Grid2D& g, VelocityFields u_det,
                                     std::vector<VelocityFields> xi,
                                     const FvOptions& opt,
                                     std::shared_ptr<CflAudit> audit);

/// Vorticity transport: velocities recomputed each call from the spectral
/// inverse Laplacian of the current vorticity plus the noise
/// streamfunctions psi_p dS^p / dt.
integrators::EmFlowMap euler_salt_map(const Grid2D& g,
                                      std::vector<CellField> psi_noise_cells,
                                      const FvOptions& opt,
                                      std::shared_ptr<CflAudit> audit);

/// Drift half of the split Burgers problem: Godunov flux per direction.
integrators::EmFlowMap burgers_godunov_drift_map(const Grid2D& g,
                                                 const FvOptions& opt,
                                                 std::shared_ptr<CflAudit> audit);

/// Diffusion half: upwind transport by the noise velocities alone.
integrators::EmFlowMap transport_noise_diffusion_map(const Grid2D& g,
                                                     std::vector<VelocityFields> xi,
                                                     const FvOptions& opt,
                                                     std::shared_ptr<CflAudit> audit);

}  // namespace sspsde::fv2d
