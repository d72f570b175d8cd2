// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned here, next to the checks.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sspsde/diagnostics.hpp"
#include "sspsde/experiments.hpp"
#include "sspsde/fv2d.hpp"
#include "sspsde/increments.hpp"
#include "sspsde/integrators.hpp"
#include "sspsde/sdebench.hpp"
#include "sspsde/tableau.hpp"

using namespace sspsde;

namespace {

int g_failures = 0;

struct Criterion {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

void report(int number, const std::string& title, const Criterion& c,
            const std::string& extra = "") {
  std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << number << ": " << title;
  if (!extra.empty()) std::cout << " [" << extra << "]";
  if (!c.ok) std::cout << " -- " << c.detail.str();
  std::cout << "\n" << std::flush;
  if (!c.ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_radii() {
  Criterion c;
  const std::pair<const char*, double> cases[] = {
      {"fe", 1.0},          {"ssp22", 1.0},       {"ssp33", 1.0},
      {"ssp104", 6.0},      {"gamma(0.5)", 1.0},  {"gamma(0.25)", 0.5},
      {"gamma(0.75)", 0.5}, {"gamma(-0.025)", 0.0}, {"midpoint", 0.0}};
  std::string extra;
  for (const auto& [name, want] : cases) {
    const auto r = tableau::radius_of_monotonicity(tableau::extend(tableau::builtin(name)));
    c.require(!r.capped, std::string(name) + " hit the search cap");
    c.require(std::abs(r.value - want) <= 1e-6,
              std::string(name) + " radius " + fmt(r.value) + " != " + fmt(want));
    if (!extra.empty()) extra += ", ";
    extra += std::string(name) + "=" + fmt(r.value);
  }
  report(1, "monotonicity radii match the published values within 1e-6", c, extra);
}

void criterion_rumelin() {
  Criterion c;
  const auto strat =
      tableau::rumelin_coefficients(tableau::ArkPair(tableau::builtin("ssp22"), tableau::builtin("ssp22")));
  c.require(strat.lambda0 == 1.0 && strat.lambda1 == 0.5 && strat.lambda2 == 1.0,
            "ssp22 pair coefficients not (1, 1/2, 1)");
  c.require(strat.consistency == tableau::SdeConsistency::stratonovich,
            "ssp22 pair not classified Stratonovich");

  const auto ito =
      tableau::rumelin_coefficients(tableau::ArkPair(tableau::builtin("fe"), tableau::builtin("fe")));
  c.require(ito.lambda0 == 1.0 && ito.lambda1 == 0.0 && ito.lambda2 == 1.0,
            "fe pair coefficients not (1, 0, 1)");
  c.require(ito.consistency == tableau::SdeConsistency::ito, "fe pair not classified Ito");

  const auto ssp33 = tableau::rumelin_coefficients(
      tableau::ArkPair(tableau::builtin("ssp33"), tableau::builtin("ssp33")));
  c.require(std::abs(ssp33.lambda1 - 0.5) <= 1e-15, "ssp33 pair correction weight != 1/2");
  c.require(ssp33.consistency == tableau::SdeConsistency::stratonovich,
            "ssp33 pair not classified Stratonovich");
  report(2, "limiting-SDE coefficients identify the Stratonovich/Ito split exactly", c);
}

void criterion_increment_moments() {
  Criterion c;
  // enumerated moments of the discrete samplers against N(0, dt)
  const double dt = 0.1;
  const double m2 = std::sqrt(dt);
  const double two_m1 = 0.5 * m2 + 0.5 * (-m2);
  const double two_m2 = 0.5 * m2 * m2 + 0.5 * m2 * m2;
  const double two_m3 = 0.5 * m2 * m2 * m2 - 0.5 * m2 * m2 * m2;
  c.require(two_m1 == 0.0 && two_m3 == 0.0, "two-point odd moments nonzero");
  c.require(std::abs(two_m2 - dt) <= 1e-16, "two-point second moment != dt");

  const double m3 = std::sqrt(3.0 * dt);
  const double three_m2 = (m3 * m3 + m3 * m3) / 6.0;
  const double three_m4 = (std::pow(m3, 4) + std::pow(m3, 4)) / 6.0;
  c.require(std::abs(three_m2 - dt) <= 1e-15, "three-point second moment != dt");
  c.require(std::abs(three_m4 - 3.0 * dt * dt) <= 1e-15,
            "three-point fourth moment != 3 dt^2");

  // Monte-Carlo gate for the truncated sampler: coupled statistics at
  // dt = 0.1, one million samples, flags at 4 standard errors
  rng::RngStream stream(1, 0);
  const auto rep = increments::validate_moments(
      increments::IncrementSampler(increments::Kind::truncated_gaussian, 1.0), dt,
      1000000, stream);
  c.require(!rep.any_flagged, "truncated-gaussian moment report flagged");
  double coupled = -1.0, bound = -1.0;
  for (const auto& row : rep.rows) {
    if (row.is_upper_bound) {
      coupled = row.estimate;
      bound = row.target;
      c.require(row.estimate <= row.target,
                "coupling defect " + fmt(row.estimate) + " exceeds dt^k " + fmt(row.target));
    }
  }
  report(3, "increment moments are exact (discrete) and within bounds (truncated, 1e6 draws)",
         c, "coupling defect " + fmt(coupled) + " <= " + fmt(bound));
}

void criterion_convergence() {
  Criterion c;
  sdebench::LinearTestSde sde;  // a=1, b=0.5, q0=1
  sde.interpretation = sdebench::Interpretation::ito;

  const integrators::Stepper em = [](const integrators::SdeProblem& p,
                                     const integrators::State& q, double dt,
                                     const integrators::Increment& dS) {
    return integrators::em_step(p, q, dt, dS);
  };

  std::string extra;
  for (auto kind : {increments::Kind::gaussian, increments::Kind::truncated_gaussian}) {
    const increments::IncrementSampler sampler(kind, 1.0);
    std::vector<std::pair<double, double>> errs;
    for (int k = 4; k <= 9; ++k) {
      const double dt = std::pow(2.0, -k);
      errs.emplace_back(dt, sdebench::mean_square_error(em, sde, dt, 1.0, 10000, sampler, 3));
    }
    const auto fit = sdebench::fit_order(errs);
    c.require(std::abs(fit.order - 0.5) <= 0.15,
              std::string(increments::to_string(kind)) + " mean-square order " +
                  fmt(fit.order) + " outside 0.5 +- 0.15");
    if (!extra.empty()) extra += ", ";
    extra += std::string(increments::to_string(kind)) + " ms=" + fmt(fit.order);
  }

  // weak first order of the Heun-type scheme toward the Stratonovich mean
  sdebench::LinearTestSde strat = sde;
  strat.interpretation = sdebench::Interpretation::stratonovich;
  const auto ssp22 = tableau::builtin("ssp22");
  const integrators::Stepper heun = [ssp22](const integrators::SdeProblem& p,
                                            const integrators::State& q, double dt,
                                            const integrators::Increment& dS) {
    return integrators::srk_step(ssp22, p, q, dt, dS);
  };
  const increments::IncrementSampler two(increments::Kind::two_point);
  std::vector<std::pair<double, double>> werrs;
  for (int k = 1; k <= 5; ++k) {
    const double dt = std::pow(2.0, -k);
    werrs.emplace_back(dt, sdebench::weak_error(heun, strat, dt, 1.0, 100000, two, 2));
  }
  const auto wfit = sdebench::fit_order(werrs);
  c.require(std::abs(wfit.order - 1.0) <= 0.25,
            "weak order " + fmt(wfit.order) + " outside 1.0 +- 0.25");
  extra += ", weak=" + fmt(wfit.order);
  report(4, "mean-square order 1/2 (EM) and weak order 1 (two-stage, two-point noise)", c,
         extra);
}

const experiments::MemberOutcome* find_member(const experiments::ExperimentOutcome& o,
                                              const std::string& label) {
  for (const auto& m : o.members)
    if (m.label == label) return &m;
  return nullptr;
}

void criterion_burgers_ablation(const experiments::ExperimentOutcome& o) {
  Criterion c;
  const auto* limited = find_member(o, "ssp22_limiter_bounded");
  const auto* unlimited = find_member(o, "ssp22_nolimiter_bounded");
  c.require(limited != nullptr && unlimited != nullptr, "expected ablation cases missing");
  std::string extra;
  if (limited) {
    c.require(limited->worst_overshoot <= 1e-12,
              "limited overshoot " + fmt(limited->worst_overshoot));
    c.require(limited->worst_undershoot <= 1e-12,
              "limited undershoot " + fmt(limited->worst_undershoot));
    c.require(limited->mass_drift <= 1e-10, "mass drift " + fmt(limited->mass_drift));
    extra = "limited range violation <= " +
            fmt(std::max(limited->worst_overshoot, limited->worst_undershoot)) +
            ", mass drift " + fmt(limited->mass_drift);
  }
  if (unlimited) {
    const double viol = std::max(unlimited->worst_overshoot, unlimited->worst_undershoot);
    c.require(viol > 0.0, "unlimited case shows no range violation");
    extra += ", unlimited violation " + fmt(viol);
  }
  report(5, "limited stochastic Burgers run stays in [0, 1] and conserves mass;"
            " the unlimited ablation violates the range", c, extra);
}

void criterion_advection(const experiments::ExperimentOutcome& o) {
  Criterion c;
  c.require(o.members.size() == 4, "expected 4 ensemble members");
  double worst = 0.0;
  for (const auto& m : o.members) {
    worst = std::max({worst, m.worst_overshoot, m.worst_undershoot});
    c.require(m.worst_overshoot <= 1e-12 && m.worst_undershoot <= 1e-12,
              m.label + " leaves [0, 1] by " +
                  fmt(std::max(m.worst_overshoot, m.worst_undershoot)));
    c.require(m.max_divergence <= 1e-12, m.label + " divergence " + fmt(m.max_divergence));
  }
  report(6, "stochastic transport ensemble stays in [0, 1] at every step", c,
         "worst violation " + fmt(worst));
}

void criterion_euler(const experiments::ExperimentOutcome& o) {
  Criterion c;
  c.require(o.members.size() == 2, "expected 2 ensemble members");
  std::string extra;
  for (const auto& m : o.members) {
    c.require(m.worst_overshoot <= 1e-12 && m.worst_undershoot <= 1e-12,
              m.label + " range violation " +
                  fmt(std::max(m.worst_overshoot, m.worst_undershoot)));
    c.require(m.mass_drift <= 1e-10, m.label + " mean-vorticity drift " + fmt(m.mass_drift));
    c.require(m.max_divergence <= 1e-12, m.label + " divergence " + fmt(m.max_divergence));
    c.require(m.cfl_breaches == 0, m.label + " broke the unit CFL bound");
    if (!extra.empty()) extra += ", ";
    extra += m.label + " div " + fmt(m.max_divergence);
  }
  report(7, "vorticity transport keeps range, mean vorticity and discrete divergence", c,
         extra);
}

void criterion_gark_split(const experiments::ExperimentOutcome& o) {
  Criterion c;
  c.require(!o.members.empty(), "no members");
  double worst = 0.0;
  for (const auto& m : o.members) {
    worst = std::max({worst, m.worst_overshoot, m.worst_undershoot});
    c.require(m.worst_overshoot <= 1e-12 && m.worst_undershoot <= 1e-12,
              m.label + " range violation " +
                  fmt(std::max(m.worst_overshoot, m.worst_undershoot)));
    c.require(m.mass_drift <= 1e-10, m.label + " mass drift " + fmt(m.mass_drift));
  }
  report(8, "split Burgers transport-noise run stays in [0, 1] and conserves mass", c,
         "worst violation " + fmt(worst));
}

void criterion_properties() {
  Criterion c;

  // convex-combination boundedness with an explicit clamp map, all methods
  const integrators::EmFlowMap clamp = [](const integrators::State& q, double a, double dt,
                                          const integrators::Increment& dS) {
    integrators::State out(q.size());
    for (size_t i = 0; i < q.size(); ++i) {
      const double raw = q[i] + a * dt * (0.4 - q[i]) + a * dS[0] * (q[i] + 0.2);
      out[i] = std::min(1.0, std::max(0.0, raw));
    }
    return out;
  };
  rng::RngStream r(77, 0);
  bool bounded = true;
  for (int k = 0; k < 100 && bounded; ++k) {
    const integrators::State q{r.next_uniform(), r.next_uniform()};
    const integrators::Increment dS{4.0 * r.next_normal()};
    const double dt = 0.02 + 0.4 * r.next_uniform();
    for (auto m : {integrators::ShuOsherMethod::ssp22, integrators::ShuOsherMethod::ssp33,
                   integrators::ShuOsherMethod::ssp104}) {
      for (double v : integrators::shu_osher_step(m, clamp, q, dt, dS))
        bounded = bounded && v >= 0.0 && v <= 1.0;
    }
    for (double v : integrators::strang_sequential_step(1, 4, clamp, clamp, q, dt, dS))
      bounded = bounded && v >= 0.0 && v <= 1.0;
    for (double v : integrators::strang_additive_step(2, 2, clamp, clamp, q, dt, dS))
      bounded = bounded && v >= 0.0 && v <= 1.0;
  }
  c.require(bounded, "a convex-combination stepper left the clamp set");

  // Shu-Osher versus Butcher form on random linear problems
  integrators::SdeProblem lin;
  lin.dim = 1;
  lin.noise_dim = 1;
  lin.drift = [](const integrators::State& q) { return integrators::State{0.8 * q[0]}; };
  lin.diffusion = [](const integrators::State& q, const integrators::Increment& dS) {
    return integrators::State{0.5 * q[0] * dS[0]};
  };
  const auto em_map = integrators::make_em_map(lin);
  double worst_equiv = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double q0 = 2.0 * r.next_uniform() - 0.5;
    const double dS = 0.3 * r.next_normal();
    const double dt = 0.01 + 0.15 * r.next_uniform();
    const struct {
      integrators::ShuOsherMethod m;
      const char* t;
    } pairs[] = {{integrators::ShuOsherMethod::ssp22, "ssp22"},
                 {integrators::ShuOsherMethod::ssp33, "ssp33"},
                 {integrators::ShuOsherMethod::ssp104, "ssp104"}};
    for (const auto& pr : pairs) {
      const double so = integrators::shu_osher_step(pr.m, em_map, {q0}, dt, {dS})[0];
      const double bu =
          integrators::rk_em_step(tableau::builtin(pr.t), em_map, {q0}, dt, {dS})[0];
      worst_equiv = std::max(worst_equiv,
                             std::abs(so - bu) / std::max(1.0, std::abs(bu)));
    }
  }
  c.require(worst_equiv <= 1e-12,
            "Shu-Osher/Butcher disagreement " + fmt(worst_equiv));

  // conservation of the flux-form update under the limited upwind step
  const fv2d::Grid2D g = fv2d::Grid2D::unit(64, 64);
  const fv2d::CellField q0 = fv2d::leveque_initial(g);
  const auto u_det = fv2d::velocities_from_streamfunction(g, [](double x, double y) {
    const double pi = 3.14159265358979323846;
    return pi * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5));
  });
  auto audit = std::make_shared<fv2d::CflAudit>();
  const auto adv = fv2d::advection_map(g, u_det, {}, fv2d::FvOptions{}, audit);
  double umax = 0.0;
  for (double u : u_det.u) umax = std::max(umax, std::abs(u));
  for (double v : u_det.v) umax = std::max(umax, std::abs(v));
  const double dt = 0.3 * g.dx / umax;
  const fv2d::CellField q1(g, adv(q0.v, 1.0, dt, {0.0}));
  const double drift =
      std::abs(diagnostics::mass(g, q1) - diagnostics::mass(g, q0));
  c.require(drift <= 1e-12, "advection step mass drift " + fmt(drift));
  c.require(diagnostics::lmp_check(q0, q1, fv2d::Stencil::thirteen_point) <= 1e-12,
            "advection step violates the local maximum principle");

  // spectral Poisson inversion accuracy at 64^2
  const double pi = 3.14159265358979323846;
  fv2d::CellField mode(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      mode.at(i, j) = std::sin(2.0 * pi * g.xc(i)) * std::sin(2.0 * pi * g.yc(j));
  const fv2d::CellField psi = fv2d::spectral_poisson(g, mode);
  double worst_psi = 0.0;
  for (size_t k = 0; k < psi.v.size(); ++k)
    worst_psi = std::max(worst_psi, std::abs(psi.v[k] - mode.v[k] / (8.0 * pi * pi)));
  c.require(worst_psi <= 1e-10, "Poisson inversion error " + fmt(worst_psi));

  // flux formulas at pinned points
  c.require(fv2d::godunov_burgers_flux(1.0, 0.0) == 0.5, "godunov shock value");
  c.require(fv2d::godunov_burgers_flux(-1.0, 1.0) == 0.0, "godunov transonic value");
  c.require(std::abs(fv2d::llf_em_flux(1.0, -1.0, 0.0) - 1.5) <= 1e-15, "llf value");

  // every sampled increment respects its almost-sure bound
  bool in_bounds = true;
  for (auto kind : {increments::Kind::two_point, increments::Kind::three_point,
                    increments::Kind::truncated_gaussian}) {
    const increments::IncrementSampler s(kind, 1.0);
    const double b = increments::max_increment_bound(s, 0.01);
    rng::RngStream rs(5, static_cast<std::uint64_t>(kind));
    for (int k = 0; k < 20000; ++k)
      for (double v : increments::sample(s, 1, 0.01, rs)) in_bounds = in_bounds && std::abs(v) <= b;
  }
  c.require(in_bounds, "an increment exceeded its almost-sure bound");

  report(9, "structural property suites (convexity, form equivalence, conservation,"
            " inversion, bounds)", c,
         "form equivalence " + fmt(worst_equiv));
}

std::string serialize(const experiments::ExperimentOutcome& o) {
  std::ostringstream out;
  for (const auto& m : o.members) {
    out << m.label << "\n";
    diagnostics::write_csv(out, m.record);
    for (double v : m.final_field.v) {
      std::uint64_t bits;
      static_assert(sizeof bits == sizeof v);
      std::memcpy(&bits, &v, sizeof bits);
      out << bits << " ";
    }
    out << "\n";
  }
  return out.str();
}

void criterion_determinism() {
  Criterion c;
  auto cfg = experiments::default_config("burgers_ablation");
  cfg.workers = 1;
  const std::string once = serialize(experiments::run_fields(cfg));
  const std::string twice = serialize(experiments::run_fields(cfg));
  c.require(once == twice, "repeat run with identical settings differs");
  cfg.workers = 4;
  const std::string parallel = serialize(experiments::run_fields(cfg));
  c.require(once == parallel, "4-worker run differs from the serial run");
  report(10, "per-step records and final fields are byte-identical across reruns"
             " and worker counts", c);
}

}  // namespace

int main() {
  criterion_radii();
  criterion_rumelin();
  criterion_increment_moments();
  criterion_convergence();
  criterion_burgers_ablation(experiments::run_fields(experiments::default_config("burgers_ablation")));
  criterion_advection(experiments::run_fields(experiments::default_config("advection2d")));
  criterion_euler(experiments::run_fields(experiments::default_config("euler_salt")));
  criterion_gark_split(experiments::run_fields(experiments::default_config("burgers_gark_split")));
  criterion_properties();
  criterion_determinism();

  if (g_failures == 0) {
    std::cout << "acceptance: all 10 criteria passed\n";
    return 0;
  }
  std::cout << "acceptance: " << g_failures << " criterion(s) failed\n";
  return 1;
}
