#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sspsde/increments.hpp"
#include "sspsde/tableau.hpp"

namespace sspsde::integrators {

using State = std::vector<double>;
using Increment = std::vector<double>;

/// SDE data: drift f(q) and the diffusion contraction G(q) dS.
/// Both are pure functions of their arguments; diffusion must be linear
/// in dS.
struct SdeProblem {
  int dim = 0;
  int noise_dim = 0;
  std::function<State(const State&)> drift;
  std::function<State(const State&, const Increment&)> diffusion;  // G(q) dS
};

/// One Euler-Maruyama-type flow map: (q, a, dt, dS) -> q'. For the plain
/// map this is q + a dt f(q) + a G(q) dS; experiment kernels substitute
/// flux-form updates with the same signature and the same meaning of the
/// stage scale a (noise weighted linearly by a).
using EmFlowMap = std::function<State(const State&, double a, double dt, const Increment&)>;

enum class NoiseWeighting {
  linear,      // noise term a * G dS (default everywhere)
  sqrt_scale,  // compatibility mode: a^(1/2) * G dS in scaled calls
};

EmFlowMap make_em_map(const SdeProblem& p,
                      NoiseWeighting w = NoiseWeighting::linear);

State em_step(const SdeProblem& p, const State& q, double dt, const Increment& dS);

/// Generic tableau-driven stochastic RK: stages share the single increment
/// dS, noise weighted by the same a_ij / b_i as the drift.
State srk_step(const tableau::ButcherTableau& t, const SdeProblem& p,
               const State& q, double dt, const Increment& dS);

/// Drift and diffusion advanced with separate tableaus over shared stages.
State sark_step(const tableau::ArkPair& pair, const SdeProblem& p,
                const State& q, double dt, const Increment& dS);

State sgark_step(const tableau::GarkTableaus& g, const SdeProblem& p,
                 const State& q, double dt, const Increment& dS);

enum class ShuOsherMethod { ssp22, ssp33, ssp104 };

ShuOsherMethod shu_osher_from_string(const std::string& name);

/// Convex-combination (Shu-Osher) update built from EM flow map calls;
/// boundedness of the map transfers to the step.
State shu_osher_step(ShuOsherMethod method, const EmFlowMap& em,
                     const State& q, double dt, const Increment& dS);

/// Butcher-form RK assembled from EM flow map increments: the weighted
/// contribution of stage j is em(k_j, w, dt, dS) - k_j. Agrees with
/// srk_step on a plain EM map; usable with any tableau, including ones
/// with no convex (Shu-Osher) representation.
State rk_em_step(const tableau::ButcherTableau& t, const EmFlowMap& em,
                 const State& q, double dt, const Increment& dS);

/// m SSP22 drift-only substeps of size h each (diffusion silenced).
State ssp2m2_drift(int m, const EmFlowMap& drift_em, const State& q, double h,
                   int noise_dim);

/// n SSP22 diffusion-only substeps, each consuming dS/n.
State ssp2n2_diffusion(int n, const EmFlowMap& diff_em, const State& q,
                       double dt, const Increment& dS);

/// Strang sequential splitting: drift half-step (m substeps of dt/2m),
/// diffusion pass (n substeps of dS/n), drift half-step.
State strang_sequential_step(int m, int n, const EmFlowMap& drift_em,
                             const EmFlowMap& diff_em, const State& q,
                             double dt, const Increment& dS);

/// Strang additive splitting: average of drift-then-diffusion and
/// diffusion-then-drift full passes.
State strang_additive_step(int m, int n, const EmFlowMap& drift_em,
                           const EmFlowMap& diff_em, const State& q,
                           double dt, const Increment& dS);

/// Critical steps: dt <= radius * tau0 (SRK) or dt <= min(r tau_f, rt tau_g).
struct StepBound {
  double tau0 = 0.0;
  double tau_f = 0.0;
  double tau_g = 0.0;
  double radius = 0.0;
};

using Stepper = std::function<State(const SdeProblem&, const State&, double dt,
                                    const Increment&)>;

struct PathHooks {
  std::function<void(int step, double t, const State&)> after_step;  // may be null
};

/// Drive a stepper over n_steps, sampling dS once per step from the given
/// stream. Throws std::runtime_error naming the step index if the state
/// goes non-finite. Deterministic given (seed, stream_id).
State run_path(const Stepper& stepper, const SdeProblem& p, State q0, double dt,
               int n_steps, const increments::IncrementSampler& sampler,
               rng::RngStream& stream, const PathHooks& hooks = {});

}  // namespace sspsde::integrators
