#include "sspsde/integrators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sspsde::integrators {

namespace {

void axpy(State& y, double a, const State& x) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

bool all_finite(const State& q) {
  for (double v : q)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

EmFlowMap make_em_map(const SdeProblem& p, NoiseWeighting w) {
  return [&p, w](const State& q, double a, double dt, const Increment& dS) {
    State out = q;
    axpy(out, a * dt, p.drift(q));
    const double an = w == NoiseWeighting::linear ? a : std::sqrt(a);
    axpy(out, an, p.diffusion(q, dS));
    return out;
  };
}

State em_step(const SdeProblem& p, const State& q, double dt, const Increment& dS) {
  State out = q;
  axpy(out, dt, p.drift(q));
  axpy(out, 1.0, p.diffusion(q, dS));
  return out;
}

State srk_step(const tableau::ButcherTableau& t, const SdeProblem& p,
               const State& q, double dt, const Increment& dS) {
  const int s = t.s;
  std::vector<State> f(s), g(s);
  for (int i = 0; i < s; ++i) {
    State k = q;
    for (int j = 0; j < i; ++j) {
      if (t.a[i][j] == 0.0) continue;
      axpy(k, dt * t.a[i][j], f[j]);
      axpy(k, t.a[i][j], g[j]);
    }
    f[i] = p.drift(k);
    g[i] = p.diffusion(k, dS);
  }
  State out = q;
  for (int i = 0; i < s; ++i) {
    axpy(out, dt * t.b[i], f[i]);
    axpy(out, t.b[i], g[i]);
  }
  return out;
}

State sark_step(const tableau::ArkPair& pair, const SdeProblem& p,
                const State& q, double dt, const Increment& dS) {
  const int s = pair.drift.s;
  std::vector<State> f(s), g(s);
  for (int i = 0; i < s; ++i) {
    State k = q;
    for (int j = 0; j < i; ++j) {
      if (pair.drift.a[i][j] != 0.0) axpy(k, dt * pair.drift.a[i][j], f[j]);
      if (pair.diffusion.a[i][j] != 0.0) axpy(k, pair.diffusion.a[i][j], g[j]);
    }
    f[i] = p.drift(k);
    g[i] = p.diffusion(k, dS);
  }
  State out = q;
  for (int i = 0; i < s; ++i) {
    axpy(out, dt * pair.drift.b[i], f[i]);
    axpy(out, pair.diffusion.b[i], g[i]);
  }
  return out;
}

State sgark_step(const tableau::GarkTableaus& g, const SdeProblem& p,
                 const State& q, double dt, const Increment& dS) {
  const int sf = g.s_f, sg = g.s_g;
  std::vector<State> f_at(sf), g_at(sg);
  std::vector<bool> f_done(sf, false), g_done(sg, false);
  for (int stage : g.stage_order) {
    const bool is_f = stage < sf;
    State k = q;
    for (int j = 0; j < sf; ++j) {
      const double c = is_f ? g.a_ff[stage][j] : g.a_gf[stage - sf][j];
      if (c != 0.0) {
        if (!f_done[j]) throw std::logic_error("sgark_step: stage order broken");
        axpy(k, dt * c, f_at[j]);
      }
    }
    for (int j = 0; j < sg; ++j) {
      const double c = is_f ? g.a_fg[stage][j] : g.a_gg[stage - sf][j];
      if (c != 0.0) {
        if (!g_done[j]) throw std::logic_error("sgark_step: stage order broken");
        axpy(k, c, g_at[j]);
      }
    }
    if (is_f) {
      f_at[stage] = p.drift(k);
      f_done[stage] = true;
    } else {
      g_at[stage - sf] = p.diffusion(k, dS);
      g_done[stage - sf] = true;
    }
  }
  State out = q;
  for (int i = 0; i < sf; ++i) axpy(out, dt * g.b_f[i], f_at[i]);
  for (int i = 0; i < sg; ++i) axpy(out, g.b_g[i], g_at[i]);
  return out;
}

ShuOsherMethod shu_osher_from_string(const std::string& name) {
  if (name == "ssp22") return ShuOsherMethod::ssp22;
  if (name == "ssp33") return ShuOsherMethod::ssp33;
  if (name == "ssp104") return ShuOsherMethod::ssp104;
  throw std::invalid_argument("no Shu-Osher form for '" + name + "'");
}

namespace {

State convex2(double w0, const State& q0, double w1, const State& q1) {
  State out(q0.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = w0 * q0[i] + w1 * q1[i];
  return out;
}

}  // namespace

State shu_osher_step(ShuOsherMethod method, const EmFlowMap& em,
                     const State& q, double dt, const Increment& dS) {
  switch (method) {
    case ShuOsherMethod::ssp22: {
      const State q1 = em(q, 1.0, dt, dS);
      return convex2(0.5, q, 0.5, em(q1, 1.0, dt, dS));
    }
    case ShuOsherMethod::ssp33: {
      State q1 = em(q, 1.0, dt, dS);
      q1 = convex2(0.75, q, 0.25, em(q1, 1.0, dt, dS));
      return convex2(1.0 / 3.0, q, 2.0 / 3.0, em(q1, 1.0, dt, dS));
    }
    case ShuOsherMethod::ssp104: {
      // Two-register form: r holds the running stage, snap the 5th stage.
      State r = q;
      for (int i = 0; i < 4; ++i) r = em(r, 1.0 / 6.0, dt, dS);
      const State snap = r;  // q^4
      r = convex2(0.6, q, 0.4, em(r, 1.0 / 6.0, dt, dS));
      for (int i = 0; i < 4; ++i) r = em(r, 1.0 / 6.0, dt, dS);
      State out(q.size());
      const State em_snap = em(snap, 1.0 / 6.0, dt, dS);
      const State em_r = em(r, 1.0 / 6.0, dt, dS);
      for (size_t i = 0; i < out.size(); ++i)
        out[i] = (q[i] + 9.0 * em_snap[i] + 15.0 * em_r[i]) / 25.0;
      return out;
    }
  }
  throw std::logic_error("shu_osher_step: unreachable");
}

State rk_em_step(const tableau::ButcherTableau& t, const EmFlowMap& em,
                 const State& q, double dt, const Increment& dS) {
  std::vector<State> k(t.s);
  for (int i = 0; i < t.s; ++i) {
    State stage = q;
    for (int j = 0; j < i; ++j) {
      if (t.a[i][j] == 0.0) continue;
      const State inc = em(k[j], t.a[i][j], dt, dS);
      for (size_t c = 0; c < stage.size(); ++c) stage[c] += inc[c] - k[j][c];
    }
    k[i] = std::move(stage);
  }
  State out = q;
  for (int i = 0; i < t.s; ++i) {
    if (t.b[i] == 0.0) continue;
    const State inc = em(k[i], t.b[i], dt, dS);
    for (size_t c = 0; c < out.size(); ++c) out[c] += inc[c] - k[i][c];
  }
  return out;
}

State ssp2m2_drift(int m, const EmFlowMap& drift_em, const State& q, double h,
                   int noise_dim) {
  if (m < 1) throw std::invalid_argument("ssp2m2_drift: m must be >= 1");
  const Increment zero(noise_dim, 0.0);
  State cur = q;
  const double sub = h / m;
  for (int i = 0; i < m; ++i) {
    const State q1 = drift_em(cur, 1.0, sub, zero);
    cur = convex2(0.5, cur, 0.5, drift_em(q1, 1.0, sub, zero));
  }
  return cur;
}

State ssp2n2_diffusion(int n, const EmFlowMap& diff_em, const State& q,
                       double dt, const Increment& dS) {
  if (n < 1) throw std::invalid_argument("ssp2n2_diffusion: n must be >= 1");
  Increment sub(dS.size());
  for (size_t i = 0; i < dS.size(); ++i) sub[i] = dS[i] / n;
  State cur = q;
  for (int i = 0; i < n; ++i) {
    const State q1 = diff_em(cur, 1.0, dt, sub);
    cur = convex2(0.5, cur, 0.5, diff_em(q1, 1.0, dt, sub));
  }
  return cur;
}

State strang_sequential_step(int m, int n, const EmFlowMap& drift_em,
                             const EmFlowMap& diff_em, const State& q,
                             double dt, const Increment& dS) {
  State cur = ssp2m2_drift(m, drift_em, q, dt / 2.0, static_cast<int>(dS.size()));
  cur = ssp2n2_diffusion(n, diff_em, cur, dt, dS);
  return ssp2m2_drift(m, drift_em, cur, dt / 2.0, static_cast<int>(dS.size()));
}

State strang_additive_step(int m, int n, const EmFlowMap& drift_em,
                           const EmFlowMap& diff_em, const State& q,
                           double dt, const Increment& dS) {
  const int nd = static_cast<int>(dS.size());
  const State qa = ssp2m2_drift(m, drift_em, q, dt, nd);
  const State qb = ssp2n2_diffusion(n, diff_em, q, dt, dS);
  const State qba = ssp2n2_diffusion(n, diff_em, qa, dt, dS);
  const State qab = ssp2m2_drift(m, drift_em, qb, dt, nd);
  return convex2(0.5, qab, 0.5, qba);
}

State run_path(const Stepper& stepper, const SdeProblem& p, State q0, double dt,
               int n_steps, const increments::IncrementSampler& sampler,
               rng::RngStream& stream, const PathHooks& hooks) {
  State q = std::move(q0);
  for (int step = 0; step < n_steps; ++step) {
    const Increment dS = increments::sample(sampler, p.noise_dim, dt, stream);
    q = stepper(p, q, dt, dS);
    if (!all_finite(q))
      throw std::runtime_error("run_path: non-finite state at step " +
                               std::to_string(step + 1));
    if (hooks.after_step) hooks.after_step(step + 1, (step + 1) * dt, q);
  }
  return q;
}

}  // namespace sspsde::integrators
