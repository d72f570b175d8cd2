#include "sspsde/sdebench.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace sspsde::sdebench {

double exact_path(const LinearTestSde& sde, double w_terminal, double t) {
  const double drift = sde.interpretation == Interpretation::stratonovich
                           ? sde.a
                           : sde.a - 0.5 * sde.b * sde.b;
  return sde.q0 * std::exp(drift * t + sde.b * w_terminal);
}

double analytic_mean(const LinearTestSde& sde, double t) {
  const double rate = sde.interpretation == Interpretation::stratonovich
                          ? sde.a + 0.5 * sde.b * sde.b
                          : sde.a;
  return sde.q0 * std::exp(rate * t);
}

integrators::SdeProblem make_problem(const LinearTestSde& sde) {
  integrators::SdeProblem p;
  p.dim = 1;
  p.noise_dim = 1;
  const double a = sde.a, b = sde.b;
  p.drift = [a](const integrators::State& q) {
    return integrators::State{a * q[0]};
  };
  p.diffusion = [b](const integrators::State& q, const integrators::Increment& dS) {
    return integrators::State{b * q[0] * dS[0]};
  };
  return p;
}

double mean_square_error(const integrators::Stepper& stepper,
                         const LinearTestSde& sde, double dt, double t_end,
                         int n_paths, const increments::IncrementSampler& sampler,
                         std::uint64_t seed) {
  using increments::Kind;
  if (sampler.kind != Kind::gaussian && sampler.kind != Kind::truncated_gaussian)
    throw std::invalid_argument(
        "mean_square_error: pathwise coupling needs an underlying normal "
        "(gaussian or truncated_gaussian sampler)");

  const int n_steps = static_cast<int>(std::llround(t_end / dt));
  if (std::abs(n_steps * dt - t_end) > 1e-12)
    throw std::invalid_argument("mean_square_error: dt does not divide t_end");

  const auto problem = make_problem(sde);
  const double root_dt = std::sqrt(dt);
  const double clamp_level = sampler.kind == Kind::truncated_gaussian
                                 ? increments::truncation_level(sampler.k, dt)
                                 : 0.0;

  // Pairwise-summed squared errors for a reduction order independent of
  // any parallel partitioning.
  std::vector<double> sq(n_paths);
  for (int path = 0; path < n_paths; ++path) {
    rng::RngStream stream(seed, static_cast<std::uint64_t>(path));
    integrators::State q{sde.q0};
    double w = 0.0;
    for (int step = 0; step < n_steps; ++step) {
      const double z = stream.next_normal();
      w += root_dt * z;
      const double zt = sampler.kind == Kind::truncated_gaussian
                            ? std::clamp(z, -clamp_level, clamp_level)
                            : z;
      q = stepper(problem, q, dt, {root_dt * zt});
    }
    const double err = q[0] - exact_path(sde, w, t_end);
    sq[path] = err * err;
  }
  for (size_t width = sq.size(); width > 1;) {
    const size_t half = (width + 1) / 2;
    for (size_t i = 0; i + half < width; ++i) sq[i] += sq[i + half];
    width = half;
  }
  return std::sqrt(sq[0] / n_paths);
}

double weak_error(const integrators::Stepper& stepper, const LinearTestSde& sde,
                  double dt, double t_end, int n_paths,
                  const increments::IncrementSampler& sampler, std::uint64_t seed,
                  Observable obs) {
  const int n_steps = static_cast<int>(std::llround(t_end / dt));
  if (std::abs(n_steps * dt - t_end) > 1e-12)
    throw std::invalid_argument("weak_error: dt does not divide t_end");
  const auto problem = make_problem(sde);

  std::vector<double> vals(n_paths);
  for (int path = 0; path < n_paths; ++path) {
    rng::RngStream stream(seed, static_cast<std::uint64_t>(path));
    const auto q = integrators::run_path(
        [&stepper](const integrators::SdeProblem& p, const integrators::State& s,
                   double h, const integrators::Increment& dS) {
          return stepper(p, s, h, dS);
        },
        problem, {sde.q0}, dt, n_steps, sampler, stream);
    vals[path] = obs == Observable::mean ? q[0] : q[0] * q[0];
  }
  for (size_t width = vals.size(); width > 1;) {
    const size_t half = (width + 1) / 2;
    for (size_t i = 0; i + half < width; ++i) vals[i] += vals[i + half];
    width = half;
  }
  const double estimate = vals[0] / n_paths;

  double target;
  if (obs == Observable::mean) {
    target = analytic_mean(sde, t_end);
  } else {
    // E[q^2] of the lognormal solution under either calculus.
    const double a = sde.a, b = sde.b;
    const double rate = sde.interpretation == Interpretation::stratonovich
                            ? 2.0 * a + 2.0 * b * b
                            : 2.0 * a + b * b;
    target = sde.q0 * sde.q0 * std::exp(rate * t_end);
  }
  return std::abs(estimate - target);
}

OrderFit fit_order(const std::vector<std::pair<double, double>>& errors) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [dt, err] : errors) {
    if (err <= 0.0) {
      std::cerr << "fit_order: dropping nonpositive error at dt=" << dt << "\n";
      continue;
    }
    pts.emplace_back(std::log(dt), std::log(err));
  }
  if (pts.size() < 3)
    throw std::invalid_argument("fit_order: need at least 3 positive points");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double rss = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (intercept + slope * x);
    rss += r * r;
  }
  return {slope, std::sqrt(rss / n)};
}

}  // namespace sspsde::sdebench
