#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sspsde/integrators.hpp"

namespace sspsde::sdebench {

enum class Interpretation { stratonovich, ito };

/// Scalar geometric test SDE dq = a q dt + b q dW with a closed-form path
/// solution under either calculus.
struct LinearTestSde {
  double a = 1.0;
  double b = 0.5;
  double q0 = 1.0;
  Interpretation interpretation = Interpretation::ito;
};

/// Exact terminal value given the terminal Wiener value:
/// Stratonovich q0 exp(a t + b W), Ito q0 exp((a - b^2/2) t + b W).
double exact_path(const LinearTestSde& sde, double w_terminal, double t);

/// Analytic terminal mean: Stratonovich q0 exp((a + b^2/2) t), Ito q0 exp(a t).
double analytic_mean(const LinearTestSde& sde, double t);

integrators::SdeProblem make_problem(const LinearTestSde& sde);

/// RMS terminal error over n_paths, with the exact solution driven by the
/// cumulative sum of the same standard normals whose (possibly truncated)
/// images drive the stepper. Only the gaussian and truncated_gaussian
/// samplers admit this coupling.
double mean_square_error(const integrators::Stepper& stepper,
                         const LinearTestSde& sde, double dt, double t_end,
                         int n_paths, const increments::IncrementSampler& sampler,
                         std::uint64_t seed);

enum class Observable { mean, second_moment };

/// |Monte-Carlo estimate - analytic value| of the terminal observable.
double weak_error(const integrators::Stepper& stepper, const LinearTestSde& sde,
                  double dt, double t_end, int n_paths,
                  const increments::IncrementSampler& sampler, std::uint64_t seed,
                  Observable obs = Observable::mean);

struct OrderFit {
  double order = 0.0;
  double residual = 0.0;  // RMS residual of the log-log fit
};

/// Least-squares slope of log(err) against log(dt). Nonpositive errors are
/// dropped with a warning to stderr; fewer than 3 surviving points throws.
OrderFit fit_order(const std::vector<std::pair<double, double>>& errors);

}  // namespace sspsde::sdebench
