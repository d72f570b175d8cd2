#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sspsde::rng {

/// Counter-based random stream. Each (seed, stream_id) pair names an
/// independent stream; the i-th draw is a pure function of
/// (seed, stream_id, i), so streams replay bit-for-bit on any platform
/// and can be handed between workers without coordination.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform on (0, 1), 53-bit resolution, never exactly 0 or 1.
  double next_uniform();

  /// Standard normal via Box-Muller on two uniform draws; no cached
  /// second value, so the draw index stays in lockstep with the counter.
  double next_normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sspsde::rng

namespace sspsde::increments {

enum class Kind { gaussian, two_point, three_point, truncated_gaussian };

Kind kind_from_string(const std::string& name);
std::string to_string(Kind k);

/// Distribution family for the per-step driving increments dS.
/// k is the truncation exponent of the truncated Gaussian (k >= 1).
struct IncrementSampler {
  Kind kind = Kind::gaussian;
  double k = 1.0;

  IncrementSampler() = default;
  IncrementSampler(Kind kind_in, double k_in = 1.0);
};

/// Clamp level A_dt = sqrt(2 k |ln dt|) for the truncated Gaussian.
double truncation_level(double k, double dt);

/// Draw a length-p_dim increment vector, pre-scaled by sqrt(dt):
/// gaussian -> sqrt(dt) N(0,1); two_point -> +-sqrt(dt) w.p. 1/2;
/// three_point -> +-sqrt(3 dt) w.p. 1/6 each, 0 w.p. 2/3;
/// truncated_gaussian -> sqrt(dt) clamp(Z, +-A_dt). Components independent.
std::vector<double> sample(const IncrementSampler& s, int p_dim, double dt,
                           rng::RngStream& stream);

/// Almost-sure bound on |dS^p|; +infinity for the unbounded Gaussian.
double max_increment_bound(const IncrementSampler& s, double dt);

struct MomentEstimate {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  bool is_upper_bound = false;  // target is a bound, not an equality
  bool checked = false;         // whether this sampler is expected to match
  bool flagged = false;         // checked and > 4 standard errors off target
};

struct MomentReport {
  std::vector<MomentEstimate> rows;
  bool any_flagged = false;
};

/// Monte-Carlo moments 1-5 of dS against the N(0, dt) targets for however
/// many moments the sampler matches (3 for two-point, 5 otherwise). For the
/// truncated Gaussian the second and fourth moments carry an O(dt^k) clamp
/// bias and are reported unchecked, and two coupled statistics are added:
/// E[(Z - Ztrunc)^2] against the bound dt^k and the cross moment
/// E[(Z^2 - Ztrunc^2)(Z - Ztrunc)] against 0.
MomentReport validate_moments(const IncrementSampler& s, double dt,
                              std::int64_t n_samples, rng::RngStream& stream);

}  // namespace sspsde::increments
