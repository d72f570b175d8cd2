#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sspsde/fv2d.hpp"
#include "sspsde/increments.hpp"

namespace sspsde::config {

/// Flat key/value view of an INI file; section names are folded into the
/// keys as "section.key". Lines starting with '#' or ';' are comments.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_ini(const std::string& text);
KeyValues load_ini(const std::string& path);

struct ExperimentConfig {
  std::string experiment;  // burgers_ablation, gamma_family, advection2d,
                           // euler_salt, burgers_gark_split, converge,
                           // radius, validate_increments
  int nx = 64;
  int ny = 64;
  int nt = 256;
  double t_end = 1.0;
  std::uint64_t seed = 1;
  int ensemble = 1;
  increments::IncrementSampler sampler{increments::Kind::three_point, 1.0};
  std::string integrator = "ssp22";
  double gamma = 0.5;   // gamma-family tableau parameter
  int split_m = 1;      // drift substeps of the sequential splitting
  int split_n = 4;      // diffusion substeps
  bool limiter = true;
  fv2d::Stencil stencil = fv2d::Stencil::thirteen_point;
  std::string output_dir = "out";
  bool write_pgm = false;
  int workers = 1;

  void validate() const;  // throws std::invalid_argument
};

/// Populate a config from parsed key/values; unknown keys are rejected so
/// typos fail loudly. Recognized keys live under [experiment], [grid],
/// [time], [noise], [integrator], [output]. The base carries the defaults
/// that keys override.
ExperimentConfig config_from_keyvalues(const KeyValues& kv,
                                       ExperimentConfig base = ExperimentConfig{});

ExperimentConfig load_config(const std::string& path);

}  // namespace sspsde::config
