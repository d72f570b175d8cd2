#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sspsde/config.hpp"
#include "sspsde/experiments.hpp"
#include "sspsde/fv2d.hpp"
#include "sspsde/increments.hpp"

namespace {

using sspsde::config::ExperimentConfig;

int dispatch(const ExperimentConfig& cfg) { return sspsde::experiments::run(cfg, std::cout); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strong-stability-preserving stochastic integration toolkit"};
  app.require_subcommand(1);

  // run: field experiments from a config file
  std::string config_path, experiment, out_dir, sampler_name, stencil_name;
  std::uint64_t seed = 0;
  bool paper_scale = false, emit_pgm = false;
  int workers = 0, ensemble = 0;

  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
  run_cmd->add_option("config", config_path, "INI config file")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--experiment", experiment,
                      "experiment name (overrides the config file)");
  CLI::Option* run_seed = run_cmd->add_option("--seed", seed, "RNG seed override");
  run_cmd->add_flag("--paper-scale", paper_scale, "use the full published resolutions");
  CLI::Option* run_out = run_cmd->add_option("--out", out_dir, "output directory");
  CLI::Option* run_workers =
      run_cmd->add_option("--workers", workers, "ensemble worker threads");
  CLI::Option* run_ens = run_cmd->add_option("--ensemble", ensemble, "ensemble size");
  run_cmd->add_flag("--pgm", emit_pgm, "also write grayscale PGM images");

  // radius: monotonicity radius of a named tableau
  std::string method = "ssp104";
  CLI::App* radius_cmd =
      app.add_subcommand("radius", "monotonicity radius of a named method");
  radius_cmd->add_option("method", method,
                         "fe | ssp22 | ssp33 | ssp104 | midpoint | gamma(<g>)");

  // converge: convergence-order study on the linear test SDE
  std::string conv_method = "em", conv_sampler = "gaussian";
  int conv_paths = 0;
  std::uint64_t conv_seed = 1;
  CLI::App* conv_cmd =
      app.add_subcommand("converge", "convergence order on the linear test SDE");
  conv_cmd->add_option("--method", conv_method, "em | ssp22 | ssp33 | ...");
  conv_cmd->add_option("--sampler", conv_sampler,
                       "gaussian | truncated_gaussian | two_point | three_point");
  conv_cmd->add_option("--paths", conv_paths, "Monte-Carlo path count");
  conv_cmd->add_option("--seed", conv_seed, "RNG seed");

  // validate-increments: Monte-Carlo moment table for a sampler
  std::string val_sampler = "truncated_gaussian";
  double val_k = 1.0;
  std::uint64_t val_seed = 1;
  CLI::App* val_cmd =
      app.add_subcommand("validate-increments", "moment checks for an increment sampler");
  val_cmd->add_option("--sampler", val_sampler, "sampler name");
  val_cmd->add_option("--k", val_k, "truncation exponent");
  val_cmd->add_option("--seed", val_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      sspsde::config::KeyValues kv;
      if (!config_path.empty()) kv = sspsde::config::load_ini(config_path);
      std::string name = experiment;
      if (name.empty()) {
        auto it = kv.find("experiment.name");
        if (it == kv.end()) it = kv.find("experiment");
        if (it != kv.end()) name = it->second;
      }
      if (name.empty()) {
        std::cerr << "no experiment named: pass --experiment or set it in the config\n";
        return 2;
      }
      ExperimentConfig cfg = sspsde::experiments::default_config(name, paper_scale);
      kv["experiment.name"] = name;
      cfg = sspsde::config::config_from_keyvalues(kv, cfg);
      if (*run_seed) cfg.seed = seed;
      if (*run_out) cfg.output_dir = out_dir;
      if (*run_workers) cfg.workers = workers;
      if (*run_ens) cfg.ensemble = ensemble;
      if (emit_pgm) cfg.write_pgm = true;
      cfg.validate();
      return dispatch(cfg);
    }
    if (radius_cmd->parsed()) {
      ExperimentConfig cfg = sspsde::experiments::default_config("radius");
      cfg.integrator = method;
      return dispatch(cfg);
    }
    if (conv_cmd->parsed()) {
      ExperimentConfig cfg = sspsde::experiments::default_config("converge");
      cfg.integrator = conv_method;
      cfg.sampler.kind = sspsde::increments::kind_from_string(conv_sampler);
      if (conv_paths > 0) cfg.ensemble = conv_paths;
      cfg.seed = conv_seed;
      return dispatch(cfg);
    }
    if (val_cmd->parsed()) {
      ExperimentConfig cfg = sspsde::experiments::default_config("validate_increments");
      cfg.sampler = sspsde::increments::IncrementSampler(
          sspsde::increments::kind_from_string(val_sampler), val_k);
      cfg.seed = val_seed;
      return dispatch(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
