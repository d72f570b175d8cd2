#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sspsde/config.hpp"
#include "sspsde/diagnostics.hpp"
#include "sspsde/fv2d.hpp"

namespace sspsde::experiments {

/// Outcome of one realization (ensemble member, or one ablation case).
struct MemberOutcome {
  std::string label;
  diagnostics::RunRecord record;
  fv2d::CellField final_field;
  double worst_overshoot = 0.0;
  double worst_undershoot = 0.0;
  double mass_drift = 0.0;      // |final mass - initial mass|
  double max_divergence = 0.0;  // worst face-velocity divergence seen
  double max_cfl = 0.0;
  int cfl_breaches = 0;
};

struct ExperimentOutcome {
  std::string experiment;
  std::vector<MemberOutcome> members;
  std::string notes;  // extra lines echoed into summary.txt
};

/// Canonical settings of each named experiment; paper_scale selects the
/// full published resolutions instead of the desk-scale defaults.
config::ExperimentConfig default_config(const std::string& experiment,
                                        bool paper_scale = false);

/// Run a field experiment (burgers_ablation, gamma_family, advection2d,
/// euler_salt, burgers_gark_split) keeping every member record in memory.
/// Member streams are pure functions of (seed, member index), so results
/// are identical for any worker count.
ExperimentOutcome run_fields(const config::ExperimentConfig& c);

std::string summary_text(const config::ExperimentConfig& c, const ExperimentOutcome& o);

/// Dispatcher behind the command line: field experiments write summary.txt,
/// member_<k>.csv and member_<k>_final.fld (plus .pgm on request) into
/// c.output_dir; converge / radius / validate_increments print to out.
/// Returns a process exit status.
int run(const config::ExperimentConfig& c, std::ostream& out);

}  // namespace sspsde::experiments
