#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sspsde/fv2d.hpp"

namespace sspsde::diagnostics {

/// One per-step measurement row; index 0 is the initial state.
struct StepStats {
  double time = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mass = 0.0;
  double overshoot = 0.0;
  double undershoot = 0.0;
  double cfl = 0.0;
};

struct RunRecord {
  std::vector<StepStats> steps;
  int snapshot_index = -1;
  std::vector<std::string> warnings;
};

/// (overshoot, undershoot) against [lo, hi]: positive parts of the
/// worst exceedances, zero when the field sits inside the bounds.
std::pair<double, double> range_violation(const fv2d::CellField& q, double lo, double hi);

double field_min(const fv2d::CellField& q);
double field_max(const fv2d::CellField& q);

/// Cell-mean integral: sum(q) * dx * dy. Fixed summation order.
double mass(const fv2d::Grid2D& g, const fv2d::CellField& q);

/// Sum of |jump| over all periodic x-faces and y-faces.
double tv_seminorm(const fv2d::CellField& q);

/// Worst signed local-maximum-principle violation of q_new against the
/// stencil extrema of q_old; 0 means the principle holds.
double lmp_check(const fv2d::CellField& q_old, const fv2d::CellField& q_new,
                 fv2d::Stencil stencil);

struct EnsembleEnvelope {
  std::vector<double> min;  // per step, over members
  std::vector<double> max;
};

EnsembleEnvelope ensemble_reduce(const std::vector<RunRecord>& records);

/// CSV with header step,time,min,max,mass,overshoot,undershoot,cfl.
void write_csv(std::ostream& out, const RunRecord& record);

StepStats measure(const fv2d::Grid2D& g, const fv2d::CellField& q, double time, double lo,
                  double hi, double cfl);

}  // namespace sspsde::diagnostics
