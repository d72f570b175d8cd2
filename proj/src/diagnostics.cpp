#include "sspsde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sspsde::diagnostics {

std::pair<double, double> range_violation(const fv2d::CellField& q, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("range_violation: lo > hi");
  const double mx = field_max(q);
  const double mn = field_min(q);
  return {std::max(0.0, mx - hi), std::max(0.0, lo - mn)};
}

double field_min(const fv2d::CellField& q) {
  double m = q.v.front();
  for (double x : q.v) m = std::min(m, x);
  return m;
}

double field_max(const fv2d::CellField& q) {
  double m = q.v.front();
  for (double x : q.v) m = std::max(m, x);
  return m;
}

double mass(const fv2d::Grid2D& g, const fv2d::CellField& q) {
  double s = 0.0;
  for (double x : q.v) s += x;
  return s * g.dx * g.dy;
}

double tv_seminorm(const fv2d::CellField& q) {
  double tv = 0.0;
  for (int j = 0; j < q.ny; ++j)
    for (int i = 0; i < q.nx; ++i)
      tv += std::abs(q.atp(i + 1, j) - q.at(i, j)) + std::abs(q.atp(i, j + 1) - q.at(i, j));
  return tv;
}

double lmp_check(const fv2d::CellField& q_old, const fv2d::CellField& q_new,
                 fv2d::Stencil stencil) {
  if (q_old.nx != q_new.nx || q_old.ny != q_new.ny)
    throw std::invalid_argument("lmp_check: field shapes differ");
  double worst = 0.0;
  for (int j = 0; j < q_old.ny; ++j) {
    for (int i = 0; i < q_old.nx; ++i) {
      double lo = q_old.at(i, j);
      double hi = lo;
      auto take = [&](int a, int b) {
        const double w = q_old.atp(a, b);
        lo = std::min(lo, w);
        hi = std::max(hi, w);
      };
      take(i + 1, j);
      take(i - 1, j);
      take(i, j + 1);
      take(i, j - 1);
      if (stencil == fv2d::Stencil::thirteen_point) {
        take(i + 2, j);
        take(i - 2, j);
        take(i, j + 2);
        take(i, j - 2);
        take(i + 1, j + 1);
        take(i + 1, j - 1);
        take(i - 1, j + 1);
        take(i - 1, j - 1);
      }
      const double v = q_new.at(i, j);
      worst = std::max({worst, v - hi, lo - v});
    }
  }
  return worst;
}

EnsembleEnvelope ensemble_reduce(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("ensemble_reduce: no records");
  const size_t n = records.front().steps.size();
  for (const auto& r : records)
    if (r.steps.size() != n)
      throw std::invalid_argument("ensemble_reduce: mismatched record lengths");
  EnsembleEnvelope env;
  env.min.assign(n, 0.0);
  env.max.assign(n, 0.0);
  for (size_t s = 0; s < n; ++s) {
    double lo = records.front().steps[s].min;
    double hi = records.front().steps[s].max;
    for (const auto& r : records) {
      lo = std::min(lo, r.steps[s].min);
      hi = std::max(hi, r.steps[s].max);
    }
    env.min[s] = lo;
    env.max[s] = hi;
  }
  return env;
}

void write_csv(std::ostream& out, const RunRecord& record) {
  out << "step,time,min,max,mass,overshoot,undershoot,cfl\n";
  out.precision(17);
  for (size_t s = 0; s < record.steps.size(); ++s) {
    const StepStats& r = record.steps[s];
    out << s << ',' << r.time << ',' << r.min << ',' << r.max << ',' << r.mass << ','
        << r.overshoot << ',' << r.undershoot << ',' << r.cfl << '\n';
  }
}

StepStats measure(const fv2d::Grid2D& g, const fv2d::CellField& q, double time, double lo,
                  double hi, double cfl) {
  StepStats s;
  s.time = time;
  s.min = field_min(q);
  s.max = field_max(q);
  s.mass = mass(g, q);
  auto [over, under] = range_violation(q, lo, hi);
  s.overshoot = over;
  s.undershoot = under;
  s.cfl = cfl;
  return s;
}

}  // namespace sspsde::diagnostics
