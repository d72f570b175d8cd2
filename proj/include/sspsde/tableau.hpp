#pragma once

#include <string>
#include <vector>

namespace sspsde::tableau {

using Mat = std::vector<std::vector<double>>;

/// Explicit Runge-Kutta coefficients (A strictly lower triangular, weights b).
/// Construction rejects implicit or non-finite tableaus.
struct ButcherTableau {
  int s = 0;
  Mat a;                  // a[i][j], stage i row, contribution of stage j
  std::vector<double> b;

  ButcherTableau() = default;
  ButcherTableau(Mat a_in, std::vector<double> b_in);
};

/// Compact (s+1)x(s+1) form [[A,0],[b^T,0]].
struct ExtendedTableau {
  int n = 0;  // s + 1
  Mat m;
};

ExtendedTableau extend(const ButcherTableau& t);

/// Inverse of extend; exact recovery of (A, b).
ButcherTableau strip(const ExtendedTableau& e);

/// Absolute monotonicity of the compact form at a single radius r:
/// (I + r m) invertible, (I + r m)^{-1} r m >= 0 and (I + r m)^{-1} e >= 0
/// entrywise, nonnegativity tested as >= -eps. A singular matrix counts
/// as not monotonic rather than an error.
bool is_absolutely_monotonic(const ExtendedTableau& m, double r, double eps = 1e-13);

struct RadiusResult {
  double value = 0.0;
  bool capped = false;  // search hit the upper cap (1e6) while still monotonic
};

/// Largest r such that is_absolutely_monotonic holds on all of [0, r],
/// located by upward doubling then bisection to +-tol. An interior grid
/// of sample radii guards against non-interval condition sets.
RadiusResult radius_of_monotonicity(const ExtendedTableau& m, double tol = 1e-8);

/// Drift/diffusion tableau pair for additive RK; equal stage counts.
struct ArkPair {
  ButcherTableau drift;
  ButcherTableau diffusion;

  ArkPair(ButcherTableau f, ButcherTableau g);
};

/// Membership of (r, r_tilde) in the ARK region of absolute monotonicity:
/// M = I + r A + rt At invertible, M^{-1} A >= 0, M^{-1} At >= 0,
/// M^{-1} e >= 0 on the compact forms.
bool ark_point_in_region(const ArkPair& p, double r, double r_tilde, double eps = 1e-13);

enum class SdeConsistency { stratonovich, ito, other };

/// Coefficients of the limiting SDE a tableau pair converges to:
/// drift weight lambda0 = sum b, correction weight lambda1 = bt^T At e,
/// diffusion weight lambda2 = sum bt.
struct RumelinCoefficients {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  SdeConsistency consistency = SdeConsistency::other;
};

RumelinCoefficients rumelin_coefficients(const ArkPair& p);

/// Generalized additive RK coefficient blocks. Construction verifies an
/// explicit evaluation order of the s_f + s_g stages exists.
struct GarkTableaus {
  int s_f = 0;
  int s_g = 0;
  Mat a_ff, a_fg, a_gf, a_gg;
  std::vector<double> b_f, b_g;

  GarkTableaus(Mat ff, Mat fg, Mat gf, Mat gg,
               std::vector<double> bf, std::vector<double> bg);

  /// Stage evaluation order; entries 0..s_f-1 are drift stages,
  /// s_f..s_f+s_g-1 are diffusion stages.
  std::vector<int> stage_order;
};

/// Named methods: "fe", "ssp22", "ssp33", "ssp104", "midpoint",
/// "gamma(<value>)". Throws on unknown names and on gamma(0).
ButcherTableau builtin(const std::string& name);

/// Two-stage second-order family: a21 = 1/(2 gamma), b = (1-gamma, gamma).
ButcherTableau gamma_tableau(double gamma);

}  // namespace sspsde::tableau
