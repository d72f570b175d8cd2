#include "sspsde/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace sspsde::tableau {

namespace {

void check_matrix(const Mat& a, int rows, int cols, const char* what) {
  if (static_cast<int>(a.size()) != rows)
    throw std::invalid_argument(std::string(what) + ": wrong row count");
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != cols)
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    for (double v : row)
      if (!std::isfinite(v))
        throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

// Gauss-Jordan inverse with partial pivoting; nullopt when the pivot
// falls under a conditioning threshold relative to the matrix scale.
std::optional<Mat> invert(Mat m) {
  const int n = static_cast<int>(m.size());
  double scale = 0.0;
  for (const auto& row : m)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double pivot_tol = std::max(scale, 1.0) * 1e-13;

  Mat inv(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) inv[i][i] = 1.0;

  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < pivot_tol) return std::nullopt;
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    const double d = m[col][col];
    for (int c = 0; c < n; ++c) {
      m[col][c] /= d;
      inv[col][c] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        m[r][c] -= f * m[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

Mat matmul(const Mat& a, const Mat& b) {
  const int n = static_cast<int>(a.size());
  const int k = static_cast<int>(b.size());
  const int m = static_cast<int>(b[0].size());
  Mat out(n, std::vector<double>(m, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      const double aij = a[i][j];
      if (aij == 0.0) continue;
      for (int c = 0; c < m; ++c) out[i][c] += aij * b[j][c];
    }
  return out;
}

std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
  const int n = static_cast<int>(a.size());
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < static_cast<int>(x.size()); ++j) out[i] += a[i][j] * x[j];
  return out;
}

bool entrywise_nonneg(const Mat& m, double eps) {
  for (const auto& row : m)
    for (double v : row)
      if (v < -eps) return false;
  return true;
}

}  // namespace

ButcherTableau::ButcherTableau(Mat a_in, std::vector<double> b_in)
    : s(static_cast<int>(b_in.size())), a(std::move(a_in)), b(std::move(b_in)) {
  check_matrix(a, s, s, "ButcherTableau.a");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("ButcherTableau.b: non-finite entry");
  for (int i = 0; i < s; ++i)
    for (int j = i; j < s; ++j)
      if (a[i][j] != 0.0)
        throw std::invalid_argument("ButcherTableau: implicit tableau (a not strictly lower triangular)");
}

ExtendedTableau extend(const ButcherTableau& t) {
  ExtendedTableau e;
  e.n = t.s + 1;
  e.m.assign(e.n, std::vector<double>(e.n, 0.0));
  for (int i = 0; i < t.s; ++i)
    for (int j = 0; j < t.s; ++j) e.m[i][j] = t.a[i][j];
  for (int j = 0; j < t.s; ++j) e.m[t.s][j] = t.b[j];
  return e;
}

ButcherTableau strip(const ExtendedTableau& e) {
  const int s = e.n - 1;
  Mat a(s, std::vector<double>(s, 0.0));
  std::vector<double> b(s, 0.0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) a[i][j] = e.m[i][j];
  for (int j = 0; j < s; ++j) b[j] = e.m[s][j];
  return ButcherTableau(std::move(a), std::move(b));
}

bool is_absolutely_monotonic(const ExtendedTableau& m, double r, double eps) {
  if (r < 0.0) throw std::invalid_argument("is_absolutely_monotonic: r must be nonnegative");
  const int n = m.n;
  Mat irm(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) irm[i][j] = (i == j ? 1.0 : 0.0) + r * m.m[i][j];
  auto inv = invert(irm);
  if (!inv) return false;

  Mat rm(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rm[i][j] = r * m.m[i][j];
  if (!entrywise_nonneg(matmul(*inv, rm), eps)) return false;

  std::vector<double> e(n, 1.0);
  for (double v : matvec(*inv, e))
    if (v < -eps) return false;
  return true;
}

namespace {

constexpr double kRadiusCap = 1e6;

// The Kraaijevanger conditions must hold for every s in [0, r]; sample an
// interior grid in addition to the endpoint.
bool monotonic_on_interval(const ExtendedTableau& m, double r) {
  if (!is_absolutely_monotonic(m, r)) return false;
  constexpr int kGrid = 16;
  for (int i = 1; i <= kGrid; ++i) {
    const double ri = r * static_cast<double>(i) / (kGrid + 1);
    if (!is_absolutely_monotonic(m, ri)) return false;
  }
  return true;
}

}  // namespace

RadiusResult radius_of_monotonicity(const ExtendedTableau& m, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("radius_of_monotonicity: tol must be positive");
  RadiusResult res;
  double lo = 0.0;  // r = 0 is always monotonic
  double hi = 1.0;
  if (monotonic_on_interval(m, hi)) {
    while (hi < kRadiusCap && monotonic_on_interval(m, hi * 2.0)) {
      lo = hi;
      hi *= 2.0;
    }
    if (hi >= kRadiusCap) {
      res.value = kRadiusCap;
      res.capped = true;
      return res;
    }
    lo = std::max(lo, hi / 2.0);
    hi = std::min(hi * 2.0, kRadiusCap);
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (monotonic_on_interval(m, mid))
      lo = mid;
    else
      hi = mid;
  }
  res.value = (lo < tol) ? 0.0 : lo;
  return res;
}

ArkPair::ArkPair(ButcherTableau f, ButcherTableau g)
    : drift(std::move(f)), diffusion(std::move(g)) {
  if (drift.s != diffusion.s)
    throw std::invalid_argument("ArkPair: stage counts differ");
}

bool ark_point_in_region(const ArkPair& p, double r, double r_tilde, double eps) {
  if (r < 0.0 || r_tilde < 0.0)
    throw std::invalid_argument("ark_point_in_region: radii must be nonnegative");
  const ExtendedTableau ef = extend(p.drift);
  const ExtendedTableau eg = extend(p.diffusion);
  const int n = ef.n;
  Mat m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m[i][j] = (i == j ? 1.0 : 0.0) + r * ef.m[i][j] + r_tilde * eg.m[i][j];
  auto inv = invert(m);
  if (!inv) return false;
  if (!entrywise_nonneg(matmul(*inv, ef.m), eps)) return false;
  if (!entrywise_nonneg(matmul(*inv, eg.m), eps)) return false;
  std::vector<double> e(n, 1.0);
  for (double v : matvec(*inv, e))
    if (v < -eps) return false;
  return true;
}

RumelinCoefficients rumelin_coefficients(const ArkPair& p) {
  RumelinCoefficients c;
  for (double v : p.drift.b) c.lambda0 += v;
  for (double v : p.diffusion.b) c.lambda2 += v;
  for (int j = 0; j < p.diffusion.s; ++j) {
    double row = 0.0;
    for (int k = 0; k < p.diffusion.s; ++k) row += p.diffusion.a[j][k];
    c.lambda1 += p.diffusion.b[j] * row;
  }
  constexpr double eps = 1e-12;
  const bool unit = std::abs(c.lambda0 - 1.0) <= eps && std::abs(c.lambda2 - 1.0) <= eps;
  if (unit && std::abs(c.lambda1 - 0.5) <= eps)
    c.consistency = SdeConsistency::stratonovich;
  else if (unit && std::abs(c.lambda1) <= eps)
    c.consistency = SdeConsistency::ito;
  else
    c.consistency = SdeConsistency::other;
  return c;
}

GarkTableaus::GarkTableaus(Mat ff, Mat fg, Mat gf, Mat gg,
                           std::vector<double> bf, std::vector<double> bg)
    : s_f(static_cast<int>(bf.size())),
      s_g(static_cast<int>(bg.size())),
      a_ff(std::move(ff)),
      a_fg(std::move(fg)),
      a_gf(std::move(gf)),
      a_gg(std::move(gg)),
      b_f(std::move(bf)),
      b_g(std::move(bg)) {
  check_matrix(a_ff, s_f, s_f, "GarkTableaus.a_ff");
  check_matrix(a_fg, s_f, s_g, "GarkTableaus.a_fg");
  check_matrix(a_gf, s_g, s_f, "GarkTableaus.a_gf");
  check_matrix(a_gg, s_g, s_g, "GarkTableaus.a_gg");

  // Kahn's algorithm over the combined stage dependency graph; a stage may
  // be evaluated once every stage it draws a nonzero coefficient from is done.
  const int n = s_f + s_g;
  auto dep = [&](int i, int j) -> double {
    const bool fi = i < s_f, fj = j < s_f;
    if (fi && fj) return a_ff[i][j];
    if (fi && !fj) return a_fg[i][j - s_f];
    if (!fi && fj) return a_gf[i - s_f][j];
    return a_gg[i - s_f][j - s_f];
  };
  std::vector<bool> done(n, false);
  stage_order.clear();
  for (int pass = 0; pass < n; ++pass) {
    int picked = -1;
    for (int i = 0; i < n && picked < 0; ++i) {
      if (done[i]) continue;
      bool ready = true;
      for (int j = 0; j < n; ++j)
        if (!done[j] && j != i && dep(i, j) != 0.0) ready = false;
      if (dep(i, i) != 0.0) ready = false;
      if (ready) picked = i;
    }
    if (picked < 0)
      throw std::invalid_argument("GarkTableaus: no explicit stage ordering exists");
    done[picked] = true;
    stage_order.push_back(picked);
  }
}

ButcherTableau gamma_tableau(double gamma) {
  if (gamma == 0.0) throw std::invalid_argument("gamma tableau: gamma must be nonzero");
  Mat a{{0.0, 0.0}, {1.0 / (2.0 * gamma), 0.0}};
  return ButcherTableau(std::move(a), {1.0 - gamma, gamma});
}

ButcherTableau builtin(const std::string& name) {
  if (name == "fe" || name == "euler" || name == "em")
    return ButcherTableau({{0.0}}, {1.0});
  if (name == "ssp22")
    return ButcherTableau({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
  if (name == "midpoint")
    return ButcherTableau({{0.0, 0.0}, {0.5, 0.0}}, {0.0, 1.0});
  if (name == "ssp33")
    return ButcherTableau({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.25, 0.25, 0.0}},
                          {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0});
  if (name == "ssp104") {
    // Shu-Osher form of the 10-stage fourth-order method converted to
    // Butcher form: five leading Euler stages of size 1/6, a 3/5-2/5
    // combination, four more Euler stages, b_i = 1/10 throughout.
    const int s = 10;
    Mat a(s, std::vector<double>(s, 0.0));
    for (int i = 1; i <= 4; ++i)
      for (int j = 0; j < i; ++j) a[i][j] = 1.0 / 6.0;
    for (int j = 0; j < 5; ++j) a[5][j] = 1.0 / 15.0;
    for (int i = 6; i < s; ++i) {
      for (int j = 0; j < 5; ++j) a[i][j] = 1.0 / 15.0;
      for (int j = 5; j < i; ++j) a[i][j] = 1.0 / 6.0;
    }
    return ButcherTableau(std::move(a), std::vector<double>(s, 0.1));
  }
  if (name.rfind("gamma(", 0) == 0 && name.back() == ')') {
    const double g = std::stod(name.substr(6, name.size() - 7));
    return gamma_tableau(g);
  }
  throw std::invalid_argument("builtin: unknown method '" + name + "'");
}

}  // namespace sspsde::tableau
