#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sspsde/config.hpp"
#include "sspsde/diagnostics.hpp"
#include "sspsde/fieldio.hpp"
#include "sspsde/fv2d.hpp"
#include "sspsde/increments.hpp"

using namespace sspsde;
using fv2d::CellField;
using fv2d::Grid2D;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("range violation") {
  const Grid2D g = Grid2D::unit(4, 4);
  CellField q(g, 0.5);
  auto [over, under] = diagnostics::range_violation(q, 0.0, 1.0);
  CHECK(over == 0.0);
  CHECK(under == 0.0);

  q.at(1, 1) = 1.25;
  q.at(2, 2) = -0.5;
  std::tie(over, under) = diagnostics::range_violation(q, 0.0, 1.0);
  CHECK(over == 0.25);
  CHECK(under == 0.5);

  // translating field and bounds together leaves the violations unchanged
  CellField shifted = q;
  for (double& v : shifted.v) v += 3.0;
  auto [o2, u2] = diagnostics::range_violation(shifted, 3.0, 4.0);
  CHECK(o2 == doctest::Approx(over).epsilon(1e-14));
  CHECK(u2 == doctest::Approx(under).epsilon(1e-14));
}

TEST_CASE("field extrema and mass") {
  const Grid2D g = Grid2D::unit(8, 4);
  CellField q(g, 1.0);
  q.at(0, 0) = -2.0;
  q.at(7, 3) = 5.0;
  CHECK(diagnostics::field_min(q) == -2.0);
  CHECK(diagnostics::field_max(q) == 5.0);
  // 32 cells of area 1/32: 30*1 + (-2) + 5 = 33, mass 33/32
  CHECK(diagnostics::mass(g, q) == doctest::Approx(33.0 / 32.0).epsilon(1e-14));
  CHECK(diagnostics::mass(g, CellField(g, 0.0)) == 0.0);
}

TEST_CASE("total variation seminorm") {
  const Grid2D g = Grid2D::unit(8, 8);
  CHECK(diagnostics::tv_seminorm(CellField(g, 0.3)) == 0.0);

  // a single unit-step column contributes |1| at two x-faces of each row
  CellField col(g, 0.0);
  for (int j = 0; j < g.ny; ++j) col.at(3, j) = 1.0;
  CHECK(diagnostics::tv_seminorm(col) == doctest::Approx(2.0 * g.ny).epsilon(1e-14));

  // a monotone ramp repeated in every row: periodic TV is twice the range
  CellField ramp(g, 0.0);
  const double c = 0.125;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) ramp.at(i, j) = c * i;
  const double range = c * (g.nx - 1);
  CHECK(diagnostics::tv_seminorm(ramp) == doctest::Approx(2.0 * range * g.ny).epsilon(1e-13));
}

TEST_CASE("local maximum principle check") {
  const Grid2D g = Grid2D::unit(8, 8);
  rng::RngStream r(61, 0);
  CellField q(g);
  for (double& v : q.v) v = r.next_uniform();

  // the field itself satisfies its own stencil bounds
  CHECK(diagnostics::lmp_check(q, q, fv2d::Stencil::five_point) == 0.0);

  // local neighbor averaging cannot create new extrema
  CellField avg(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      avg.at(i, j) = 0.25 * (q.atp(i + 1, j) + q.atp(i - 1, j) + q.atp(i, j + 1) +
                             q.atp(i, j - 1));
  CHECK(diagnostics::lmp_check(q, avg, fv2d::Stencil::five_point) == 0.0);

  // an injected exceedance is reported with its magnitude
  CellField bad = avg;
  double hi = q.at(4, 4);
  auto take = [&](int a, int b) { hi = std::max(hi, q.atp(a, b)); };
  take(5, 4);
  take(3, 4);
  take(4, 5);
  take(4, 3);
  bad.at(4, 4) = hi + 0.01;
  CHECK(diagnostics::lmp_check(q, bad, fv2d::Stencil::five_point) ==
        doctest::Approx(0.01).epsilon(1e-10));
}

TEST_CASE("ensemble envelope") {
  diagnostics::RunRecord a, b;
  for (int s = 0; s < 3; ++s) {
    diagnostics::StepStats st;
    st.time = 0.1 * s;
    st.min = 0.1;
    st.max = 0.9;
    a.steps.push_back(st);
    st.max = 1.1;
    st.min = 0.2;
    b.steps.push_back(st);
  }
  const auto env1 = diagnostics::ensemble_reduce({a});
  CHECK(env1.max == std::vector<double>{0.9, 0.9, 0.9});

  const auto env = diagnostics::ensemble_reduce({a, b});
  CHECK(env.max == std::vector<double>{1.1, 1.1, 1.1});
  CHECK(env.min == std::vector<double>{0.1, 0.1, 0.1});

  diagnostics::RunRecord c;
  c.steps.resize(2);
  CHECK_THROWS(diagnostics::ensemble_reduce({a, c}));
}

TEST_CASE("csv emission") {
  diagnostics::RunRecord rec;
  diagnostics::StepStats st;
  st.time = 0.25;
  st.min = -0.125;
  st.max = 1.0;
  st.mass = 0.5;
  st.cfl = 0.75;
  rec.steps.push_back(st);
  rec.steps.push_back(st);

  std::ostringstream out;
  diagnostics::write_csv(out, rec);
  const std::string text = out.str();
  CHECK(text.rfind("step,time,min,max,mass,overshoot,undershoot,cfl\n", 0) == 0);
  int lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == 3);  // header + two rows

  // identical records serialize to identical bytes
  std::ostringstream out2;
  diagnostics::write_csv(out2, rec);
  CHECK(out2.str() == text);
}

TEST_CASE("measure fills all stats") {
  const Grid2D g = Grid2D::unit(4, 4);
  CellField q(g, 0.5);
  q.at(0, 0) = 1.5;
  const auto st = diagnostics::measure(g, q, 0.3, 0.0, 1.0, 0.6);
  CHECK(st.time == 0.3);
  CHECK(st.max == 1.5);
  CHECK(st.min == 0.5);
  CHECK(st.overshoot == 0.5);
  CHECK(st.undershoot == 0.0);
  CHECK(st.cfl == 0.6);
  CHECK(st.mass == doctest::Approx(diagnostics::mass(g, q)).epsilon(1e-15));
}

TEST_CASE("fld2 snapshots round-trip bit exactly") {
  const Grid2D g = Grid2D::unit(8, 4);
  rng::RngStream r(71, 0);
  CellField q(g);
  for (double& v : q.v) v = r.next_normal() * std::pow(10.0, r.next_normal());
  q.at(0, 0) = -0.0;
  q.at(1, 0) = 5e-324;  // denormal survives the round trip

  const auto path = temp_file("sspsde_test_snapshot.fld");
  fieldio::write_fld2(path.string(), q, 0.625);
  const fieldio::Snapshot snap = fieldio::read_fld2(path.string());
  CHECK(snap.time == 0.625);
  CHECK(snap.field.nx == q.nx);
  CHECK(snap.field.ny == q.ny);
  REQUIRE(snap.field.v.size() == q.v.size());
  for (size_t k = 0; k < q.v.size(); ++k) {
    // compare representations so -0.0 and denormals must match exactly
    CHECK(std::memcmp(&snap.field.v[k], &q.v[k], sizeof(double)) == 0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("fld2 reader rejects malformed headers") {
  const auto path = temp_file("sspsde_test_bad.fld");
  {
    std::ofstream f(path);
    f << "FLD3 4 4 0.0\n";
  }
  CHECK_THROWS(fieldio::read_fld2(path.string()));
  CHECK_THROWS(fieldio::read_fld2((path.string() + ".does_not_exist")));
  std::filesystem::remove(path);
}

TEST_CASE("pgm writer emits a valid saturated image") {
  const Grid2D g = Grid2D::unit(8, 4);
  CellField q(g, 0.5);
  q.at(0, 0) = -3.0;  // below lo: saturates to 0
  q.at(1, 0) = 7.0;   // above hi: saturates to 255

  const auto path = temp_file("sspsde_test_image.pgm");
  fieldio::write_pgm(path.string(), q, 0.0, 1.0);

  std::ifstream f(path, std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  f >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == 8);
  CHECK(h == 4);
  CHECK(maxval == 255);
  f.get();  // single whitespace after the header
  std::vector<unsigned char> pix(static_cast<size_t>(w) * h);
  f.read(reinterpret_cast<char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
  CHECK(f.gcount() == static_cast<std::streamsize>(pix.size()));
  // top image row is the largest y, so (0,0) lands in the last row
  CHECK(pix[static_cast<size_t>(w) * (h - 1) + 0] == 0);
  CHECK(pix[static_cast<size_t>(w) * (h - 1) + 1] == 255);
  CHECK(pix[0] == 128);  // 0.5 maps to round(0.5 * 255)
  std::filesystem::remove(path);
}

TEST_CASE("ini parsing") {
  const std::string text =
      "# comment\n"
      "[grid]\n"
      "nx = 32\n"
      "ny=16\n"
      "\n"
      "; another comment\n"
      "[experiment]\n"
      "name = advection2d\n"
      "  ensemble = 3  \n";
  const config::KeyValues kv = config::parse_ini(text);
  CHECK(kv.at("grid.nx") == "32");
  CHECK(kv.at("grid.ny") == "16");
  CHECK(kv.at("experiment.name") == "advection2d");
  CHECK(kv.at("experiment.ensemble") == "3");
  CHECK(kv.size() == 4);
}

TEST_CASE("config from key values") {
  config::KeyValues kv = {
      {"experiment.name", "euler_salt"}, {"grid.nx", "128"},
      {"grid.ny", "128"},                {"time.nt", "1024"},
      {"time.t_end", "2.0"},             {"noise.seed", "9"},
      {"noise.sampler", "two_point"},    {"experiment.ensemble", "2"},
      {"integrator.method", "ssp33"},    {"output.dir", "results"},
      {"output.pgm", "true"},
  };
  const config::ExperimentConfig c = config::config_from_keyvalues(kv);
  CHECK(c.experiment == "euler_salt");
  CHECK(c.nx == 128);
  CHECK(c.ny == 128);
  CHECK(c.nt == 1024);
  CHECK(c.t_end == 2.0);
  CHECK(c.seed == 9);
  CHECK(c.sampler.kind == increments::Kind::two_point);
  CHECK(c.ensemble == 2);
  CHECK(c.integrator == "ssp33");
  CHECK(c.output_dir == "results");
  CHECK(c.write_pgm);

  // unknown keys fail loudly
  config::KeyValues typo = kv;
  typo["grid.nz"] = "4";
  CHECK_THROWS(config::config_from_keyvalues(typo));
}

TEST_CASE("config validation") {
  config::ExperimentConfig c;
  c.experiment = "advection2d";
  c.validate();  // defaults are coherent

  config::ExperimentConfig bad = c;
  bad.ensemble = 0;
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.nx = 2;
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.nt = 0;
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.t_end = -1.0;
  CHECK_THROWS(bad.validate());
}
