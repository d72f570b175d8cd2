#include "sspsde/fieldio.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sspsde::fieldio {

namespace {

uint64_t to_le_bits(double x) {
  uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  if constexpr (std::endian::native == std::endian::big) {
    u = __builtin_bswap64(u);
  }
  return u;
}

double from_le_bits(uint64_t u) {
  if constexpr (std::endian::native == std::endian::big) {
    u = __builtin_bswap64(u);
  }
  double x;
  std::memcpy(&x, &u, sizeof x);
  return x;
}

}  // namespace

void write_fld2(const std::string& path, const fv2d::CellField& q, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  std::ostringstream header;
  header.precision(17);
  header << "FLD2 " << q.nx << " " << q.ny << " " << time << "\n";
  out << header.str();
  std::vector<uint64_t> bits(q.v.size());
  for (size_t i = 0; i < q.v.size(); ++i) bits[i] = to_le_bits(q.v[i]);
  out.write(reinterpret_cast<const char*>(bits.data()),
            static_cast<std::streamsize>(bits.size() * sizeof(uint64_t)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Snapshot read_fld2(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing header: " + path);
  std::istringstream hs(line);
  std::string magic;
  int nx = 0, ny = 0;
  double time = 0.0;
  hs >> magic >> nx >> ny >> time;
  if (magic != "FLD2" || nx <= 0 || ny <= 0 || hs.fail())
    throw std::runtime_error("bad FLD2 header: " + path);
  Snapshot s;
  s.time = time;
  s.field.nx = nx;
  s.field.ny = ny;
  const size_t n = static_cast<size_t>(nx) * static_cast<size_t>(ny);
  std::vector<uint64_t> bits(n);
  in.read(reinterpret_cast<char*>(bits.data()),
          static_cast<std::streamsize>(n * sizeof(uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(uint64_t)))
    throw std::runtime_error("truncated FLD2 payload: " + path);
  s.field.v.resize(n);
  for (size_t i = 0; i < n; ++i) s.field.v[i] = from_le_bits(bits[i]);
  return s;
}

void write_pgm(const std::string& path, const fv2d::CellField& q, double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("pgm range must satisfy hi > lo");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P5\n" << q.nx << " " << q.ny << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(q.nx));
  // top image row = largest y so plots read the usual way up
  for (int j = q.ny - 1; j >= 0; --j) {
    for (int i = 0; i < q.nx; ++i) {
      const double t = (q.at(i, j) - lo) / (hi - lo);
      const double s = std::clamp(t, 0.0, 1.0);
      row[static_cast<size_t>(i)] = static_cast<unsigned char>(s * 255.0 + 0.5);
    }
    out.write(reinterpret_cast<const char*>(row.data()), q.nx);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace sspsde::fieldio
