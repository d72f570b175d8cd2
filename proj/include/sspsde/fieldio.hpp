#pragma once

#include <string>

#include "sspsde/fv2d.hpp"

namespace sspsde::fieldio {

/// Snapshot format: one text header line "FLD2 nx ny time\n" followed by
/// nx*ny little-endian 64-bit floats, row-major. Round-trips bit-exactly.
void write_fld2(const std::string& path, const fv2d::CellField& q, double time);

struct Snapshot {
  fv2d::CellField field;
  double time = 0.0;
};

Snapshot read_fld2(const std::string& path);

/// 8-bit grayscale PGM (P5): values mapped linearly from [lo, hi] to
/// [0, 255], out-of-range cells saturated.
void write_pgm(const std::string& path, const fv2d::CellField& q, double lo, double hi);

}  // namespace sspsde::fieldio
