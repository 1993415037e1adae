#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qhydro/grid.hpp"

namespace qhydro::io {

// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

struct Column {
  std::string name;
  std::span<const double> values;
};

// One row per grid point: coordinate columns (x, y, z as needed) followed by
// the given columns. An optional leading time column is written when
// `time` is non-null.
void write_columns(std::ostream& out, const GridSpec& grid, std::span<const Column> columns,
                   const double* time = nullptr, bool header = true);

void write_csv(std::ostream& out, const RealField& f, const std::string& name = "value");
// Columns: coordinates, real, imag.
void write_csv(std::ostream& out, const ComplexField& f);

// Reads the format written by write_csv. The grid is recovered from the
// coordinate columns, which must form a uniform tensor-product lattice.
ComplexField read_complex_csv(std::istream& in);
RealField read_real_csv(std::istream& in);

ComplexField read_complex_csv_file(const std::string& path);
RealField read_real_csv_file(const std::string& path);

}  // namespace qhydro::io
