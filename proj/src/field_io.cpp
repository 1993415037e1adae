#include "qhydro/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace qhydro::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

namespace {

constexpr const char* kAxisNames[3] = {"x", "y", "z"};

double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("CSV line " + std::to_string(line) + ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV input is empty");
  for (auto h : split(line)) {
    std::string s(h);
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\r'; }), s.end());
    t.header.push_back(s);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw ConfigError("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                        " columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(parse_double(c, lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw ConfigError("CSV input has no data rows");
  return t;
}

GridSpec infer_grid(const Table& t, int dim) {
  for (int a = 0; a < dim; ++a) {
    if (t.header[a] != kAxisNames[a])
      throw ConfigError(std::string("CSV column ") + std::to_string(a) + " must be '" + kAxisNames[a] + "'");
  }
  GridSpec g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) {
    std::vector<double> c;
    c.reserve(t.rows.size());
    for (const auto& r : t.rows) c.push_back(r[a]);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.size() < 2) throw ConfigError("CSV coordinate axis has a single value");
    const double step = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (std::abs(c[i] - c[i - 1] - step) > 1e-9 * std::max(1.0, std::abs(step)))
        throw ConfigError("CSV coordinates are not uniformly spaced");
    }
    g.n[a] = c.size();
    g.origin[a] = c.front();
    g.length[a] = step * static_cast<double>(c.size());
  }
  g.validate();
  if (g.size() != t.rows.size()) throw ConfigError("CSV rows do not form a full tensor-product grid");
  return g;
}

std::size_t flat_index(const GridSpec& g, const std::vector<double>& row) {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const double s = (row[a] - g.origin[a]) / g.dx(a);
    const auto i = static_cast<long long>(std::llround(s));
    if (i < 0 || static_cast<std::size_t>(i) >= g.n[a] || std::abs(s - static_cast<double>(i)) > 1e-6)
      throw ConfigError("CSV coordinate does not lie on the inferred grid");
    idx[a] = static_cast<std::size_t>(i);
  }
  return g.ravel(idx[0], idx[1], idx[2]);
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file '" + path + "'");
  return in;
}

}  // namespace

void write_columns(std::ostream& out, const GridSpec& grid, std::span<const Column> columns, const double* time,
                   bool header) {
  for (const auto& c : columns) {
    if (c.values.size() != grid.size()) throw ConfigError("CSV column '" + c.name + "' does not match grid");
  }
  if (header) {
    bool first = true;
    auto sep = [&] {
      if (!first) out << ',';
      first = false;
    };
    if (time) {
      sep();
      out << 't';
    }
    for (int a = 0; a < grid.dim; ++a) {
      sep();
      out << kAxisNames[a];
    }
    for (const auto& c : columns) {
      sep();
      out << c.name;
    }
    out << '\n';
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.point(i);
    bool first = true;
    auto sep = [&] {
      if (!first) out << ',';
      first = false;
    };
    if (time) {
      sep();
      out << format_double(*time);
    }
    for (int a = 0; a < grid.dim; ++a) {
      sep();
      out << format_double(p[a]);
    }
    for (const auto& c : columns) {
      sep();
      out << format_double(c.values[i]);
    }
    out << '\n';
  }
}

void write_csv(std::ostream& out, const RealField& f, const std::string& name) {
  const Column cols[] = {{name, f.values()}};
  write_columns(out, f.grid(), cols);
}

void write_csv(std::ostream& out, const ComplexField& f) {
  std::vector<double> re(f.size()), im(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  const Column cols[] = {{"real", re}, {"imag", im}};
  write_columns(out, f.grid(), cols);
}

ComplexField read_complex_csv(std::istream& in) {
  const Table t = read_table(in);
  const int dim = static_cast<int>(t.header.size()) - 2;
  if (dim < 1 || dim > 3) throw ConfigError("complex CSV needs 1-3 coordinate columns plus real, imag");
  if (t.header[dim] != "real" || t.header[dim + 1] != "imag")
    throw ConfigError("complex CSV value columns must be 'real,imag'");
  const GridSpec g = infer_grid(t, dim);
  std::vector<cplx> v(g.size());
  for (const auto& r : t.rows) v[flat_index(g, r)] = cplx(r[dim], r[dim + 1]);
  return {g, std::move(v)};
}

RealField read_real_csv(std::istream& in) {
  const Table t = read_table(in);
  const int dim = static_cast<int>(t.header.size()) - 1;
  if (dim < 1 || dim > 3) throw ConfigError("real CSV needs 1-3 coordinate columns plus one value column");
  const GridSpec g = infer_grid(t, dim);
  std::vector<double> v(g.size());
  for (const auto& r : t.rows) v[flat_index(g, r)] = r[dim];
  return {g, std::move(v)};
}

ComplexField read_complex_csv_file(const std::string& path) {
  auto in = open(path);
  return read_complex_csv(in);
}

RealField read_real_csv_file(const std::string& path) {
  auto in = open(path);
  return read_real_csv(in);
}

}  // namespace qhydro::io
