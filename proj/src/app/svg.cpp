#include "qhydro/app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>
#include <vector>

#include "qhydro/error.hpp"

namespace qhydro::app::svg {

namespace {

constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 52;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

// Round multiples of 1, 2, 2.5 or 5 times a power of ten inside [lo, hi].
std::vector<double> nice_ticks(Range r) {
  const double raw = (r.hi - r.lo) / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 2.5, 5.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  const double eps = 1e-9 * (r.hi - r.lo);
  std::vector<double> out;
  for (double k = std::ceil((r.lo - eps) / step); k * step <= r.hi + eps; k += 1.0) out.push_back(k * step);
  return out;
}

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::abs(lo) > 0 ? 0.5 * std::abs(lo) : 1.0;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

// Plot frame mapping data coordinates to pixels.
class Canvas {
 public:
  Canvas(const Style& s, Range x, Range y) : s_(s), x_(x), y_(y) {
    w_ = s.width - kLeft - kRight;
    h_ = s.height - kTop - kBottom;
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * w_; }
  double py(double y) const { return kTop + h_ - (y - y_.lo) / (y_.hi - y_.lo) * h_; }
  double width() const { return w_; }
  double height() const { return h_; }

  void open(std::ostringstream& out) const {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << s_.width << "\" height=\"" << s_.height
        << "\" viewBox=\"0 0 " << s_.width << ' ' << s_.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<defs><clipPath id=\"plot\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
        << num(w_) << "\" height=\"" << num(h_) << "\"/></clipPath></defs>\n";
    if (!s_.title.empty())
      out << "<text x=\"" << num(s_.width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
          << escape(s_.title) << "</text>\n";
  }

  void axes(std::ostringstream& out) const {
    out << "<g stroke=\"black\" fill=\"none\">\n";
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(w_) << "\" height=\""
        << num(h_) << "\"/>\n";
    const auto xt = nice_ticks(x_), yt = nice_ticks(y_);
    for (double fx : xt)
      out << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << num(kTop + h_) << "\" x2=\"" << num(px(fx))
          << "\" y2=\"" << num(kTop + h_ + 5) << "\"/>\n";
    for (double fy : yt)
      out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << num(kLeft)
          << "\" y2=\"" << num(py(fy)) << "\"/>\n";
    out << "</g>\n<g fill=\"black\">\n";
    for (double fx : xt)
      out << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kTop + h_ + 18) << "\" text-anchor=\"middle\">"
          << tick(fx) << "</text>\n";
    for (double fy : yt)
      out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">"
          << tick(fy) << "</text>\n";
    out << "<text x=\"" << num(kLeft + w_ / 2) << "\" y=\"" << num(s_.height - 12.0)
        << "\" text-anchor=\"middle\">" << escape(s_.x_label) << "</text>\n";
    out << "<text transform=\"translate(16 " << num(kTop + h_ / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(s_.y_label) << "</text>\n</g>\n";
  }

 private:
  Style s_;
  Range x_, y_;
  double w_, h_;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

// Perceptually ordered dark-to-bright ramp, t in [0, 1].
std::string colour(double t) {
  static const double stops[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

void polyline(std::ostringstream& out, const Canvas& cv, std::span<const double> x, std::span<const double> y,
              const char* stroke, double width) {
  if (x.empty()) return;
  out << "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
      << "\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? " " : "") << num(cv.px(x[i])) << ',' << num(cv.py(y[i]));
  out << "\"/>\n";
}

// Indices of at most `cap` evenly strided samples out of n.
std::vector<std::size_t> strided(std::size_t n, std::size_t cap) {
  const std::size_t stride = std::max<std::size_t>(1, (n + cap - 1) / cap);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  return idx;
}

}  // namespace

std::string line_plot(std::span<const Series> series, const Style& style) {
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ConfigError("series '" + s.label + "' has mismatched x and y");
    for (double v : s.x) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
    for (double v : s.y) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
  }
  const bool empty = !(xhi >= xlo);
  const Canvas cv(style, empty ? Range{} : padded(xlo, xhi), empty ? Range{} : padded(ylo, yhi));
  std::ostringstream out;
  cv.open(out);
  for (std::size_t k = 0; k < series.size(); ++k) {
    polyline(out, cv, series[k].x, series[k].y, kPalette[k % 8], 1.5);
    if (!series[k].label.empty())
      out << "<text x=\"" << num(kLeft + cv.width() - 6) << "\" y=\"" << num(kTop + 16 + 14.0 * k)
          << "\" text-anchor=\"end\" fill=\"" << kPalette[k % 8] << "\">" << escape(series[k].label) << "</text>\n";
  }
  cv.axes(out);
  out << "</svg>\n";
  return out.str();
}

std::string plot_field(const RealField& f, const Style& style) {
  const GridSpec& g = f.grid();
  if (g.dim == 3)
    throw ConfigError("3D fields cannot be plotted directly; pass a 1D or 2D slice (fix one axis index first)");
  if (g.dim == 1) {
    Series s{style.y_label, {}, {}};
    for (std::size_t i = 0; i < f.size(); ++i) {
      s.x.push_back(g.coord(0, i));
      s.y.push_back(f[i]);
    }
    return line_plot(std::span(&s, 1), style);
  }
  const double x1 = g.origin[0] + g.length[0], y1 = g.origin[1] + g.length[1];
  const Canvas cv(style, {g.origin[0], x1}, {g.origin[1], y1});
  double lo = INFINITY, hi = -INFINITY;
  for (double v : f.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  const Range r = padded(lo, hi);
  const auto ix = strided(g.n[0], 160), iy = strided(g.n[1], 160);
  const double cw = cv.width() / static_cast<double>(ix.size()), ch = cv.height() / static_cast<double>(iy.size());
  std::ostringstream out;
  cv.open(out);
  out << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t a = 0; a < ix.size(); ++a)
    for (std::size_t b = 0; b < iy.size(); ++b) {
      const double v = f[g.ravel(ix[a], iy[b])];
      out << "<rect x=\"" << num(kLeft + a * cw) << "\" y=\"" << num(kTop + cv.height() - (b + 1) * ch)
          << "\" width=\"" << num(cw + 0.05) << "\" height=\"" << num(ch + 0.05) << "\" fill=\""
          << colour((v - r.lo) / (r.hi - r.lo)) << "\"/>\n";
    }
  out << "</g>\n";
  cv.axes(out);
  out << "</svg>\n";
  return out.str();
}

std::string trajectory_overlay(std::span<const double> times, std::span<const RealField> frames,
                               std::span<const Trajectory> paths, const Style& style) {
  if (times.size() != frames.size()) throw ConfigError("overlay needs one time per frame");
  for (const auto& f : frames)
    if (f.grid().dim != 1) throw ConfigError("space-time overlay needs 1D frames; pass a 1D slice");
  for (const auto& p : paths)
    if (p.dim != 1) throw ConfigError("space-time overlay draws 1D trajectories only");

  Range xr, tr;
  if (!frames.empty()) {
    const GridSpec& g = frames.front().grid();
    xr = {g.origin[0], g.origin[0] + g.length[0]};
    tr = padded(times.front(), times.back());
  } else if (!paths.empty()) {
    double xlo = INFINITY, xhi = -INFINITY, tlo = INFINITY, thi = -INFINITY;
    for (const auto& p : paths) {
      for (const auto& x : p.positions) xlo = std::min(xlo, x[0]), xhi = std::max(xhi, x[0]);
      tlo = std::min(tlo, p.times.front());
      thi = std::max(thi, p.times.back());
    }
    xr = padded(xlo, xhi);
    tr = padded(tlo, thi);
  }
  const Canvas cv(style, xr, tr);
  std::ostringstream out;
  cv.open(out);
  if (!frames.empty()) {
    double hi = 0.0;
    for (const auto& f : frames)
      for (double v : f.values()) hi = std::max(hi, v);
    if (hi == 0.0) hi = 1.0;
    const GridSpec& g = frames.front().grid();
    const auto ix = strided(g.n[0], 200), it = strided(frames.size(), 200);
    const double cw = cv.width() / static_cast<double>(ix.size());
    out << "<g shape-rendering=\"crispEdges\">\n";
    for (std::size_t k = 0; k < it.size(); ++k) {
      const double t0 = times[it[k]];
      const double t1 = k + 1 < it.size() ? times[it[k + 1]] : tr.hi;
      const double y0 = cv.py(t1), y1 = cv.py(t0);
      for (std::size_t a = 0; a < ix.size(); ++a)
        out << "<rect x=\"" << num(kLeft + a * cw) << "\" y=\"" << num(y0) << "\" width=\"" << num(cw + 0.05)
            << "\" height=\"" << num(y1 - y0 + 0.05) << "\" fill=\"" << colour(frames[it[k]][ix[a]] / hi)
            << "\"/>\n";
    }
    out << "</g>\n";
  }
  for (const auto& p : paths) {
    std::vector<double> x;
    for (const auto& q : p.positions) x.push_back(q[0]);
    polyline(out, cv, x, p.times, "white", 1.2);
  }
  cv.axes(out);
  out << "</svg>\n";
  return out.str();
}

std::string normalize_numbers(const std::string& svg, int digits) {
  static const std::regex number(R"(-?\d+\.\d+)");
  std::string out;
  auto it = std::sregex_iterator(svg.begin(), svg.end(), number);
  std::size_t last = 0;
  for (; it != std::sregex_iterator(); ++it) {
    out.append(svg, last, static_cast<std::size_t>(it->position()) - last);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, std::stod(it->str()));
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
    out += s;
    last = static_cast<std::size_t>(it->position() + it->length());
  }
  out.append(svg, last, std::string::npos);
  return out;
}

}  // namespace qhydro::app::svg
