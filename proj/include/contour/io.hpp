#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evolution.hpp"

namespace contour::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 17 significant digits; non-finite values become null (JSON) or nan/inf (CSV).
inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string json_num(double x) { return std::isfinite(x) ? num(x) : "null"; }

inline std::string json_array(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += json_num(v[i]);
  }
  return s + "]";
}

inline const std::vector<std::string>& trajectory_keys() {
  static const std::vector<std::string> k{"time", "r", "R", "h", "H", "diagnostics"};
  return k;
}

inline const std::vector<std::string>& diagnostics_keys() {
  static const std::vector<std::string> k{"annulus_area",        "m0",
                                          "M0",                  "c_star",
                                          "c",                   "pressure_residual",
                                          "pressure_iterations", "density_iterations",
                                          "density_contraction", "h_modes",
                                          "H_modes"};
  return k;
}

// One trajectory line, without the trailing newline. Keys are written in a fixed order.
inline std::string state_json(const SimState& s) {
  const DiagRecord& d = s.diag;
  std::string o = "{\"time\":" + json_num(s.time) + ",\"r\":" + json_num(s.pair.r) +
                  ",\"R\":" + json_num(s.pair.R) + ",\"h\":" + json_array(s.pair.h.samples()) +
                  ",\"H\":" + json_array(s.pair.H.samples()) + ",\"diagnostics\":{";
  o += "\"annulus_area\":" + json_num(d.annulus_area);
  o += ",\"m0\":" + json_num(d.m0) + ",\"M0\":" + json_num(d.M0);
  o += ",\"c_star\":" + json_num(d.c_star) + ",\"c\":" + json_num(d.c);
  o += ",\"pressure_residual\":" + json_num(d.pressure_residual);
  o += ",\"pressure_iterations\":" + std::to_string(d.pressure_iterations);
  o += ",\"density_iterations\":" + std::to_string(d.density_iterations);
  o += ",\"density_contraction\":" + json_num(d.density_contraction);
  o += ",\"h_modes\":" + json_array(d.h_modes) + ",\"H_modes\":" + json_array(d.H_modes);
  return o + "}}";
}

inline std::string diagnostics_header() {
  std::string s = "time,annulus_area,m0,M0,c_star,c";
  for (int k = 1; k <= kDiagModes; ++k) s += ",h_amp_" + std::to_string(k);
  for (int k = 1; k <= kDiagModes; ++k) s += ",H_amp_" + std::to_string(k);
  return s;
}

inline std::string diagnostics_row(const SimState& s) {
  const DiagRecord& d = s.diag;
  std::string o = num(s.time) + ',' + num(d.annulus_area) + ',' + num(d.m0) + ',' + num(d.M0) + ',' +
                  num(d.c_star) + ',' + num(d.c);
  for (int k = 0; k < kDiagModes; ++k) o += ',' + num(k < int(d.h_modes.size()) ? d.h_modes[k] : 0.0);
  for (int k = 0; k < kDiagModes; ++k) o += ',' + num(k < int(d.H_modes.size()) ? d.H_modes[k] : 0.0);
  return o;
}

inline std::string dispersion_header() {
  return "k,inner_re,inner_im,outer_re,outer_im,decoupled_inner,decoupled_outer,unstable";
}

struct DispersionRow {
  int k = 0;
  cplx inner, outer;
  double decoupled_inner = 0.0, decoupled_outer = 0.0;
  bool unstable = false;
};

// Eigenvalues of M(k) plus the decoupled rates -A c_* k / r and c~_* k / R.
inline DispersionRow dispersion_row(int k, double A, double c_star, double r, double R) {
  const Mat22 M = dispersion_matrix(k, A, c_star, r, R);
  const auto e = eigenvalues(M);
  DispersionRow row;
  row.k = k;
  row.inner = inner_eigenvalue(M);
  row.outer = (row.inner == e[0]) ? e[1] : e[0];
  // + 0.0 turns -0 into 0
  row.decoupled_inner = -A * c_star * k / r + 0.0;
  row.decoupled_outer = (r / R) * c_star * k / R + 0.0;
  row.unstable = row.inner.real() > 0.0 || row.outer.real() > 0.0;
  return row;
}

inline std::string dispersion_csv_row(const DispersionRow& d) {
  return std::to_string(d.k) + ',' + num(d.inner.real() + 0.0) + ',' + num(d.inner.imag() + 0.0) + ',' +
         num(d.outer.real() + 0.0) + ',' + num(d.outer.imag() + 0.0) + ',' + num(d.decoupled_inner) + ',' +
         num(d.decoupled_outer) + ',' + (d.unstable ? "1" : "0");
}

struct Frame {
  double time = 0.0, r = 1.0, R = 2.0;
  std::vector<double> h, H;
};

inline std::vector<Frame> read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory " + path);
  std::vector<Frame> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Frame f;
      f.time = j.at("time").get<double>();
      f.r = j.at("r").get<double>();
      f.R = j.at("R").get<double>();
      f.h = j.at("h").get<std::vector<double>>();
      f.H = j.at("H").get<std::vector<double>>();
      if (f.h.size() != f.H.size() || f.h.size() < 8 || f.h.size() % 2) throw IoError("bad sample count");
      out.push_back(std::move(f));
    } catch (const std::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw IoError("trajectory " + path + " has no states");
  return out;
}

namespace detail {

inline std::string polyline(const std::vector<double>& dev, double radius) {
  const std::size_t m = std::max<std::size_t>(256, dev.size());
  const auto v = resample(PeriodicField(dev), m);
  std::string s;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = PeriodicField::node(m, j), rr = radius * (1.0 + v[j]);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", j ? " " : "", rr * std::cos(t), rr * std::sin(t));
    s += buf;
  }
  return s;
}

}  // namespace detail

// Both interfaces as closed polylines, reference circles dashed; y points up.
inline std::string render_svg(const Frame& f) {
  double ext = f.R;
  for (double x : f.H) ext = std::max(ext, f.R * (1.0 + x));
  ext *= 1.1;
  const double w = 0.004 * ext;
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"" << -ext << ' ' << -ext
    << ' ' << 2 * ext << ' ' << 2 * ext << "\">\n"
    << "<title>t = " << num(f.time) << "</title>\n"
    << "<rect x=\"" << -ext << "\" y=\"" << -ext << "\" width=\"" << 2 * ext << "\" height=\"" << 2 * ext
    << "\" fill=\"white\"/>\n"
    << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"" << w << "\">\n"
    << "<circle cx=\"0\" cy=\"0\" r=\"" << f.r << "\" stroke=\"gray\" stroke-dasharray=\"" << 4 * w << ' '
    << 3 * w << "\"/>\n"
    << "<circle cx=\"0\" cy=\"0\" r=\"" << f.R << "\" stroke=\"gray\" stroke-dasharray=\"" << 4 * w << ' '
    << 3 * w << "\"/>\n"
    << "<polygon points=\"" << detail::polyline(f.h, f.r) << "\" stroke=\"firebrick\"/>\n"
    << "<polygon points=\"" << detail::polyline(f.H, f.R) << "\" stroke=\"steelblue\"/>\n"
    << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace contour::io
