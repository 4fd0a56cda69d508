#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "evolution.hpp"

namespace contour {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialMode {
  bool outer = false;  // target H instead of h
  int k = 1;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct SimConfig {
  double mu = 1.0, nu = 2.0;
  std::string law = "linear";  // constant | linear | table
  double G0 = 1.0, pM = 1.0;
  std::vector<double> table_p, table_G;
  double r0 = 1.0, R0 = 1.5;
  std::vector<InitialMode> modes;
  int N = 64, N_rho = 128, N_omega = 64, N_w = 128, N_xi = 256;
  double dt = 0.01, T_end = 0.1;
  Integrator integrator = Integrator::etd1;
  double pressure_tol = 1e-10, density_tol = 1e-10;
  int pressure_max_iter = 200, density_max_iter = 100;
  std::string out_dir = "out";
  int output_every = 1;
  int k_max = 16;  // dispersion table size

  GrowthLaw growth() const {
    if (law == "constant") return GrowthLaw::constant(G0);
    if (law == "linear") return GrowthLaw::linear(G0, pM);
    return GrowthLaw::tabulated(table_p, table_G);
  }

  ModelParams model() const {
    ModelParams m;
    m.mu = mu;
    m.nu = nu;
    m.law = growth();
    m.pressure.n_rho = N_rho;
    m.pressure.n_omega = N_omega;
    m.pressure.tol = pressure_tol;
    m.pressure.max_iter = pressure_max_iter;
    m.quad = {N_w, N_xi};
    m.densities.tol = density_tol;
    m.densities.max_iter = density_max_iter;
    m.integrator = integrator;
    return m;
  }

  // h = sum a cos(k theta + phase) over the h modes, likewise H.
  InterfacePair initial_pair() const {
    auto p = InterfacePair::concentric(r0, R0, std::size_t(N));
    for (const auto& md : modes) {
      auto f = PeriodicField::from_function(std::size_t(N),
                                            [&](double t) { return md.amplitude * std::cos(md.k * t + md.phase); });
      (md.outer ? p.H : p.h) += f;
    }
    return p;
  }

  RunOptions run_options() const { return {dt, T_end, output_every}; }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  std::vector<double> v;
  std::string tok;
  while (is >> tok) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size()) throw ConfigError(key + ": '" + tok + "' is not a number");
    v.push_back(x);
  }
  return v;
}

inline bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

class Reader {
 public:
  explicit Reader(const boost::property_tree::ptree& t) : tree_(t) {}

  template <class T>
  void get(const std::string& path, T& out) {
    seen_.insert(path);
    const auto v = tree_.get_optional<std::string>(path);
    if (!v) return;
    std::istringstream is(*v);
    T x{};
    if (!(is >> x) || !(is >> std::ws).eof()) throw ConfigError(path + ": cannot parse '" + *v + "'");
    out = x;
  }

  void get_string(const std::string& path, std::string& out) {
    seen_.insert(path);
    if (const auto v = tree_.get_optional<std::string>(path)) out = *v;
  }

  // Every key under one section, in file order.
  std::vector<std::pair<std::string, std::string>> section(const std::string& name) {
    std::vector<std::pair<std::string, std::string>> out;
    if (const auto s = tree_.get_child_optional(name))
      for (const auto& [k, v] : *s) {
        seen_.insert(name + "." + k);
        out.emplace_back(k, v.data());
      }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [sec, body] : tree_) {
      if (body.empty()) throw ConfigError("key '" + sec + "' must live in a section");
      for (const auto& [k, v] : body)
        if (!seen_.count(sec + "." + k)) throw ConfigError("unknown key " + sec + "." + k);
    }
  }

 private:
  const boost::property_tree::ptree& tree_;
  std::set<std::string> seen_;
};

}  // namespace detail

// Throws ConfigError naming the first violated invariant.
inline void validate_config(const SimConfig& c) {
  if (!(c.mu > 0.0 && c.nu > 0.0)) throw ConfigError("model: need mu > 0 and nu > 0");
  if (!(c.r0 > 0.0 && c.R0 > c.r0)) throw ConfigError("model: need 0 < r0 < R0");
  if (c.law != "constant" && c.law != "linear" && c.law != "table")
    throw ConfigError("growth: law must be constant, linear or table");
  try {
    (void)c.growth();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("growth: ") + e.what());
  }
  const std::pair<const char*, int> res[] = {
      {"N", c.N}, {"N_rho", c.N_rho}, {"N_omega", c.N_omega}, {"N_w", c.N_w}, {"N_xi", c.N_xi}};
  for (const auto& [name, n] : res)
    if (!(detail::power_of_two(n) && n >= 64))
      throw ConfigError(std::string("resolution: ") + name + " must be a power of two >= 64");
  if (!(c.dt > 0.0 && c.dt < c.T_end)) throw ConfigError("time: need 0 < dt < T_end");
  if (!(c.pressure_tol > 0.0 && c.density_tol > 0.0)) throw ConfigError("tolerances: need positive tolerances");
  if (c.pressure_max_iter < 1 || c.density_max_iter < 1) throw ConfigError("tolerances: need max_iter >= 1");
  if (c.output_every < 1) throw ConfigError("output: every must be >= 1");
  if (c.k_max < 1) throw ConfigError("dispersion: k_max must be >= 1");
  for (const auto& m : c.modes) {
    if (m.k < 1 || m.k >= c.N / 2) throw ConfigError("modes: k must satisfy 1 <= k < N/2");
    if (!std::isfinite(m.amplitude) || !std::isfinite(m.phase)) throw ConfigError("modes: non-finite value");
  }
  try {
    c.initial_pair().validate();
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("initial data: ") + e.what());
  }
}

inline SimConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  SimConfig c;
  detail::Reader rd(tree);
  rd.get("model.mu", c.mu);
  rd.get("model.nu", c.nu);
  rd.get("model.r0", c.r0);
  rd.get("model.R0", c.R0);
  rd.get_string("growth.law", c.law);
  rd.get("growth.G0", c.G0);
  rd.get("growth.pM", c.pM);
  std::string tp, tg;
  rd.get_string("growth.p", tp);
  rd.get_string("growth.G", tg);
  c.table_p = detail::parse_list("growth.p", tp);
  c.table_G = detail::parse_list("growth.G", tg);
  // each value is "<h|H> k amplitude [phase]"; key names are free
  for (const auto& [key, val] : rd.section("modes")) {
    std::istringstream is(val);
    std::string target;
    InitialMode m;
    if (!(is >> target >> m.k >> m.amplitude)) throw ConfigError("modes." + key + ": expected '<h|H> k amplitude [phase]'");
    if (!(is >> std::ws).eof() && !(is >> m.phase)) throw ConfigError("modes." + key + ": bad phase");
    if (!(is >> std::ws).eof()) throw ConfigError("modes." + key + ": trailing text");
    if (target != "h" && target != "H") throw ConfigError("modes." + key + ": target must be h or H");
    m.outer = target == "H";
    c.modes.push_back(m);
  }
  rd.get("resolution.N", c.N);
  rd.get("resolution.N_rho", c.N_rho);
  rd.get("resolution.N_omega", c.N_omega);
  rd.get("resolution.N_w", c.N_w);
  rd.get("resolution.N_xi", c.N_xi);
  rd.get("time.dt", c.dt);
  rd.get("time.T_end", c.T_end);
  std::string integ = "etd1";
  rd.get_string("time.integrator", integ);
  if (integ == "etd1") c.integrator = Integrator::etd1;
  else if (integ == "etd2rk") c.integrator = Integrator::etd2rk;
  else throw ConfigError("time.integrator must be etd1 or etd2rk");
  rd.get("tolerances.pressure", c.pressure_tol);
  rd.get("tolerances.pressure_max_iter", c.pressure_max_iter);
  rd.get("tolerances.density", c.density_tol);
  rd.get("tolerances.density_max_iter", c.density_max_iter);
  rd.get_string("output.dir", c.out_dir);
  rd.get("output.every", c.output_every);
  rd.get("dispersion.k_max", c.k_max);
  rd.reject_unknown();
  validate_config(c);
  return c;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  return parse_config(in);
}

}  // namespace contour
