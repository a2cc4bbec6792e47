#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace bosefluct {

/// Run configuration, one struct per config section.
struct RunConfig {
  struct {
    int d = 1;
    int m_axis = 64;
    double L = 2 * kPi;
  } lattice;
  struct {
    std::string profile = "bump";  // bump | zero
    double amplitude = 1.0;
    double R_V = 1.0;
    double beta = 0.5;
    double N = 1e4;
    std::vector<double> N_sweep{1e2, 1e3, 1e4};
  } potential;
  struct {
    double ell = 0.0;  // 0 selects L/4
    int radial_points = 10000;
    double omega_quad_coeff = 1.0 / 3.0;
    double sup_delta = 0.25;  // lower end of the sup-error window, in units of ell
  } scattering;
  struct {
    std::string initial = "gaussian";
    double width = 0.5;
    int kick = 0;
    std::string sigma_mode = "cubic";  // cubic | linear_as_printed
    double T = 0.1;
    double dt = 1e-3;
  } condensate;
  struct {
    double max_defect = 1e-6;
    int output_every = 10;
    bool snapshots = true;
  } bogoliubov;
  struct {
    std::vector<std::string> list{"position", "momentum"};
    double position_half_width = 0.0;  // 0 selects L/8
    double position_softness = 0.2;
    double momentum_kmax = 3.0;
    double momentum_softness = 0.5;
  } observables;
  struct {
    int modes = 2;
    int n_max = 14;
    double t = 0.5;
    double dt = 1e-4;
    double h1_norm = 0.5;
    double h2_norm = 0.12;
    double tolerance = 1e-6;
    double leakage_tolerance = 1e-8;
    int max_dim = 20000;
    int samples = 10;
  } oracle;
  struct {
    std::string dir = "out";
  } output;
  struct {
    std::uint64_t seed = 1;
  } run;

  double ell() const { return scattering.ell > 0.0 ? scattering.ell : lattice.L / 4; }
  double half_width() const {
    return observables.position_half_width > 0.0 ? observables.position_half_width : lattice.L / 8;
  }
};

/// 17 significant digits, the shortest form that round-trips every double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n"), e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  double x = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(x))
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  long long x = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  if (t == "true") return true;
  if (t == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Field {
  std::string key;  // section.name
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class T>
Field int_field(std::string key, T RunConfig::*sec, int (T::*m)) {
  return {key, [=](const RunConfig& c) { return std::to_string(c.*sec.*m); },
          [=](RunConfig& c, const std::string& v) {
            long long x = parse_int(key, v);
            if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(key + ": out of range");
            c.*sec.*m = int(x);
          }};
}

template <class T>
Field double_field(std::string key, T RunConfig::*sec, double(T::*m)) {
  return {key, [=](const RunConfig& c) { return format_double(c.*sec.*m); },
          [=](RunConfig& c, const std::string& v) { c.*sec.*m = parse_double(key, v); }};
}

template <class T>
Field string_field(std::string key, T RunConfig::*sec, std::string(T::*m)) {
  return {key, [=](const RunConfig& c) { return c.*sec.*m; },
          [=](RunConfig& c, const std::string& v) { c.*sec.*m = trim(v); }};
}

template <class T>
Field bool_field(std::string key, T RunConfig::*sec, bool(T::*m)) {
  return {key, [=](const RunConfig& c) { return std::string(c.*sec.*m ? "true" : "false"); },
          [=](RunConfig& c, const std::string& v) { c.*sec.*m = parse_bool(key, v); }};
}

inline const std::vector<Field>& schema() {
  using C = RunConfig;
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back(int_field("lattice.d", &C::lattice, &decltype(C::lattice)::d));
    v.push_back(int_field("lattice.m_axis", &C::lattice, &decltype(C::lattice)::m_axis));
    v.push_back(double_field("lattice.L", &C::lattice, &decltype(C::lattice)::L));
    v.push_back(string_field("potential.profile", &C::potential, &decltype(C::potential)::profile));
    v.push_back(double_field("potential.amplitude", &C::potential, &decltype(C::potential)::amplitude));
    v.push_back(double_field("potential.R_V", &C::potential, &decltype(C::potential)::R_V));
    v.push_back(double_field("potential.beta", &C::potential, &decltype(C::potential)::beta));
    v.push_back(double_field("potential.N", &C::potential, &decltype(C::potential)::N));
    v.push_back({"potential.N_sweep",
                 [](const C& c) {
                   std::string s;
                   for (size_t i = 0; i < c.potential.N_sweep.size(); ++i)
                     s += (i ? "," : "") + format_double(c.potential.N_sweep[i]);
                   return s;
                 },
                 [](C& c, const std::string& val) {
                   c.potential.N_sweep.clear();
                   for (const auto& x : split_list(val)) c.potential.N_sweep.push_back(parse_double("potential.N_sweep", x));
                 }});
    v.push_back(double_field("scattering.ell", &C::scattering, &decltype(C::scattering)::ell));
    v.push_back(int_field("scattering.radial_points", &C::scattering, &decltype(C::scattering)::radial_points));
    v.push_back(double_field("scattering.omega_quad_coeff", &C::scattering, &decltype(C::scattering)::omega_quad_coeff));
    v.push_back(double_field("scattering.sup_delta", &C::scattering, &decltype(C::scattering)::sup_delta));
    v.push_back(string_field("condensate.initial", &C::condensate, &decltype(C::condensate)::initial));
    v.push_back(double_field("condensate.width", &C::condensate, &decltype(C::condensate)::width));
    v.push_back(int_field("condensate.kick", &C::condensate, &decltype(C::condensate)::kick));
    v.push_back(string_field("condensate.sigma_mode", &C::condensate, &decltype(C::condensate)::sigma_mode));
    v.push_back(double_field("condensate.T", &C::condensate, &decltype(C::condensate)::T));
    v.push_back(double_field("condensate.dt", &C::condensate, &decltype(C::condensate)::dt));
    v.push_back(double_field("bogoliubov.max_defect", &C::bogoliubov, &decltype(C::bogoliubov)::max_defect));
    v.push_back(int_field("bogoliubov.output_every", &C::bogoliubov, &decltype(C::bogoliubov)::output_every));
    v.push_back(bool_field("bogoliubov.snapshots", &C::bogoliubov, &decltype(C::bogoliubov)::snapshots));
    v.push_back({"observables.list",
                 [](const C& c) {
                   std::string s;
                   for (size_t i = 0; i < c.observables.list.size(); ++i) s += (i ? "," : "") + c.observables.list[i];
                   return s;
                 },
                 [](C& c, const std::string& val) { c.observables.list = split_list(val); }});
    v.push_back(double_field("observables.position_half_width", &C::observables,
                             &decltype(C::observables)::position_half_width));
    v.push_back(double_field("observables.position_softness", &C::observables,
                             &decltype(C::observables)::position_softness));
    v.push_back(double_field("observables.momentum_kmax", &C::observables, &decltype(C::observables)::momentum_kmax));
    v.push_back(double_field("observables.momentum_softness", &C::observables,
                             &decltype(C::observables)::momentum_softness));
    v.push_back(int_field("oracle.modes", &C::oracle, &decltype(C::oracle)::modes));
    v.push_back(int_field("oracle.n_max", &C::oracle, &decltype(C::oracle)::n_max));
    v.push_back(double_field("oracle.t", &C::oracle, &decltype(C::oracle)::t));
    v.push_back(double_field("oracle.dt", &C::oracle, &decltype(C::oracle)::dt));
    v.push_back(double_field("oracle.h1_norm", &C::oracle, &decltype(C::oracle)::h1_norm));
    v.push_back(double_field("oracle.h2_norm", &C::oracle, &decltype(C::oracle)::h2_norm));
    v.push_back(double_field("oracle.tolerance", &C::oracle, &decltype(C::oracle)::tolerance));
    v.push_back(double_field("oracle.leakage_tolerance", &C::oracle, &decltype(C::oracle)::leakage_tolerance));
    v.push_back(int_field("oracle.max_dim", &C::oracle, &decltype(C::oracle)::max_dim));
    v.push_back(int_field("oracle.samples", &C::oracle, &decltype(C::oracle)::samples));
    v.push_back(string_field("output.dir", &C::output, &decltype(C::output)::dir));
    v.push_back({"run.seed", [](const C& c) { return std::to_string(c.run.seed); },
                 [](C& c, const std::string& val) {
                   std::string t = trim(val);
                   std::uint64_t x = 0;
                   auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
                   if (ec != std::errc() || p != t.data() + t.size())
                     throw ConfigError("run.seed: expected an unsigned 64-bit integer, got '" + val + "'");
                   c.run.seed = x;
                 }});
    return v;
  }();
  return f;
}

inline const Field& find_field(const std::string& key) {
  for (const auto& f : schema())
    if (f.key == key) return f;
  throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace detail

/// Range checks for every field.
inline void validate(const RunConfig& c) {
  auto req = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  req(c.lattice.d >= 1 && c.lattice.d <= 3, "lattice.d must be 1, 2 or 3");
  req(c.lattice.m_axis >= 2 && c.lattice.m_axis <= 1024, "lattice.m_axis must lie in [2, 1024]");
  req(std::pow(double(c.lattice.m_axis), c.lattice.d) <= 1024, "lattice size M must not exceed 1024");
  req(c.lattice.L > 0.0, "lattice.L must be positive");
  req(c.potential.profile == "bump" || c.potential.profile == "zero", "potential.profile must be bump or zero");
  req(c.potential.amplitude >= 0.0, "potential.amplitude must be non-negative");
  req(c.potential.R_V > 0.0, "potential.R_V must be positive");
  req(c.potential.beta > 0.0 && c.potential.beta < 1.0, "potential.beta must lie in (0, 1)");
  req(c.potential.N >= 1.0, "potential.N must be at least 1");
  for (double n : c.potential.N_sweep) req(n >= 1.0, "potential.N_sweep entries must be at least 1");
  req(c.scattering.ell >= 0.0, "scattering.ell must be non-negative (0 selects L/4)");
  req(c.ell() < 0.5 * c.lattice.L, "scattering.ell must be shorter than L/2");
  req(c.scattering.radial_points >= 1000, "scattering.radial_points must be at least 1000");
  req(c.scattering.sup_delta > 0.0 && c.scattering.sup_delta < 1.0, "scattering.sup_delta must lie in (0, 1)");
  req(c.condensate.initial == "gaussian", "condensate.initial must be gaussian");
  req(c.condensate.width > 0.0, "condensate.width must be positive");
  req(c.condensate.sigma_mode == "cubic" || c.condensate.sigma_mode == "linear_as_printed",
      "condensate.sigma_mode must be cubic or linear_as_printed");
  req(c.condensate.T >= 0.0, "condensate.T must be non-negative");
  req(c.condensate.dt > 0.0 && c.condensate.dt <= 0.1, "condensate.dt must lie in (0, 0.1]");
  req(c.condensate.T / c.condensate.dt <= 1e6, "condensate.T / condensate.dt must not exceed 1e6 steps");
  req(c.bogoliubov.max_defect > 0.0, "bogoliubov.max_defect must be positive");
  req(c.bogoliubov.output_every >= 1, "bogoliubov.output_every must be at least 1");
  req(!c.observables.list.empty(), "observables.list must name at least one observable");
  std::set<std::string> seen;
  for (const auto& o : c.observables.list) {
    req(o == "position" || o == "momentum", "observables.list entries must be position or momentum");
    req(seen.insert(o).second, "observables.list must not repeat an observable");
  }
  req(c.observables.position_half_width >= 0.0, "observables.position_half_width must be non-negative");
  req(c.observables.position_softness > 0.0, "observables.position_softness must be positive");
  req(c.observables.momentum_kmax > 0.0, "observables.momentum_kmax must be positive");
  req(c.observables.momentum_softness > 0.0, "observables.momentum_softness must be positive");
  req(c.oracle.modes >= 1 && c.oracle.modes <= 6, "oracle.modes must lie in [1, 6]");
  req(c.oracle.n_max >= 4, "oracle.n_max must be at least 4");
  req(c.oracle.t >= 0.0, "oracle.t must be non-negative");
  req(c.oracle.dt > 0.0, "oracle.dt must be positive");
  req(c.oracle.h1_norm >= 0.0 && c.oracle.h2_norm >= 0.0, "oracle generator norms must be non-negative");
  req(c.oracle.tolerance > 0.0 && c.oracle.leakage_tolerance > 0.0, "oracle tolerances must be positive");
  req(c.oracle.max_dim >= 1, "oracle.max_dim must be positive");
  req(c.oracle.samples >= 1, "oracle.samples must be at least 1");
  req(!c.output.dir.empty(), "output.dir must not be empty");
}

/// Applies one `section.key=value` override.
inline void apply_override(RunConfig& c, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  detail::find_field(detail::trim(assignment.substr(0, eq))).set(c, assignment.substr(eq + 1));
}

/// Parses sectioned key-value text; unknown sections or keys are rejected.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' lies outside any section");
    for (const auto& [key, val] : body) detail::find_field(section + "." + key).set(c, val.data());
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text form; parse_config(serialize_config(c)) reproduces c exactly.
inline std::string serialize_config(const RunConfig& c) {
  std::string out, current;
  for (const auto& f : detail::schema()) {
    auto dot = f.key.find('.');
    std::string sec = f.key.substr(0, dot), key = f.key.substr(dot + 1);
    if (sec != current) {
      out += (out.empty() ? "[" : "\n[") + sec + "]\n";
      current = sec;
    }
    out += key + " = " + f.get(c) + "\n";
  }
  return out;
}

}  // namespace bosefluct
