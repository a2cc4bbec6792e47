#pragma once

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "clt.hpp"
#include "condensate.hpp"
#include "config.hpp"
#include "generator.hpp"
#include "kernels.hpp"
#include "oracle.hpp"
#include "scattering.hpp"

namespace bosefluct {

inline constexpr const char* kVersion = "1.0.0";

/// Exit statuses of the command-line front end.
enum ExitStatus : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_config = 2,
  exit_precondition = 3,
  exit_solver = 4,
  exit_inconclusive = 5,
  exit_structural = 6,
  exit_verdict_failed = 7,
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < n; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

inline std::string config_hash(const RunConfig& c) { return sha256_hex(serialize_config(c)); }

/// Comma-separated table with a fixed header and 17-digit floats.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path), path_(path) {
    if (!out_) throw PreconditionError("cannot write '" + path.string() + "'");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  template <class... T>
  void values(const T&... v) {
    row({cell(v)...});
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(Index x) { return std::to_string(x); }

  std::ofstream out_;
  std::filesystem::path path_;
};

inline Lattice make_lattice(const RunConfig& c) { return Lattice(c.lattice.d, c.lattice.m_axis, c.lattice.L); }

inline Potential make_potential(const RunConfig& c, double N) {
  if (c.potential.profile == "zero" || c.potential.amplitude == 0.0) {
    Potential p = zero_potential(c.potential.beta, N);
    p.R_V = c.potential.R_V;
    return p;
  }
  return smooth_bump(c.potential.amplitude, c.potential.R_V, c.potential.beta, N);
}

inline std::vector<double> sweep_values(const RunConfig& c) {
  return c.potential.N_sweep.empty() ? std::vector<double>{c.potential.N} : c.potential.N_sweep;
}

inline NonlinearityMode nonlinearity(const RunConfig& c) {
  return c.condensate.sigma_mode == "cubic" ? NonlinearityMode::cubic : NonlinearityMode::linear_as_printed;
}

inline GridFunction initial_state(const RunConfig& c) {
  return gaussian_initial_state(make_lattice(c), c.condensate.width, c.condensate.kick);
}

inline std::vector<Observable> make_observables(const RunConfig& c, const Lattice& lat) {
  std::vector<Observable> out;
  for (const auto& name : c.observables.list) {
    if (name == "position") {
      Vec3 center{0.5 * lat.L, 0.5 * lat.L, 0.5 * lat.L};
      out.push_back(position_window(lat, center, c.half_width(), c.observables.position_softness));
    } else {
      out.push_back(momentum_window(lat, c.observables.momentum_kmax, c.observables.momentum_softness));
    }
  }
  return out;
}

/// Summary of one subcommand: produced files and achieved diagnostics.
struct StageReport {
  std::vector<std::string> files;
  nlohmann::json achieved = nlohmann::json::object();
};

inline StageReport run_scattering(const RunConfig& c, const std::filesystem::path& dir) {
  StageReport r;
  CsvWriter csv(dir / "scattering.csv", {"N", "beta", "ell", "lambda_N", "N_lambda_N", "a0", "sup_err_Nomega_vs_omegainf"});
  const double ell = c.ell();
  double worst_identity = 0.0;
  ScatteringOptions opt;
  opt.points = c.scattering.radial_points;
  for (double N : sweep_values(c)) {
    Potential p = make_potential(c, N);
    auto sol = solve_neumann_scattering(p, ell, opt);
    double a0 = scattering_length(p);
    double sup = sup_error_vs_limit(sol, c.scattering.sup_delta * ell, c.scattering.omega_quad_coeff);
    csv.values(N, p.beta, ell, sol.lambda, N * sol.lambda, a0, sup);
    worst_identity = std::max(worst_identity, sol.identity_residual);
  }
  r.files.push_back(csv.path().filename().string());
  r.achieved["scattering_identity_residual"] = worst_identity;
  return r;
}

inline CondensateTrajectory limiting_trajectory(const RunConfig& c) {
  const double b0 = make_potential(c, c.potential.N).b0;
  return evolve_nls(initial_state(c), b0, c.condensate.T, c.condensate.dt, nonlinearity(c));
}

inline StageReport run_condensate(const RunConfig& c, const std::filesystem::path& dir) {
  StageReport r;
  const double b0 = make_potential(c, c.potential.N).b0;
  auto tr = limiting_trajectory(c);
  const bool cubic = nonlinearity(c) == NonlinearityMode::cubic;
  CsvWriter csv(dir / "condensate.csv", {"t", "mass", "energy", "Linf_norm"});
  double drift = 0.0;
  for (size_t n = 0; n < tr.snapshots.size(); ++n) {
    const auto& phi = tr.snapshots[n];
    double mass = phi.norm() * phi.norm();
    double energy = cubic ? nls_energy(phi, b0) : nls_energy(phi, 0.0) + b0 * mass;
    csv.values(tr.times[n], mass, energy, phi.v.cwiseAbs().maxCoeff());
    drift = std::max(drift, std::abs(mass - 1.0));
  }
  r.files.push_back(csv.path().filename().string());
  r.achieved["condensate_mass_drift"] = drift;
  if (!c.potential.N_sweep.empty()) {
    CsvWriter sw(dir / "condensate_sweep.csv", {"N", "distance_to_limit"});
    ScatteringOptions opt;
    opt.points = c.scattering.radial_points;
    for (double N : c.potential.N_sweep) {
      Potential p = make_potential(c, N);
      auto ht = evolve_modified_hartree(tr.snapshots.front(), p, solve_neumann_scattering(p, c.ell(), opt),
                                        c.condensate.T, c.condensate.dt);
      sw.values(N, (ht.final_state() - tr.final_state()).norm());
      for (const auto& w : ht.warnings) r.achieved["warnings"].push_back("N = " + format_double(N) + ": " + w);
    }
    r.files.push_back(sw.path().filename().string());
  }
  return r;
}

/// Bogoliubov propagation along the limiting condensate with optional covariance output.
struct FluctuationRun {
  std::vector<PropagationDiagnostics> rows;
  std::vector<CovarianceReport> covariances;
  BogoliubovPair final_pair;
};

inline FluctuationRun run_fluctuations(const RunConfig& c, bool with_covariance) {
  const Lattice lat = make_lattice(c);
  const double b0 = make_potential(c, c.potential.N).b0;
  auto tr = limiting_trajectory(c);
  EtaBuilder builder(lat, limiting_profile(c.ell(), b0, c.scattering.omega_quad_coeff));
  GeneratorInputs in = generator_inputs(lat, b0, c.ell(), c.scattering.omega_quad_coeff);
  GeneratorSource src(tr, builder, in);
  auto obs = with_covariance ? make_observables(c, lat) : std::vector<Observable>{};

  FluctuationRun out;
  const long every = c.bogoliubov.output_every;
  const size_t last = tr.steps();
  PropagationOptions opt;
  opt.max_defect = c.bogoliubov.max_defect;
  opt.opnorm_every = int(every);
  opt.observer = [&](const BogoliubovPair& p) {
    long n = std::lround(p.t / c.condensate.dt);
    if (n % every != 0 && size_t(n) != last) return;
    if (!with_covariance) return;
    auto f = family_at(tr, size_t(n), builder, b0);
    std::vector<GridFunction> nu;
    for (const auto& o : obs) nu.push_back(fluctuation_vector(o, f, p));
    out.covariances.push_back(covariance_matrix(nu, p.t));
  };
  auto prop = propagate(std::cref(src), lat.size(), 0.0, tr.times.back(), c.condensate.dt,
                        KineticFlow::lattice(lat), opt);
  for (size_t n = 0; n < prop.series.size(); ++n)
    if (long(n) % every == 0 || n == last) out.rows.push_back(prop.series[n]);
  out.final_pair = prop.pair;
  return out;
}

inline void write_evolve(const FluctuationRun& run, const RunConfig& c, const std::filesystem::path& dir,
                         StageReport& r) {
  CsvWriter csv(dir / "evolve.csv", {"t", "V_hs_sq", "sympl_defect", "U_opnorm"});
  double ws = 0.0, wc = 0.0;
  for (const auto& d : run.rows) {
    csv.values(d.t, d.V_hs_sq, d.sympl_defect, d.U_opnorm);
    ws = std::max(ws, d.sympl_defect);
    wc = std::max(wc, d.conj_defect);
  }
  r.files.push_back(csv.path().filename().string());
  r.achieved["max_sympl_defect"] = ws;
  r.achieved["max_conj_defect"] = wc;
  if (c.bogoliubov.snapshots) {
    const Lattice lat = make_lattice(c);
    write_kernel((dir / "U_final.bin").string(), Kernel::from_op(lat, run.final_pair.U), run.final_pair.t);
    write_kernel((dir / "V_final.bin").string(), Kernel::from_op(lat, run.final_pair.V), run.final_pair.t);
    r.files.push_back("U_final.bin");
    r.files.push_back("V_final.bin");
  }
}

inline void write_covariance(const FluctuationRun& run, const std::filesystem::path& dir, StageReport& r) {
  CsvWriter csv(dir / "covariance.csv",
                {"t", "i", "j", "re_sigma_ij", "im_sigma_ij", "det_sigma", "var_sigma_t"});
  CsvWriter plot(dir / "covariance_plot.csv", {"t", "norm_sigma_t_sq"});
  bool herm = true, pos = true;
  for (const auto& cov : run.covariances) {
    const Index k = cov.sigma.rows();
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j)
        csv.values(cov.t, i, j, cov.sigma(i, j).real(), cov.sigma(i, j).imag(), cov.det.real(), cov.variance());
    plot.values(cov.t, cov.variance());
    herm = herm && cov.hermitian;
    pos = pos && cov.real_part_positive;
  }
  r.files.push_back(csv.path().filename().string());
  r.files.push_back(plot.path().filename().string());
  r.achieved["covariance_hermitian"] = herm;
  r.achieved["covariance_real_part_positive"] = pos;
}

inline StageReport run_evolve(const RunConfig& c, const std::filesystem::path& dir) {
  StageReport r;
  write_evolve(run_fluctuations(c, false), c, dir, r);
  return r;
}

inline StageReport run_covariance(const RunConfig& c, const std::filesystem::path& dir) {
  StageReport r;
  write_covariance(run_fluctuations(c, true), dir, r);
  return r;
}

inline OracleSettings oracle_settings(const RunConfig& c) {
  OracleSettings s;
  s.modes = c.oracle.modes;
  s.n_max = c.oracle.n_max;
  s.t = c.oracle.t;
  s.dt = c.oracle.dt;
  s.h1_norm = c.oracle.h1_norm;
  s.h2_norm = c.oracle.h2_norm;
  s.max_dim = c.oracle.max_dim;
  s.seed = c.run.seed;
  return s;
}

/// Conjugation verdict on the matched few-mode instance.
inline nlohmann::json run_oracle_verify(const RunConfig& c) {
  auto inst = matched_instance(oracle_settings(c));
  auto v = oracle_conjugation(inst, c.oracle.samples, c.oracle.leakage_tolerance);
  return {{"test", "bogoliubov_conjugation"}, {"M", c.oracle.modes},  {"n_max", c.oracle.n_max},
          {"dt", c.oracle.dt},                 {"defect", v.defect}, {"leakage", v.leakage},
          {"pass", v.defect <= c.oracle.tolerance}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot write '" + path.string() + "'");
  f << text;
}

/// scattering -> condensate -> kernels -> evolve -> covariance, plus oracle verdict and manifest.
inline nlohmann::json run_full_pipeline(const RunConfig& c, const std::filesystem::path& dir) {
  nlohmann::json m;
  m["version"] = kVersion;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["config_hash"] = config_hash(c);
  m["seed"] = c.run.seed;
  write_text(dir / "config.ini", serialize_config(c));
  std::vector<std::string> files{"config.ini"};
  nlohmann::json achieved = nlohmann::json::object();
  auto merge = [&](const StageReport& r) {
    files.insert(files.end(), r.files.begin(), r.files.end());
    achieved.update(r.achieved);
  };
  merge(run_scattering(c, dir));
  merge(run_condensate(c, dir));
  StageReport fl;
  auto run = run_fluctuations(c, true);
  write_evolve(run, c, dir, fl);
  write_covariance(run, dir, fl);
  merge(fl);
  auto verdict = run_oracle_verify(c);
  write_text(dir / "oracle.json", verdict.dump(2) + "\n");
  files.push_back("oracle.json");
  achieved["oracle_defect"] = verdict["defect"];
  achieved["oracle_leakage"] = verdict["leakage"];
  achieved["oracle_pass"] = verdict["pass"];
  m["tolerances"] = {{"bogoliubov_max_defect", c.bogoliubov.max_defect},
                     {"oracle_tolerance", c.oracle.tolerance},
                     {"oracle_leakage_tolerance", c.oracle.leakage_tolerance}};
  m["achieved"] = achieved;
  nlohmann::json art = nlohmann::json::array();
  for (const auto& f : files) {
    std::ifstream in(dir / f, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    art.push_back({{"file", f}, {"sha256", sha256_hex(data)}});
  }
  m["artifacts"] = art;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

}  // namespace bosefluct
