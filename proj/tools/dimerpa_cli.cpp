// Copyright 2026 The dimerpa Authors
// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dimerpa/dimerpa.hpp"

namespace fs = std::filesystem;
using namespace dimerpa;

namespace {

constexpr const char* help_footer =
    "Units: frequencies in Hz, pump powers in dBm. Power dB = 10 log10(P ratio); "
    "amplitude dB = 20 log10(amplitude ratio). Gains are power gains in dB.\n"
    "Exit codes: 0 ok, 2 invalid argument, 3 schema, 4 unreachable target, 5 solver, 6 io.\n"
    "Default output directory: $DIMERPA_OUT, else the working directory.";

struct Range {
  double a = 0.0;
  double b = 0.0;
  int n = 0;
};

Range parse_range(const std::string& s, const char* what) {
  Range r;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  if (!(in >> r.a >> c1 >> r.b >> c2 >> r.n) || c1 != ':' || c2 != ':' || !in.eof() || r.n < 2)
    fail(ErrorCode::invalid_argument, std::string(what) + " must be a:b:n with n >= 2, got " + s);
  return r;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorCode::invalid_argument, std::string(what) + ": not a number: " + tok);
    }
  }
  if (v.empty()) fail(ErrorCode::invalid_argument, std::string(what) + " is empty");
  return v;
}

/// Numeric CSV with optional '#' comment lines and a mandatory header row.
std::vector<std::vector<double>> read_csv(const fs::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<double> row = parse_list(line, path.string().c_str());
    if (row.size() != columns)
      fail(ErrorCode::schema, path.string() + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::schema, path.string() + ": no data rows");
  return rows;
}

struct Context {
  std::string params;
  std::string out_dir;
  std::vector<std::string> sets;
  std::string model = "floquet";
  int N = 2;
  std::string grid;
  int threads = default_threads();
  std::uint64_t seed = 1;
  bool emit_plot = false;

  json doc;
  Config cfg;
  std::string hash;

  void load() {
    doc = read_json_file(params);
    for (const auto& s : sets) apply_override(doc, s);
    cfg = parse_config(doc);
    hash = config_hash(doc);
    if (model != "floquet" && model != "quadrature")
      fail(ErrorCode::invalid_argument, "--model must be quadrature or floquet");
    require(N >= 1, "--floquet-order must be >= 1");
    require(threads >= 1, "--threads must be >= 1");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create " + out_dir + ": " + ec.message());
  }

  fs::path path(const std::string& name) const { return fs::path(out_dir) / name; }

  json header(const char* command) const {
    return json{{"tool", "dimerpa"}, {"version", version}, {"config_hash", hash}, {"command", command}};
  }

  std::optional<Range> grid_range() const {
    if (grid.empty()) return std::nullopt;
    return parse_range(grid, "--grid");
  }
};

double hz(double w) { return to_hz(w).value; }

json fit_json(const FitResult& f) {
  json p = json::object();
  for (std::size_t i = 0; i < f.names.size(); ++i)
    p[f.names[i]] = {{"value", f.values[i]}, {"sigma", f.sigmas[i]}, {"unit", f.units[i]}};
  return {{"parameters", p}, {"residual_rms", f.residual_rms}, {"n_points", f.n_points}, {"flags", f.flags}};
}

// ------------------------------------------------------------ operating point

OperatingPoint operating_point(const Context& c) {
  const CircuitParams& p = c.cfg.circuit;
  if (!c.cfg.gain) fail(ErrorCode::invalid_argument, "config has no gain pump");
  const double Pg = watts(Dbm{c.cfg.gain->power_dbm + c.cfg.attenuation_db});
  const double Pc = c.cfg.conversion ? watts(Dbm{c.cfg.conversion->power_dbm + c.cfg.attenuation_db}) : 0.0;
  if (!c.cfg.gain->frequency) {
    if (c.cfg.conversion && c.cfg.conversion->frequency)
      fail(ErrorCode::invalid_argument, "conversion f_Hz requires gain f_Hz");
    const OperatingPoint op = operate(p, Pg, Pc);
    if (!op.converged) fail(ErrorCode::solver, "pump recentering did not converge");
    return op;
  }
  const PumpTone g{*c.cfg.gain->frequency, Pg, c.cfg.gain->phase};
  OperatingPoint op;
  op.P_g = Pg;
  op.P_c = Pc;
  op.omega_g = g.frequency;
  if (Pc > 0.0) {
    if (!c.cfg.conversion->frequency) fail(ErrorCode::invalid_argument, "gain f_Hz requires conversion f_Hz");
    const PumpTone cv{*c.cfg.conversion->frequency, Pc, c.cfg.conversion->phase};
    op.mf = select_branch(solve_double_pump(p, g, cv));
    op.omega_c = cv.frequency;
  } else {
    op.mf = select_branch(solve_single_pump(p, g));
  }
  const KerrShifted k = kerr_shifted(p, hybridize(p), op.mf.n_L, op.mf.n_R);
  op.omega_a_tilde = k.omega_a;
  op.omega_b_tilde = k.omega_b;
  op.converged = true;
  return op;
}

json op_json(const OperatingPoint& op) {
  return {{"P_g_dBm", to_dbm(op.P_g).value},
          {"P_c_dBm", op.P_c > 0.0 ? json(to_dbm(op.P_c).value) : json(nullptr)},
          {"f_g_Hz", hz(op.omega_g)},
          {"f_c_Hz", op.omega_c > 0.0 ? json(hz(op.omega_c)) : json(nullptr)},
          {"f_a_tilde_Hz", hz(op.omega_a_tilde)},
          {"f_b_tilde_Hz", hz(op.omega_b_tilde)},
          {"n_L", op.mf.n_L},
          {"n_R", op.mf.n_R},
          {"iterations", op.iterations},
          {"converged", op.converged}};
}

json coop_json(const EffectiveCouplings& ec, double kappa) {
  const Cooperativities co = cooperativities(ec, kappa);
  return {{"C_TMS", co.C_TMS}, {"C_BS", co.C_BS}, {"C_S_a", co.C_S_a}, {"C_S_b", co.C_S_b}, {"gap", co.C_TMS - co.C_BS}};
}

DriftMatrix device_drift(const Context& c, const OperatingPoint& op) {
  return drift_matrix(operating_couplings(c.cfg.circuit, op), c.cfg.circuit.kappa, DriftVariant::single_port);
}

std::vector<double> device_grid(const Context& c, const OperatingPoint& op, int points = 2001) {
  if (auto r = c.grid_range()) return linspace(angular(Hz{r->a}), angular(Hz{r->b}), r->n);
  const double span = 0.45 * std::abs(op.omega_b_tilde - op.omega_a_tilde);
  return linspace(op.omega_b_tilde - span, op.omega_b_tilde + span, points);
}

/// Detuning grid (rad/s) for the symmetric model, default +-3 kappa.
std::vector<double> symmetric_grid(const Context& c) {
  if (auto r = c.grid_range()) return linspace(angular(Hz{r->a}), angular(Hz{r->b}), r->n);
  const double k = c.cfg.circuit.kappa;
  return linspace(-3.0 * k, 3.0 * k, 2001);
}

double family_coupling(AmpMode m, double g0_db, double kappa) {
  const double t[] = {g0_db};
  const GbwPoint g = gbw_scan(m, t, kappa)[0];
  if (!g.reachable) fail(ErrorCode::unreachable, std::string(to_string(m)) + ": " + g.message);
  return g.control;
}

DriftMatrix family_drift(AmpMode m, double g0_db, double kappa) {
  const FamilyPoint f = family_point(m, family_coupling(m, g0_db, kappa));
  return drift_matrix(balanced_couplings(kappa, f.C_TMS, f.C_BS, f.C_S), kappa);
}

std::vector<AmpMode> parse_modes(const std::string& s) {
  std::vector<AmpMode> v;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) v.push_back(amp_mode_from_string(tok));
  if (v.empty()) fail(ErrorCode::invalid_argument, "--mode is empty");
  return v;
}

// ------------------------------------------------------------ subcommands

int cmd_hybridize(const Context& c) {
  const HybridizedParams h = hybridize(c.cfg.circuit);
  json j = c.header("hybridize");
  j["f_a_Hz"] = hz(h.omega_a);
  j["f_b_Hz"] = hz(h.omega_b);
  j["kappa_a_Hz"] = hz(h.kappa_a);
  j["kappa_b_Hz"] = hz(h.kappa_b);
  j["kappa_eq_Hz"] = hz(h.kappa_eq());
  j["theta_rad"] = h.theta;
  j["K_aa_Hz"] = hz(h.K_aa);
  j["K_bb_Hz"] = hz(h.K_bb);
  j["K_ab_Hz"] = hz(h.K_ab);
  write_json(c.path("hybridize.json"), j);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_meanfield(const Context& c) {
  const CircuitParams& p = c.cfg.circuit;
  const OperatingPoint op = operating_point(c);
  json j = c.header("meanfield");
  j["operating_point"] = op_json(op);
  json branches = json::array();
  std::vector<MeanFieldSolution> all;
  const PumpTone g{op.omega_g, op.P_g, c.cfg.gain->phase};
  if (op.two_tone()) {
    const PumpTone cv{op.omega_c, op.P_c, c.cfg.conversion->phase};
    all = solve_double_pump(p, g, cv, {}, &op.mf);
  } else {
    all = solve_single_pump(p, g);
  }
  for (const auto& b : all) {
    auto z = [](cplx v) { return json::array({v.real(), v.imag()}); };
    branches.push_back({{"branch_id", b.branch_id},
                        {"alpha_L_g", z(b.alpha_L_g)},
                        {"alpha_R_g", z(b.alpha_R_g)},
                        {"alpha_L_c", z(b.alpha_L_c)},
                        {"alpha_R_c", z(b.alpha_R_c)},
                        {"n_L", b.n_L},
                        {"n_R", b.n_R},
                        {"residual", b.residual},
                        {"near_fold", b.near_fold}});
  }
  j["branches"] = branches;
  j["couplings"] = coop_json(operating_couplings(p, op), p.kappa);
  write_json(c.path("meanfield.json"), j);
  return 0;
}

int cmd_stability(const Context& c, const std::string& sweep) {
  const CircuitParams& p = c.cfg.circuit;
  if (!sweep.empty()) {
    const Range r = parse_range(sweep, "--sweep-gap");
    const auto rows = eigenvalue_sweep(1.0, linspace(r.a, r.b, r.n));
    std::vector<std::string> head{"gap", "C_TMS", "C_BS"};
    for (int i = 1; i <= 4; ++i) {
      head.push_back("re_lambda" + std::to_string(i) + "_over_kappa");
      head.push_back("im_lambda" + std::to_string(i) + "_over_kappa");
    }
    head.push_back("classification");
    CsvWriter w(c.path("stability_sweep.csv"), c.hash, head);
    for (const auto& row : rows) {
      auto ev = row.eigenvalues;
      std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
      });
      std::vector<std::string> cells{format_number(row.gap), format_number(row.C_TMS), format_number(row.C_BS)};
      for (cplx e : ev) {
        cells.push_back(format_number(e.real()));
        cells.push_back(format_number(e.imag()));
      }
      cells.push_back(to_string(row.classification));
      w.row(cells);
    }
    return 0;
  }
  const OperatingPoint op = operating_point(c);
  const EffectiveCouplings ec = operating_couplings(p, op);
  const StabilityReport rep = classify(device_drift(c, op), ec);
  json j = c.header("stability");
  j["operating_point"] = op_json(op);
  j["couplings"] = coop_json(ec, p.kappa);
  json ev = json::array();
  for (cplx e : rep.eigenvalues) ev.push_back({e.real() / p.kappa, e.imag() / p.kappa});
  j["quadrature"] = {{"eigenvalues_over_kappa", ev},
                     {"max_real_over_kappa", rep.max_real / p.kappa},
                     {"classification", to_string(rep.classification)}};
  const double mr = floquet_max_real(floquet_blocks(p, op.mf), c.N);
  j["floquet"] = {{"order", c.N}, {"max_real_over_kappa", mr / p.kappa}, {"stable", mr < 0.0}};
  write_json(c.path("stability.json"), j);
  return 0;
}

json profile_json(const GainProfile& g) {
  json peaks = json::array();
  for (double f : g.peak_freqs) peaks.push_back(hz(f));
  return {{"G0_dB", power_db(g.G0)},
          {"f_peak_Hz", hz(g.f_peak)},
          {"BW_Hz", hz(g.bandwidth_3db)},
          {"bandwidth_truncated", g.bandwidth_truncated},
          {"peak_count", g.peak_count},
          {"peak_freqs_Hz", peaks},
          {"model_tag", g.model_tag}};
}

void emit_gain_plots(const Context& c, double g0_db, double pg_dbm, const Range& pc) {
  const CircuitParams& p = c.cfg.circuit;
  {
    const double k = p.kappa;
    const auto grid = linspace(-3.0 * k, 3.0 * k, 601);
    std::vector<std::vector<double>> cols;
    for (AmpMode m : {AmpMode::SP, AmpMode::EP, AmpMode::BP}) {
      const DriftMatrix dm = family_drift(m, g0_db, k);
      const int row = m == AmpMode::SP ? 0 : 1;
      cols.push_back(gain_profile_quadrature(dm, grid, row, 0, c.threads).gain);
    }
    const std::vector<std::string> head{"detuning_Hz", "SP_gain_dB", "EP_gain_dB", "BP_gain_dB"};
    CsvWriter w(c.path("gain_families.csv"), c.hash, head);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r[] = {hz(grid[i]), power_db(cols[0][i]), power_db(cols[1][i]), power_db(cols[2][i])};
      w.row(r);
    }
  }
  // Conversion sweep at fixed gain pump; detuning measured from each shifted w~_b.
  const double att = c.cfg.attenuation_db;
  std::vector<double> pcs;
  for (double d : linspace(pc.a, pc.b, pc.n)) pcs.push_back(watts(Dbm{d + att}));
  DeviceProfileOptions po;
  po.N = c.N;
  po.threads = c.threads;
  const double Pg = watts(Dbm{pg_dbm + att});
  const auto rows = coalescence_sweep(p, Pg, pcs, po);
  const double span = 0.45 * hybridize(p).kappa_b;
  const auto det = linspace(-span, span, 601);
  std::vector<std::string> head{"detuning_Hz"};
  std::vector<std::vector<double>> cols;
  json summary = c.header("gain");
  summary["P_g_dBm"] = pg_dbm;
  summary["rows"] = json::array();
  const OperatingPoint* warm = nullptr;
  OperatingPoint last;
  for (std::size_t k = 0; k < pcs.size(); ++k) {
    const double dbm = to_dbm(pcs[k]).value - att;
    head.push_back("gain_dB_Pc_" + format_number(dbm) + "dBm");
    const OperatingPoint op = operate(p, Pg, pcs[k], {}, warm);
    std::vector<double> g(det.size(), std::numeric_limits<double>::quiet_NaN());
    const bool crossed = op.omega_b_tilde <= op.omega_a_tilde;
    if (op.converged && !crossed) {
      last = op;
      warm = &last;
      const FloquetBlocks b = floquet_blocks(p, op.mf);
      parallel_for(det.size(), c.threads,
                   [&](std::size_t i) { g[i] = power_db(floquet_gain(p, b, op.omega_b_tilde + det[i], c.N)); });
    }
    cols.push_back(std::move(g));
    const CoalescenceRow& r = rows[k];
    json peaks = json::array();
    for (double f : r.peak_freqs) peaks.push_back(hz(f - r.omega_b_tilde));
    summary["rows"].push_back({{"P_c_dBm", dbm},
                               {"converged", r.converged},
                               {"mode_crossed", crossed},
                               {"stable", r.stable},
                               {"max_real_over_kappa", r.max_real / p.kappa},
                               {"G0_dB", r.G0_db},
                               {"BW_Hz", hz(r.bandwidth)},
                               {"peak_count", r.peak_count},
                               {"peak_detunings_Hz", peaks}});
  }
  CsvWriter w(c.path("gain_vs_conversion.csv"), c.hash, head);
  for (std::size_t i = 0; i < det.size(); ++i) {
    std::vector<double> r{hz(det[i])};
    for (const auto& col : cols) r.push_back(col[i]);
    w.row(r);
  }
  write_json(c.path("gain_vs_conversion.json"), summary);
}

int cmd_gain(const Context& c, double plot_g0, double plot_pg, const std::string& pc_sweep) {
  const CircuitParams& p = c.cfg.circuit;
  const OperatingPoint op = operating_point(c);
  const auto grid = device_grid(c, op);
  std::vector<cplx> s(grid.size());
  std::string tag;
  bool stable = false;
  if (c.model == "floquet") {
    const FloquetBlocks b = floquet_blocks(p, op.mf);
    parallel_for(grid.size(), c.threads, [&](std::size_t i) { s[i] = floquet_response(p, b, grid[i], c.N); });
    tag = "floquet-single-port";
    stable = floquet_max_real(b, c.N) < 0.0;
  } else {
    const EffectiveCouplings ec = operating_couplings(p, op);
    const DriftMatrix dm = device_drift(c, op);
    parallel_for(grid.size(), c.threads,
                 [&](std::size_t i) { s[i] = scattering_mode_basis(dm, grid[i] - ec.frame)(2, 2); });
    tag = "quadrature-single-port";
    stable = classify(dm, ec).max_real < 0.0;
  }
  std::vector<double> g(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) g[i] = std::norm(s[i]);
  const GainProfile prof = make_profile(grid, g, tag);
  {
    const std::vector<std::string> head{"freq_Hz", "gain_dB", "phase_deg"};
    CsvWriter w(c.path("gain.csv"), c.hash, head);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r[] = {hz(grid[i]), power_db(g[i]), std::arg(s[i]) * 180.0 / std::numbers::pi};
      w.row(r);
    }
  }
  json j = c.header("gain");
  j["profile"] = profile_json(prof);
  j["stable"] = stable;
  j["floquet_order"] = c.N;
  j["operating_point"] = op_json(op);
  write_json(c.path("gain.json"), j);
  if (c.emit_plot) emit_gain_plots(c, plot_g0, plot_pg, parse_range(pc_sweep, "--pc-sweep"));
  return 0;
}

int cmd_noise(const Context& c, const std::string& mode, double g0) {
  const CircuitParams& p = c.cfg.circuit;
  json j = c.header("noise");
  NoiseSpectrum ns;
  const double centre = 0.0;
  if (!mode.empty()) {
    const AmpMode m = amp_mode_from_string(mode);
    const int ch = m == AmpMode::SP ? 0 : 1;
    ns = noise_spectrum(family_drift(m, g0, p.kappa), symmetric_grid(c), ch, {}, c.threads);
    j["model"] = "quadrature-symmetric";
    j["mode"] = mode;
    j["target_G0_dB"] = g0;
  } else {
    const OperatingPoint op = operating_point(c);
    const EffectiveCouplings ec = operating_couplings(p, op);
    std::vector<double> grid = device_grid(c, op);
    for (double& w : grid) w -= ec.frame;
    ns = noise_spectrum(device_drift(c, op), grid, 1, {}, c.threads);
    for (double& w : ns.freq_grid) w += ec.frame - op.omega_b_tilde;
    j["model"] = "quadrature-single-port";
    j["operating_point"] = op_json(op);
    j["stable"] = floquet_max_real(floquet_blocks(p, op.mf), c.N) < 0.0;
  }
  const std::vector<std::string> head{"detuning_Hz", "gain_dB", "n_add", "quantum_limit"};
  CsvWriter w(c.path("noise.csv"), c.hash, head);
  std::size_t ic = 0;
  for (std::size_t i = 0; i < ns.freq_grid.size(); ++i) {
    const double r[] = {hz(ns.freq_grid[i]), power_db(ns.gain[i]), ns.n_add[i], ns.quantum_limit[i]};
    w.row(r);
    if (std::abs(ns.freq_grid[i] - centre) < std::abs(ns.freq_grid[ic] - centre)) ic = i;
  }
  j["centre"] = {{"detuning_Hz", hz(ns.freq_grid[ic])},
                 {"gain_dB", power_db(ns.gain[ic])},
                 {"n_add", ns.n_add[ic]},
                 {"quantum_limit", ns.quantum_limit[ic]}};
  write_json(c.path("noise.json"), j);
  return 0;
}

int cmd_gbw(const Context& c, const std::string& modes, const std::string& g0s, bool device) {
  const CircuitParams& p = c.cfg.circuit;
  const std::vector<double> t = parse_list(g0s, "--g0");
  bool all = true;
  if (device) {
    const std::vector<std::string> head{"target_dB", "G0_dB", "BW_Hz", "GBW_Hz", "P_g_dBm", "reachable"};
    CsvWriter w(c.path("gbw_device.csv"), c.hash, head);
    DeviceProfileOptions po;
    po.N = c.N;
    po.threads = c.threads;
    for (const auto& g : gbw_scan_device(p, t, po)) {
      all = all && g.reachable;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const double r[] = {g.target_db,
                          g.reachable ? g.G0_db : nan,
                          g.reachable ? hz(g.bandwidth) : nan,
                          g.reachable ? hz(g.bandwidth) * std::pow(10.0, g.G0_db / 20.0) : nan,
                          g.reachable ? to_dbm(g.control).value - c.cfg.attenuation_db : nan,
                          g.reachable ? 1.0 : 0.0};
      w.row(r);
    }
  } else {
    const std::vector<AmpMode> ms = parse_modes(modes);
    std::vector<std::vector<GbwPoint>> res;
    ScanOptions so;
    so.threads = c.threads;
    for (AmpMode m : ms) res.push_back(gbw_scan(m, t, p.kappa, so));
    std::vector<std::string> head{"target_dB"};
    for (AmpMode m : ms) {
      head.push_back(std::string(to_string(m)) + "_G0_dB");
      head.push_back(std::string(to_string(m)) + "_BW_Hz");
    }
    CsvWriter w(c.path("gbw.csv"), c.hash, head);
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<double> r{t[i]};
      for (const auto& col : res) {
        const GbwPoint& g = col[i];
        all = all && g.reachable;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.push_back(g.reachable ? g.G0_db : nan);
        r.push_back(g.reachable ? hz(g.bandwidth) : nan);
      }
      w.row(r);
    }
  }
  if (!all) fail(ErrorCode::unreachable, "some gain targets were not reached; see nan cells");
  return 0;
}

int cmd_tune(const Context& c, double g0, bool device, int budget) {
  const CircuitParams& p = c.cfg.circuit;
  TuneOptions o;
  o.seed = c.seed;
  o.budget = budget;
  TuneResult r;
  json j = c.header("tune-bp");
  if (device) {
    DeviceModel m{p};
    m.profile.N = c.N;
    m.profile.points = 401;
    m.profile.threads = c.threads;
    o.log_pg_start = std::log10(watts(Dbm{-80.0}));
    o.log_pg_max = std::log10(watts(Dbm{-65.0}));
    o.log_pg_step = 0.02;
    r = tune_to_bp(m, g0, o);
    j["model"] = "floquet-single-port";
    j["P_g_dBm"] = r.P_g > 0.0 ? json(to_dbm(r.P_g).value - c.cfg.attenuation_db) : json(nullptr);
    j["P_c_dBm"] = r.P_c > 0.0 ? json(to_dbm(r.P_c).value - c.cfg.attenuation_db) : json(nullptr);
  } else {
    SymmetricPumpModel m;
    m.kappa = p.kappa;
    m.scan.threads = c.threads;
    r = tune_to_bp(m, g0, o);
    j["model"] = "quadrature-symmetric";
    j["P_g_model"] = r.P_g;
    j["P_c_model"] = r.P_c;
  }
  j["target_dB"] = g0;
  j["ratio_Pc_over_Pg"] = r.ratio;
  j["G0_dB"] = r.G0_db;
  j["BW_Hz"] = hz(r.bandwidth);
  j["peak_count"] = r.peak_count;
  j["gap"] = r.gap;
  j["converged"] = r.converged;
  j["evaluations"] = r.evaluations;
  j["message"] = r.message;
  j["seed"] = c.seed;
  write_json(c.path("tune_bp.json"), j);
  const std::vector<std::string> head{"log10_ratio", "P_g", "P_c", "G0_dB", "BW_Hz", "peak_count", "gap", "objective_Hz"};
  CsvWriter w(c.path("tune_bp_trace.csv"), c.hash, head);
  for (const auto& t : r.trace) {
    const double row[] = {t.log_ratio,   t.P_g,  t.P_c, t.G0_db, hz(t.bandwidth), static_cast<double>(t.peak_count),
                          t.gap, hz(t.objective)};
    w.row(row);
  }
  if (g0 > 0.0 && r.trace.empty()) fail(ErrorCode::unreachable, r.message);
  return 0;
}

int cmd_phase_gain(const Context& c, const std::string& mode, double g0) {
  const CircuitParams& p = c.cfg.circuit;
  json j = c.header("phase-gain");
  DriftMatrix dm;
  double shift = 0.0;
  std::vector<double> grid;
  if (!mode.empty()) {
    dm = family_drift(amp_mode_from_string(mode), g0, p.kappa);
    grid = symmetric_grid(c);
    j["model"] = "quadrature-symmetric";
    j["mode"] = mode;
    j["target_G0_dB"] = g0;
  } else {
    const OperatingPoint op = operating_point(c);
    const EffectiveCouplings ec = operating_couplings(p, op);
    dm = device_drift(c, op);
    grid = device_grid(c, op);
    for (double& w : grid) w -= op.omega_b_tilde;
    shift = op.omega_b_tilde - ec.frame;
    j["model"] = "quadrature-single-port";
    j["operating_point"] = op_json(op);
    j["stable"] = floquet_max_real(floquet_blocks(p, op.mf), c.N) < 0.0;
  }
  const std::vector<std::string> head{"detuning_Hz", "G_max_dB", "G_min_dB", "modulation_dB"};
  CsvWriter w(c.path("phase_gain.csv"), c.hash, head);
  std::size_t ic = 0;
  PhaseSensitiveGain at{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const PhaseSensitiveGain g = phase_sensitive_gain(dm, grid[i] + shift, 1);
    const double r[] = {hz(grid[i]), power_db(g.G_max), power_db(g.G_min), power_db(g.modulation)};
    w.row(r);
    if (std::abs(grid[i]) <= std::abs(grid[ic])) ic = i, at = g;
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
  j["centre"] = {{"detuning_Hz", hz(grid[ic])},
                 {"G_max_dB", power_db(at.G_max)},
                 {"G_min_dB", num(power_db(at.G_min))},
                 {"modulation_dB", num(power_db(at.modulation))}};
  write_json(c.path("phase_gain.json"), j);
  return 0;
}

// ------------------------------------------------------------ fits

std::vector<double> spectroscopy_grid(const CircuitParams& p) {
  const HybridizedParams h = hybridize(p);
  std::vector<double> w = linspace(h.omega_a - 3.0 * h.kappa_a, h.omega_a + 2.0 * h.kappa_a, 25);
  const auto b = linspace(h.omega_b - 3.0 * h.kappa_b, h.omega_b + 2.0 * h.kappa_b, 25);
  w.insert(w.end(), b.begin(), b.end());
  return w;
}

int cmd_fit_kerr(const Context& c, const std::string& data, double noise) {
  CircuitParams lin = c.cfg.circuit;
  lin.K_L = lin.K_R = 0.0;
  std::vector<SpectroscopySample> d;
  if (!data.empty()) {
    for (const auto& r : read_csv(data, 4)) d.push_back({watts(Dbm{r[0] + c.cfg.attenuation_db}), angular(Hz{r[1]}), {r[2], r[3]}});
  } else {
    const double pw[] = {-120.0, -105.0, -98.0, -94.0, -91.0, -89.0};
    d = synth_spectroscopy(c.cfg.circuit, pw, spectroscopy_grid(c.cfg.circuit), noise, c.seed);
  }
  json j = c.header("fit-kerr");
  j["source"] = data.empty() ? "synthetic" : data;
  j["fit"] = fit_json(fit_kerr(d, lin));
  write_json(c.path("fit_kerr.json"), j);
  return 0;
}

int cmd_fit_atten(const Context& c, const std::string& data, double noise, double pump_hz, double true_att) {
  const CircuitParams& p = c.cfg.circuit;
  double omega_g = pump_hz > 0.0 ? angular(Hz{pump_hz}) : operate(p, watts(Dbm{-73.0})).omega_g;
  std::vector<ProfileData> prof;
  if (!data.empty()) {
    std::map<double, ProfileData> by_power;
    for (const auto& r : read_csv(data, 3)) {
      ProfileData& pd = by_power[r[0]];
      pd.power_dbm = r[0];
      pd.omega.push_back(angular(Hz{r[1]}));
      pd.gain_db.push_back(r[2]);
    }
    for (auto& [k, v] : by_power) prof.push_back(std::move(v));
  } else {
    const HybridizedParams h = hybridize(p);
    const OperatingPoint ref = operate(p, watts(Dbm{-73.0}));
    const auto w = linspace(ref.omega_b_tilde - 2.0 * h.kappa_b, ref.omega_b_tilde + 2.0 * h.kappa_b, 81);
    const double set[] = {-8.1, -7.1, -6.6, -6.1};
    prof = synth_single_pump_profiles(p, omega_g, set, true_att, w, noise, c.seed, c.N);
  }
  AttenuationFitOptions o;
  o.N = c.N;
  json j = c.header("fit-atten");
  j["source"] = data.empty() ? "synthetic" : data;
  j["f_g_Hz"] = hz(omega_g);
  j["fit"] = fit_json(fit_attenuation(prof, p, omega_g, o));
  write_json(c.path("fit_atten.json"), j);
  return 0;
}

int cmd_fit_pumps(const Context& c, const std::string& data, double noise) {
  const CircuitParams& p = c.cfg.circuit;
  ProfileData d;
  if (!data.empty()) {
    for (const auto& r : read_csv(data, 2)) {
      d.omega.push_back(angular(Hz{r[0]}));
      d.gain_db.push_back(r[1]);
    }
  } else {
    if (!c.cfg.gain || !c.cfg.conversion) fail(ErrorCode::invalid_argument, "synthetic pump fit needs both pumps");
    const double a = c.cfg.attenuation_db;
    const double pg = c.cfg.gain->power_dbm + a, pc = c.cfg.conversion->power_dbm + a;
    const OperatingPoint op = operate(p, watts(Dbm{pg}), watts(Dbm{pc}));
    const double kb = hybridize(p).kappa_b;
    const auto w = linspace(op.omega_b_tilde - 2.0 * kb, op.omega_b_tilde + 2.0 * kb, 61);
    d = synth_double_pump_profile(p, pg, pc, w, noise, c.seed, c.N);
  }
  PumpFitOptions o;
  o.N = c.N;
  json j = c.header("fit-pumps");
  j["source"] = data.empty() ? "synthetic" : data;
  j["fit"] = fit_json(fit_pump_powers(d, p, c.cfg.attenuation_db, o));
  write_json(c.path("fit_pumps.json"), j);
  return 0;
}

int cmd_calibrate(const Context& c, const std::string& data, double noise, double kappa_r_hz, double f_r_hz) {
  const double kr = angular(Hz{kappa_r_hz}), wr = angular(Hz{f_r_hz});
  std::vector<DephasingSample> d;
  if (!data.empty()) {
    for (const auto& r : read_csv(data, 3)) d.push_back({r[0], angular(Hz{r[1]}), angular(Hz{r[2]})});
  } else {
    const DephasingModelParams m{two_pi * 0.51e6, 5300.0, kr, wr};
    const double V[] = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06};
    d = synth_dephasing(m, V, linspace(-two_pi * 8e6, two_pi * 8e6, 81), noise, c.seed);
  }
  json j = c.header("calibrate");
  j["source"] = data.empty() ? "synthetic" : data;
  j["kappa_r_Hz"] = kappa_r_hz;
  j["f_r_Hz"] = f_r_hz;
  j["fit"] = fit_json(fit_dephasing(d, kr, wr));
  write_json(c.path("calibrate.json"), j);
  return 0;
}

int report(ErrorCode code, const std::string& message) {
  std::cerr << json{{"error", to_string(code)}, {"code", static_cast<int>(code)}, {"message", message}}.dump() << '\n';
  return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward models and fits for a double-pumped Kerr dimer amplifier"};
  app.footer(help_footer);
  app.require_subcommand(1);
  app.fallthrough();

  Context c;
  const char* env = std::getenv("DIMERPA_OUT");
  c.out_dir = env != nullptr && *env != '\0' ? env : ".";
  app.add_option("--params", c.params, "Parameter JSON file")->required()->check(CLI::ExistingFile);
  app.add_option("--out", c.out_dir, "Output directory (default $DIMERPA_OUT or .)");
  app.add_option("--set", c.sets, "Override a config entry, dotted.key=value (repeatable)");
  app.add_option("--model", c.model, "Response model: quadrature or floquet")
      ->check(CLI::IsMember({"quadrature", "floquet"}));
  app.add_option("--floquet-order", c.N, "Floquet truncation order N (harmonics -N..N)");
  app.add_option("--grid", c.grid, "Frequency grid f0:f1:points in Hz");
  app.add_option("--threads", c.threads, "Worker threads; results do not depend on it");
  app.add_option("--seed", c.seed, "Seed for synthetic data");
  app.add_flag("--emit-plot-data", c.emit_plot, "Also write multi-curve plot data files");

  auto* hyb = app.add_subcommand("hybridize", "Normal-mode parameters of the dimer");
  auto* mf = app.add_subcommand("meanfield", "Mean-field branches at the configured pumps");
  std::string sweep;
  auto* stab = app.add_subcommand("stability", "Classify the operating point or sweep the cooperativity gap");
  stab->add_option("--sweep-gap", sweep, "Gap sweep a:b:n in the balanced model");

  double plot_g0 = 20.0;
  double plot_pg = -76.0;
  std::string pc_sweep = "-72:-62:21";
  auto* gain = app.add_subcommand("gain", "Gain and phase of the reflected signal at the operating point");
  gain->add_option("--plot-g0", plot_g0, "Gain target of the family curves, dB");
  gain->add_option("--plot-pg", plot_pg, "Gain pump power of the conversion sweep, dBm");
  gain->add_option("--pc-sweep", pc_sweep, "Conversion powers a:b:n in dBm for the plot data");

  std::string mode, modes = "SP,EP,BP", g0s = "10,15,20,25";
  double g0 = 20.0;
  auto* noise = app.add_subcommand("noise", "Added noise; balanced family via --mode or the device operating point");
  noise->add_option("--mode", mode, "SP, EP or BP");
  noise->add_option("--g0", g0, "Target gain, dB");

  bool device = false;
  auto* gbw = app.add_subcommand("gbw", "Bandwidth versus gain");
  gbw->add_option("--mode", modes, "Comma-separated modes among SP, EP, BP");
  gbw->add_option("--g0", g0s, "Comma-separated gain targets, dB");
  gbw->add_flag("--device", device, "Single-pump scan of the device in the Floquet model");

  int budget = 200;
  auto* tune = app.add_subcommand("tune-bp", "Widest-band pump setting at a target gain");
  tune->add_option("--g0", g0, "Target gain, dB");
  tune->add_flag("--device", device, "Tune the device instead of the balanced model");
  tune->add_option("--budget", budget, "Maximum profile evaluations");

  auto* pg = app.add_subcommand("phase-gain", "Phase-sensitive gain extremes");
  pg->add_option("--mode", mode, "SP, EP or BP; default is the device operating point");
  pg->add_option("--g0", g0, "Target gain, dB");

  std::string data;
  double noise_level = -1.0, pump_hz = 0.0, true_att = -66.4, kappa_r_hz = 2.54e6, f_r_hz = 8.06e9;
  auto add_data = [&](CLI::App* s, const char* cols) {
    s->add_option("--data", data, std::string("CSV with header ") + cols)->check(CLI::ExistingFile);
    s->add_option("--noise", noise_level, "Noise level of synthetic data");
  };
  auto* fk = app.add_subcommand("fit-kerr", "Kerr coefficients from reflection spectroscopy");
  add_data(fk, "P_dBm,f_Hz,re,im");
  auto* fa = app.add_subcommand("fit-atten", "Line attenuation from single-pump gain profiles");
  add_data(fa, "set_dBm,f_Hz,gain_dB");
  fa->add_option("--pump-freq", pump_hz, "Gain pump frequency, Hz");
  fa->add_option("--true-atten", true_att, "Attenuation used for synthetic data, dB");
  auto* fp = app.add_subcommand("fit-pumps", "Pump powers from a double-pump gain profile");
  add_data(fp, "f_Hz,gain_dB");
  auto* cal = app.add_subcommand("calibrate", "Readout attenuation from qubit dephasing");
  add_data(cal, "V,detuning_Hz,Gamma_phi_Hz");
  cal->add_option("--kappa-r", kappa_r_hz, "Readout linewidth, Hz");
  cal->add_option("--f-r", f_r_hz, "Readout frequency, Hz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorCode::invalid_argument, e.what());
  }

  auto level = [&](double fallback) { return noise_level >= 0.0 ? noise_level : fallback; };
  try {
    c.load();
    if (*hyb) return cmd_hybridize(c);
    if (*mf) return cmd_meanfield(c);
    if (*stab) return cmd_stability(c, sweep);
    if (*gain) return cmd_gain(c, plot_g0, plot_pg, pc_sweep);
    if (*noise) return cmd_noise(c, mode, g0);
    if (*gbw) return cmd_gbw(c, modes, g0s, device);
    if (*tune) return cmd_tune(c, g0, device, budget);
    if (*pg) return cmd_phase_gain(c, mode, g0);
    if (*fk) return cmd_fit_kerr(c, data, level(0.01));
    if (*fa) return cmd_fit_atten(c, data, level(0.05), pump_hz, true_att);
    if (*fp) return cmd_fit_pumps(c, data, level(0.05));
    if (*cal) return cmd_calibrate(c, data, level(0.002), kappa_r_hz, f_r_hz);
  } catch (const Error& e) {
    return report(e.code(), e.what());
  } catch (const json::exception& e) {
    return report(ErrorCode::schema, e.what());
  } catch (const std::exception& e) {
    return report(ErrorCode::solver, e.what());
  }
  return report(ErrorCode::invalid_argument, "no subcommand");
}
