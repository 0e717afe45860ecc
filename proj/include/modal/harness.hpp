#ifndef MODAL_HARNESS_HPP
#define MODAL_HARNESS_HPP

// Run configuration and the driver routines behind the command-line tool:
// single-engine runs, the 2D/3D cross-check, the integrator convergence
// study and the benchmark.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modal/basis.hpp"
#include "modal/compare.hpp"
#include "modal/error.hpp"
#include "modal/gamma_matrix.hpp"
#include "modal/geometry.hpp"
#include "modal/modal2d.hpp"
#include "modal/modal3d.hpp"
#include "modal/quadrature.hpp"
#include "modal/serialize.hpp"

namespace modal {

enum class RunMode { gamma2d, gamma3d, crosscheck, convergence, bench };

inline std::string_view to_string(RunMode m) noexcept {
  switch (m) {
    case RunMode::gamma2d: return "gamma2d";
    case RunMode::gamma3d: return "gamma3d";
    case RunMode::crosscheck: return "crosscheck";
    case RunMode::convergence: return "convergence";
    case RunMode::bench: return "bench";
  }
  return "?";
}

inline RunMode parse_run_mode(std::string_view s) {
  for (auto m : {RunMode::gamma2d, RunMode::gamma3d, RunMode::crosscheck, RunMode::convergence, RunMode::bench}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

struct RunConfig {
  RunMode mode = RunMode::gamma3d;
  int l_min = 2;
  int l_max = 32;
  int p_max = 4;
  std::string mapping = "default";  // "default" or a modalmap file
  std::string basis;                // optional modalbasis file; overrides synthesis
  int r_samples = 216;
  Integrator integrator = Integrator::trapezium;
  H2Mode h2_mode = H2Mode::gosper;
  int mu_points = 0;  // 0: default_mu_points(l_max)
  int block = default_block_size;
  int workers = 1;
  int repeats = 5;
  std::string out;  // empty: stdout
  GammaFormat format = GammaFormat::csv;

  int resolved_mu_points() const { return mu_points > 0 ? mu_points : default_mu_points(l_max); }

  void validate() const {
    if (l_min < 2) throw ConfigError("lmin must be >= 2");
    if (l_max < l_min) throw ConfigError("lmax must be >= lmin");
    if (l_max > 5000) throw ConfigError("lmax must be <= 5000");
    if (p_max < 1) throw ConfigError("pmax must be >= 1");
    if (r_samples < 12) throw ConfigError("r-samples must be >= 12");
    if (mu_points < 0 || mu_points > 16384) throw ConfigError("mu-points must be in [0, 16384]");
    if (block < 1) throw ConfigError("block must be >= 1");
    if (workers < 1 || workers > 1024) throw ConfigError("workers must be in [1, 1024]");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (format == GammaFormat::bin && mode != RunMode::gamma2d && mode != RunMode::gamma3d) {
      throw ConfigError("bin format is only available for gamma2d and gamma3d output");
    }
    if (format == GammaFormat::bin && out.empty()) throw ConfigError("bin format needs --out");
    if (mode == RunMode::convergence && !basis.empty()) {
      throw ConfigError("convergence study resamples the basis and cannot use a basis file");
    }
  }

  /// Every field, defaults resolved, as space-separated key=value pairs.
  std::string describe() const {
    std::ostringstream os;
    os << "mode=" << to_string(mode) << " lmin=" << l_min << " lmax=" << l_max << " pmax=" << p_max
       << " mapping=" << mapping << " basis=" << (basis.empty() ? "synthetic" : basis) << " r-samples=" << r_samples
       << " integrator=" << to_string(integrator) << " h2=" << to_string(h2_mode) << " mu-points=" << resolved_mu_points()
       << " block=" << block << " workers=" << workers << " repeats=" << repeats
       << " out=" << (out.empty() ? "-" : out) << " format=" << to_string(format)
       << " normalisation=frobenius";
    return os.str();
  }
};

/// Applies one key=value setting.  Keys are the long flag names.
inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  auto as_int = [&](int& dst) {
    if (!detail::parse_number(value, dst)) throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
  };
  if (key == "mode") cfg.mode = parse_run_mode(value);
  else if (key == "lmin") as_int(cfg.l_min);
  else if (key == "lmax") as_int(cfg.l_max);
  else if (key == "pmax") as_int(cfg.p_max);
  else if (key == "mapping") cfg.mapping = std::string(value);
  else if (key == "basis") cfg.basis = std::string(value);
  else if (key == "r-samples") as_int(cfg.r_samples);
  else if (key == "integrator") cfg.integrator = parse_integrator(value);
  else if (key == "h2") cfg.h2_mode = parse_h2_mode(value);
  else if (key == "mu-points") as_int(cfg.mu_points);
  else if (key == "block") as_int(cfg.block);
  else if (key == "workers") as_int(cfg.workers);
  else if (key == "repeats") as_int(cfg.repeats);
  else if (key == "out") cfg.out = std::string(value);
  else if (key == "format") cfg.format = parse_gamma_format(value);
  else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

/// key=value lines; blank lines and '#' comments ignored.
inline void apply_config_file(RunConfig& cfg, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view body(line.data() + first, last - first + 1);
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string_view s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string_view::npos ? std::string_view{} : s.substr(a, b - a + 1);
    };
    set_config_value(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  apply_config_file(cfg, in);
}

/// Inputs of both engines for one configuration.  Owns everything.
struct Workspace {
  RadialGrid grid;
  BasisTables tables;
  ModeMapping mapping;
  QuadratureRule rule;
  LegendreTable legendre;
  Integrator integrator = Integrator::trapezium;

  Modal2DInputs inputs_2d() const { return {tables, grid, mapping, rule, legendre, integrator}; }
  Modal3DInputs inputs_3d() const { return {tables, grid, mapping, integrator}; }
};

inline Workspace make_workspace(const RunConfig& cfg, std::optional<int> radial_override = std::nullopt) {
  Workspace ws;
  if (!cfg.basis.empty()) {
    auto file = load_basis(cfg.basis);
    ws.tables = std::move(file.tables);
    ws.grid = std::move(file.grid);
    ws.tables.validate();
  } else {
    ws.grid = default_radial_grid(radial_override.value_or(cfg.r_samples));
    ws.tables = synthesize_basis(cfg.p_max, cfg.l_min, cfg.l_max, ws.grid);
  }
  ws.mapping = cfg.mapping == "default" ? default_mode_mapping(std::min(cfg.p_max, ws.tables.p_max()))
                                        : load_mode_mapping(cfg.mapping);
  if (ws.mapping.p_max() > ws.tables.p_max()) throw ConfigError("mode mapping needs more basis functions than available");
  const int l_max = ws.tables.l_max();
  ws.rule = gauss_legendre(cfg.mu_points > 0 ? cfg.mu_points : default_mu_points(l_max));
  ws.legendre = legendre_table(l_max, ws.rule);
  ws.integrator = cfg.integrator;
  return ws;
}

inline GammaMatrix run_gamma2d(const RunConfig& cfg) {
  const auto ws = make_workspace(cfg);
  return gamma2d_matrix(ws.inputs_2d(), cfg.workers);
}

inline GammaMatrix run_gamma3d(const RunConfig& cfg) {
  const auto ws = make_workspace(cfg);
  return gamma3d_matrix(ws.inputs_3d(), {cfg.h2_mode, cfg.block, cfg.workers});
}

// ---------------------------------------------------------------------------

struct ComparisonReport {
  std::string label;
  double rmse_percent = 0.0;
  double max_relative = 0.0;
  double seconds_a = 0.0;
  double seconds_b = 0.0;
};

struct CrosscheckReport {
  ComparisonReport exact;   // 2D vs 3D with the exact 3j weight
  ComparisonReport gosper;  // 2D vs 3D with the Gosper weight
  double gosper_envelope = 0.0;  // max |h2_gosper / h2_exact - 1| over the domain
};

namespace detail {

template <class Fn>
double time_seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

inline double gosper_error_envelope(int l_min, int l_max) {
  const auto lnfact = LogFactorialTable::for_lmax(l_max);
  double worst = 0.0;
  enumerate_domain(l_min, l_max).for_each([&](const MultipoleTriple& t) {
    worst = std::max(worst, std::fabs(h2_gosper(t) / h2_exact(t, lnfact) - 1.0));
  });
  return worst;
}

/// 2D (table path) against 3D with both weights on identical inputs.
inline CrosscheckReport run_crosscheck(const RunConfig& cfg) {
  const auto ws = make_workspace(cfg);
  GammaMatrix g2, g3_exact, g3_gosper;
  const double t2 = detail::time_seconds([&] { g2 = gamma2d_matrix(ws.inputs_2d(), cfg.workers); });
  const double t3e = detail::time_seconds(
      [&] { g3_exact = gamma3d_matrix(ws.inputs_3d(), {H2Mode::exact, cfg.block, cfg.workers}); });
  const double t3g = detail::time_seconds(
      [&] { g3_gosper = gamma3d_matrix(ws.inputs_3d(), {H2Mode::gosper, cfg.block, cfg.workers}); });
  CrosscheckReport rep;
  rep.exact = {"2d-vs-3d-exact", rmse_percent(g2, g3_exact), max_relative_deviation(g2, g3_exact), t2, t3e};
  rep.gosper = {"2d-vs-3d-gosper", rmse_percent(g2, g3_gosper), max_relative_deviation(g2, g3_gosper), t2, t3g};
  const auto domain = enumerate_domain(ws.tables.l_min(), ws.tables.l_max());
  rep.gosper_envelope = domain.empty() ? 0.0 : gosper_error_envelope(ws.tables.l_min(), ws.tables.l_max());
  return rep;
}

inline void write_crosscheck_csv(std::ostream& out, const RunConfig& cfg, const CrosscheckReport& rep) {
  out << "# modalcrosscheck v1 " << cfg.describe() << '\n';
  out << "comparison,rmse_percent,max_relative,seconds_2d,seconds_3d\n";
  for (const auto* r : {&rep.exact, &rep.gosper}) {
    out << r->label << ',';
    detail::write_double(out, r->rmse_percent);
    out << ',';
    detail::write_double(out, r->max_relative);
    out << ',';
    detail::write_double(out, r->seconds_a);
    out << ',';
    detail::write_double(out, r->seconds_b);
    out << '\n';
  }
  out << "gosper_envelope,,";
  detail::write_double(out, rep.gosper_envelope);
  out << ",,\n";
}

// ---------------------------------------------------------------------------

struct ConvergenceRow {
  Integrator integrator = Integrator::trapezium;
  int radial_points = 0;
  double rmse_percent = 0.0;
  double seconds = 0.0;
};

inline const std::vector<int>& default_convergence_ladder() {
  static const std::vector<int> ladder = {54, 108, 216, 432, 864, 1768};
  return ladder;
}

inline constexpr int convergence_gold_points = 1768;

/// 3D engine with every integrator over a ladder of radial resolutions,
/// each compared against the spline result at the gold resolution.
inline std::vector<ConvergenceRow> run_convergence_study(const RunConfig& cfg,
                                                         const std::vector<int>& ladder = default_convergence_ladder(),
                                                         int gold_points = convergence_gold_points) {
  const Modal3DOptions opt{cfg.h2_mode, cfg.block, cfg.workers};
  auto compute = [&](Integrator method, int points) {
    auto ws = make_workspace(cfg, points);
    ws.integrator = method;
    return gamma3d_matrix(ws.inputs_3d(), opt);
  };
  const auto gold = compute(Integrator::spline, gold_points);
  std::vector<ConvergenceRow> rows;
  for (auto method : {Integrator::trapezium, Integrator::hermite, Integrator::spline}) {
    for (int points : ladder) {
      GammaMatrix g;
      const double secs = detail::time_seconds([&] { g = compute(method, points); });
      rows.push_back({method, points, rmse_percent(g, gold), secs});
    }
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& out, const RunConfig& cfg, const std::vector<ConvergenceRow>& rows) {
  out << "# modalconvergence v1 gold=spline@" << convergence_gold_points << ' ' << cfg.describe() << '\n';
  out << "integrator,r_samples,rmse_percent,seconds\n";
  for (const auto& r : rows) {
    out << to_string(r.integrator) << ',' << r.radial_points << ',';
    detail::write_double(out, r.rmse_percent);
    out << ',';
    detail::write_double(out, r.seconds);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

struct BenchRow {
  std::string path;
  int workers = 1;
  double mean_seconds = 0.0;
  double iterations = 0.0;       // matrix cells (2D) or flattened triples (3D)
  double iterations_per_second = 0.0;
  double speedup_vs_naive = 1.0;
};

struct BenchOptions {
  bool include_2d = true;
  bool include_3d = true;
  bool include_naive = true;
};

/// Times each path `cfg.repeats` times and reports the mean.
inline std::vector<BenchRow> run_bench(const RunConfig& cfg, const BenchOptions& opt = {}) {
  const auto ws = make_workspace(cfg);
  const double cells = static_cast<double>(ws.mapping.n_max()) * ws.mapping.n_max();
  const double triples = static_cast<double>(enumerate_domain(ws.tables.l_min(), ws.tables.l_max()).size());

  auto mean_time = [&](const std::function<void()>& fn) {
    double total = 0.0;
    for (int k = 0; k < cfg.repeats; ++k) total += detail::time_seconds(fn);
    return total / cfg.repeats;
  };
  auto row = [](std::string path, int workers, double secs, double iters) {
    return BenchRow{std::move(path), workers, secs, iters, secs > 0 ? iters / secs : 0.0, 1.0};
  };

  std::vector<BenchRow> rows;
  if (opt.include_2d) {
    const auto in = ws.inputs_2d();
    std::optional<double> naive;
    if (opt.include_naive) {
      naive = mean_time([&] { (void)gamma2d_matrix_naive(in, cfg.workers); });
      rows.push_back(row("2d-naive", cfg.workers, *naive, cells));
    }
    const double fast = mean_time([&] { (void)gamma2d_matrix(in, cfg.workers); });
    rows.push_back(row("2d-ptable", cfg.workers, fast, cells));
    if (naive) rows.back().speedup_vs_naive = *naive / fast;
  }
  if (opt.include_3d) {
    const auto in = ws.inputs_3d();
    std::optional<double> naive;
    if (opt.include_naive) {
      naive = mean_time([&] { (void)gamma3d_naive(in, cfg.h2_mode); });
      rows.push_back(row("3d-naive", 1, *naive, triples));
    }
    std::vector<int> counts = {1};
    if (cfg.workers > 1) counts.push_back(cfg.workers);
    for (int w : counts) {
      const double t = mean_time([&] { (void)gamma3d_matrix(in, {cfg.h2_mode, cfg.block, w}); });
      rows.push_back(row("3d-blocked", w, t, triples));
      if (naive) rows.back().speedup_vs_naive = *naive / t;
    }
  }
  return rows;
}

inline void write_bench_csv(std::ostream& out, const RunConfig& cfg, const std::vector<BenchRow>& rows) {
  out << "# modalbench v1 " << cfg.describe() << '\n';
  out << "path,workers,mean_seconds,iterations,iterations_per_second,speedup_vs_naive\n";
  for (const auto& r : rows) {
    out << r.path << ',' << r.workers << ',';
    detail::write_double(out, r.mean_seconds);
    out << ',';
    detail::write_double(out, r.iterations);
    out << ',';
    detail::write_double(out, r.iterations_per_second);
    out << ',';
    detail::write_double(out, r.speedup_vs_naive);
    out << '\n';
  }
}

}  // namespace modal

#endif  // MODAL_HARNESS_HPP
