// Command-line driver for the modal projection engines.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "modal/modal.hpp"

namespace {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_io = 4, exit_internal = 5 };

// Output sink: stdout or a file opened up front so I/O errors surface early.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw modal::IoError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw modal::IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int run(const modal::RunConfig& cfg, const std::string& save_basis) {
  using modal::RunMode;
  cfg.validate();

  if (!save_basis.empty()) {
    const auto ws = modal::make_workspace(cfg);
    modal::save_basis(save_basis, ws.tables, ws.grid);
  }

  switch (cfg.mode) {
    case RunMode::gamma2d:
    case RunMode::gamma3d: {
      const auto g = cfg.mode == RunMode::gamma2d ? modal::run_gamma2d(cfg) : modal::run_gamma3d(cfg);
      const std::vector<std::string> provenance = {"config " + cfg.describe()};
      if (cfg.format == modal::GammaFormat::bin) {
        modal::serialize_gamma(cfg.out, g, cfg.format);
        std::cerr << "# config " << cfg.describe() << '\n';
      } else {
        Sink sink(cfg.out);
        modal::write_gamma_csv(sink.stream(), g, provenance);
        sink.finish();
      }
      break;
    }
    case RunMode::crosscheck: {
      const auto rep = modal::run_crosscheck(cfg);
      Sink sink(cfg.out);
      modal::write_crosscheck_csv(sink.stream(), cfg, rep);
      sink.finish();
      break;
    }
    case RunMode::convergence: {
      const auto rows = modal::run_convergence_study(cfg);
      Sink sink(cfg.out);
      modal::write_convergence_csv(sink.stream(), cfg, rows);
      sink.finish();
      break;
    }
    case RunMode::bench: {
      const auto rows = modal::run_bench(cfg);
      Sink sink(cfg.out);
      modal::write_bench_csv(sink.stream(), cfg, rows);
      sink.finish();
      break;
    }
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modal projection matrix engines (2D separable and 3D direct)"};

  // Flags are collected as strings and applied after the config file so
  // that explicit flags win.
  const std::vector<std::pair<std::string, std::string>> flag_specs = {
      {"mode", "gamma2d | gamma3d | crosscheck | convergence | bench (default gamma3d)"},
      {"lmin", "smallest multipole (default 2)"},
      {"lmax", "largest multipole (default 32)"},
      {"pmax", "basis functions per dimension (default 4)"},
      {"mapping", "'default' or a modalmap v1 file"},
      {"basis", "modalbasis v1 file to use instead of the synthetic basis"},
      {"r-samples", "radial sample count of the default grid (default 216)"},
      {"integrator", "trap | hermite | spline (default trap)"},
      {"h2", "gosper | exact (default gosper)"},
      {"mu-points", "Gauss-Legendre nodes, 0 = automatic"},
      {"block", "3D block size (default 64)"},
      {"workers", "worker threads (default 1)"},
      {"repeats", "bench repetitions (default 5)"},
      {"out", "output path (default stdout)"},
      {"format", "csv | bin (default csv)"},
  };
  std::map<std::string, std::string> flags;
  for (const auto& [name, help] : flag_specs) app.add_option("--" + name, flags[name], help);
  std::string config_path;
  std::string save_basis;
  app.add_option("--config", config_path, "key=value configuration file; flags override it");
  app.add_option("--save-basis", save_basis, "also write the basis tables used to this modalbasis v1 file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    modal::RunConfig cfg;
    if (!config_path.empty()) modal::apply_config_file(cfg, config_path);
    for (const auto& [name, help] : flag_specs) {
      if (app.count("--" + name) > 0) modal::set_config_value(cfg, name, flags[name]);
    }
    return run(cfg, save_basis);
  } catch (const modal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const modal::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const modal::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_internal;
  }
}
