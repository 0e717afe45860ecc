#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "modal/harness.hpp"

using Catch::Matchers::ContainsSubstring;

TEST_CASE("config file values and flag precedence", "[harness]") {
  modal::RunConfig cfg;
  std::istringstream file(
      "# comment line\n"
      "mode = crosscheck\n"
      "lmax=24   # trailing comment\n"
      "integrator=spline\n"
      "\n"
      "workers=3\n");
  modal::apply_config_file(cfg, file);
  CHECK(cfg.mode == modal::RunMode::crosscheck);
  CHECK(cfg.l_max == 24);
  CHECK(cfg.integrator == modal::Integrator::spline);
  CHECK(cfg.workers == 3);
  // Flags are applied afterwards and win.
  modal::set_config_value(cfg, "lmax", "30");
  CHECK(cfg.l_max == 30);
  CHECK(cfg.workers == 3);
}

TEST_CASE("config errors", "[harness]") {
  modal::RunConfig cfg;
  CHECK_THROWS_AS(modal::set_config_value(cfg, "colour", "blue"), modal::ConfigError);
  CHECK_THROWS_AS(modal::set_config_value(cfg, "lmax", "many"), modal::ConfigError);
  CHECK_THROWS_AS(modal::set_config_value(cfg, "mode", "fast"), modal::ConfigError);
  std::istringstream bad("lmax 20\n");
  CHECK_THROWS_AS(modal::apply_config_file(cfg, bad), modal::ConfigError);

  auto invalid = [](auto mutate) {
    modal::RunConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(invalid([](auto& c) { c.l_min = 1; }).validate(), modal::ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.l_max = 1; }).validate(), modal::ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.workers = 0; }).validate(), modal::ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.block = 0; }).validate(), modal::ConfigError);
  CHECK_THROWS_AS(invalid([](auto& c) { c.format = modal::GammaFormat::bin; }).validate(), modal::ConfigError);
  CHECK_NOTHROW(modal::RunConfig{}.validate());
}

TEST_CASE("describe lists every resolved setting", "[harness]") {
  modal::RunConfig cfg;
  cfg.l_max = 40;
  const auto text = cfg.describe();
  for (const char* key : {"mode=gamma3d", "lmin=2", "lmax=40", "pmax=4", "mapping=default", "r-samples=216",
                          "integrator=trap", "h2=gosper", "block=64", "workers=1", "format=csv",
                          "normalisation=frobenius"}) {
    CHECK_THAT(text, ContainsSubstring(key));
  }
  CHECK_THAT(text, ContainsSubstring("mu-points=" + std::to_string(modal::default_mu_points(40))));
}

TEST_CASE("workspace honours a mapping file", "[harness]") {
  const std::string path = "harness_mapping.txt";
  modal::save_mode_mapping(path, modal::ModeMapping(2, {{0, 0, 0}, {1, 1, 1}}));
  modal::RunConfig cfg;
  cfg.l_max = 8;
  cfg.p_max = 2;
  cfg.mapping = path;
  const auto g = modal::run_gamma3d(cfg);
  CHECK(g.size() == 2);
  cfg.mapping = "does-not-exist.txt";
  CHECK_THROWS_AS(modal::run_gamma3d(cfg), modal::IoError);
}

TEST_CASE("crosscheck report", "[harness]") {
  modal::RunConfig cfg;
  cfg.l_max = 16;
  cfg.p_max = 2;
  const auto rep = modal::run_crosscheck(cfg);
  CHECK(rep.exact.max_relative <= 1e-10);
  CHECK(rep.exact.rmse_percent < rep.gosper.rmse_percent);
  CHECK(rep.gosper_envelope > 0.0);
  CHECK(rep.gosper_envelope < 0.025);
  std::ostringstream out;
  modal::write_crosscheck_csv(out, cfg, rep);
  CHECK_THAT(out.str(), ContainsSubstring("# modalcrosscheck v1 mode=gamma3d"));
  CHECK_THAT(out.str(), ContainsSubstring("2d-vs-3d-exact,"));
}

TEST_CASE("convergence study rows", "[harness]") {
  modal::RunConfig cfg;
  cfg.l_max = 8;
  cfg.p_max = 2;
  const auto rows = modal::run_convergence_study(cfg, {54, 216}, 432);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) CHECK(std::isfinite(r.rmse_percent));
  // Each integrator improves with resolution.
  for (std::size_t k = 0; k < rows.size(); k += 2) CHECK(rows[k + 1].rmse_percent < rows[k].rmse_percent);
  std::ostringstream out;
  modal::write_convergence_csv(out, cfg, rows);
  CHECK_THAT(out.str(), ContainsSubstring("integrator,r_samples,rmse_percent,seconds"));
  cfg.basis = "x.basis";
  cfg.mode = modal::RunMode::convergence;
  CHECK_THROWS_AS(cfg.validate(), modal::ConfigError);
}

TEST_CASE("bench rows and repeatability", "[harness]") {
  modal::RunConfig cfg;
  cfg.l_max = 24;
  cfg.p_max = 2;
  cfg.repeats = 5;
  cfg.workers = 2;
  const auto rows = modal::run_bench(cfg);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].path == "2d-naive");
  CHECK(rows[1].path == "2d-ptable");
  CHECK(rows[1].speedup_vs_naive > 1.0);
  CHECK(rows[2].path == "3d-naive");
  CHECK(rows[3].workers == 1);
  CHECK(rows[4].workers == 2);
  CHECK(rows[0].iterations == 16.0);
  CHECK(rows[2].iterations == static_cast<double>(modal::enumerate_domain(2, 24).size()));
  std::ostringstream out;
  modal::write_bench_csv(out, cfg, rows);
  CHECK_THAT(out.str(), ContainsSubstring("path,workers,mean_seconds,iterations,iterations_per_second,speedup_vs_naive"));

  modal::RunConfig heavy;
  heavy.l_max = 48;
  heavy.p_max = 4;
  const auto a = modal::run_bench(heavy, {false, true, false});
  const auto b = modal::run_bench(heavy, {false, true, false});
  REQUIRE(a.size() == 1);
  CHECK(std::fabs(a[0].mean_seconds / b[0].mean_seconds - 1.0) <= 0.25);
}
