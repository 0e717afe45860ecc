#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "modal/compare.hpp"
#include "modal/serialize.hpp"

namespace {

modal::GammaMatrix random_matrix(std::size_t n, unsigned seed) {
  modal::GammaMetadata meta;
  meta.engine = "modal3d";
  meta.l_min = 2;
  meta.l_max = 32;
  meta.integrator = "trap";
  modal::GammaMatrix g(n, meta);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& v : g.data()) v = d(rng) * std::pow(10.0, 20.0 * d(rng));
  return g;
}

}  // namespace

TEST_CASE("csv round trip is exact", "[serialize]") {
  const auto g = random_matrix(7, 1);
  std::stringstream buf;
  modal::write_gamma_csv(buf, g, {"config lmax=32"});
  const auto text = buf.str();
  CHECK(text.rfind("# modalgamma v1 engine=modal3d nmax=7 lmin=2 lmax=32 integrator=trap\n# config lmax=32\n", 0) == 0);
  const auto back = modal::read_gamma_csv(buf);
  CHECK(back.same_values(g));
  CHECK(modal::max_relative_deviation(back, g) <= 1e-15);
  CHECK(back.meta().engine == "modal3d");
  CHECK(back.meta().l_max == 32);
}

TEST_CASE("bin round trip is bitwise", "[serialize]") {
  const auto g = random_matrix(9, 2);
  std::stringstream buf;
  modal::write_gamma_bin(buf, g);
  const auto bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "MGAM");
  CHECK(bytes.size() == 24 + 81 * 8);
  CHECK(modal::read_gamma_bin(buf).same_values(g));
}

TEST_CASE("bin errors are distinguished", "[serialize]") {
  using K = modal::FormatError::Kind;
  const auto g = random_matrix(3, 3);
  std::stringstream buf;
  modal::write_gamma_bin(buf, g);
  const auto bytes = buf.str();
  auto kind_of = [](const std::string& data) {
    std::istringstream in(data);
    try {
      (void)modal::read_gamma_bin(in);
    } catch (const modal::FormatError& e) {
      return e.kind();
    }
    FAIL("expected FormatError");
    return K::corrupt_header;
  };
  CHECK(kind_of(bytes.substr(0, bytes.size() - 5)) == K::truncated_payload);
  CHECK(kind_of(bytes + "xx") == K::dimension_mismatch);
  CHECK(kind_of("MGAX" + bytes.substr(4)) == K::corrupt_header);
  CHECK(kind_of(bytes.substr(0, 10)) == K::corrupt_header);
  std::string wrong_version = bytes;
  wrong_version[4] = 2;
  CHECK(kind_of(wrong_version) == K::corrupt_header);
  std::string non_square = bytes;
  non_square[16] = 4;
  CHECK(kind_of(non_square) == K::dimension_mismatch);
}

TEST_CASE("csv errors are distinguished", "[serialize]") {
  using K = modal::FormatError::Kind;
  auto kind_of = [](const std::string& data) {
    std::istringstream in(data);
    try {
      (void)modal::read_gamma_csv(in);
    } catch (const modal::FormatError& e) {
      return e.kind();
    }
    FAIL("expected FormatError");
    return K::corrupt_header;
  };
  const std::string head = "# modalgamma v1 engine=modal2d nmax=2 lmin=2 lmax=4 integrator=trap\n";
  CHECK(kind_of("# modalgamma v2 engine=x nmax=2 lmin=2 lmax=4 integrator=trap\n1,2\n3,4\n") == K::corrupt_header);
  CHECK(kind_of(head + "1,2\n") == K::truncated_payload);
  CHECK(kind_of(head + "1,2,3\n3,4\n") == K::dimension_mismatch);
  CHECK(kind_of(head + "1\n3,4\n") == K::dimension_mismatch);
  CHECK(kind_of(head + "1,2\n3,4\n5,6\n") == K::dimension_mismatch);
  std::istringstream ok(head + "1,2\n3,4\n");
  CHECK(modal::read_gamma_csv(ok)(1, 0) == 3.0);
}

TEST_CASE("format names", "[serialize]") {
  CHECK(modal::parse_gamma_format("csv") == modal::GammaFormat::csv);
  CHECK(modal::parse_gamma_format("bin") == modal::GammaFormat::bin);
  CHECK_THROWS_AS(modal::parse_gamma_format("hdf5"), modal::ConfigError);
}

TEST_CASE("rmse_percent is symmetric and scale invariant", "[compare][property]") {
  const auto a = random_matrix(6, 4);
  auto b = a;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> d(0.0, 0.01);
  for (double& v : b.data()) v *= 1.0 + d(rng);
  const double r = modal::rmse_percent(a, b);
  CHECK(r > 0.0);
  CHECK(r == modal::rmse_percent(b, a));
  auto scaled = b;
  for (double& v : scaled.data()) v *= -1e-7 * -3.0;
  CHECK_THAT(modal::rmse_percent(a, scaled), Catch::Matchers::WithinRel(r, 1e-12));
  CHECK(modal::rmse_percent(a, a) == 0.0);
}

TEST_CASE("rmse_percent and max relative deviation edge cases", "[compare]") {
  modal::GammaMatrix z(2), one(2), three(3);
  one(0, 0) = 1.0;
  CHECK_THROWS_AS(modal::rmse_percent(z, one), modal::NumericalError);
  CHECK_THROWS_AS(modal::rmse_percent(one, three), std::invalid_argument);
  modal::GammaMatrix two = one;
  two(0, 0) = 2.0;
  CHECK(modal::max_relative_deviation(one, two) == 0.5);
  CHECK(modal::max_relative_deviation(z, z) == 0.0);
  CHECK(modal::frobenius_norm(two) == 2.0);
  // Orthogonal unit matrices: 100 * sqrt(2 / 4).
  modal::GammaMatrix e11(2);
  e11(1, 1) = 1.0;
  CHECK_THAT(modal::rmse_percent(one, e11), Catch::Matchers::WithinRel(100.0 * std::sqrt(0.5), 1e-15));
}
