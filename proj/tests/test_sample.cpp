#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "tssp/dependence.hpp"
#include "tssp/error.hpp"
#include "tssp/sample.hpp"

using namespace tssp;

namespace {

const std::filesystem::path kData = TSSP_TEST_DATA;

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& body) {
    path = std::filesystem::temp_directory_path() /
           ("tssp_sample_" + std::to_string(std::hash<std::string>{}(body)) + ".csv");
    std::ofstream(path) << body;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::domain;
}

}  // namespace

TEST_SUITE("sample") {

TEST_CASE("line data loads with its header skipped") {
  const auto values = load_values_csv(kData / "line.csv");
  REQUIRE(values.size() == 250);
  const Sample s(values);
  const auto mom = SampleMoments::of(s.values());
  CHECK(mom.mean == doctest::Approx(219.89054358).epsilon(1e-12));
  CHECK(mom.stddev == doctest::Approx(1.80484292423715).epsilon(1e-12));
  CHECK(s.min() <= s.sorted()[1]);
  CHECK(s.sorted().back() == s.max());
}

TEST_CASE("malformed value files") {
  TempFile bad("value\n1.0\n2.0\nabc\n");
  try {
    load_values_csv(bad.path);
    FAIL("expected an input error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::input);
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
  TempFile empty("value\n");
  CHECK(code_of([&] { load_values_csv(empty.path); }) == Errc::input);
  CHECK(code_of([&] { load_values_csv(kData / "missing.csv"); }) == Errc::input);
}

TEST_CASE("comments and blank lines are ignored") {
  TempFile f("# comment\n\n1.5\n 2.5 \n\n3\n");
  const auto v = load_values_csv(f.path);
  REQUIRE(v.size() == 3);
  CHECK(v[1] == 2.5);
}

TEST_CASE("degenerate samples") {
  CHECK(code_of([] { Sample({1.0}); }) == Errc::degenerate_sample);
  CHECK(code_of([] { SampleMoments::of(std::vector<double>{3.0, 3.0, 3.0}); }) ==
        Errc::degenerate_sample);
  CHECK(code_of([] { Sample({1.0, std::nan("")}); }) == Errc::domain);
}

TEST_CASE("paired data and the correlation estimate") {
  const auto pairs = load_pairs_csv(kData / "pairs.csv");
  REQUIRE(pairs.first.size() == 60);
  CHECK(estimate_rho(pairs) == doctest::Approx(0.416387687237266).epsilon(1e-10));

  PairedSample scaled = pairs;
  scaled.n1 = 9;
  scaled.n2 = 1;
  CHECK(estimate_rho_unchecked(scaled) == doctest::Approx(3.0 * 0.416387687237266).epsilon(1e-10));
  CHECK(code_of([&] { estimate_rho(scaled); }) == Errc::dependence_out_of_range);

  PairedSample flat = pairs;
  std::fill(flat.second.begin(), flat.second.end(), 1.0);
  CHECK(code_of([&] { estimate_rho(flat); }) == Errc::degenerate_pairs);
}

TEST_CASE("pairs file with a bad row") {
  TempFile f("x1,x2\n1,2\n3\n");
  CHECK(code_of([&] { load_pairs_csv(f.path); }) == Errc::input);
}

}
