#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>

#include "msda/csv.hpp"
#include "msda/error.hpp"
#include "msda/timeseries.hpp"

using namespace msda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "msda_test_timeseries";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  csv::write_file(p, text, "test");
  return p;
}

ObservationSeries minute_grid(double span, double step = 1.0) {
  std::vector<double> t, y;
  for (double s = 0; s <= span + 1e-9; s += step) {
    t.push_back(s);
    y.push_back(100.0 + 10.0 * std::sin(s / 17.0));
  }
  return {t, y};
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("load_observations parses time,value rows") {
  const auto s = load_observations(write_text("two.csv", "0,100\n60,120\n"));
  REQUIRE(s.size() == 2);
  CHECK(s.time(0) == 0.0);
  CHECK(s.time(1) == 60.0);
  CHECK(s.value(0) == 100.0);
  CHECK(s.value(1) == 120.0);
  CHECK(s.gap(1) == 60.0);
}

TEST_CASE("load_observations rejects bad files") {
  CHECK_THROWS_WITH(load_observations(write_text("rev.csv", "60,120\n0,100\n")),
                    doctest::Contains("non-monotone"));
  CHECK_THROWS_WITH(load_observations(write_text("empty.csv", "")),
                    doctest::Contains("too few rows"));
  const auto missing = scratch("does_not_exist.csv");
  const std::string expected = "load_observations: file not found: " + missing.string();
  CHECK_THROWS_WITH(load_observations(missing), expected.c_str());
  CHECK(code_of([] { load_observations(write_text("bad.csv", "0,abc\n1,2\n")); }) == Errc::parse);
  CHECK(code_of([] { load_observations(write_text("nan.csv", "0,nan\n1,2\n")); }) == Errc::parse);
}

TEST_CASE("observations round-trip bit-exactly") {
  const ObservationSeries s({0.0, 0.1, 1.0 / 3.0}, {1e-300, -2.5, 123456.789012345});
  const auto p = scratch("rt.csv");
  save_observations(s, p);
  const auto back = load_observations(p);
  REQUIRE(back.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(back.time(j) == s.time(j));
    CHECK(back.value(j) == s.value(j));
  }
}

TEST_CASE("load_kicks computes typical intensity and alpha") {
  const auto k = load_kicks(write_text("k.csv", "10,1\n20,3\n"), 100.0);
  CHECK(k.typical_intensity() == 2.0);
  CHECK(k.alpha_kick() == 50.0);
  CHECK(load_kicks(write_text("k0.csv", ""), 100.0).empty());
  CHECK_THROWS_WITH(load_kicks(write_text("kneg.csv", "10,-1\n"), 100.0),
                    doctest::Contains("negative intensity"));
  CHECK_THROWS_WITH(load_kicks(write_text("krev.csv", "20,1\n10,1\n"), 100.0),
                    doctest::Contains("non-monotone"));
}

TEST_CASE("kick intensity intervals") {
  const KickSeries k({10.0, 20.0, 30.0}, {1.0, 2.0, 4.0}, 7.0);
  CHECK(k.intensity_strictly_between(10.0, 30.0) == 2.0);
  CHECK(k.intensity_strictly_between(30.0, 10.0) == 2.0);
  CHECK(k.intensity_strictly_between(0.0, 40.0) == 7.0);
  // a kick at the left end of a gap belongs to it, one at the right end does not
  CHECK(k.intensity_in_gap(10.0, 20.0) == 1.0);
  CHECK(k.intensity_in_gap(20.0, 30.0) == 2.0);
  CHECK(k.intensity_in_gap(0.0, 10.0) == 0.0);
  CHECK(k.rescaled(14.0).alpha_kick() == doctest::Approx(2.0 * k.alpha_kick()));
}

TEST_CASE("h3 keeps every fifth minute") {
  const auto dense = minute_grid(600);
  const auto sub = subsample(dense, MeasurementSpec::h3(5.0));
  REQUIRE(sub.size() == 121);
  for (std::size_t j = 0; j < sub.size(); ++j) {
    CHECK(sub.time(j) == 5.0 * static_cast<double>(j));
    CHECK(sub.value(j) == dense.value(5 * j));
  }
}

TEST_CASE("h3 snaps an unrepresentable period to the nearest dense sample") {
  const auto dense = minute_grid(100);
  const auto sub = subsample(dense, MeasurementSpec::h3(2.4));
  for (std::size_t j = 1; j < sub.size(); ++j) {
    CHECK(std::abs(sub.time(j) - std::round(2.4 * static_cast<double>(j))) < 1e-12);
  }
}

TEST_CASE("h2 gaps stay in bounds over many draws") {
  const auto dense = minute_grid(2.0e5);
  const auto sub = subsample(dense, MeasurementSpec::h2(12345));
  REQUIRE(sub.size() > 1000);
  double lo = 1e9, hi = 0.0, sum = 0.0;
  for (std::size_t j = 1; j < sub.size(); ++j) {
    const double g = sub.gap(j);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    sum += g;
  }
  const double mean = sum / static_cast<double>(sub.size() - 1);
  CHECK(lo >= 60.0);
  CHECK(hi <= 90.0);
  CHECK(std::abs(mean - 75.0) < 1.0);
}

TEST_CASE("h2 is reproducible from its seed") {
  const auto dense = minute_grid(5000);
  const auto a = subsample(dense, MeasurementSpec::h2(7));
  const auto b = subsample(dense, MeasurementSpec::h2(7));
  const auto c = subsample(dense, MeasurementSpec::h2(8));
  REQUIRE(a.size() == b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a.time(j) == b.time(j));
    CHECK(a.value(j) == b.value(j));
  }
  bool differs = a.size() != c.size();
  for (std::size_t j = 0; !differs && j < a.size(); ++j) differs = a.time(j) != c.time(j);
  CHECK(differs);
}

TEST_CASE("h1 reads the nearest dense sample") {
  const auto dense = minute_grid(100);
  const auto one = subsample(dense, MeasurementSpec::h1({0.0}));
  REQUIRE(one.size() == 1);
  CHECK(one.time(0) == 0.0);
  const auto some = subsample(dense, MeasurementSpec::h1({40.4, 10.6, 10.9}));
  REQUIRE(some.size() == 2);  // 10.6 and 10.9 both read minute 11
  CHECK(some.time(0) == 11.0);
  CHECK(some.time(1) == 40.0);
  CHECK(some.value(1) == dense.value(40));
  CHECK_THROWS_WITH(subsample(dense, MeasurementSpec::h1({101.0})),
                    doctest::Contains("outside dense span"));
}

TEST_CASE("measurement spec validation") {
  const auto dense = minute_grid(100);
  CHECK_THROWS(subsample(dense, MeasurementSpec::h3(0.0)));
  CHECK_THROWS(subsample(dense, MeasurementSpec::h2(1, 90.0, 60.0)));
}

TEST_CASE("series construction invariants") {
  CHECK_THROWS(ObservationSeries({0.0, 0.0}, {1.0, 2.0}));
  CHECK_THROWS(ObservationSeries({0.0, 1.0}, {1.0}));
  CHECK_THROWS(ObservationSeries({0.0, 1.0}, {1.0, INFINITY}));
  CHECK_THROWS(KickSeries({0.0}, {0.0}, 10.0));  // typical intensity would be 0
}
