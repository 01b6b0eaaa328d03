#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "squall/climatology.hpp"
#include "squall/error.hpp"
#include "squall/field_pack.hpp"
#include "squall/timeutil.hpp"
#include "test_support.hpp"

using namespace squall;
using namespace squall::test;

namespace {

const VariableId kTp = VariableId::surface(VarName::TP);

FieldSet history_set(const GridSpec& g, int year, int month, int day, int hour,
                     std::vector<double> values,
                     std::vector<std::uint8_t> valid = {}) {
  FieldSet fs;
  fs.valid_time = to_epoch_seconds({year, month, day, hour, 0, 0});
  fs.lead_hours = 0;
  fs.insert(make_field(g, std::move(values), kTp, "mm", std::move(valid)));
  return fs;
}

/// Independent order-statistics oracle for the interpolation rule.
double percentile_oracle(std::vector<double> sample, double p) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  const double rank = (n - 1.0) * p / 100.0;  // 0-based fractional rank
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  if (lo + 1 >= sample.size()) return sample.back();
  const double frac = rank - std::floor(rank);
  return sample[lo] * (1.0 - frac) + sample[lo + 1] * frac;
}

}  // namespace

TEST_CASE("slots enumerate month and synoptic hour") {
  CHECK(ClimatologyCube::slot(1, 0) == 0);
  CHECK(ClimatologyCube::slot(1, 18) == 3);
  CHECK(ClimatologyCube::slot(2, 0) == 4);
  CHECK(ClimatologyCube::slot(12, 18) == 47);
  CHECK_THROWS_WITH_AS(ClimatologyCube::slot(0, 0),
                       "climatology month must be in 1..12", DataError);
  CHECK_THROWS_WITH_AS(ClimatologyCube::slot(13, 0),
                       "climatology month must be in 1..12", DataError);
  CHECK_THROWS_WITH_AS(ClimatologyCube::slot(6, 3),
                       "climatology hour must be one of 0, 6, 12, 18",
                       DataError);
}

TEST_CASE("cube construction validates the percentile list") {
  const GridSpec g = small_grid(2, 2);
  CHECK_THROWS_WITH_AS(ClimatologyCube(g, kTp, {}),
                       "climatology needs at least one percentile", DataError);
  CHECK_THROWS_WITH_AS(ClimatologyCube(g, kTp, {95.0, 90.0}),
                       "climatology percentiles must be ascending", DataError);
  CHECK_THROWS_WITH_AS(ClimatologyCube(g, kTp, {0.0}),
                       "climatology percentile out of (0, 100)", DataError);
  CHECK_THROWS_WITH_AS(ClimatologyCube(g, kTp, {100.0}),
                       "climatology percentile out of (0, 100)", DataError);
}

TEST_CASE("a pooled 1..10 sample interpolates to the textbook values") {
  const GridSpec g = small_grid(2, 2);
  std::vector<FieldSet> history;
  for (int day = 1; day <= 10; ++day)
    history.push_back(history_set(g, 2018, 7, day, 12,
                                  std::vector<double>(4, double(day))));

  const ClimatologyCube cube =
      build_climatology(history, kTp, {50.0, 90.0, 98.0});
  CHECK(cube.threshold(7, 12, 50.0, 0, 0) == doctest::Approx(5.5).epsilon(1e-15));
  CHECK(cube.threshold(7, 12, 90.0, 1, 1) == doctest::Approx(9.1).epsilon(1e-15));
  CHECK(cube.threshold(7, 12, 98.0, 0, 1) == doctest::Approx(9.82).epsilon(1e-15));
  CHECK(cube.mean(7, 12, 0, 0) == doctest::Approx(5.5).epsilon(1e-15));
  CHECK(cube.sample_count(7, 12, 0, 0) == 10);

  // A different slot saw nothing.
  CHECK(cube.sample_count(7, 0, 0, 0) == 0);
  CHECK(std::isnan(cube.threshold(7, 0, 90.0, 0, 0)));
  CHECK(std::isnan(cube.mean(7, 0, 0, 0)));

  CHECK_THROWS_AS(cube.threshold(7, 12, 91.0, 0, 0), DataError);
}

TEST_CASE("constant history collapses every statistic to the constant") {
  const GridSpec g = small_grid(2, 3);
  std::vector<FieldSet> history;
  for (int day = 1; day <= 7; ++day)
    history.push_back(history_set(g, 2019, 3, day, 6,
                                  std::vector<double>(6, 2.75)));
  const ClimatologyCube cube = build_climatology(history, kTp);
  for (double p : default_climatology_percentiles())
    CHECK(cube.threshold(3, 6, p, 1, 2) == 2.75);
  CHECK(cube.mean(3, 6, 1, 2) == 2.75);
}

TEST_CASE("slots pool across years but separate hours and months") {
  const GridSpec g = small_grid(2, 2);
  std::vector<FieldSet> history;
  history.push_back(history_set(g, 2018, 7, 1, 0, {1, 1, 1, 1}));
  history.push_back(history_set(g, 2019, 7, 9, 0, {3, 3, 3, 3}));
  history.push_back(history_set(g, 2018, 7, 1, 6, {10, 10, 10, 10}));
  history.push_back(history_set(g, 2018, 8, 1, 0, {20, 20, 20, 20}));

  const ClimatologyCube cube = build_climatology(history, kTp, {50.0});
  CHECK(cube.sample_count(7, 0, 0, 0) == 2);
  CHECK(cube.threshold(7, 0, 50.0, 0, 0) == doctest::Approx(2.0));
  CHECK(cube.mean(7, 0, 0, 0) == doctest::Approx(2.0));
  CHECK(cube.threshold(7, 6, 50.0, 0, 0) == 10.0);
  CHECK(cube.threshold(8, 0, 50.0, 0, 0) == 20.0);
}

TEST_CASE("masked cells drop out of the pool per gridpoint") {
  const GridSpec g = small_grid(2, 2);
  std::vector<FieldSet> history;
  const double nan = std::nan("");
  history.push_back(history_set(g, 2018, 7, 1, 0, {1, 2, nan, 4},
                                {1, 1, 0, 1}));
  history.push_back(history_set(g, 2018, 7, 2, 0, {5, 6, nan, 8},
                                {1, 1, 0, 1}));
  history.push_back(history_set(g, 2018, 7, 3, 0, {9, 10, 11, 12}));

  const ClimatologyCube cube = build_climatology(history, kTp, {50.0});
  CHECK(cube.sample_count(7, 0, 0, 0) == 3);
  CHECK(cube.sample_count(7, 0, 1, 0) == 1);
  CHECK(cube.threshold(7, 0, 50.0, 1, 0) == 11.0);
  CHECK(cube.mean(7, 0, 1, 0) == 11.0);

  const Field tf = cube.threshold_field(7, 0, 50.0);
  CHECK_FALSE(tf.has_mask());

  const Field empty_slot = cube.threshold_field(1, 0, 50.0);
  CHECK(empty_slot.has_mask());
  CHECK_FALSE(empty_slot.valid_at(0, 0));
  const Field empty_mean = cube.mean_field(1, 0);
  CHECK_FALSE(empty_mean.valid_at(1, 1));
}

TEST_CASE("percentiles are non-decreasing in the requested level") {
  const GridSpec g = small_grid(3, 4);
  Rng rng(311);
  std::vector<FieldSet> history;
  for (int day = 1; day <= 25; ++day) {
    std::vector<double> v(g.size());
    for (double& x : v) x = 50.0 * rng.uniform();
    history.push_back(history_set(g, 2018, 9, day, 12, std::move(v)));
  }
  const std::vector<double> pcts{10, 25, 50, 75, 90, 95, 98, 99.5};
  const ClimatologyCube cube = build_climatology(history, kTp, pcts);
  for (int i = 0; i < g.nlat; ++i)
    for (int j = 0; j < g.nlon; ++j)
      for (std::size_t p = 1; p < pcts.size(); ++p)
        CHECK(cube.threshold(9, 12, pcts[p], i, j) >=
              cube.threshold(9, 12, pcts[p - 1], i, j));
}

TEST_CASE("random histories match the sort oracle exactly") {
  const GridSpec g = small_grid(2, 3);
  Rng rng(271828);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.bounded(40));
    std::vector<FieldSet> history;
    std::vector<std::vector<double>> per_cell(g.size());
    for (int s = 0; s < n; ++s) {
      std::vector<double> v(g.size());
      for (std::size_t c = 0; c < v.size(); ++c) {
        v[c] = 100.0 * rng.uniform() - 20.0;
        per_cell[c].push_back(v[c]);
      }
      history.push_back(history_set(g, 2017 + s % 3, 5, 1 + s % 28, 18,
                                    std::move(v)));
    }
    const std::vector<double> pcts{90, 95, 98, 99.5};
    const ClimatologyCube cube = build_climatology(history, kTp, pcts);
    for (std::size_t c = 0; c < g.size(); ++c) {
      const int i = static_cast<int>(c) / g.nlon;
      const int j = static_cast<int>(c) % g.nlon;
      for (double p : pcts)
        CHECK(cube.threshold(5, 18, p, i, j) ==
              doctest::Approx(percentile_oracle(per_cell[c], p))
                  .epsilon(1e-12));
    }
  }
}

TEST_CASE("history order cannot change a single bit of the cube") {
  const GridSpec g = small_grid(2, 2);
  Rng rng(55);
  std::vector<FieldSet> history;
  for (int s = 0; s < 15; ++s) {
    std::vector<double> v(g.size());
    for (double& x : v) x = rng.normal();
    history.push_back(history_set(g, 2018, 2, 1 + s, 0, std::move(v)));
  }
  const ClimatologyCube a = build_climatology(history, kTp);

  std::vector<FieldSet> shuffled = history;
  for (std::size_t n = shuffled.size(); n > 1; --n)
    std::swap(shuffled[n - 1], shuffled[rng.bounded(n)]);
  const ClimatologyCube b = build_climatology(shuffled, kTp);

  REQUIRE(a.thresholds_raw().size() == b.thresholds_raw().size());
  for (std::size_t n = 0; n < a.thresholds_raw().size(); ++n) {
    const double x = a.thresholds_raw()[n], y = b.thresholds_raw()[n];
    CHECK((x == y || (std::isnan(x) && std::isnan(y))));
  }
  for (std::size_t n = 0; n < a.means_raw().size(); ++n) {
    const double x = a.means_raw()[n], y = b.means_raw()[n];
    CHECK((x == y || (std::isnan(x) && std::isnan(y))));
  }
}

TEST_CASE("worker count cannot change a single bit of the cube") {
  const GridSpec g = small_grid(3, 5);
  Rng rng(56);
  std::vector<FieldSet> history;
  for (int s = 0; s < 12; ++s) {
    std::vector<double> v(g.size());
    for (double& x : v) x = rng.normal();
    history.push_back(history_set(g, 2018, 11, 1 + s, 12, std::move(v)));
  }
  const ClimatologyCube a = build_climatology(history, kTp, {90.0, 99.5}, 1);
  const ClimatologyCube b = build_climatology(history, kTp, {90.0, 99.5}, 4);
  for (std::size_t n = 0; n < a.thresholds_raw().size(); ++n) {
    const double x = a.thresholds_raw()[n], y = b.thresholds_raw()[n];
    CHECK((x == y || (std::isnan(x) && std::isnan(y))));
  }
}

TEST_CASE("climatology packs round trip byte for byte") {
  const GridSpec g = small_grid(2, 2);
  std::vector<FieldSet> history;
  Rng rng(77);
  for (int s = 0; s < 9; ++s) {
    std::vector<double> v(g.size());
    for (double& x : v) x = 30.0 * rng.uniform();
    history.push_back(history_set(g, 2018, 1 + s % 4, 2, 6, std::move(v)));
  }
  const ClimatologyCube cube = build_climatology(history, kTp);
  const FieldPack pack = pack_climatology(cube);

  CHECK(pack.times.size() == 48);
  CHECK(pack.variables.front() == "clim:TP:p90");
  CHECK(pack.variables[pack.variables.size() - 2] == "clim:TP:mean");
  CHECK(pack.variables.back() == "clim:TP:n");
  CHECK(month_of(pack.times[0]) == 1);
  CHECK(hour_of(pack.times[0]) == 0);
  CHECK(month_of(pack.times[47]) == 12);
  CHECK(hour_of(pack.times[47]) == 18);

  const ClimatologyCube back = climatology_from_pack(pack);
  CHECK(back.variable() == kTp);
  CHECK(field_pack_bytes(pack_climatology(back)) == field_pack_bytes(pack));
  CHECK(back.sample_count(1, 6, 0, 0) == cube.sample_count(1, 6, 0, 0));
}

TEST_CASE("foreign packs are rejected as climatologies") {
  FieldPack pack = tiny_pack_fixture();
  CHECK_THROWS_WITH_AS(climatology_from_pack(pack),
                       "climatology pack must hold exactly 48 month/hour slots",
                       DataError);

  const GridSpec g = small_grid(2, 2);
  std::vector<FieldSet> history{history_set(g, 2018, 7, 1, 0, {1, 2, 3, 4})};
  FieldPack clim = pack_climatology(build_climatology(history, kTp, {90.0}));
  FieldPack renamed = clim;
  renamed.variables[0] = "T2M";
  CHECK_THROWS_WITH_AS(climatology_from_pack(renamed),
                       "not a climatology pack: unexpected name 'T2M'",
                       DataError);
  FieldPack swapped = clim;
  std::swap(swapped.variables[1], swapped.variables[2]);
  CHECK_THROWS_AS(climatology_from_pack(swapped), DataError);
}

TEST_CASE("history validation failures name the problem") {
  const GridSpec g = small_grid(2, 2);
  CHECK_THROWS_WITH_AS(build_climatology({}, kTp),
                       "climatology needs a non-empty history", DataError);
  std::vector<FieldSet> mixed{history_set(g, 2018, 7, 1, 0, {1, 2, 3, 4}),
                              history_set(small_grid(3, 3), 2018, 7, 2, 0,
                                          std::vector<double>(9, 0.0))};
  CHECK_THROWS_WITH_AS(build_climatology(mixed, kTp),
                       "climatology history mixes grids", DataError);
  std::vector<FieldSet> wrong{history_set(g, 2018, 7, 1, 0, {1, 2, 3, 4})};
  CHECK_THROWS_WITH_AS(
      build_climatology(wrong, VariableId::surface(VarName::T2M)),
      "missing required field T2M", DataError);
}
