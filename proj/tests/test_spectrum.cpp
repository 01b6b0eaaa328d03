#include <doctest.h>

#include <cmath>
#include <vector>

#include "squall/error.hpp"
#include "squall/spectrum.hpp"
#include "test_support.hpp"

using namespace squall;
using namespace squall::test;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

double population_variance(const Field& f) {
  double mean = 0.0;
  for (double v : f.values()) mean += v;
  mean /= static_cast<double>(f.values().size());
  double sum = 0.0;
  for (double v : f.values()) sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(f.values().size());
}

}  // namespace

TEST_CASE("a constant field has an empty spectrum") {
  const Field f = constant_field(small_grid(8, 12), 42.0);
  const auto bins = radial_power_spectrum(f);
  for (const SpectrumBin& b : bins) {
    CHECK(b.power < 1e-18);
    CHECK(b.wavenumber >= 1);
  }
}

TEST_CASE("a single harmonic lands in its isotropic bin") {
  const GridSpec g = small_grid(16, 24);
  const int p = 3, q = 4;  // bin round(hypot(3, 4)) = 5
  const double amplitude = 2.0;
  std::vector<double> values(g.size());
  for (int i = 0; i < g.nlat; ++i)
    for (int j = 0; j < g.nlon; ++j)
      values[static_cast<std::size_t>(i) * g.nlon + j] =
          amplitude * std::cos(kTau * (static_cast<double>(p) * i / g.nlat +
                                       static_cast<double>(q) * j / g.nlon));
  const Field f = make_field(g, values);

  const auto bins = radial_power_spectrum(f);
  double elsewhere = 0.0;
  double at_five = 0.0;
  for (const SpectrumBin& b : bins) {
    if (b.wavenumber == 5)
      at_five = b.power;
    else
      elsewhere += b.power;
  }
  CHECK(at_five ==
        doctest::Approx(amplitude * amplitude / 2.0).epsilon(1e-12));
  CHECK(elsewhere < 1e-15);
}

TEST_CASE("bin powers sum to the population variance") {
  const GridSpec g = small_grid(12, 18);
  Rng rng(31);
  std::vector<double> values(g.size());
  for (double& v : values) v = 3.0 * rng.normal() + 10.0;
  const Field f = make_field(g, values);

  const auto bins = radial_power_spectrum(f);
  double total = 0.0;
  for (const SpectrumBin& b : bins) total += b.power;
  CHECK(total == doctest::Approx(population_variance(f)).epsilon(1e-9));
}

TEST_CASE("bins ascend and cover every non-constant mode") {
  const GridSpec g = small_grid(10, 14);
  Rng rng(32);
  std::vector<double> values(g.size());
  for (double& v : values) v = rng.normal();
  const auto bins = radial_power_spectrum(make_field(g, values));

  REQUIRE_FALSE(bins.empty());
  CHECK(bins.front().wavenumber == 1);
  int modes = 0;
  for (std::size_t n = 0; n < bins.size(); ++n) {
    if (n > 0) CHECK(bins[n].wavenumber > bins[n - 1].wavenumber);
    CHECK(bins[n].modes > 0);
    modes += bins[n].modes;
  }
  CHECK(modes == static_cast<int>(g.size()) - 1);
}

TEST_CASE("band power slices the spectrum") {
  const GridSpec g = small_grid(12, 12);
  Rng rng(33);
  std::vector<double> values(g.size());
  for (double& v : values) v = rng.normal();
  const auto bins = radial_power_spectrum(make_field(g, values));
  const int k_max = bins.back().wavenumber;

  double total = 0.0;
  for (const SpectrumBin& b : bins) total += b.power;
  CHECK(band_power(bins, 1, k_max) == doctest::Approx(total).epsilon(1e-15));
  CHECK(band_power(bins, 0, k_max + 10) ==
        doctest::Approx(total).epsilon(1e-15));
  CHECK(band_power(bins, 5, 4) == 0.0);

  const double lo = band_power(bins, 1, 3);
  const double hi = band_power(bins, 4, k_max);
  CHECK(lo + hi == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("masked fields cannot be transformed") {
  const GridSpec g = small_grid(6, 8);
  std::vector<double> values(g.size(), 1.0);
  std::vector<std::uint8_t> valid(g.size(), 1);
  valid[5] = 0;
  values[5] = std::nan("");
  const Field f = make_field(g, values, std::nullopt, "1", valid);
  CHECK_THROWS_WITH_AS(radial_power_spectrum(f),
                       "power spectrum needs an unmasked field", DataError);
}
