#include "squall/spectrum.hpp"

#include <cmath>
#include <map>

#include "fft_util.hpp"
#include "squall/error.hpp"

namespace squall {

std::vector<SpectrumBin> radial_power_spectrum(const Field& field) {
  if (field.has_mask())
    throw DataError("power spectrum needs an unmasked field");
  const GridSpec& g = field.grid();
  const int n0 = g.nlat, n1 = g.nlon;
  const double n = static_cast<double>(g.size());

  const auto spectrum = fft::forward2d(field.values().data(), n0, n1);

  std::map<int, SpectrumBin> bins;
  for (int iy = 0; iy < n0; ++iy) {
    const int fy = iy <= n0 / 2 ? iy : iy - n0;
    for (int ix = 0; ix < n1; ++ix) {
      if (iy == 0 && ix == 0) continue;
      const int fx = ix <= n1 / 2 ? ix : ix - n1;
      const int k = static_cast<int>(
          std::lround(std::hypot(static_cast<double>(fy), fx)));
      const std::complex<double>& c =
          spectrum[static_cast<std::size_t>(iy) * n1 + ix];
      SpectrumBin& bin = bins[k];
      bin.wavenumber = k;
      bin.power += std::norm(c) / (n * n);
      ++bin.modes;
    }
  }

  std::vector<SpectrumBin> out;
  out.reserve(bins.size());
  for (const auto& [k, bin] : bins) out.push_back(bin);
  return out;
}

double band_power(const std::vector<SpectrumBin>& spectrum, int k_lo,
                  int k_hi) {
  double sum = 0.0;
  for (const SpectrumBin& bin : spectrum)
    if (bin.wavenumber >= k_lo && bin.wavenumber <= k_hi) sum += bin.power;
  return sum;
}

}  // namespace squall
