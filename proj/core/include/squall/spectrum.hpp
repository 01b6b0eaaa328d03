#pragma once

#include <vector>

#include "squall/grid.hpp"

namespace squall {

struct SpectrumBin {
  int wavenumber = 0;  // isotropic index bin, 1..k_max
  double power = 0.0;  // summed normalized power of the modes in the bin
  int modes = 0;
};

/// Isotropically binned discrete Fourier power. Mode (iy, ix) contributes
/// |X|^2 / N^2 to bin round(hypot(iy', ix')) of signed frequency indices;
/// the DC mode is excluded, so the powers sum to the population variance
/// (Parseval). Requires an unmasked field.
std::vector<SpectrumBin> radial_power_spectrum(const Field& field);

/// Sum of bin powers with k_lo <= wavenumber <= k_hi.
double band_power(const std::vector<SpectrumBin>& spectrum, int k_lo,
                  int k_hi);

}  // namespace squall
