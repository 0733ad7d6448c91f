#pragma once

#include <vector>

#include "nls/spectral.hpp"

namespace nls {

struct C1Fit {
  double c1 = 1.0;               // reported constant (inflated, > 1)
  double raw_max = 1.0;          // max over samples of the operator norm
  std::vector<double> times;
  std::vector<double> norms;     // ||e^{tA}||_{H^2 -> H^2} per sample
};

// Exact discrete H^2 operator norm of e^{tA} at `samples` times in (0, T],
// maximized and inflated by `inflation`.
C1Fit fit_c1(const SpectralOperator& op, double T, int samples = 8, double inflation = 1.05);

struct BanachFit {
  double kstar = 1.0;   // inflated estimate
  double raw_max = 0.0;
  int samples = 0;
};

// max ||h1 h2||_{H^2} / (||h1||_{H^2} ||h2||_{H^2}) over random smooth pairs, times `inflation`.
BanachFit estimate_banach_constant(const GridPtr& grid, std::uint64_t seed, int samples = 200,
                                   double inflation = 1.5);

}  // namespace nls
