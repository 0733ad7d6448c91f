#pragma once

#include <vector>

#include "nls/fields.hpp"

namespace nls {

struct FbiConfig {
  double gamma = 100.0;
  double T = 1.0;
  double T0 = 0.0;  // defaults to 1.2 T

  double horizon() const { return T0 > 0 ? T0 : 1.2 * T; }
  // time scale linking eta and t = eta h
  double h() const { return T / (3.0 * horizon()); }
  void validate() const;
};

// C-infinity step: 1 on |eta| <= 2 T0, 0 on |eta| >= 3 T0.
double fbi_cutoff(double eta, double T0);

// w_gamma(x, t - i tau) = sqrt(gamma / 2 pi) int e^{-(gamma/2)(t - i tau - eta)^2} theta(eta) w(x, eta h) d eta,
// by the trapezoid rule on the nodes eta_j = t_j / h of a trajectory on [-T, T].
// Returns one column per entry of t.
cmat fbi_transform(const Trajectory& w, const FbiConfig& cfg, double tau, const std::vector<double>& t);

struct CauchyRiemannCheck {
  double residual = 0.0;  // max |d_tau F + i d_t F| / max |d_t F|
  double step = 0.0;
};

// Fourth-order differences with step 0.01 / sqrt(gamma) around each (t, tau).
CauchyRiemannCheck cauchy_riemann_check(const Trajectory& w, const FbiConfig& cfg, const std::vector<double>& t,
                                        const std::vector<double>& taus);

// Unit-mass Gaussian: K^_gamma(zeta) = e^{-zeta^2 / (2 gamma)}.
double gaussian_symbol(double gamma, double zeta);

struct KernelBoundRow {
  double gamma = 0.0;
  double max_scaled = 0.0;  // max |1 - K^|^2 gamma / zeta^2 over zeta^2 <= 4 gamma
  double argmax_zeta = 0.0;
};

struct KernelBoundReport {
  std::vector<KernelBoundRow> rows;
  double fitted_c = 0.0;
  double bound = 0.5;
  bool holds() const { return fitted_c <= bound; }
};

KernelBoundReport fbi_kernel_bound_check(const std::vector<double>& gammas, int zeta_points = 2001,
                                         double bound = 0.5);

}  // namespace nls
