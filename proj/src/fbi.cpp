#include "nls/fbi.hpp"

#include <cmath>
#include <string>

#include "nls/errors.hpp"

namespace nls {

void FbiConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  if (!(horizon() > T)) throw ConfigError("T0 must exceed T");
}

namespace {

double bump_tail(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

double fbi_cutoff(double eta, double T0) {
  double a = std::abs(eta);
  if (a <= 2 * T0) return 1.0;
  if (a >= 3 * T0) return 0.0;
  double x = (3 * T0 - a) / T0;
  double up = bump_tail(x), down = bump_tail(1.0 - x);
  return up / (up + down);
}

cmat fbi_transform(const Trajectory& w, const FbiConfig& cfg, double tau, const std::vector<double>& t) {
  cfg.validate();
  if (!(std::abs(tau) < 1.0)) throw ConfigError("tau must lie in (-1, 1)");
  int M = w.samples();
  if (M < 3) throw ConfigError("trajectory too short");
  double dt = w.dt();
  if (std::abs(w.times.front() + cfg.T) > 1e-9 * cfg.T || std::abs(w.times.back() - cfg.T) > 1e-9 * cfg.T)
    throw ConfigError("trajectory must cover [-T, T]");
  double h = cfg.h();
  double deta = dt / h;
  double limit = 1.0 / (8.0 * std::sqrt(cfg.gamma));
  if (deta > limit) {
    long need = static_cast<long>(std::ceil(2.0 * cfg.T / (limit * h))) + 1;
    throw ResolutionError("eta grid does not resolve the Gaussian width; required time samples: " +
                              std::to_string(need),
                          need);
  }
  double T0 = cfg.horizon();
  double norm = std::sqrt(cfg.gamma / (2.0 * M_PI));
  // trapezoid weights; the cutoff vanishes at both ends since T / h = 3 T0
  std::vector<double> coef(M);
  for (int j = 0; j < M; ++j) {
    double eta = w.times[j] / h;
    coef[j] = fbi_cutoff(eta, T0) * deta * ((j == 0 || j == M - 1) ? 0.5 : 1.0);
  }
  cmat out(w.values.rows(), static_cast<long>(t.size()));
  for (size_t p = 0; p < t.size(); ++p) {
    cplx z(t[p], -tau);
    cvec k(M);
    for (int j = 0; j < M; ++j) {
      cplx d = z - w.times[j] / h;
      k[j] = coef[j] == 0.0 ? cplx(0.0) : norm * coef[j] * std::exp(-0.5 * cfg.gamma * d * d);
    }
    out.col(p) = w.values * k;
  }
  return out;
}

CauchyRiemannCheck cauchy_riemann_check(const Trajectory& w, const FbiConfig& cfg, const std::vector<double>& t,
                                        const std::vector<double>& taus) {
  CauchyRiemannCheck c;
  c.step = 0.01 / std::sqrt(cfg.gamma);
  const double d = c.step;
  const double wts[4] = {1.0, -8.0, 8.0, -1.0};
  const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
  double res = 0.0, scale = 0.0;
  const cplx I(0.0, 1.0);
  for (double tau : taus) {
    for (double tc : t) {
      cmat dtF = cmat::Zero(w.values.rows(), 1), dtauF = cmat::Zero(w.values.rows(), 1);
      for (int k = 0; k < 4; ++k) {
        dtF += wts[k] * fbi_transform(w, cfg, tau, {tc + offs[k] * d});
        dtauF += wts[k] * fbi_transform(w, cfg, tau + offs[k] * d, {tc});
      }
      dtF /= 12.0 * d;
      dtauF /= 12.0 * d;
      res = std::max(res, (dtauF + I * dtF).cwiseAbs().maxCoeff());
      scale = std::max(scale, dtF.cwiseAbs().maxCoeff());
    }
  }
  c.residual = scale > 0 ? res / scale : res;
  return c;
}

double gaussian_symbol(double gamma, double zeta) { return std::exp(-zeta * zeta / (2.0 * gamma)); }

KernelBoundReport fbi_kernel_bound_check(const std::vector<double>& gammas, int zeta_points, double bound) {
  if (zeta_points < 2) throw ConfigError("need at least two zeta points");
  KernelBoundReport rep;
  rep.bound = bound;
  for (double g : gammas) {
    if (!(g > 0.0)) throw ConfigError("gamma must be positive");
    KernelBoundRow row;
    row.gamma = g;
    double zmax = 2.0 * std::sqrt(g);
    for (int i = 1; i < zeta_points; ++i) {
      double z = zmax * i / (zeta_points - 1);
      // 1 - e^{-x} through expm1 to keep small zeta accurate
      double one_minus = -std::expm1(-z * z / (2.0 * g));
      double v = one_minus * one_minus * g / (z * z);
      if (v > row.max_scaled) {
        row.max_scaled = v;
        row.argmax_zeta = z;
      }
    }
    rep.fitted_c = std::max(rep.fitted_c, row.max_scaled);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace nls
