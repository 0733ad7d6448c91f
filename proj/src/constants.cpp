#include "nls/constants.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace nls {

namespace {

// Largest singular value of B = R Phi R^{-1}, R upper triangular.
double phase_norm(const Eigen::MatrixXd& r, const rvec& mu, double t) {
  int n = static_cast<int>(mu.size());
  cvec phase(n);
  for (int m = 0; m < n; ++m) phase[m] = std::polar(1.0, -mu[m] * t);
  Eigen::MatrixXcd rc = r.cast<cplx>();
  auto upper = rc.triangularView<Eigen::Upper>();
  if (n <= 400) {
    Eigen::MatrixXcd rinv = upper.solve(Eigen::MatrixXcd::Identity(n, n));
    Eigen::MatrixXcd b = rc * phase.asDiagonal() * rinv;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.adjoint() * b, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  // power iteration on B^H B
  cvec x = cvec::Ones(n) / std::sqrt(double(n));
  double lam = 0.0;
  for (int it = 0; it < 500; ++it) {
    cvec y = upper.solve(x);
    y = rc * phase.asDiagonal() * y;
    cvec z = upper.adjoint().solve(phase.conjugate().asDiagonal() * (rc.adjoint() * y));
    double next = z.norm();
    if (next == 0.0) break;
    x = z / next;
    if (std::abs(next - lam) <= 1e-12 * next) {
      lam = next;
      break;
    }
    lam = next;
  }
  return std::sqrt(lam);
}

}  // namespace

C1Fit fit_c1(const SpectralOperator& op, double T, int samples, double inflation) {
  const Eigen::MatrixXd& v = op.basis();
  spmat gram = op.grid()->sobolev().gram(2);
  Eigen::MatrixXd gv = gram * v;
  Eigen::MatrixXd k = v.transpose() * gv;
  k = 0.5 * (k + k.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  Eigen::MatrixXd r = llt.matrixU();

  C1Fit fit;
  fit.raw_max = 1.0;
  for (int s = 1; s <= samples; ++s) {
    double t = T * s / samples;
    double nrm = phase_norm(r, op.eigenvalues(), t);
    fit.times.push_back(t);
    fit.norms.push_back(nrm);
    fit.raw_max = std::max(fit.raw_max, nrm);
  }
  fit.c1 = std::max(fit.raw_max * inflation, 1.0 + 1e-6);
  return fit;
}

BanachFit estimate_banach_constant(const GridPtr& grid, std::uint64_t seed, int samples, double inflation) {
  Rng rng(seed);
  const SobolevNorm& sob = grid->sobolev();
  BanachFit fit;
  fit.samples = samples;
  int modes = grid->dim() == 1 ? 8 : 5;
  for (int s = 0; s < samples; ++s) {
    double decay = 1.0 + 2.0 * rng.uniform();
    cvec h1 = random_complex_sine_sum(*grid, rng, modes, decay);
    cvec h2 = random_complex_sine_sum(*grid, rng, modes, decay);
    double den = sob.norm(h1, 2) * sob.norm(h2, 2);
    if (den == 0.0) continue;
    cvec prod = h1.cwiseProduct(h2);
    fit.raw_max = std::max(fit.raw_max, sob.norm(prod, 2) / den);
  }
  fit.kstar = fit.raw_max * inflation;
  return fit;
}

}  // namespace nls
