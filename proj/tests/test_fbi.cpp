#include <doctest.h>

#include <cmath>

#include "nls/errors.hpp"
#include "nls/fbi.hpp"

using namespace nls;

namespace {

Trajectory sampled(const GridPtr& g, double T, double dt, const std::function<cplx(double)>& a, const rvec& shape) {
  Trajectory tr;
  tr.grid = g;
  tr.times = time_samples(T, dt, true);
  tr.values.resize(g->size(), tr.samples());
  for (int j = 0; j < tr.samples(); ++j) tr.values.col(j) = a(tr.times[j]) * shape.cast<cplx>();
  return tr;
}

}  // namespace

TEST_CASE("smooth cutoff") {
  double T0 = 1.2;
  CHECK(fbi_cutoff(0.0, T0) == 1.0);
  CHECK(fbi_cutoff(2 * T0, T0) == 1.0);
  CHECK(fbi_cutoff(-2 * T0, T0) == 1.0);
  CHECK(fbi_cutoff(3 * T0, T0) == 0.0);
  CHECK(fbi_cutoff(5.0, T0) == 0.0);
  CHECK(fbi_cutoff(2.5 * T0, T0) == doctest::Approx(0.5));
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    double eta = 2 * T0 + T0 * i / 100.0;
    double v = fbi_cutoff(eta, T0);
    CHECK(v <= prev);
    CHECK(fbi_cutoff(-eta, T0) == v);
    prev = v;
  }
  // second differences stay small across both junctions
  double h = 1e-3;
  for (double e : {2 * T0, 3 * T0}) {
    double d2 = (fbi_cutoff(e + h, T0) - 2 * fbi_cutoff(e, T0) + fbi_cutoff(e - h, T0)) / (h * h);
    CHECK(std::abs(d2) < 1e-6);
  }
  FbiConfig cfg;
  cfg.T = 1.0;
  CHECK(cfg.horizon() == doctest::Approx(1.2));
  CHECK(cfg.h() == doctest::Approx(1.0 / 3.6));
  cfg.T0 = 0.9;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("transform of constant and odd signals") {
  auto g = build_grid(1, {M_PI, 0}, {15, 0}, 0.3);
  rvec shape = sine_mode(*g, 1);
  FbiConfig cfg;
  cfg.gamma = 100;
  auto c = sampled(g, 1.0, 0.002, [](double) { return cplx(2.0, -1.0); }, shape);
  cmat F = fbi_transform(c, cfg, 0.0, {0.0, 1.0});
  for (int k = 0; k < 2; ++k) CHECK((F.col(k) - cplx(2.0, -1.0) * shape.cast<cplx>()).norm() < 1e-10 * shape.norm());

  auto odd = sampled(g, 1.0, 0.002, [](double t) { return cplx(t, 0.0); }, shape);
  cmat Fo = fbi_transform(odd, cfg, 0.0, {0.0});
  CHECK(Fo.norm() < 1e-12 * shape.norm());

  cfg.gamma = 1e6;
  CHECK_THROWS_AS(fbi_transform(c, cfg, 0.0, {0.0}), ResolutionError);
  cfg.gamma = 100;
  CHECK_THROWS_AS(fbi_transform(c, cfg, 1.0, {0.0}), ConfigError);
}

TEST_CASE("mollification error decays like 1/gamma") {
  auto g = build_grid(1, {M_PI, 0}, {15, 0}, 0.3);
  rvec shape = sine_mode(*g, 2);
  FbiConfig cfg;
  double h = cfg.h();
  auto w = sampled(g, 1.0, 0.0005, [](double t) { return cplx(std::cos(3 * t), std::sin(t)); }, shape);
  std::vector<double> ts;
  for (double t = -2.4; t <= 2.4 + 1e-12; t += 0.05) ts.push_back(t);
  std::vector<double> err;
  for (double gamma : {50.0, 100.0, 200.0, 400.0}) {
    cfg.gamma = gamma;
    cmat F = fbi_transform(w, cfg, 0.0, ts);
    double e = 0;
    for (size_t p = 0; p < ts.size(); ++p) {
      cplx a(std::cos(3 * ts[p] * h), std::sin(ts[p] * h));
      e += (F.col(p) - fbi_cutoff(ts[p], cfg.horizon()) * a * shape.cast<cplx>()).squaredNorm();
    }
    err.push_back(std::sqrt(e));
  }
  for (size_t k = 1; k < err.size(); ++k) {
    double order = std::log2(err[k - 1] / err[k]);
    CHECK(order == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("Cauchy-Riemann residual") {
  auto g = build_grid(1, {M_PI, 0}, {15, 0}, 0.3);
  Rng rng(5);
  rvec shape = random_sine_sum(*g, rng, 4, 1.0);
  auto w = sampled(g, 1.0, 0.001, [](double t) { return cplx(std::cos(2 * t), t * t); }, shape);
  for (double gamma : {50.0, 100.0}) {
    FbiConfig cfg;
    cfg.gamma = gamma;
    auto cr = cauchy_riemann_check(w, cfg, {-2.0, 0.0, 0.7, 2.9}, {-0.5, 0.0, 0.3});
    CHECK(cr.step == doctest::Approx(0.01 / std::sqrt(gamma)));
    CHECK(cr.residual < 1e-6);
  }
}

TEST_CASE("Gaussian symbol bound") {
  CHECK(gaussian_symbol(100, 0) == 1.0);
  double v = 1 - gaussian_symbol(100, 1);
  CHECK(v * v == doctest::Approx(2.4938e-5).epsilon(1e-3));
  CHECK(v * v <= 1.0 / 100);

  auto rep = fbi_kernel_bound_check({50, 100, 400});
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.holds());
  CHECK(rep.fitted_c <= 0.25);
  // sup over u in (0, 2] of (1 - e^{-u})^2 / (2u), independent of gamma
  double best = 0;
  for (int i = 1; i <= 200000; ++i) {
    double u = 2.0 * i / 200000;
    best = std::max(best, std::pow(1 - std::exp(-u), 2) / (2 * u));
  }
  for (const auto& r : rep.rows) CHECK(r.max_scaled == doctest::Approx(best).epsilon(1e-5));
  CHECK(best == doctest::Approx(0.2036).epsilon(1e-3));

  // doubling gamma at fixed zeta halves the bound; the measured quantity drops at least as fast
  for (double zeta : {0.5, 1.0, 3.0}) {
    double a = std::pow(1 - gaussian_symbol(50, zeta), 2), b = std::pow(1 - gaussian_symbol(100, zeta), 2);
    CHECK(b <= 0.5 * a);
  }
  CHECK_FALSE(fbi_kernel_bound_check({100}, 2001, 0.1).holds());
}
