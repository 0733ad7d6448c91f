#include <doctest.h>

#include <cmath>

#include "nls/constants.hpp"
#include "nls/errors.hpp"
#include "nls/forward.hpp"

using namespace nls;

namespace {

GridPtr interval(int n = 127) { return build_grid(1, {M_PI, 0}, {n, 0}, 0.3); }
PotentialField zero(const GridPtr& g) { return {g, rvec::Zero(g->size()), "p"}; }

double manufactured_error(int n, double dt) {
  auto g = interval(n);
  auto op = eigendecompose(g, zero(g));
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.dt = dt;
  auto times = cfg.times();
  rvec s = sine_mode(*g, 1);
  Trajectory src{g, times, cmat(g->size(), times.size())};
  cmat exact(g->size(), times.size());
  for (size_t j = 0; j < times.size(); ++j) {
    double t = times[j];
    cplx ph = std::polar(1.0, -t);
    src.values.col(j) = (cplx(0, 2 * t) * ph) * s.cast<cplx>();
    exact.col(j) = (ph * (1 + t * t)) * s.cast<cplx>();
  }
  ComplexField f{g, s.cast<cplx>()};
  auto u = solve_linear(op, f, &src, cfg);
  double err = 0;
  for (size_t j = 0; j < times.size(); ++j) err = std::max(err, l2_norm(*g, cvec(u.values.col(j) - exact.col(j))));
  return err;
}

}  // namespace

TEST_CASE("homogeneous linear solve") {
  auto g = interval();
  auto op = eigendecompose(g, zero(g));
  SolveConfig cfg;
  cfg.symmetric = true;
  ComplexField f{g, sine_mode(*g, 1).cast<cplx>()};
  auto u = solve_linear(op, f, nullptr, cfg);
  CHECK(u.times.front() == doctest::Approx(-1.0));
  for (int j = 0; j < u.samples(); j += 10) {
    cvec e = std::polar(1.0, -op.eigenvalues()[0] * u.times[j]) * f.values;
    CHECK((u.values.col(j) - e).norm() < 1e-12 * f.values.norm());
  }
  ComplexField z{g, cvec::Zero(g->size())};
  CHECK(solve_linear(op, z, nullptr, cfg).values.cwiseAbs().maxCoeff() == 0.0);
  Trajectory zs{g, cfg.times(), cmat::Zero(g->size(), cfg.times().size())};
  CHECK(solve_linear(op, z, &zs, cfg).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("manufactured source converges at second order") {
  double e1 = manufactured_error(255, 0.02);
  double e2 = manufactured_error(511, 0.01);
  CHECK(e1 < 1e-3);
  double order = std::log(e1 / e2) / std::log(2.0);
  CHECK(order > 1.8);
  CHECK(order < 2.3);
}

TEST_CASE("misaligned source is rejected") {
  auto g = interval(31);
  auto op = eigendecompose(g, zero(g));
  SolveConfig cfg;
  Trajectory src{g, time_samples(1.0, 0.02, false), cmat::Zero(31, 51)};
  ComplexField f{g, cvec::Zero(31)};
  CHECK_THROWS_AS(solve_linear(op, f, &src, cfg), ConfigError);
  cfg.dt = 0.03;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("contraction radius closed form") {
  NonlinearitySpec spec(3, {{2, 1, 2.0}}, -1, 1.0, 2, 1, 1.0);
  auto r = contraction_radius(spec, 1.0, 2.0, 1.0, 1.0);
  CHECK(r.base == doctest::Approx(std::sqrt(1.0 / 54.0)).epsilon(1e-12));
  CHECK(r.base == doctest::Approx(0.13608).epsilon(1e-4));
  CHECK(r.radius == doctest::Approx(0.06804).epsilon(1e-4));
  auto r2 = contraction_radius(spec, 1.0, 2.0, 2.0, 1.0);
  CHECK(r2.radius / r.radius == doctest::Approx(std::pow(2.0, -0.5)));
  CHECK(contraction_radius(spec, 2.0, 2.0, 1.0, 1.0).radius < r.radius);
  CHECK(contraction_radius(spec, 1.0, 2.0, 1.0, 2.0).radius < r.radius);
  auto capped = contraction_radius(spec, 1.0, 2.0, 1.0, 0.0, 50.0);
  CHECK(capped.capped);
  CHECK(capped.radius == 50.0);
  CHECK(contraction_radius(spec, 1.0, 2.0, 1.0, 1e-30, 50.0).radius == 50.0);
  NonlinearitySpec bad(2, {{1, 1, 1.0}}, -1, 1.0, 0.5, 0.4);
  CHECK_THROWS_AS(contraction_radius(bad, 1.0, 2.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("nonlinear solve degenerate cases") {
  auto g = interval(63);
  auto op = eigendecompose(g, zero(g));
  NonlinearitySpec spec(2, {{1, 1, 1.0}});
  SolveConfig cfg;
  ComplexField f{g, 0.1 * sine_mode(*g, 1).cast<cplx>()};
  auto lin = solve_linear(op, f, nullptr, cfg);
  auto sol = solve_nonlinear(op, spec, zero(g), f, cfg);
  CHECK(sol.certificate.iterations == 1);
  CHECK((sol.u.values - lin.values).cwiseAbs().maxCoeff() == 0.0);
  ComplexField z{g, cvec::Zero(g->size())};
  PotentialField q{g, sine_mode(*g, 1), "q"};
  auto zs = solve_nonlinear(op, spec, q, z, cfg);
  CHECK(zs.certificate.residual == 0.0);
  CHECK(zs.u.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("small data Picard solve") {
  auto g = interval(127);
  auto op = eigendecompose(g, zero(g));
  NonlinearitySpec spec(2, {{1, 1, 1.0}});
  PotentialField q{g, rvec::Ones(g->size()), "q"};
  SolveConfig cfg;
  auto c1 = fit_c1(op, cfg.T, 4);
  ComplexField f{g, 1e-3 * sine_mode(*g, 1).cast<cplx>()};
  auto sol = solve_nonlinear(op, spec, q, f, cfg);
  const auto& cert = sol.certificate;
  CHECK(cert.converged);
  CHECK(cert.max_factor() < 1.0);
  CHECK(c0_da_norm(sol.u) <= (1 + c1.c1) * sobolev_norm(f, 2));
  CHECK(fixed_point_residual(op, spec, q, f, sol.u) < 1e-8);

  // double-resolution oracle at matching nodes and times
  auto g2 = interval(255);
  auto op2 = eigendecompose(g2, zero(g2));
  PotentialField q2{g2, rvec::Ones(g2->size()), "q"};
  ComplexField f2{g2, 1e-3 * sine_mode(*g2, 1).cast<cplx>()};
  SolveConfig cfg2 = cfg;
  cfg2.dt = cfg.dt / 2;
  auto fine = solve_nonlinear(op2, spec, q2, f2, cfg2);
  cmat w = sol.u.values - op.propagate_samples(f, sol.u.times).values;
  cmat w2 = fine.u.values - op2.propagate_samples(f2, fine.u.times).values;
  double diff = 0, scale = 0;
  for (int j = 0; j < sol.u.samples(); ++j)
    for (int n = 0; n < g->size(); ++n) {
      diff = std::max(diff, std::abs(w(n, j) - w2(2 * n + 1, 2 * j)));
      scale = std::max(scale, std::abs(w(n, j)));
    }
  CHECK(diff < 1e-2 * scale);
}

TEST_CASE("small-data scaling") {
  auto g = interval(63);
  auto op = eigendecompose(g, zero(g));
  NonlinearitySpec spec(2, {{1, 1, 1.0}});
  PotentialField q{g, sine_mode(*g, 1), "q"};
  SolveConfig cfg;
  ComplexField f{g, sine_mode(*g, 1).cast<cplx>()};
  std::vector<double> eps = {4e-2, 2e-2, 1e-2, 5e-3};
  std::vector<double> err;
  for (double e : eps) {
    ComplexField fe{g, e * f.values};
    auto sol = solve_nonlinear(op, spec, q, fe, cfg);
    Trajectory lin = op.propagate_samples(fe, sol.u.times);
    err.push_back(c0_da_norm(Trajectory{g, sol.u.times, sol.u.values - lin.values}));
  }
  double order = std::log(err.front() / err.back()) / std::log(eps.front() / eps.back());
  CHECK(order >= 1.9);
}

TEST_CASE("non-convergence carries the certificate") {
  auto g = interval(31);
  auto op = eigendecompose(g, zero(g));
  NonlinearitySpec spec(2, {{1, 1, 1.0}});
  PotentialField q{g, rvec::Ones(g->size()), "q"};
  SolveConfig cfg;
  cfg.picard_max_iter = 2;
  ComplexField f{g, 0.5 * sine_mode(*g, 1).cast<cplx>()};
  try {
    solve_nonlinear(op, spec, q, f, cfg);
    FAIL("expected failure");
  } catch (const PicardFailure& e) {
    CHECK(e.certificate().iterations == 2);
    CHECK_FALSE(e.certificate().converged);
  }
}
