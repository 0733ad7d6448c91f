#include <doctest.h>

#include <cmath>
#include <set>

#include "nls/errors.hpp"
#include "nls/inverse.hpp"

using namespace nls;

namespace {

GridPtr pi_interval(int n, double collar) { return build_grid(1, {M_PI, 0}, {n, 0}, collar); }

PotentialField zero(const GridPtr& g) { return {g, rvec::Zero(g->size()), "zero"}; }

int face_entry(const Grid& g, int face) {
  for (size_t b = 0; b < g.boundary().size(); ++b)
    if (g.boundary()[b].face == face) return static_cast<int>(b);
  return -1;
}

StabilityInputs interval_inputs(const GridPtr& g, RecoveryMode mode) {
  StabilityInputs in;
  in.mode = mode;
  in.p = PotentialField{g, 0.3 * sine_mode(*g, 1), "p"};
  in.q = PotentialField{g, sine_mode(*g, 1), "q"};
  in.f = ComplexField{g, sine_mode(*g, 1).cast<cplx>()};
  in.selection = gamma0_selection(*g, {-1, 0});
  in.cfg.T = 1.0;
  in.cfg.dt = 0.01;
  in.gamma_minus = 0.25;
  return in;
}

}  // namespace

TEST_CASE("neumann trace of a single mode") {
  auto g = pi_interval(255, 0.3);
  Trajectory u;
  u.grid = g;
  u.times = time_samples(1.0, 0.01, true);
  u.values.resize(g->size(), u.samples());
  rvec s = sine_mode(*g, 1);
  for (int j = 0; j < u.samples(); ++j) u.values.col(j) = std::exp(cplx(0, -u.times[j])) * s.cast<cplx>();
  auto sel = explicit_selection(*g, {face_entry(*g, 1)});
  auto tr = neumann_trace(u, sel);
  CHECK(tr.times.front() == doctest::Approx(0.0));
  CHECK(tr.times.size() == 101);
  double h = g->spacing()[0];
  for (long c = 0; c < tr.values.cols(); ++c) {
    CHECK(std::abs(tr.values(0, c)) == doctest::Approx(1.0).epsilon(2 * h * h));
    CHECK(std::abs(tr.values(0, c) + std::exp(cplx(0, -tr.times[c]))) < 2 * h * h);
  }
  CHECK(tr.l2() == doctest::Approx(1.0).epsilon(2 * h * h));
  // d/dt of the series against the analytic derivative
  auto d = time_derivative(tr);
  for (long c = 0; c < d.values.cols(); ++c)
    CHECK(std::abs(d.values(0, c) - cplx(0, 1) * std::exp(cplx(0, -tr.times[c]))) < 2e-4);

  Trajectory z{g, u.times, cmat::Zero(g->size(), u.samples())};
  CHECK(neumann_trace(z, sel).l2() == 0.0);
}

TEST_CASE("boundary selections") {
  auto g1 = build_grid(1, {1, 0}, {31, 0}, 0.2);
  auto s1 = gamma0_selection(*g1, {-1, 0});
  REQUIRE(s1.nodes.size() == 1);
  CHECK(g1->boundary()[s1.nodes[0]].pos[0] == doctest::Approx(1.0));
  CHECK(gamma0_selection(*g1, {2, 0}).nodes.size() == 1);
  CHECK_THROWS_AS(explicit_selection(*g1, {}), ConfigError);
  CHECK_THROWS_AS(explicit_selection(*g1, {5}), ConfigError);

  auto g2 = build_grid(2, {1, 1}, {15, 15}, 0.2);
  auto s2 = gamma0_selection(*g2, {-1, -1});
  for (int b : s2.nodes) {
    int face = g2->boundary()[b].face;
    CHECK((face == 1 || face == 3));
  }
  std::set<int> prev(s2.nodes.begin(), s2.nodes.end());
  for (double fr : {1.0, 0.75, 0.5, 0.25}) {
    auto s = shrink_selection(*g2, s2, fr);
    CHECK(s.nodes.size() == static_cast<size_t>(std::ceil(fr * s2.nodes.size() - 1e-9)));
    for (int b : s.nodes) CHECK(prev.count(b) == 1);
    prev = std::set<int>(s.nodes.begin(), s.nodes.end());
  }
  // the quarter block is connected along the boundary
  auto q = shrink_selection(*g2, s2, 0.25);
  double h = g2->spacing()[0];
  for (int b : q.nodes) {
    int near = 0;
    for (int c : q.nodes) {
      auto pa = g2->boundary()[b].pos, pb = g2->boundary()[c].pos;
      double d = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
      if (d < 1.5 * h) ++near;
    }
    CHECK(near >= 2);
  }
  CHECK_THROWS_AS(shrink_selection(*g2, s2, 0.0), ConfigError);
}

TEST_CASE("log law") {
  CHECK(log_law(0.0) == 0.0);
  CHECK(std::isinf(log_law(1.0)));
  CHECK(log_law(std::exp(-1.0)) == doctest::Approx(std::sqrt(1.0 + std::exp(-1.0))));
  CHECK(log_law(1e-4) > log_law(1e-8));
}

TEST_CASE("observability fit") {
  std::vector<double> ladder{10, 20, 40};
  auto fit = fit_observability(0.002, 0.005, ladder);
  CHECK(fit.mu > 0.0);
  for (double g : ladder)
    CHECK(0.002 <= fit.c * (1 / g + std::exp(-fit.mu * g) + std::exp(fit.mu * g) * 0.005) * (1 + 1e-12));
  // the right-hand side is stationary at the centre of the ladder
  double gm = std::sqrt(10.0 * 40.0), e = 1e-4;
  auto rhs = [&](double g) { return 1 / g + std::exp(-fit.mu * g) + std::exp(fit.mu * g) * 0.005; };
  CHECK(std::abs(rhs(gm + e) - rhs(gm - e)) / (2 * e) < 1e-8);
  CHECK(fit_observability(0.002, 0.0, ladder).mu == 0.0);
  CHECK_THROWS_AS(fit_observability(1.0, 1.0, {}), ConfigError);
}

TEST_CASE("stability rows") {
  auto g = pi_interval(63, 0.3);
  auto in = interval_inputs(g, RecoveryMode::q);
  rvec bump = sine_bump(*g, {M_PI / 2, 0}, {0.8, 0}, 0.02);
  std::vector<PerturbationMember> fam{{"a", bump}, {"b", rvec(2.0 * bump)}, {"z", rvec::Zero(g->size())}};
  auto rep = stability_experiment(in, fam);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.mode == "recover-q");
  CHECK(rep.rows[1].delta == doctest::Approx(2.0 * rep.rows[0].delta).epsilon(1e-10));
  CHECK(rep.rows[0].ratio == doctest::Approx(rep.rows[1].ratio).epsilon(1e-10));
  CHECK(rep.rows[2].degenerate);
  CHECK(rep.rows[2].pass);
  CHECK(rep.pass);
  CHECK(rep.fitted_c == doctest::Approx(rep.rows[0].ratio));

  in.mode = RecoveryMode::p;
  auto rp = stability_experiment(in, fam);
  CHECK(rp.mode == "recover-p");
  CHECK(rp.rows[1].delta == doctest::Approx(2.0 * rp.rows[0].delta).epsilon(0.05));

  // perturbation reaching into the collar
  rvec wide = sine_bump(*g, {M_PI / 2, 0}, {1.5, 0}, 0.02);
  CHECK_THROWS_AS(stability_experiment(in, {{"w", wide}}), HypothesisError);
  in.gamma_minus = 0.9;
  CHECK_THROWS_AS(stability_experiment(in, {{"a", bump}}), HypothesisError);
  in.gamma_minus = 0.25;
  in.gamma_plus = 1e-3;
  CHECK_THROWS_AS(stability_experiment(in, {{"a", bump}}), ConfigError);

  auto family = perturbation_family(*g, 0.02);
  CHECK(family.size() == 5);
  for (const auto& m : family)
    for (int n = 0; n < g->size(); ++n)
      if (g->in_collar(n)) CHECK(m.values[n] == 0.0);
}

TEST_CASE("fast and full paths agree") {
  auto g = pi_interval(31, 0.3);
  for (auto mode : {RecoveryMode::q, RecoveryMode::p}) {
    auto in = interval_inputs(g, mode);
    in.cfg.dt = 0.0025;
    in.full_path = true;
    rvec bump = sine_bump(*g, {M_PI / 2, 0}, {0.8, 0}, 0.02);
    auto rep = stability_experiment(in, {{"a", bump}});
    CHECK(rep.rows[0].delta_full > 0.0);
    CHECK(rep.max_disagreement < 0.02);
    CHECK(rep.pass);
  }
}

TEST_CASE("partial data report") {
  auto g = build_grid(2, {1, 1}, {15, 15}, 0.2);
  StabilityInputs in;
  in.p = zero(g);
  in.q = PotentialField{g, sine_mode(*g, 1, 1), "q"};
  in.f = ComplexField{g, sine_mode(*g, 1, 1).cast<cplx>()};
  in.selection = gamma0_selection(*g, {-1, -1});
  in.cfg.T = 1.0;
  in.cfg.dt = 0.02;
  auto rep = partial_data_experiment(in, perturbation_family(*g, 0.02), {1.0, 0.5, 0.25}, {10, 20, 40});
  CHECK(rep.mode == "partial-data-q");
  CHECK(rep.rows.size() == 5);
  CHECK(rep.monotone);
  // the full fraction reproduces the Lipschitz deltas (family ids are already sorted)
  for (size_t i = 0; i < rep.deltas.size(); ++i)
    CHECK(rep.deltas[i][0] == doctest::Approx(rep.lipschitz.rows[i].delta).epsilon(1e-12));
  for (size_t i = 0; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].pert_norm <= rep.fitted_c * rep.rows[i].law * (1 + 1e-12));
  CHECK(rep.observability.energy > 0.0);
  CHECK(rep.observability.c > 0.0);
  CHECK_THROWS_AS(partial_data_experiment(in, perturbation_family(*g, 0.02), {0.5, 0.75}, {}), ConfigError);
  CHECK_THROWS_AS(partial_data_experiment(in, perturbation_family(*g, 0.02), {1.0}, {}), ConfigError);
}

TEST_CASE("initial data and identity pipeline") {
  auto g = pi_interval(63, 0.1);
  auto op = eigendecompose(g, zero(g));
  NonlinearitySpec spec(2, {{1, 1, 1.0}});
  PotentialField q2{g, sine_mode(*g, 1), "q2"};
  ComplexField f{g, (sine_mode(*g, 1) + 0.2 * sine_mode(*g, 3)).cast<cplx>()};
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 2.5e-4;
  double lam = lambda0_for_grid(*g, {-10, 0});
  CarlemanWeightSet ws(g, {-10, 0}, lam, 2.0, 1.0);
  auto sel = gamma0_selection(*g, {-10, 0});

  auto same = initial_identity_pipeline(op, spec, q2, q2, f, cfg, ws, sel);
  CHECK(same.initial_abs == 0.0);
  CHECK(same.pert_sq == 0.0);
  CHECK(same.boundary == 0.0);

  rvec bump = sine_bump(*g, {M_PI / 2, 0}, {M_PI / 2 - 0.12, 0}, 1.0);
  PotentialField q1{g, q2.values + bump, "q1"};
  auto rep = initial_identity_pipeline(op, spec, q1, q2, f, cfg, ws, sel);
  CHECK(rep.initial_residual < 1e-12);
  CHECK(rep.energy.relative_error < 1e-6);
  CHECK(rep.energy_doubled.rhs > 0.0);
  CHECK(rep.pert_sq > 0.0);
  CHECK(rep.boundary > 0.0);
  CHECK(std::isfinite(rep.ratio));
}
