// Acceptance run: one line per criterion, tolerances and runtime limits fixed here.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "nls/constants.hpp"
#include "nls/errors.hpp"
#include "nls/parallel.hpp"
#include "nls/runner.hpp"
#include "nls/sobolev.hpp"

using namespace nls;
namespace fs = std::filesystem;

namespace {

// 1
constexpr int kUnitaryDraws = 1000;
constexpr double kUnitaryTol = 1e-10;
constexpr double kRoundTripTol = 1e-11;
// 2
constexpr int kPicardDraws = 20;
constexpr double kRadiusFraction = 0.5;
// 3
constexpr double kRateSlack = 0.3;
// 5
constexpr double kInitialFactor = 10.0;
constexpr double kSymmetryTol = 1e-9;
// 6
constexpr double kEnergyTol = 1e-5;
constexpr double kEnergyDt = 1.25e-4;
// 8
constexpr double kKernelBound = 0.5;
// 9
constexpr double kDriftTol = 0.10;
constexpr double kHomogeneityTol = 0.02;
constexpr double kAgreementTol = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit;  // seconds
  std::function<Outcome()> run;
};

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

PotentialField zero(const GridPtr& g) { return {g, rvec::Zero(g->size()), "zero"}; }

GridPtr pi_interval(int n, double collar) { return build_grid(1, {M_PI, 0}, {n, 0}, collar); }

Outcome unitarity() {
  auto g = pi_interval(127, 0.3);
  auto op = eigendecompose(g, zero(g));
  Rng rng(20240601);
  double worst_norm = 0.0, worst_trip = 0.0;
  const double T = 1.0;
  for (int i = 0; i < kUnitaryDraws; ++i) {
    ComplexField f{g, random_complex_sine_sum(*g, rng, 12, 1.0)};
    double fn = l2_norm(*g, f.values);
    for (double t : {T, -T, T / 2, -T / 2}) {
      ComplexField u = op.propagate(f, t);
      worst_norm = std::max(worst_norm, std::abs(l2_norm(*g, u.values) - fn) / fn);
      ComplexField back = op.propagate(u, -t);
      worst_trip = std::max(worst_trip, l2_norm(*g, cvec(back.values - f.values)) / fn);
    }
  }
  return {worst_norm <= kUnitaryTol && worst_trip <= kRoundTripTol,
          "norm drift " + num(worst_norm) + ", round trip " + num(worst_trip)};
}

Outcome well_posedness() {
  auto g = pi_interval(63, 0.3);
  auto op = eigendecompose(g, zero(g));
  PotentialField q{g, sine_mode(*g, 1), "q"};
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.02;
  C1Fit c1 = fit_c1(op, cfg.T);
  BanachFit kb = estimate_banach_constant(g, 99);
  double qn = sobolev_norm(q, 2);
  bool ok = true;
  double worst_factor = 0.0, worst_bound = 0.0;
  std::string radii;
  for (const auto& spec : {NonlinearitySpec(2, {{1, 1, 1.0}}), NonlinearitySpec(3, {{2, 1, 2.0}})}) {
    RadiusResult rad = contraction_radius(spec, kb.kstar, c1.c1, cfg.T, qn);
    cfg.radius = rad.radius;
    radii += (radii.empty() ? "" : "/") + num(rad.radius, 3);
    Rng rng(7 + spec.k());
    for (int i = 0; i < kPicardDraws; ++i) {
      rvec shape = random_sine_sum(*g, rng, 6, 2.0);
      double scale = kRadiusFraction * rad.radius / g->sobolev().norm(shape, 2);
      ComplexField f{g, (scale * shape).cast<cplx>()};
      NonlinearSolution sol = solve_nonlinear(op, spec, q, f, cfg);
      const auto& cert = sol.certificate;
      double fac = cert.factors.empty() ? 0.0 : cert.max_factor();
      double bound = c0_da_norm(sol.u) / ((1.0 + c1.c1) * cert.data_norm);
      worst_factor = std::max(worst_factor, fac);
      worst_bound = std::max(worst_bound, bound);
      ok = ok && cert.converged && cert.certified && fac < 1.0 && bound <= 1.0;
    }
  }
  return {ok, "radius " + radii + ", max factor " + num(worst_factor) + ", max ||u||/((1+C1)||f||) " +
                  num(worst_bound) + ", C1 " + num(c1.c1) + ", K* " + num(kb.kstar)};
}

Outcome linearization_rates() {
  auto g = pi_interval(31, 0.3);
  auto op = eigendecompose(g, zero(g));
  ComplexField f{g, sine_mode(*g, 1).cast<cplx>()};
  PotentialField q{g, sine_mode(*g, 1), "q"};
  SolveConfig fine;
  fine.dt = 0.02;
  fine.picard_tol = 1e-14;
  SolveConfig coarse = fine;
  coarse.dt = 0.05;
  NonlinearitySpec product(2, {{1, 1, 1.0}}), cubic(3, {{2, 1, 2.0}});
  std::vector<double> small{1e-2, 1e-3, 1e-4, 1e-5}, wide{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  bool ok = true;
  std::string d;
  for (const auto* spec : {&product, &cubic}) {
    auto r = convergence_study(op, *spec, q, f, 1, small, fine);
    double need = spec->m0() + spec->n0() - 1.0 - kRateSlack;
    ok = ok && r.reference == "first_variation" && r.fitted_order >= need;
    d += "k=" + std::to_string(spec->k()) + " l=1 order " + num(r.fitted_order, 3) + " (>= " + num(need, 2) + "); ";
  }
  for (const auto* spec : {&product, &cubic}) {
    int k = spec->k();
    auto r = convergence_study(op, *spec, q, f, k, wide, coarse);
    bool conv = r.reference == "kth_variation" && r.monotone && r.fitted_order > 0.7;
    ok = ok && conv;
    d += "k=" + std::to_string(k) + " l=k order " + num(r.fitted_order, 3) + "; ";
  }
  auto mid = convergence_study(op, cubic, q, f, 2, wide, coarse);
  bool vanish = mid.reference == "zero" && mid.rows.back().error < mid.rows.front().error / 4 && mid.fitted_order > 0.7;
  ok = ok && vanish;
  d += "k=3 l=2 error " + num(mid.rows.front().error, 3) + " -> " + num(mid.rows.back().error, 3);
  return {ok, d};
}

Outcome combinatorics() {
  bool ok = true;
  for (int k = 2; k <= 6; ++k) {
    std::int64_t fact = 1;
    for (int i = 2; i <= k; ++i) fact *= i;
    ok = ok && alternating_power_sum(k, 1) == 0 && alternating_power_sum(k, k) == fact;
  }
  return {ok, "k = 2..6 exact"};
}

Outcome initial_identity() {
  auto g = pi_interval(63, 0.3);
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.01;
  cfg.picard_tol = 1e-13;
  auto op = eigendecompose(g, zero(g));
  PotentialField q2{g, sine_mode(*g, 1), "q2"};
  rvec b1 = sine_bump(*g, {M_PI / 2, 0}, {0.8, 0}, 0.3);
  rvec b2 = sine_bump(*g, {1.2, 0}, {0.5, 0}, -0.5) + sine_bump(*g, {2.0, 0}, {0.4, 0}, 0.2);
  rvec f1 = sine_mode(*g, 1), f2 = sine_mode(*g, 1) + 0.3 * sine_mode(*g, 2), f3 = 0.5 * sine_mode(*g, 1) - 0.2 * sine_mode(*g, 3);
  NonlinearitySpec product(2, {{1, 1, 1.0}}), cubic(3, {{2, 1, 2.0}}), mixed(2, {{2, 0, 1.0}, {1, 1, 0.5}});
  struct QCase {
    const NonlinearitySpec* spec;
    const rvec* pert;
    const rvec* f;
  };
  double worst_init = 0.0, worst_sym = 0.0;
  bool ok = true;
  for (QCase c : {QCase{&product, &b1, &f1}, QCase{&cubic, &b2, &f2}, QCase{&mixed, &b1, &f3}}) {
    PotentialField q1{g, q2.values + *c.pert, "q1"};
    ComplexField f{g, c.f->cast<cplx>()};
    RSystem rs = time_derivative_solution(op, *c.spec, q1, q2, f, cfg);
    int k = c.spec->k();
    cplx cs = 0.0;
    for (int m = 0; m <= k; ++m) cs += binomial(k, m) * c.spec->coeff(m, k - m);
    cvec expect(g->size());
    for (int n = 0; n < g->size(); ++n) expect[n] = cplx(0, 1) * cs * (*c.pert)[n] * std::pow((*c.f)[n], k);
    double err = l2_norm(*g, cvec(rs.r.values.col(rs.r.zero_index()) - expect)) / l2_norm(*g, expect);
    double sym = check_extension(op, rs).symmetry_defect;
    worst_init = std::max(worst_init, err);
    worst_sym = std::max(worst_sym, sym);
    ok = ok && err <= kInitialFactor * cfg.picard_tol && sym <= kSymmetryTol;
  }
  // p-mode: r(0) = i (p1 - p2) f
  for (int i = 0; i < 2; ++i) {
    const rvec& pert = i == 0 ? b1 : b2;
    const rvec& fv = i == 0 ? f2 : f3;
    PotentialField p2{g, 0.3 * sine_mode(*g, 1), "p2"};
    SpectralOperator op2(g, p2), op1(g, PotentialField{g, p2.values + pert, "p1"});
    ComplexField f{g, fv.cast<cplx>()};
    RSystem rs = time_derivative_solution(op1, op2, f, cfg);
    cvec expect = cplx(0, 1) * pert.cwiseProduct(fv).cast<cplx>();
    double err = l2_norm(*g, cvec(rs.r.values.col(rs.r.zero_index()) - expect)) / l2_norm(*g, expect);
    double sym = check_extension(op1, rs).symmetry_defect;
    worst_init = std::max(worst_init, err);
    worst_sym = std::max(worst_sym, sym);
    ok = ok && err <= kInitialFactor * cfg.picard_tol && sym <= kSymmetryTol;
  }
  return {ok, "5 combinations, initial residual " + num(worst_init) + " (<= " + num(kInitialFactor * cfg.picard_tol) +
                  "), symmetry " + num(worst_sym)};
}

Outcome energy() {
  auto g = pi_interval(127, 0.1);
  auto op = eigendecompose(g, zero(g));
  std::array<double, 2> x0{-10, 0};
  double lam = lambda0_for_grid(*g, x0);
  CarlemanWeightSet base(g, x0, lam, 8.0, 1.0);
  auto s0 = find_s0(op, base, {8, 16, 32, 64}, manufactured_suite(op, 3), {}, {CarlemanEstimate::full_boundary});
  if (!s0.found) return {false, "no s0 for the full-boundary estimate"};
  rvec bump = sine_bump(*g, {M_PI / 2, 0}, {M_PI / 2 - 0.12, 0}, 1.0);
  PotentialField q2{g, sine_mode(*g, 1), "q2"}, q1{g, q2.values + bump, "q1"};
  ComplexField f{g, (sine_mode(*g, 1) + 0.2 * sine_mode(*g, 3)).cast<cplx>()};
  SolveConfig cfg;
  cfg.T = 1.0;
  cfg.dt = kEnergyDt;
  RSystem rs = time_derivative_solution(op, NonlinearitySpec(2, {{1, 1, 1.0}}), q1, q2, f, cfg);
  bool ok = true;
  std::string d = "s0 " + num(s0.s0) + ":";
  for (double s : {s0.s0, 2 * s0.s0}) {
    auto e = energy_identity(op, rs, base.with_s(s));
    ok = ok && e.relative_error <= kEnergyTol;
    d += " s=" + num(s) + " rel " + num(e.relative_error, 3);
  }
  return {ok, d};
}

Outcome carleman_ratios() {
  auto g = build_grid(1, {1, 0}, {511, 0}, 0.15);
  auto op = eigendecompose(g, zero(g));
  std::array<double, 2> x0{-3, 0};
  double lam = lambda0_for_grid(*g, x0);
  CarlemanWeightSet base(g, x0, lam, 8.0, 1.0);
  auto suite = manufactured_suite(op, 3);
  auto s0 = find_s0(op, base, {8, 16, 32, 64, 128}, suite);
  if (!s0.found) return {false, "no s0 up to 128"};
  auto sw = carleman_ratio_sweep(op, base, {s0.s0, 2 * s0.s0, 4 * s0.s0, 8 * s0.s0}, suite);
  return {sw.pass(), "6 members, s0 " + num(s0.s0) + ", C full " + num(sw.max_ratio_full) + ", C interior " +
                         num(sw.max_ratio_interior) + ", non-increasing " + (sw.non_increasing ? "yes" : "no")};
}

Outcome kernel_bound() {
  auto r = fbi_kernel_bound_check({50, 100, 400}, 2001, kKernelBound);
  return {r.holds(), "max |1-K|^2 gamma/zeta^2 = " + num(r.fitted_c) + " (<= " + num(kKernelBound) + ")"};
}

StabilityInputs lipschitz_inputs(int n, RecoveryMode mode) {
  auto g = pi_interval(n, 0.3);
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

std::vector<PerturbationMember> doubled(std::vector<PerturbationMember> fam) {
  for (auto& m : fam) m.values *= 2.0;
  return fam;
}

Outcome lipschitz() {
  bool ok = true;
  std::string d;
  for (auto mode : {RecoveryMode::q, RecoveryMode::p}) {
    auto coarse = lipschitz_inputs(127, mode), fine = lipschitz_inputs(255, mode);
    auto fam = perturbation_family(*coarse.p.grid, 0.02);
    auto a = stability_experiment(coarse, fam);
    auto b = stability_experiment(fine, perturbation_family(*fine.p.grid, 0.02));
    auto two = stability_experiment(coarse, doubled(fam));
    double drift = std::abs(b.fitted_c - a.fitted_c) / a.fitted_c;
    double hom = 0.0;
    for (size_t i = 0; i < a.rows.size(); ++i) hom = std::max(hom, std::abs(two.rows[i].delta / a.rows[i].delta - 2.0) / 2.0);
    coarse.cfg.dt = 0.0025;
    coarse.full_path = true;
    coarse.agreement_tol = kAgreementTol;
    auto full = stability_experiment(coarse, fam);
    bool m_ok = a.pass && b.pass && drift < kDriftTol && hom < kHomogeneityTol && full.pass;
    ok = ok && m_ok;
    if (!d.empty()) d += "; ";
    d += to_string(mode) + ": C " + num(a.fitted_c) + " -> " + num(b.fitted_c) + " (drift " + num(drift, 2) +
         "), homogeneity " + num(hom, 2) + ", full path " + num(full.max_disagreement, 2);
  }
  return {ok, d};
}

Outcome log_law_shape() {
  auto g = build_grid(2, {1, 1}, {31, 31}, 0.2);
  bool ok = true;
  std::string d;
  for (auto mode : {RecoveryMode::q, RecoveryMode::p}) {
    StabilityInputs in;
    in.mode = mode;
    in.p = zero(g);
    in.q = PotentialField{g, sine_mode(*g, 1, 1), "q"};
    in.f = ComplexField{g, sine_mode(*g, 1, 1).cast<cplx>()};
    in.selection = gamma0_selection(*g, {-1, -1});
    in.cfg.T = 1.0;
    in.cfg.dt = 0.01;
    in.gamma_minus = 0.3;
    auto r = partial_data_experiment(in, perturbation_family(*g, 0.02), {1.0, 0.75, 0.5, 0.25}, {10, 20, 40});
    ok = ok && r.pass;
    if (!d.empty()) d += "; ";
    d += r.mode + ": C " + num(r.fitted_c) + ", C_lip " + num(r.lipschitz.fitted_c) + ", monotone " +
         (r.monotone ? "yes" : "no") + ", never tighter " + (r.never_tighter ? "yes" : "no") + ", mu " +
         num(r.observability.mu, 3);
  }
  return {ok, d};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  fs::path dir = fs::temp_directory_path() / "nls_acceptance_determinism";
  fs::remove_all(dir);
  int manifests = 0, files = 0;
  bool ok = true;
  std::string bad;
  std::vector<fs::path> all;
  for (const auto& e : fs::directory_iterator(fs::path(NLS_SOURCE_DIR) / "manifests"))
    if (slurp(e.path()).find("\"experiment\"") != std::string::npos) all.push_back(e.path());
  std::sort(all.begin(), all.end());
  int saved = thread_count();
  for (const auto& p : all) {
    std::string op = load_manifest(p).experiment.operation;
    std::string stem = p.stem().string();
    auto a = run_manifest(p, op, {dir / stem / "a", 1});
    auto b = run_manifest(p, op, {dir / stem / "b", std::max(2, saved)});
    if (a.exit_code != 0 || b.exit_code != 0) {
      ok = false;
      bad += stem + " exit " + std::to_string(a.exit_code) + "/" + std::to_string(b.exit_code) + " ";
      continue;
    }
    ++manifests;
    for (const auto& e : fs::directory_iterator(dir / stem / "a")) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(dir / stem / "b" / e.path().filename())) {
        ok = false;
        bad += stem + "/" + e.path().filename().string() + " ";
      }
    }
  }
  set_thread_count(saved);
  return {ok && manifests > 0, std::to_string(manifests) + " manifests, " + std::to_string(files) +
                                   " csv files compared" + (bad.empty() ? "" : ", differing: " + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  if (!std::getenv("NLS_THREADS")) set_thread_count(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<Criterion> all{
      {1, "unitarity and group law", 10, unitarity},
      {2, "nonlinear well-posedness", 120, well_posedness},
      {3, "linearization rates", 300, linearization_rates},
      {4, "combinatorial anchors", 1, combinatorics},
      {5, "initial-data identity", 120, initial_identity},
      {6, "energy identity", 60, energy},
      {7, "carleman ratio stability", 300, carleman_ratios},
      {8, "fbi kernel bound", 5, kernel_bound},
      {9, "lipschitz stability law", 600, lipschitz},
      {10, "log-law shape", 900, log_law_shape},
      {11, "determinism", 600, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  std::printf("threads %d\n", thread_count());
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = sec <= c.limit;
    bool pass = o.pass && in_time;
    ++ran;
    if (!pass) ++failed;
    std::printf("[%s] %2d %-26s %8.2f s (limit %g s%s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), sec,
                c.limit, in_time ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
