#include "nls/runner.hpp"

#include <ctime>
#include <iomanip>
#include <sstream>

#include "nls/constants.hpp"
#include "nls/errors.hpp"
#include "nls/parallel.hpp"
#include "nls/sobolev.hpp"

namespace nls {

using json = nlohmann::json;

bool Report::pass() const {
  if (failed) return false;
  for (const auto& c : checks)
    if (!c.second) return false;
  return true;
}

void Report::constant(const std::string& key, double v) { constants.push_back({key, fmt(v)}); }
void Report::constant(const std::string& key, const std::string& v) { constants.push_back({key, v}); }

RunLog::RunLog(std::filesystem::path path) : path_(std::move(path)) {}

void RunLog::line(const std::string& msg) {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " " << msg << "\n";
  text_ += os.str();
  flush();
}

void RunLog::stage(const std::string& name, double seconds) {
  std::ostringstream os;
  os << "stage " << name << " wall=" << std::fixed << std::setprecision(3) << seconds << "s";
  line(os.str());
}

void RunLog::flush() {
  if (path_.empty()) return;
  try {
    write_text(path_, text_);
  } catch (const NumericalError&) {
  }
}

std::string summary_text(const Report& r) {
  std::string out;
  if (r.failed) out += "FAILED " + r.failure + "\n";
  out += "operation=" + r.operation + "\n";
  out += std::string("status=") + (r.pass() ? "pass" : "fail") + "\n";
  for (const auto& [name, ok] : r.checks) out += "check " + name + "=" + (ok ? "pass" : "fail") + "\n";
  for (const auto& [k, v] : r.constants) out += "constant " + k + "=" + v + "\n";
  for (const auto& w : r.warnings) out += "warning " + w + "\n";
  return out;
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& dir, RunLog* log) {
  if (format == ReportFormat::summary) {
    write_text(dir / "summary.txt", summary_text(report));
    return;
  }
  for (const auto& t : report.tables) {
    if (t.rows.empty() && log) log->line("warning: " + t.file + " has no data rows");
    write_text(dir / t.file, t.render());
  }
  for (const auto& [file, text] : report.texts) write_text(dir / file, text);
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

std::array<double, 2> point(const json& j) { return j.get<std::array<double, 2>>(); }

// Streams finished tables to disk so a later failure keeps them.
class Sink {
 public:
  Sink(Report& r, const std::filesystem::path& dir, RunLog* log) : r_(r), dir_(dir), log_(log) {}

  void add(CsvTable t) {
    t.meta.insert(t.meta.begin(), {"manifest", r_.manifest});
    if (t.rows.empty() && log_) log_->line("warning: " + t.file + " has no data rows");
    write_text(dir_ / t.file, t.render());
    r_.tables.push_back(std::move(t));
  }
  void add_text(const std::string& file, const std::string& text) {
    write_text(dir_ / file, text);
    r_.texts.push_back({file, text});
  }
  void stage(const std::string& name, clock_type::time_point t0) {
    if (log_) log_->stage(name, seconds_since(t0));
  }

 private:
  Report& r_;
  std::filesystem::path dir_;
  RunLog* log_;
};

BoundarySelection selection_from(const Grid& g, const json& j) {
  if (j.at("mode") == "gamma0") return gamma0_selection(g, point(j.at("x0")));
  return explicit_selection(g, j.at("nodes").get<std::vector<int>>());
}

StabilityInputs stability_inputs(const Problem& pr, const json& p, RecoveryMode mode) {
  StabilityInputs in;
  in.mode = mode;
  in.p = pr.p;
  in.q = pr.q;
  in.spec = pr.spec;
  in.f = pr.f;
  in.cfg = pr.cfg;
  in.selection = selection_from(*pr.grid, p.at("selection"));
  in.gamma_minus = p.at("gamma_minus").get<double>();
  double gp = p.at("gamma_plus").get<double>();
  in.gamma_plus = gp > 0.0 ? gp : 1e300;
  if (p.contains("full_path")) {
    in.full_path = p.at("full_path").get<bool>();
    in.full_eps = p.at("full_eps").get<double>();
    in.agreement_tol = p.at("agreement_tol").get<double>();
  }
  return in;
}

std::vector<PerturbationMember> family_from(const Grid& g, const json& p, std::uint64_t seed) {
  const json& members = p.at("members");
  if (members.empty()) return perturbation_family(g, p.at("amplitude").get<double>());
  std::vector<PerturbationMember> fam;
  for (const auto& m : members)
    fam.push_back({m.at("id").get<std::string>(), evaluate_profile(g, m.at("profile").get<Profile>(), seed)});
  return fam;
}

void run_solve(const Manifest& m, const Problem& pr, Report& rep, Sink& sink) {
  const json& p = m.experiment.params;
  auto t0 = clock_type::now();
  SpectralOperator op(pr.grid, pr.p);
  sink.stage("eigendecomposition", t0);
  t0 = clock_type::now();
  SolveConfig cfg = pr.cfg;
  cfg.symmetric = p.at("symmetric").get<bool>();
  double fnorm = sobolev_norm(pr.f, 2);
  Trajectory u;
  if (p.at("nonlinear").get<bool>()) {
    C1Fit c1 = fit_c1(op, cfg.T, p.at("c1_samples").get<int>());
    BanachFit kb = estimate_banach_constant(pr.grid, m.seed, p.at("banach_samples").get<int>());
    RadiusResult rad = contraction_radius(pr.spec, kb.kstar, c1.c1, cfg.T, sobolev_norm(pr.q, 2));
    cfg.radius = rad.radius;
    rep.constant("C1", c1.c1);
    rep.constant("Kstar", kb.kstar);
    rep.constant("radius", rad.radius);
    sink.stage("constants", t0);
    t0 = clock_type::now();
    NonlinearSolution sol = solve_nonlinear(op, pr.spec, pr.q, pr.f, cfg);
    sink.stage("picard", t0);
    const auto& cert = sol.certificate;
    sink.add_text("certificate.json", certificate_text(cert));
    rep.constant("data_norm", cert.data_norm);
    rep.constant("iterations", std::to_string(cert.iterations));
    rep.constant("max_factor", cert.max_factor());
    double sup = c0_da_norm(sol.u);
    rep.constant("sup_h2", sup);
    rep.check("converged", cert.converged);
    rep.check("contraction", cert.factors.empty() || cert.max_factor() < 1.0);
    if (cert.certified)
      rep.check("a_priori_bound", sup <= (1.0 + c1.c1) * fnorm * (1.0 + 1e-12));
    else
      rep.warnings.push_back("data norm exceeds the certified radius");
    u = std::move(sol.u);
  } else {
    u = solve_linear(op, pr.f, nullptr, cfg);
    sink.stage("linear", t0);
    double drift = 0.0, f0 = l2_norm(*pr.grid, pr.f.values);
    for (int j = 0; j < u.samples(); ++j) drift = std::max(drift, std::abs(l2_norm(*pr.grid, cvec(u.values.col(j))) - f0));
    rep.constant("norm_drift", drift);
    rep.check("unitary", drift <= 1e-10 * std::max(f0, 1e-300));
  }
  sink.add(trajectory_table(u, p.at("stride").get<int>()));
  sink.add(field_table(u.at(u.samples() - 1), "final_field.csv"));
}

void run_linearize(const Manifest& m, const Problem& pr, Report& rep, Sink& sink) {
  const json& p = m.experiment.params;
  auto t0 = clock_type::now();
  SpectralOperator op(pr.grid, pr.p);
  int order = p.at("order").get<int>();
  ConvergenceReport cr = convergence_study(op, pr.spec, pr.q, pr.f, order, numbers(p.at("ladder")), pr.cfg);
  sink.stage("convergence", t0);
  sink.add(convergence_table(cr));
  rep.constant("reference", cr.reference);
  rep.constant("fitted_order", cr.fitted_order);
  rep.constant("fit_points", std::to_string(cr.fit_points));
  if (cr.flagged) rep.warnings.push_back("non-monotone ladder");
  if (order == 1)
    rep.check("rate", cr.fitted_order >= pr.spec.m0() + pr.spec.n0() - 1.0 - 0.3);
  else
    rep.check("converging", !cr.rows.empty() && cr.rows.back().error < cr.rows.front().error);
}

void run_carleman(const Manifest& m, const Problem& pr, Report& rep, Sink& sink) {
  const json& p = m.experiment.params;
  auto t0 = clock_type::now();
  SpectralOperator op(pr.grid, pr.p);
  auto x0 = point(p.at("x0"));
  double lambda = p.at("lambda").get<double>();
  if (lambda == 0.0) lambda = lambda0_for_grid(*pr.grid, x0);
  double T1 = p.at("T1").get<double>();
  if (T1 == 0.0) T1 = pr.cfg.T;
  std::vector<CarlemanEstimate> est;
  for (const auto& e : p.at("estimates"))
    est.push_back(e == "full" ? CarlemanEstimate::full_boundary : CarlemanEstimate::interior);
  RatioOptions opt;
  opt.collar_inner = p.at("collar_inner").get<double>();
  opt.collar_outer = p.at("collar_outer").get<double>();
  auto cands = numbers(p.at("s_candidates"));
  CarlemanWeightSet base(pr.grid, x0, lambda, cands.front(), T1);
  auto suite = manufactured_suite(op, m.seed);
  rep.constant("Lambda0", lambda0_for_grid(*pr.grid, x0));
  rep.constant("lambda", lambda);
  S0Search s0 = find_s0(op, base, cands, suite, opt, est);
  sink.stage("s0_search", t0);
  rep.constant("s0", s0.found ? fmt(s0.s0) : std::string("none"));
  rep.check("s0_found", s0.found);
  if (!s0.found) return;
  t0 = clock_type::now();
  SweepReport sw = carleman_ratio_sweep(op, base, {s0.s0, 2 * s0.s0, 4 * s0.s0, 8 * s0.s0}, suite, opt, est);
  sink.stage("ratio_sweep", t0);
  for (auto e : est) sink.add(ratio_table(sw, e, "ratios_" + to_string(e) + ".csv"));
  for (auto e : est)
    rep.constant("C_" + to_string(e), e == CarlemanEstimate::full_boundary ? sw.max_ratio_full : sw.max_ratio_interior);
  rep.check("ratios_bounded", sw.bounded);
  rep.check("ratios_non_increasing", sw.non_increasing);

  Profile pert = p.at("energy_perturbation").get<Profile>();
  if (pert.empty()) return;
  t0 = clock_type::now();
  PotentialField q1{pr.grid, pr.q.values + evaluate_profile(*pr.grid, pert, m.seed), "q1"};
  SolveConfig cfg = pr.cfg;
  cfg.T = T1;
  RSystem rs = time_derivative_solution(op, pr.spec, q1, pr.q, pr.f, cfg);
  CsvTable t;
  t.file = "energy_identity.csv";
  t.schema = "energy_identity";
  t.columns = {"s", "lhs", "rhs", "relative_error"};
  bool ok = true;
  for (double s : {s0.s0, 2 * s0.s0}) {
    EnergyIdentity ei = energy_identity(op, rs, base.with_s(s));
    t.add({fmt(s), fmt(ei.lhs), fmt(ei.rhs), fmt(ei.relative_error)});
    ok = ok && ei.relative_error <= 1e-5;
  }
  sink.stage("energy_identity", t0);
  sink.add(std::move(t));
  rep.check("energy_identity", ok);
}

void run_fbi(const Manifest& m, const Problem& pr, Report& rep, Sink& sink) {
  const json& p = m.experiment.params;
  auto t0 = clock_type::now();
  KernelBoundReport kb =
      fbi_kernel_bound_check(numbers(p.at("gammas")), p.at("zeta_points").get<int>(), p.at("bound").get<double>());
  sink.stage("kernel_bound", t0);
  sink.add(kernel_table(kb));
  rep.constant("C_kernel", kb.fitted_c);
  rep.check("kernel_bound", kb.holds());

  t0 = clock_type::now();
  SpectralOperator op(pr.grid, pr.p);
  SolveConfig cfg = pr.cfg;
  cfg.symmetric = true;
  Trajectory w = solve_linear(op, pr.f, nullptr, cfg);
  FbiConfig fc;
  fc.gamma = p.at("gamma").get<double>();
  fc.T = cfg.T;
  fc.T0 = p.at("T0").get<double>();
  fc.validate();
  CauchyRiemannCheck cr = cauchy_riemann_check(w, fc, numbers(p.at("times")), numbers(p.at("taus")));
  sink.stage("cauchy_riemann", t0);
  CsvTable t;
  t.file = "cauchy_riemann.csv";
  t.schema = "fbi_cauchy_riemann";
  t.columns = {"gamma", "T0", "residual", "step"};
  t.add({fmt(fc.gamma), fmt(fc.horizon()), fmt(cr.residual), fmt(cr.step)});
  sink.add(std::move(t));
  rep.constant("T0", fc.horizon());
  rep.constant("cr_residual", cr.residual);
  rep.check("cauchy_riemann", cr.residual < 1e-6);
}

void run_recover(const Manifest& m, const Problem& pr, Report& rep, Sink& sink, RecoveryMode mode) {
  const json& p = m.experiment.params;
  auto t0 = clock_type::now();
  StabilityInputs in = stability_inputs(pr, p, mode);
  StabilityReport sr = stability_experiment(in, family_from(*pr.grid, p, m.seed));
  sink.stage("stability", t0);
  sink.add(stability_table(sr));
  rep.constant("C", sr.fitted_c);
  if (in.full_path) rep.constant("max_disagreement", sr.max_disagreement);
  rep.check("lipschitz_law", sr.pass);
}

void run_partial(const Manifest& m, const Problem& pr, Report& rep, Sink& sink) {
  const json& p = m.experiment.params;
  auto t0 = clock_type::now();
  RecoveryMode mode = p.at("mode") == "p" ? RecoveryMode::p : RecoveryMode::q;
  StabilityInputs in = stability_inputs(pr, p, mode);
  PartialDataReport pd =
      partial_data_experiment(in, family_from(*pr.grid, p, m.seed), numbers(p.at("fractions")), numbers(p.at("gammas")));
  sink.stage("partial_data", t0);
  sink.add(stability_table(pd.lipschitz));
  sink.add(partial_delta_table(pd));
  sink.add(log_law_table(pd));
  CsvTable t;
  t.file = "observability.csv";
  t.schema = "observability";
  t.columns = {"gamma", "energy", "boundary", "rhs", "c", "mu"};
  const auto& ob = pd.observability;
  for (double g : ob.gammas)
    t.add({fmt(g), fmt(ob.energy), fmt(ob.boundary),
           fmt(1.0 / g + std::exp(-ob.mu * g) + std::exp(ob.mu * g) * ob.boundary), fmt(ob.c), fmt(ob.mu)});
  sink.add(std::move(t));
  rep.constant("C_lipschitz", pd.lipschitz.fitted_c);
  rep.constant("C", pd.fitted_c);
  rep.constant("C_observability", ob.c);
  rep.constant("mu", ob.mu);
  rep.check("monotone_in_gamma", pd.monotone);
  rep.check("never_tighter", pd.never_tighter);
  rep.check("log_law", pd.pass);
}

}  // namespace

Report execute(const Manifest& m, const std::filesystem::path& dir, RunLog* log) {
  Report rep;
  rep.operation = m.experiment.operation;
  rep.manifest = serialize_compact(m);
  Sink sink(rep, dir, log);
  try {
    Problem pr = build_problem(m);
    const std::string& op = m.experiment.operation;
    if (op == "solve")
      run_solve(m, pr, rep, sink);
    else if (op == "linearize")
      run_linearize(m, pr, rep, sink);
    else if (op == "carleman-check")
      run_carleman(m, pr, rep, sink);
    else if (op == "fbi-check")
      run_fbi(m, pr, rep, sink);
    else if (op == "recover-p")
      run_recover(m, pr, rep, sink, RecoveryMode::p);
    else if (op == "recover-q")
      run_recover(m, pr, rep, sink, RecoveryMode::q);
    else if (op == "partial-data")
      run_partial(m, pr, rep, sink);
    else
      throw ConfigError("unknown operation '" + op + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    rep.failed = true;
    rep.failure = e.what();
  }
  return rep;
}

RunResult run_manifest(const std::filesystem::path& manifest, const std::string& subcommand, const RunOptions& opt) {
  RunResult res;
  Manifest m;
  try {
    m = load_manifest(manifest);
    if (m.experiment.operation != subcommand)
      throw ManifestError({"experiment.operation: manifest declares '" + m.experiment.operation +
                           "' but the subcommand is '" + subcommand + "'"});
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.message = e.what();
    return res;
  }
  res.out = opt.out.empty() ? std::filesystem::path(m.experiment.output) : opt.out;
  if (opt.threads > 0) set_thread_count(opt.threads);
  std::error_code ec;
  std::filesystem::create_directories(res.out, ec);
  std::filesystem::remove(res.out / "FAILED", ec);
  RunLog log(res.out / "run.log");
  log.line(std::string("nlslab ") + kVersion + " eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." +
           std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION));
  log.line("operation " + subcommand + " manifest " + manifest.string() + " seed " + std::to_string(m.seed) +
           " threads " + std::to_string(thread_count()));
  auto t0 = clock_type::now();
  try {
    write_text(res.out / "manifest.json", serialize(m));
    res.report = execute(m, res.out, &log);
  } catch (const ConfigError& e) {
    log.line(std::string("validation error: ") + e.what());
    res.report.operation = subcommand;
    res.report.failed = true;
    res.report.failure = e.what();
    res.exit_code = 2;
  } catch (const std::exception& e) {
    res.report.failed = true;
    res.report.failure = e.what();
  }
  for (const auto& [k, v] : res.report.constants) log.line("constant " + k + "=" + v);
  for (const auto& w : res.report.warnings) log.line("warning: " + w);
  log.stage("total", seconds_since(t0));
  try {
    emit_report(res.report, ReportFormat::summary, res.out, &log);
  } catch (const NumericalError& e) {
    res.report.failed = true;
    res.report.failure = e.what();
  }
  if (res.report.failed) {
    write_text(res.out / "FAILED", res.report.failure + "\n");
    log.line("FAILED " + res.report.failure);
    if (res.exit_code == 0) res.exit_code = 3;
    res.message = res.report.failure;
  }
  return res;
}

}  // namespace nls
