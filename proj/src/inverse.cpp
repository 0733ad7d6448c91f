#include "nls/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nls/errors.hpp"
#include "nls/parallel.hpp"
#include "nls/sobolev.hpp"

namespace nls {

BoundarySelection gamma0_selection(const Grid& g, std::array<double, 2> x0) {
  BoundarySelection sel;
  sel.mode = "gamma0";
  sel.x0 = x0;
  if (g.dim() == 1) sel.x0[1] = 0.0;
  for (size_t b = 0; b < g.boundary().size(); ++b) {
    const auto& bn = g.boundary()[b];
    double d = (bn.pos[0] - sel.x0[0]) * bn.normal[0] + (bn.pos[1] - sel.x0[1]) * bn.normal[1];
    if (d >= 0.0) sel.nodes.push_back(static_cast<int>(b));
  }
  if (sel.nodes.empty()) throw ConfigError("gamma0 selection is empty");
  return sel;
}

BoundarySelection explicit_selection(const Grid& g, std::vector<int> nodes) {
  if (nodes.empty()) throw ConfigError("explicit boundary selection is empty");
  for (int n : nodes)
    if (n < 0 || n >= static_cast<int>(g.boundary().size()))
      throw ConfigError("selection entry " + std::to_string(n) + " is not a boundary node");
  BoundarySelection sel;
  sel.mode = "explicit";
  sel.nodes = std::move(nodes);
  return sel;
}

namespace {

// Counter-clockwise arc-length position of a boundary entry.
double arc_position(const Grid& g, const BoundaryNode& b) {
  double lx = g.extent()[0], ly = g.dim() == 2 ? g.extent()[1] : 0.0;
  switch (b.face) {
    case 2: return b.pos[0];
    case 1: return lx + b.pos[1];
    case 3: return lx + ly + (lx - b.pos[0]);
    default: return 2 * lx + ly + (ly - b.pos[1]);
  }
}

}  // namespace

BoundarySelection shrink_selection(const Grid& g, const BoundarySelection& sel, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must lie in (0, 1]");
  int n = static_cast<int>(sel.nodes.size());
  if (n == 0) throw ConfigError("cannot shrink an empty selection");
  // order along the boundary, starting after the widest gap so the block is connected
  std::vector<std::pair<double, int>> pos;
  for (int b : sel.nodes) pos.push_back({arc_position(g, g.boundary().at(b)), b});
  std::sort(pos.begin(), pos.end());
  double perimeter = g.dim() == 2 ? 2 * (g.extent()[0] + g.extent()[1]) : g.extent()[0];
  int start_at = 0;
  double widest = perimeter - pos.back().first + pos.front().first;
  for (int i = 1; i < n; ++i)
    if (pos[i].first - pos[i - 1].first > widest) {
      widest = pos[i].first - pos[i - 1].first;
      start_at = i;
    }
  std::rotate(pos.begin(), pos.begin() + start_at, pos.end());
  int keep = std::max(1, static_cast<int>(std::ceil(fraction * n - 1e-9)));
  int start = (n - keep) / 2;
  BoundarySelection out = sel;
  if (keep < n) out.mode = "explicit";
  out.nodes.clear();
  for (int i = start; i < start + keep; ++i) out.nodes.push_back(pos[i].second);
  return out;
}

namespace {

double trapezoid_weight(size_t j, size_t m) { return (j == 0 || j + 1 == m) ? 0.5 : 1.0; }

MeasurementSeries trace_on(const Trajectory& traj, const BoundarySelection& sel, bool full_range) {
  const Grid& g = *traj.grid;
  MeasurementSeries s;
  s.selection = sel;
  std::vector<int> cols;
  for (int j = 0; j < traj.samples(); ++j)
    if (full_range || traj.times[j] >= -1e-12) {
      cols.push_back(j);
      s.times.push_back(traj.times[j]);
    }
  s.values = cmat::Zero(static_cast<long>(sel.nodes.size()), static_cast<long>(cols.size()));
  for (size_t r = 0; r < sel.nodes.size(); ++r) {
    int b = sel.nodes[r];
    if (b < 0 || b >= static_cast<int>(g.boundary().size())) throw ConfigError("selection entry is not a boundary node");
    const auto& bn = g.boundary()[b];
    s.weights.push_back(bn.weight);
    if (bn.inward[0] < 0 || bn.inward[1] < 0) continue;  // corners
    double h = bn.face < 2 ? g.spacing()[0] : g.spacing()[1];
    for (size_t c = 0; c < cols.size(); ++c)
      s.values(r, c) = (traj.values(bn.inward[1], cols[c]) - 4.0 * traj.values(bn.inward[0], cols[c])) / (2.0 * h);
  }
  return s;
}

}  // namespace

double MeasurementSeries::l2() const {
  if (times.size() < 2) return 0.0;
  double dt = times[1] - times[0];
  double acc = 0.0;
  for (long r = 0; r < values.rows(); ++r) {
    double row = 0.0;
    for (long c = 0; c < values.cols(); ++c) row += trapezoid_weight(c, values.cols()) * std::norm(values(r, c));
    acc += weights[r] * row * dt;
  }
  return std::sqrt(acc);
}

MeasurementSeries neumann_trace(const Trajectory& traj, const BoundarySelection& sel) {
  return trace_on(traj, sel, false);
}

MeasurementSeries time_derivative(const MeasurementSeries& s) {
  long m = s.values.cols();
  if (m < 3) throw ConfigError("need at least three samples for a time derivative");
  double dt = s.times[1] - s.times[0];
  MeasurementSeries d = s;
  for (long c = 0; c < m; ++c) {
    if (c == 0)
      d.values.col(c) = (-3.0 * s.values.col(0) + 4.0 * s.values.col(1) - s.values.col(2)) / (2 * dt);
    else if (c == m - 1)
      d.values.col(c) = (3.0 * s.values.col(m - 1) - 4.0 * s.values.col(m - 2) + s.values.col(m - 3)) / (2 * dt);
    else
      d.values.col(c) = (s.values.col(c + 1) - s.values.col(c - 1)) / (2 * dt);
  }
  return d;
}

std::string to_string(RecoveryMode m) { return m == RecoveryMode::p ? "recover-p" : "recover-q"; }

std::vector<PerturbationMember> perturbation_family(const Grid& g, double amplitude) {
  int dim = g.dim();
  double c = g.collar_width();
  std::array<double, 2> mid{0.5 * g.extent()[0], 0.5 * g.extent()[1]};
  std::array<double, 2> R{mid[0] - c, mid[1] - c};
  auto bump = [&](double ox, double oy, double wx, double wy, double a) {
    std::array<double, 2> ctr{mid[0] + ox * R[0], dim == 2 ? mid[1] + oy * R[1] : 0.0};
    std::array<double, 2> w{wx * R[0], dim == 2 ? wy * R[1] : 1.0};
    return sine_bump(g, ctr, w, a);
  };
  std::vector<PerturbationMember> fam;
  fam.push_back({"m1", bump(0.0, 0.0, 0.9, 0.9, amplitude)});
  fam.push_back({"m2", bump(-0.3, 0.2, 0.6, 0.6, amplitude)});
  fam.push_back({"m3", bump(0.35, -0.3, 0.55, 0.5, -0.8 * amplitude)});
  fam.push_back({"m4", rvec(bump(-0.45, -0.4, 0.45, 0.45, amplitude) + bump(0.45, 0.4, 0.45, 0.45, amplitude))});
  fam.push_back({"m5", rvec(bump(0.0, 0.0, 0.5, 0.5, 0.6 * amplitude) + bump(0.5, 0.5, 0.4, 0.4, -amplitude))});
  return fam;
}

void check_stability_hypotheses(const StabilityInputs& in, const PotentialField& pert) {
  const Grid& g = *pert.grid;
  std::vector<int> touching, small;
  for (int n = 0; n < g.size(); ++n) {
    if (g.in_collar(n)) {
      if (pert.values[n] != 0.0) touching.push_back(n);
    } else if (std::abs(in.f.values[n]) < in.gamma_minus) {
      small.push_back(n);
    }
  }
  if (!touching.empty())
    throw HypothesisError("perturbation '" + pert.label + "' touches the collar at " +
                              std::to_string(touching.size()) + " nodes",
                          touching);
  if (!small.empty())
    throw HypothesisError("|f| < gamma_minus off the collar at " + std::to_string(small.size()) + " nodes", small);
  double h4 = sobolev_norm(in.f, 4);
  if (h4 > in.gamma_plus)
    throw ConfigError("||f||_H4 = " + std::to_string(h4) + " exceeds gamma_plus = " + std::to_string(in.gamma_plus));
}

namespace {

RSystem solve_r(const StabilityInputs& in, const PotentialField& pert, const SpectralOperator* base_op) {
  if (in.mode == RecoveryMode::q) {
    PotentialField q1{pert.grid, in.q.values + pert.values, "q1"};
    if (base_op) return time_derivative_solution(*base_op, in.spec, q1, in.q, in.f, in.cfg);
    SpectralOperator op(in.p.grid, in.p);
    return time_derivative_solution(op, in.spec, q1, in.q, in.f, in.cfg);
  }
  SpectralOperator op1(in.p.grid, PotentialField{pert.grid, in.p.values + pert.values, "p1"});
  if (base_op) return time_derivative_solution(op1, *base_op, in.f, in.cfg);
  SpectralOperator op2(in.p.grid, in.p);
  return time_derivative_solution(op1, op2, in.f, in.cfg);
}

double off_collar_norm(const Grid& g, const rvec& v) {
  double acc = 0.0;
  for (int n = 0; n < g.size(); ++n)
    if (!g.in_collar(n)) acc += v[n] * v[n];
  return std::sqrt(acc * g.cell_volume());
}

}  // namespace

double fast_delta(const StabilityInputs& in, const PotentialField& pert) {
  RSystem rs = solve_r(in, pert, nullptr);
  return neumann_trace(rs.r, in.selection).l2();
}

double full_delta(const StabilityInputs& in, const PotentialField& pert) {
  double eps = in.full_eps > 0 ? in.full_eps : 1e-3;
  Trajectory a, b;
  if (in.mode == RecoveryMode::q) {
    SpectralOperator op(in.p.grid, in.p);
    PotentialField q1{pert.grid, in.q.values + pert.values, "q1"};
    int l = in.spec.k();
    a = difference_quotient_variation(op, in.spec, q1, in.f, l, eps, in.cfg).u;
    b = difference_quotient_variation(op, in.spec, in.q, in.f, l, eps, in.cfg).u;
  } else {
    SpectralOperator op1(in.p.grid, PotentialField{pert.grid, in.p.values + pert.values, "p1"});
    SpectralOperator op2(in.p.grid, in.p);
    a = difference_quotient_variation(op1, in.spec, in.q, in.f, 1, eps, in.cfg).u;
    b = difference_quotient_variation(op2, in.spec, in.q, in.f, 1, eps, in.cfg).u;
  }
  Trajectory d{a.grid, a.times, a.values - b.values};
  return time_derivative(neumann_trace(d, in.selection)).l2();
}

StabilityReport stability_experiment(const StabilityInputs& in, const std::vector<PerturbationMember>& family) {
  if (!in.p.grid) throw ConfigError("stability experiment needs a base potential on a grid");
  const Grid& g = *in.p.grid;
  if (in.q.values.size() != g.size() || in.f.values.size() != g.size()) throw GridMismatch();
  std::vector<PotentialField> perts;
  for (const auto& m : family) {
    if (m.values.size() != g.size()) throw GridMismatch();
    perts.push_back(PotentialField{in.p.grid, m.values, m.id});
    check_stability_hypotheses(in, perts.back());
  }
  SpectralOperator base(in.p.grid, in.p);
  StabilityReport rep;
  rep.mode = to_string(in.mode);
  rep.rows.resize(family.size());
  parallel_for(static_cast<int>(family.size()), [&](int i) {
    StabilityRow row;
    row.member_id = family[i].id;
    row.pert_norm = off_collar_norm(g, family[i].values);
    row.pert_h4 = g.sobolev().norm(family[i].values, 4);
    RSystem rs = solve_r(in, perts[i], &base);
    row.delta = neumann_trace(rs.r, in.selection).l2();
    if (in.full_path && row.pert_norm > 0.0) row.delta_full = full_delta(in, perts[i]);
    rep.rows[i] = row;
  });
  std::sort(rep.rows.begin(), rep.rows.end(),
            [](const StabilityRow& a, const StabilityRow& b) { return a.member_id < b.member_id; });
  for (auto& row : rep.rows) {
    if (row.pert_norm == 0.0 || row.delta == 0.0) {
      row.degenerate = true;
      row.ratio = 0.0;
      row.pass = row.pert_norm == 0.0;  // a visible-free nonzero perturbation breaks the law
      if (!row.pass) rep.pass = false;
      continue;
    }
    row.ratio = row.pert_norm / row.delta;
    if (!std::isfinite(row.ratio)) row.pass = false;
    if (row.delta_full >= 0.0) {
      double dis = std::abs(row.delta_full - row.delta) / row.delta;
      rep.max_disagreement = std::max(rep.max_disagreement, dis);
      if (dis > in.agreement_tol) row.pass = false;
    }
    rep.fitted_c = std::max(rep.fitted_c, row.ratio);
    if (!row.pass) rep.pass = false;
  }
  if (!std::isfinite(rep.fitted_c)) rep.pass = false;
  return rep;
}

double log_law(double delta) {
  if (delta <= 0.0) return 0.0;
  double l = std::abs(std::log(delta));
  if (l == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(1.0 / l + delta);
}

ObservabilityFit fit_observability(double energy, double boundary, const std::vector<double>& gammas) {
  if (gammas.empty()) throw ConfigError("observability fit needs a gamma ladder");
  ObservabilityFit fit;
  fit.gammas = gammas;
  fit.energy = energy;
  fit.boundary = boundary;
  double gmin = *std::min_element(gammas.begin(), gammas.end());
  double gmax = *std::max_element(gammas.begin(), gammas.end());
  if (!(gmin > 0.0)) throw ConfigError("gamma ladder must be positive");
  auto rhs = [&](double mu, double g) { return 1.0 / g + std::exp(-mu * g) + std::exp(mu * g) * boundary; };
  // E does not depend on gamma, so C alone degenerates as mu grows. mu is
  // instead the value that puts the minimum over gamma of the right-hand side
  // at the geometric centre of the ladder.
  double best_mu = 0.0;
  if (boundary > 0.0) {
    double gm = std::sqrt(gmin * gmax);
    auto slope = [&](double mu) {
      return mu * (std::exp(mu * gm) * boundary - std::exp(-mu * gm)) - 1.0 / (gm * gm);
    };
    double lo = 0.0, hi = 1.0 / gm;
    while (slope(hi) < 0.0 && hi < 1e6) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    best_mu = 0.5 * (lo + hi);
  }
  double best = 0.0;
  for (double g : gammas) best = std::max(best, energy / rhs(best_mu, g));
  fit.c = best;
  fit.mu = best_mu;
  return fit;
}

double collar_band_energy(const Trajectory& r, double T1) {
  const Grid& g = *r.grid;
  const SobolevNorm& sob = g.sobolev();
  spmat Gx = sob.embedding().transpose() * sob.derivative(1, 0);
  spmat Gy = g.dim() == 2 ? spmat(sob.embedding().transpose() * sob.derivative(0, 1)) : spmat(g.size(), g.size());
  double c = g.collar_width();
  std::vector<int> band;
  for (int n = 0; n < g.size(); ++n) {
    double d = g.boundary_distance(n);
    if (d > c / 3.0 + 1e-12 && d <= 2.0 * c / 3.0 + 1e-12) band.push_back(n);
  }
  std::vector<int> cols;
  for (int j = 0; j < r.samples(); ++j)
    if (std::abs(r.times[j]) <= T1 + 1e-12) cols.push_back(j);
  double total = 0.0;
  for (size_t k = 0; k < cols.size(); ++k) {
    cvec u = r.values.col(cols[k]);
    cvec gx = Gx * u, gy = Gy * u;
    double acc = 0.0;
    for (int n : band) acc += std::norm(u[n]) + std::norm(gx[n]) + std::norm(gy[n]);
    total += trapezoid_weight(k, cols.size()) * acc;
  }
  return total * g.cell_volume() * r.dt();
}

PartialDataReport partial_data_experiment(const StabilityInputs& in, const std::vector<PerturbationMember>& family,
                                          const std::vector<double>& fractions, const std::vector<double>& gammas) {
  if (fractions.empty()) throw ConfigError("partial data experiment needs Gamma fractions");
  for (size_t i = 1; i < fractions.size(); ++i)
    if (!(fractions[i] < fractions[i - 1])) throw ConfigError("Gamma fractions must decrease");
  if (!(fractions.back() < 1.0)) throw ConfigError("Gamma must be strictly smaller than the gamma0 set");
  const Grid& g = *in.p.grid;

  PartialDataReport rep;
  rep.mode = in.mode == RecoveryMode::p ? "partial-data-p" : "partial-data-q";
  rep.fractions = fractions;
  rep.lipschitz = stability_experiment(in, family);

  std::vector<BoundarySelection> sels;
  for (double fr : fractions) sels.push_back(shrink_selection(g, in.selection, fr));
  BoundarySelection gamma = sels.back();
  if (gamma.nodes.size() >= in.selection.nodes.size()) throw ConfigError("Gamma must be strictly smaller than gamma0");

  SpectralOperator base(in.p.grid, in.p);
  rep.deltas.assign(family.size(), std::vector<double>(fractions.size(), 0.0));
  std::vector<RSystem> systems(family.size());
  parallel_for(static_cast<int>(family.size()), [&](int i) {
    systems[i] = solve_r(in, PotentialField{in.p.grid, family[i].values, family[i].id}, &base);
    for (size_t k = 0; k < sels.size(); ++k) rep.deltas[i][k] = neumann_trace(systems[i].r, sels[k]).l2();
  });
  for (const auto& row : rep.deltas)
    for (size_t k = 1; k < row.size(); ++k)
      if (row[k] > row[k - 1] * (1.0 + 1e-12)) rep.monotone = false;

  std::vector<size_t> order(family.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return family[a].id < family[b].id; });
  for (size_t i : order) {
    LogLawRow row;
    row.member_id = family[i].id;
    row.pert_norm = off_collar_norm(g, family[i].values);
    row.delta = rep.deltas[i].back();
    row.law = log_law(row.delta);
    if (row.delta == 0.0 || row.pert_norm == 0.0) {
      row.degenerate = true;
      if (row.pert_norm > 0.0) rep.pass = false;  // invisible on Gamma at grid precision
    } else {
      row.ratio = row.pert_norm / row.law;
      rep.fitted_c = std::max(rep.fitted_c, row.ratio);
    }
    rep.rows.push_back(row);
  }
  {
    std::vector<std::vector<double>> sorted;
    for (size_t i : order) sorted.push_back(rep.deltas[i]);
    rep.deltas = std::move(sorted);
  }
  // the two fitted bounds as functions of delta, compared over the measured range
  double dlo = std::numeric_limits<double>::infinity(), dhi = 0.0;
  for (size_t r = 0; r < rep.rows.size(); ++r) {
    if (rep.rows[r].degenerate || rep.lipschitz.rows[r].degenerate) continue;
    dlo = std::min(dlo, rep.rows[r].delta);
    dhi = std::max(dhi, rep.lipschitz.rows[r].delta);
  }
  if (dhi > 0.0 && std::isfinite(dlo)) {
    const int pts = 200;
    for (int i = 0; i <= pts; ++i) {
      double d = dlo * std::pow(dhi / dlo, double(i) / pts);
      if (rep.fitted_c * log_law(d) < rep.lipschitz.fitted_c * d * (1.0 - 1e-12)) rep.never_tighter = false;
    }
  }

  if (!gammas.empty() && !family.empty()) {
    const Trajectory& r = systems[order.front()].r;
    double T = in.cfg.T;
    double energy = collar_band_energy(r, 0.9 * T);
    double boundary = std::pow(trace_on(r, gamma, true).l2(), 2);
    rep.observability = fit_observability(energy, boundary, gammas);
  }
  rep.pass = rep.pass && rep.monotone && rep.never_tighter && std::isfinite(rep.fitted_c) && rep.lipschitz.pass;
  return rep;
}

IdentityReport initial_identity_pipeline(const SpectralOperator& op, const NonlinearitySpec& spec,
                                         const PotentialField& q1, const PotentialField& q2, const ComplexField& f,
                                         const SolveConfig& cfg, const CarlemanWeightSet& ws,
                                         const BoundarySelection& sel) {
  const Grid& g = *op.grid();
  RSystem rs = time_derivative_solution(op, spec, q1, q2, f, cfg);
  int k = spec.k();
  cplx c = 0.0;
  for (int m = 0; m <= k; ++m) c += binomial(k, m) * spec.coeff(m, k - m);
  cvec expected(g.size());
  for (int n = 0; n < g.size(); ++n)
    expected[n] = cplx(0.0, 1.0) * c * (q1.values[n] - q2.values[n]) * std::pow(f.values[n].real(), k);
  int z = rs.r.zero_index();
  IdentityReport rep;
  cvec diff = rs.r.values.col(z) - expected;
  rep.initial_abs = l2_norm(g, diff);
  double en = l2_norm(g, expected);
  rep.initial_residual = en > 0 ? rep.initial_abs / en : rep.initial_abs;
  rep.energy = energy_identity(op, rs, ws);
  rep.energy_doubled = energy_identity(op, rs, ws.with_s(2.0 * ws.s()));
  rep.pert_sq = std::pow(off_collar_norm(g, rvec(q1.values - q2.values)), 2);
  rep.boundary = std::pow(neumann_trace(rs.r, sel).l2(), 2);
  rep.ratio = rep.boundary > 0 ? rep.pert_sq / rep.boundary : 0.0;
  return rep;
}

}  // namespace nls
