#include "nls/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nls/errors.hpp"
#include "nls/parallel.hpp"

namespace nls {

namespace {

SolveConfig symmetric(const SolveConfig& cfg) {
  SolveConfig c = cfg;
  c.symmetric = true;
  c.validate();
  return c;
}

cmat pointwise(const cmat& a, const cvec& field) {
  cmat out = a;
  for (int j = 0; j < out.cols(); ++j) out.col(j) = out.col(j).cwiseProduct(field);
  return out;
}

cmat leading_matrix(const NonlinearitySpec& spec, const cmat& u) {
  Eigen::Map<const cvec> flat(u.data(), u.size());
  cvec out = leading_values(spec, flat);
  return Eigen::Map<const cmat>(out.data(), u.rows(), u.cols());
}

cmat power(const cmat& a, int n) {
  cmat out = cmat::Ones(a.rows(), a.cols());
  for (int i = 0; i < n; ++i) out = out.cwiseProduct(a);
  return out;
}

// Time derivative of the propagated data, evaluated in the eigenbasis.
cmat propagated_rate(const SpectralOperator& op, const ComplexField& f, const std::vector<double>& times) {
  cvec c = op.to_modal(f.values);
  const rvec& mu = op.eigenvalues();
  cmat modal(c.size(), times.size());
  for (size_t j = 0; j < times.size(); ++j)
    for (int m = 0; m < c.size(); ++m) modal(m, j) = cplx(0.0, -mu[m]) * std::polar(1.0, -mu[m] * times[j]) * c[m];
  return op.from_modal(modal);
}

std::vector<int> collar_offenders(const Grid& g, const rvec& diff) {
  double scale = std::max(1.0, diff.cwiseAbs().maxCoeff());
  std::vector<int> bad;
  for (int n = 0; n < g.size(); ++n)
    if (g.in_collar(n) && std::abs(diff[n]) > 1e-13 * scale) bad.push_back(n);
  return bad;
}

void require_real(const ComplexField& f) {
  double scale = std::max(1.0, f.values.cwiseAbs().maxCoeff());
  if (f.values.imag().cwiseAbs().maxCoeff() > 1e-14 * scale) throw ConfigError("initial data f must be real-valued");
}

// Solves forward on [0, T] and extends to [-T, 0) by r(-t) = -conj r(t).
Trajectory solve_and_reflect(const SpectralOperator& op, const cvec& initial, const Trajectory& v) {
  int z = v.zero_index();
  int m = v.samples();
  std::vector<double> pos(v.times.begin() + z, v.times.end());
  cmat src = op.to_modal(cmat(v.values.rightCols(m - z)));
  cmat half = op.from_modal(duhamel_modal(op, op.to_modal(initial), src, pos));
  Trajectory r{v.grid, v.times, cmat(v.values.rows(), m)};
  for (int j = z; j < m; ++j) r.values.col(j) = half.col(j - z);
  for (int j = 0; j < z; ++j) r.values.col(j) = -half.col(2 * z - j - z).conjugate();
  return r;
}

}  // namespace

VariationSolution first_variation(const SpectralOperator& op, const ComplexField& f, const SolveConfig& cfg) {
  SolveConfig c = symmetric(cfg);
  VariationSolution s;
  s.order = 1;
  s.u = solve_linear(op, f, nullptr, c);
  s.p = op.potential();
  s.method = VariationMethod::pde;
  return s;
}

VariationSolution kth_variation(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                                const ComplexField& f, const SolveConfig& cfg) {
  if (q.grid) require_same_grid(*op.grid(), *q.grid);
  VariationSolution first = first_variation(op, f, cfg);
  const Trajectory& u1 = first.u;
  cmat src = -pointwise(leading_matrix(spec, u1.values), q.values.cast<cplx>());
  cvec zero = cvec::Zero(u1.values.rows());
  VariationSolution s;
  s.order = spec.k();
  s.u = Trajectory{op.grid(), u1.times, op.from_modal(duhamel_modal(op, zero, op.to_modal(src), u1.times))};
  s.p = op.potential();
  s.q = q;
  s.method = VariationMethod::pde;
  return s;
}

VariationSolution difference_quotient_variation(const SpectralOperator& op, const NonlinearitySpec& spec,
                                                const PotentialField& q, const ComplexField& f, int l, double eps,
                                                const SolveConfig& cfg) {
  if (l < 1) throw ConfigError("quotient order must be positive");
  if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
  SolveConfig c = symmetric(cfg);
  std::vector<Trajectory> parts(l);
  parallel_for(l, [&](int n) {
    ComplexField fe{f.grid, (double(l - n) * eps) * f.values};
    try {
      parts[n] = solve_nonlinear(op, spec, q, fe, c).u;
    } catch (const PicardFailure& e) {
      throw PicardFailure("nonlinear solve failed at data scale " + std::to_string((l - n) * eps) + ": " + e.what(),
                          e.certificate());
    }
  });
  std::vector<double> times = c.times();
  cmat sum = cmat::Zero(op.grid()->size(), times.size());
  for (int n = 0; n < l; ++n) {
    double w = binomial(l, n) * ((n % 2) ? -1.0 : 1.0);
    sum += w * parts[n].values;
  }
  sum /= std::pow(eps, l);
  VariationSolution s;
  s.order = l;
  s.u = Trajectory{op.grid(), times, sum};
  s.p = op.potential();
  s.q = q;
  s.method = VariationMethod::quotient;
  return s;
}

std::int64_t alternating_power_sum(int k, int p) {
  std::int64_t total = 0;
  for (int n = 0; n <= k; ++n) {
    std::int64_t b = 1;
    for (int i = 1; i <= n; ++i) b = b * (k - n + i) / i;
    std::int64_t pw = 1;
    for (int i = 0; i < p; ++i) pw *= (k - n);
    total += (n % 2 ? -1 : 1) * b * pw;
  }
  return total;
}

double forward_difference(const std::function<double(double)>& g, double x, int l, double eta) {
  double s = 0.0;
  for (int n = 0; n <= l; ++n) s += binomial(l, n) * ((n % 2) ? -1.0 : 1.0) * g(x + (l - n) * eta);
  return s / std::pow(eta, l);
}

void fit_convergence(ConvergenceReport& r) {
  auto& rows = r.rows;
  r.monotone = true;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].error > 0.0 && rows[i - 1].error > 0.0)
      rows[i].local_order = std::log(rows[i - 1].error / rows[i].error) / std::log(rows[i - 1].eps / rows[i].eps);
    if (!(rows[i].error < rows[i - 1].error)) r.monotone = false;
  }
  r.flagged = !r.monotone;
  // rungs before the floor
  size_t used = rows.empty() ? 0 : 1;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].error < rows[i - 1].error) || rows[i].error <= 0.0) break;
    if (i >= 2 && rows[i].local_order < 0.5 * rows[1].local_order) break;
    used = i + 1;
  }
  r.fit_points = static_cast<int>(used);
  r.fitted_order = 0.0;
  if (used < 2) return;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < used; ++i) {
    double x = std::log(rows[i].eps), y = std::log(rows[i].error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(used);
  r.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport convergence_study(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                                    const ComplexField& f, int l, const std::vector<double>& ladder,
                                    const SolveConfig& cfg) {
  if (ladder.size() < 4) throw ConfigError("epsilon ladder needs at least 4 rungs");
  double ratio = ladder[1] / ladder[0];
  if (!(ratio < 1.0) || !(ladder.back() > 0.0)) throw ConfigError("epsilon ladder must decrease geometrically");
  for (size_t i = 1; i < ladder.size(); ++i)
    if (std::abs(ladder[i] / ladder[i - 1] - ratio) > 1e-6 * ratio)
      throw ConfigError("epsilon ladder must decrease geometrically");
  if (l > spec.k()) throw ConfigError("no linearized reference for orders above k");

  ConvergenceReport report;
  report.order = l;
  Trajectory reference;
  if (l == 1) {
    report.reference = "first_variation";
    reference = first_variation(op, f, cfg).u;
  } else if (l == spec.k()) {
    report.reference = "kth_variation";
    reference = kth_variation(op, spec, q, f, cfg).u;
  } else {
    report.reference = "zero";
  }
  const SobolevNorm& sob = op.grid()->sobolev();
  for (double eps : ladder) {
    Trajectory quot = difference_quotient_variation(op, spec, q, f, l, eps, cfg).u;
    cmat diff = reference.values.size() ? cmat(quot.values - reference.values) : quot.values;
    report.rows.push_back({eps, sob.column_norms(diff, 2).maxCoeff(), 0.0});
  }
  fit_convergence(report);
  return report;
}

RSystem time_derivative_solution(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q1,
                                 const PotentialField& q2, const ComplexField& f, const SolveConfig& cfg) {
  const Grid& g = *op.grid();
  if (q1.grid) require_same_grid(g, *q1.grid);
  if (q2.grid) require_same_grid(g, *q2.grid);
  if (f.grid) require_same_grid(g, *f.grid);
  require_real(f);
  rvec diff = q1.values - q2.values;
  auto bad = collar_offenders(g, diff);
  if (!bad.empty())
    throw HypothesisError("q1 and q2 differ on the collar at " + std::to_string(bad.size()) + " nodes", bad);

  SolveConfig c = symmetric(cfg);
  std::vector<double> times = c.times();
  Trajectory u1 = op.propagate_samples(f, times);
  cmat ut = propagated_rate(op, f, times);
  int k = spec.k();
  const cmat& u = u1.values;
  cmat ub = u.conjugate(), utb = ut.conjugate();
  cmat acc = cmat::Zero(u.rows(), u.cols());
  for (int m = 0; m <= k; ++m) {
    cplx cm = spec.coeff(m, k - m);
    if (cm == cplx(0.0)) continue;
    cmat term = cmat::Zero(u.rows(), u.cols());
    if (m > 0) term += double(m) * ut.cwiseProduct(power(u, m - 1)).cwiseProduct(power(ub, k - m));
    if (k - m > 0) term += double(k - m) * utb.cwiseProduct(power(u, m)).cwiseProduct(power(ub, k - m - 1));
    acc += (binomial(k, m) * cm) * term;
  }
  cvec gd = diff.cast<cplx>();
  RSystem rs;
  rs.mode = "q";
  rs.difference = PotentialField{op.grid(), diff, "q1-q2"};
  rs.v = Trajectory{op.grid(), times, -pointwise(acc, gd)};
  int z = u1.zero_index();
  rs.initial = cplx(0.0, 1.0) * gd.cwiseProduct(leading_values(spec, u1.values.col(z)));
  rs.r = solve_and_reflect(op, rs.initial, rs.v);
  return rs;
}

RSystem time_derivative_solution(const SpectralOperator& op1, const SpectralOperator& op2, const ComplexField& f,
                                 const SolveConfig& cfg) {
  const Grid& g = *op1.grid();
  require_same_grid(g, *op2.grid());
  if (f.grid) require_same_grid(g, *f.grid);
  require_real(f);
  rvec diff = op1.potential().values - op2.potential().values;
  auto bad = collar_offenders(g, diff);
  if (!bad.empty())
    throw HypothesisError("p1 and p2 differ on the collar at " + std::to_string(bad.size()) + " nodes", bad);

  SolveConfig c = symmetric(cfg);
  std::vector<double> times = c.times();
  cmat ut2 = propagated_rate(op2, f, times);
  cvec src = (-diff).cast<cplx>();  // p2 - p1
  RSystem rs;
  rs.mode = "p";
  rs.difference = PotentialField{op1.grid(), diff, "p1-p2"};
  rs.v = Trajectory{op1.grid(), times, pointwise(ut2, src)};
  rs.initial = cplx(0.0, -1.0) * src.cwiseProduct(f.values);
  rs.r = solve_and_reflect(op1, rs.initial, rs.v);
  return rs;
}

Trajectory time_derivative(const SpectralOperator& op, const RSystem& rs) {
  cmat hr = op.matrix() * rs.r.values;
  return {rs.r.grid, rs.r.times, cplx(0.0, -1.0) * (hr + rs.v.values)};
}

ExtensionCheck check_extension(const SpectralOperator& op, const RSystem& rs) {
  cmat direct = op.from_modal(duhamel_modal(op, op.to_modal(rs.initial), op.to_modal(rs.v.values), rs.r.times));
  const Grid& g = *op.grid();
  int z = rs.r.zero_index();
  int m = rs.r.samples();
  double sup_r = 0.0, sup_d = 0.0;
  for (int j = 0; j < m; ++j) {
    sup_r = std::max(sup_r, l2_norm(g, cvec(rs.r.values.col(j))));
    sup_d = std::max(sup_d, l2_norm(g, cvec(direct.col(j))));
  }
  ExtensionCheck out;
  for (int j = 0; j < z; ++j) {
    out.reflection_defect = std::max(out.reflection_defect, l2_norm(g, cvec(direct.col(j) - rs.r.values.col(j))));
    out.symmetry_defect =
        std::max(out.symmetry_defect, l2_norm(g, cvec(direct.col(j) + direct.col(2 * z - j).conjugate())));
  }
  if (sup_r > 0.0) out.reflection_defect /= sup_r;
  if (sup_d > 0.0) out.symmetry_defect /= sup_d;
  return out;
}

bool EstimateReport::pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

EstimateReport estimate_suite(const SpectralOperator& op, const RSystem& rs, const ComplexField& f, int k,
                              const std::vector<double>& bounds) {
  const SobolevNorm& sob = op.grid()->sobolev();
  double fk = std::pow(sob.norm(f.values, 4), k);
  double gn[5];
  for (int s = 0; s <= 4; ++s) gn[s] = sob.norm(rs.difference.values, s);
  Trajectory rt = time_derivative(op, rs);
  struct Item {
    const char* name;
    const cmat* data;
    int order;
    int g_order;
  };
  const Item items[6] = {{"v_H0", &rs.v.values, 0, 0},  {"v_H2", &rs.v.values, 2, 2},
                         {"r_H0", &rs.r.values, 0, 0},  {"r_H2", &rs.r.values, 2, 2},
                         {"rt_H0", &rt.values, 0, 2},   {"rt_H2", &rt.values, 2, 4}};
  int z = rs.r.zero_index();
  EstimateReport rep;
  for (int i = 0; i < 6; ++i) {
    EstimateEntry e;
    e.name = items[i].name;
    double den = gn[items[i].g_order] * fk;
    Eigen::VectorXd norms = sob.column_norms(items[i].data->rightCols(rs.r.samples() - z - 1), items[i].order);
    double top = norms.size() ? norms.maxCoeff() : 0.0;
    if (den > 0.0) {
      e.fitted = top / den;
    } else {
      e.fitted = top > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    e.pass = std::isfinite(e.fitted);
    if (i < static_cast<int>(bounds.size()) && bounds[i] > 0.0) {
      e.bound = bounds[i];
      e.violation = e.fitted / bounds[i];
      e.pass = e.pass && e.violation <= 1.0;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace nls
