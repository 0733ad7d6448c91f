#include "nls/forward.hpp"

#include <algorithm>
#include <cmath>

#include "nls/errors.hpp"

namespace nls {

void SolveConfig::validate() const {
  if (quadrature != "trapezoid") throw ConfigError("unknown duhamel quadrature '" + quadrature + "'");
  if (!(picard_tol > 0.0)) throw ConfigError("picard tolerance must be positive");
  if (picard_max_iter < 1) throw ConfigError("picard max iterations must be positive");
  time_samples(T, dt, symmetric);
}

double PicardCertificate::max_factor() const {
  double m = 0.0;
  for (double f : factors) m = std::max(m, f);
  return m;
}

cmat duhamel_modal(const SpectralOperator& op, const cvec& data, const cmat& source, const std::vector<double>& times) {
  const rvec& mu = op.eigenvalues();
  int n = static_cast<int>(mu.size());
  int m = static_cast<int>(times.size());
  int z = -1;
  for (int j = 0; j < m; ++j)
    if (times[j] == 0.0) z = j;
  if (z < 0) throw ConfigError("time samples must contain t = 0");
  bool has_source = source.size() > 0;
  if (has_source && (source.rows() != n || source.cols() != m)) throw ConfigError("source samples not aligned");

  cmat c(n, m);
  c.col(z) = data;
  auto step = [&](int from, int to) {
    double d = times[to] - times[from];
    const cplx half(0.0, -0.5 * d);
    for (int q = 0; q < n; ++q) {
      cplx e = std::polar(1.0, -mu[q] * d);
      cplx v = e * c(q, from);
      if (has_source) v += half * (e * source(q, from) + source(q, to));
      c(q, to) = v;
    }
  };
  for (int j = z + 1; j < m; ++j) step(j - 1, j);
  for (int j = z - 1; j >= 0; --j) step(j + 1, j);
  return c;
}

Trajectory solve_linear(const SpectralOperator& op, const ComplexField& f, const Trajectory* g, const SolveConfig& cfg) {
  cfg.validate();
  if (f.grid) require_same_grid(*op.grid(), *f.grid);
  std::vector<double> times = cfg.times();
  if (!g) return op.propagate_samples(f, times);
  if (g->grid) require_same_grid(*op.grid(), *g->grid);
  if (g->times.size() != times.size()) throw ConfigError("source samples not aligned with the time grid");
  for (size_t j = 0; j < times.size(); ++j)
    if (std::abs(g->times[j] - times[j]) > 1e-12 * std::max(1.0, cfg.T))
      throw ConfigError("source samples not aligned with the time grid");
  cmat modal = duhamel_modal(op, op.to_modal(f.values), op.to_modal(g->values), times);
  return {op.grid(), times, op.from_modal(modal)};
}

RadiusResult contraction_radius(const NonlinearitySpec& spec, double kstar, double c1, double T, double q_norm,
                                double cap) {
  double e = spec.m0() + spec.n0();
  if (!(e > 1.0)) throw ConfigError("growth exponents must satisfy m0 + n0 > 1");
  if (!(kstar > 0.0) || !(c1 > 0.0) || !(T > 0.0) || q_norm < 0.0 || !(cap > 0.0))
    throw ConfigError("contraction radius constants must be positive");
  RadiusResult r;
  double p = 1.0 / (e - 1.0);
  double den = spec.c0() * c1 * std::pow(1.0 + c1, e) * T * kstar * q_norm;
  if (den == 0.0) {
    r.base = r.radius = cap;
    r.capped = true;
    return r;
  }
  r.base = std::pow(1.0 / den, p);
  r.radius = r.base * std::pow(1.0 / (2.0 * c1), p);
  if (!(r.radius < cap)) {
    r.radius = cap;
    r.capped = true;
  }
  return r;
}

namespace {

cmat nonlinear_source(const NonlinearitySpec& spec, const PotentialField& q, const cmat& u) {
  Eigen::Map<const cvec> flat(u.data(), u.size());
  cvec nv = evaluate_values(spec, flat, flat.conjugate());
  cmat out = Eigen::Map<const cmat>(nv.data(), u.rows(), u.cols());
  for (int j = 0; j < out.cols(); ++j) out.col(j) = -(q.values.cast<cplx>().cwiseProduct(out.col(j)));
  return out;
}

}  // namespace

NonlinearSolution solve_nonlinear(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                                  const ComplexField& f, const SolveConfig& cfg) {
  cfg.validate();
  if (f.grid) require_same_grid(*op.grid(), *f.grid);
  if (q.grid) require_same_grid(*op.grid(), *q.grid);
  const SobolevNorm& sob = op.grid()->sobolev();
  std::vector<double> times = cfg.times();

  PicardCertificate cert;
  cert.radius = cfg.radius;
  cert.data_norm = sob.norm(f.values, 2);
  cert.certified = cfg.radius > 0.0 && cert.data_norm <= cfg.radius;

  Trajectory v = op.propagate_samples(f, times);
  cmat w = cmat::Zero(v.values.rows(), v.values.cols());
  cvec zero = cvec::Zero(v.values.rows());
  for (int it = 1; it <= cfg.picard_max_iter; ++it) {
    cmat src = nonlinear_source(spec, q, v.values + w);
    cmat next = op.from_modal(duhamel_modal(op, zero, op.to_modal(src), times));
    double d = sob.column_norms(next - w, 2).maxCoeff();
    double wn = sob.column_norms(next, 2).maxCoeff();
    w = std::move(next);
    if (!cert.distances.empty() && cert.distances.back() > 0.0) cert.factors.push_back(d / cert.distances.back());
    cert.distances.push_back(d);
    cert.iterations = it;
    cert.residual_abs = d;
    cert.residual = wn > 0.0 ? d / wn : 0.0;
    if (!std::isfinite(d)) break;
    if (d == 0.0 || d <= cfg.picard_tol * wn) {
      cert.converged = true;
      break;
    }
    // stagnation at roundoff: the update stopped shrinking
    if (cert.factors.size() >= 2 && cert.factors.back() >= 1.0 && d <= 1e3 * cfg.picard_tol * wn) {
      cert.converged = true;
      break;
    }
  }
  if (!cert.converged)
    throw PicardFailure("Picard iteration did not converge in " + std::to_string(cert.iterations) + " iterations",
                        cert);
  Trajectory u{op.grid(), times, v.values + w};
  return {std::move(u), std::move(cert)};
}

double fixed_point_residual(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                            const ComplexField& f, const Trajectory& u) {
  Trajectory v = op.propagate_samples(f, u.times);
  cmat w = u.values - v.values;
  cmat src = nonlinear_source(spec, q, u.values);
  cvec zero = cvec::Zero(w.rows());
  cmat sw = op.from_modal(duhamel_modal(op, zero, op.to_modal(src), u.times));
  const SobolevNorm& sob = op.grid()->sobolev();
  double wn = sob.column_norms(w, 2).maxCoeff();
  double d = sob.column_norms(w - sw, 2).maxCoeff();
  return wn > 0.0 ? d / wn : d;
}

}  // namespace nls
