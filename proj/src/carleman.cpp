#include "nls/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nls/errors.hpp"
#include "nls/parallel.hpp"
#include "nls/sobolev.hpp"

namespace nls {

namespace {

std::array<double, 2> padded_coords(const Grid& g, int pidx) {
  auto pp = g.padded_points();
  int ei = pidx % pp[0], ej = pidx / pp[0];
  if (g.dim() == 1) return {ei * g.spacing()[0], 0.0};
  return {ei * g.spacing()[0], ej * g.spacing()[1]};
}

double squared_distance(std::array<double, 2> a, std::array<double, 2> b, int dim) {
  double d = (a[0] - b[0]) * (a[0] - b[0]);
  if (dim == 2) d += (a[1] - b[1]) * (a[1] - b[1]);
  return d;
}

bool inside_closure(const Grid& g, std::array<double, 2> x) {
  bool in = x[0] >= 0.0 && x[0] <= g.extent()[0];
  if (g.dim() == 2) in = in && x[1] >= 0.0 && x[1] <= g.extent()[1];
  return in;
}

}  // namespace

CarlemanWeightSet::CarlemanWeightSet(const GridPtr& grid, std::array<double, 2> x0, double lambda, double s,
                                     double T1)
    : grid_(grid), x0_(x0), lambda_(lambda), s_(s), T1_(T1) {
  if (!grid_) throw ConfigError("weight set needs a grid");
  if (grid_->dim() == 1) x0_[1] = 0.0;
  if (inside_closure(*grid_, x0_)) throw ConfigError("x0 must lie outside the closed domain");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(s > 0.0)) throw ConfigError("s must be positive");
  if (!(T1 > 0.0)) throw ConfigError("T1 must be positive");
  psi_inf_ = 0.0;
  psi_min_ = std::numeric_limits<double>::infinity();
  for (int n = 0; n < grid_->padded_size(); ++n) {
    double p = psi(padded_coords(*grid_, n));
    psi_inf_ = std::max(psi_inf_, p);
    psi_min_ = std::min(psi_min_, p);
  }
}

double CarlemanWeightSet::psi(std::array<double, 2> x) const { return squared_distance(x, x0_, grid_->dim()); }

double CarlemanWeightSet::phi_min() const {
  return (std::exp(2 * lambda_ * psi_inf_) - std::exp(lambda_ * psi_inf_)) / (T1_ * T1_);
}

WeightValues evaluate_weights(const CarlemanWeightSet& ws, std::array<double, 2> x, double t) {
  if (!(std::abs(t) < ws.T1())) throw ConfigError("weights are singular at |t| >= T1");
  double denom = ws.T1() * ws.T1() - t * t;
  WeightValues v;
  v.psi = ws.psi(x);
  double e = std::exp(ws.lambda() * v.psi);
  v.theta = e / denom;
  v.phi = (std::exp(2 * ws.lambda() * ws.psi_inf()) - e) / denom;
  return v;
}

double lambda0_for_grid(const Grid& g, std::array<double, 2> x0) {
  if (g.dim() == 1) x0[1] = 0.0;
  if (inside_closure(g, x0)) throw ConfigError("x0 must lie outside the closed domain");
  double pmin = std::numeric_limits<double>::infinity();
  for (int n = 0; n < g.padded_size(); ++n) pmin = std::min(pmin, squared_distance(padded_coords(g, n), x0, g.dim()));
  double lam = std::log(2.0) / pmin;
  while (std::exp(lam * pmin) < 2.0) lam = std::nextafter(lam, std::numeric_limits<double>::infinity());
  return lam;
}

cvec SuiteMember::value(double t) const {
  cvec u = cvec::Zero(shapes.front().size());
  for (size_t j = 0; j < shapes.size(); ++j) u += amp[j](t) * shapes[j];
  return u;
}

cvec SuiteMember::time_derivative(double t) const {
  cvec u = cvec::Zero(shapes.front().size());
  for (size_t j = 0; j < shapes.size(); ++j) u += rate[j](t) * shapes[j];
  return u;
}

SuiteMember SuiteMember::scaled(double c) const {
  SuiteMember m = *this;
  for (auto& s : m.shapes) s *= c;
  return m;
}

std::vector<SuiteMember> manufactured_suite(const SpectralOperator& op, std::uint64_t seed) {
  const Grid& g = *op.grid();
  const cplx I(0.0, 1.0);
  auto mode = [&](int m) -> cvec { return op.eigenvector(m).cast<cplx>(); };
  double mu0 = op.eigenvalues()[0], mu2 = op.eigenvalues()[2];
  std::vector<SuiteMember> suite;

  SuiteMember ground;
  ground.id = "ground_state";
  ground.shapes = {mode(0)};
  ground.amp = {[=](double t) { return std::exp(-I * mu0 * t); }};
  ground.rate = {[=](double t) { return -I * mu0 * std::exp(-I * mu0 * t); }};
  suite.push_back(ground);

  SuiteMember pair;
  pair.id = "two_modes";
  pair.shapes = {mode(0), 0.5 * mode(2)};
  pair.amp = {[=](double t) { return std::exp(-I * mu0 * t); }, [=](double t) { return std::exp(-I * mu2 * t); }};
  pair.rate = {[=](double t) { return -I * mu0 * std::exp(-I * mu0 * t); },
               [=](double t) { return -I * mu2 * std::exp(-I * mu2 * t); }};
  suite.push_back(pair);

  SuiteMember standing;
  standing.id = "standing_cos";
  standing.shapes = {mode(1)};
  standing.amp = {[](double t) { return cplx(std::cos(t), 0.0); }};
  standing.rate = {[](double t) { return cplx(-std::sin(t), 0.0); }};
  suite.push_back(standing);

  std::array<double, 2> c{0.4 * g.extent()[0], 0.5 * g.extent()[1]};
  std::array<double, 2> w{0.25 * g.extent()[0], 0.3 * g.extent()[1]};
  SuiteMember bump;
  bump.id = "bump_quadratic";
  bump.shapes = {sine_bump(g, c, w, 1.0).cast<cplx>()};
  bump.amp = {[](double t) { return cplx(1.0 + t * t, 0.0); }};
  bump.rate = {[](double t) { return cplx(2.0 * t, 0.0); }};
  suite.push_back(bump);

  Rng rng(seed);
  SuiteMember noise;
  noise.id = "random_sines";
  noise.shapes = {random_complex_sine_sum(g, rng, 6, 2.0)};
  noise.amp = {[=](double t) { return std::exp(I * t); }};
  noise.rate = {[=](double t) { return I * std::exp(I * t); }};
  suite.push_back(noise);

  SuiteMember mixed;
  mixed.id = "mixed_profile";
  mixed.shapes = {mode(0), mode(3)};
  mixed.amp = {[](double t) { return cplx(t, 0.0); }, [=](double t) { return I * std::sin(2.0 * t); }};
  mixed.rate = {[](double) { return cplx(1.0, 0.0); }, [=](double t) { return 2.0 * I * std::cos(2.0 * t); }};
  suite.push_back(mixed);
  return suite;
}

std::string to_string(CarlemanEstimate e) { return e == CarlemanEstimate::full_boundary ? "full" : "interior"; }

namespace {

struct WeightGeometry {
  int dim = 1;
  int n = 0;
  std::vector<int> interior_to_padded;
  rvec psi_pad, grad_x, grad_y;  // psi and its gradient on padded nodes
  double lap_psi = 2.0;
};

WeightGeometry weight_geometry(const CarlemanWeightSet& ws) {
  const Grid& g = *ws.grid();
  WeightGeometry geo;
  geo.dim = g.dim();
  geo.n = g.size();
  geo.lap_psi = 2.0 * g.dim();
  int np = g.padded_size();
  geo.psi_pad.resize(np);
  geo.grad_x.resize(np);
  geo.grad_y.resize(np);
  for (int p = 0; p < np; ++p) {
    auto x = padded_coords(g, p);
    geo.psi_pad[p] = ws.psi(x);
    geo.grad_x[p] = 2.0 * (x[0] - ws.x0()[0]);
    geo.grad_y[p] = g.dim() == 2 ? 2.0 * (x[1] - ws.x0()[1]) : 0.0;
  }
  geo.interior_to_padded.resize(g.size());
  for (int n = 0; n < g.size(); ++n) {
    auto l = g.lattice(n);
    geo.interior_to_padded[n] = g.dim() == 1 ? l[0] + 1 : g.padded_index(l[0] + 1, l[1] + 1);
  }
  return geo;
}

// Largest jump of s phi(., 0) between lattice neighbours.
double max_cell_jump(const CarlemanWeightSet& ws, const WeightGeometry& geo) {
  const Grid& g = *ws.grid();
  auto pp = g.padded_points();
  double scale = ws.s() * ws.lambda() / (ws.T1() * ws.T1());
  double jump = 0.0;
  auto e = [&](int p) { return std::exp(ws.lambda() * geo.psi_pad[p]) / ws.lambda(); };
  for (int ej = 0; ej < pp[1]; ++ej)
    for (int ei = 0; ei < pp[0]; ++ei) {
      int p = ei + pp[0] * ej;
      if (ei + 1 < pp[0]) jump = std::max(jump, scale * std::abs(e(p + 1) - e(p)));
      if (ej + 1 < pp[1]) jump = std::max(jump, scale * std::abs(e(p + pp[0]) - e(p)));
    }
  return jump;
}

struct TimeGrid {
  std::vector<double> t;
  double dt = 0.0;
};

// Uniform nodes strictly inside (-T1, T1); the endpoints carry zero weight.
TimeGrid carleman_time_grid(const CarlemanWeightSet& ws, const RatioOptions& opt) {
  double A = std::exp(2 * ws.lambda() * ws.psi_inf()) - std::exp(ws.lambda() * ws.psi_inf());
  double T1 = ws.T1();
  double sigma = T1 * T1 / (2.0 * std::sqrt(ws.s() * A));
  long nt = static_cast<long>(std::ceil(2.0 * T1 / (sigma / 8.0))) + 1;
  nt = std::max<long>(nt, opt.min_time_nodes);
  if (nt > opt.max_time_nodes)
    throw ResolutionError("time quadrature cannot resolve e^{-s phi}; required nodes: " + std::to_string(nt), nt);
  TimeGrid tg;
  tg.dt = 2.0 * T1 / static_cast<double>(nt - 1);
  for (long j = 1; j + 1 < nt; ++j) tg.t.push_back(-T1 + j * tg.dt);
  return tg;
}

double sum_sq(const cvec& v) { return v.squaredNorm(); }

}  // namespace

RatioRow carleman_ratio(const SpectralOperator& op, const CarlemanWeightSet& ws, const SuiteMember& u,
                        CarlemanEstimate estimate, const RatioOptions& opt) {
  const Grid& g = *op.grid();
  require_same_grid(g, *ws.grid());
  WeightGeometry geo = weight_geometry(ws);
  double jump = max_cell_jump(ws, geo);
  if (jump > opt.max_cell_jump) {
    long need = static_cast<long>(std::ceil(g.points()[0] * jump / opt.max_cell_jump));
    throw ResolutionError("weight e^{-s phi} varies by more than the allowed factor across one cell; required points "
                          "per axis: " + std::to_string(need), need);
  }
  TimeGrid tg = carleman_time_grid(ws, opt);

  const SobolevNorm& sob = g.sobolev();
  const spmat& E = sob.embedding();
  spmat Dx = sob.derivative(1, 0);
  spmat Dy = g.dim() == 2 ? sob.derivative(0, 1) : spmat(g.padded_size(), g.size());
  spmat Gx = E.transpose() * Dx;
  spmat Gy = E.transpose() * Dy;
  spmat lap = -assemble_operator(g, rvec::Zero(g.size()));
  const spmat& H = op.matrix();
  const rvec& pw = sob.padded_weights();
  double vol = g.cell_volume();

  double c = g.collar_width();
  double c_out = opt.collar_outer > 0 ? opt.collar_outer : 2.0 * c / 3.0;
  double c_in = opt.collar_inner > 0 ? opt.collar_inner : c / 3.0;
  if (!(c_in < c_out)) throw ConfigError("inner collar must be thinner than the outer collar");
  std::vector<char> omega1(g.size()), band(g.size());
  for (int n = 0; n < g.size(); ++n) {
    double d = g.boundary_distance(n);
    omega1[n] = d > c_out + 1e-12;
    band[n] = d > c_in + 1e-12 && d <= c_out + 1e-12;
  }

  const double s = ws.s(), lam = ws.lambda(), T1 = ws.T1();
  const double big = std::exp(2 * lam * ws.psi_inf());
  int np = g.padded_size();
  rvec e_pad(np);
  for (int p = 0; p < np; ++p) e_pad[p] = std::exp(lam * geo.psi_pad[p]);
  // One shift for both sides: the smallest phi(., 0) over the lattice
  // neighbourhood of the member's support, so localized members do not underflow.
  double emax = 0.0;
  {
    auto pp = g.padded_points();
    for (int k = 0; k < g.size(); ++k) {
      bool active = false;
      for (const auto& sh : u.shapes) active = active || sh[k] != cplx(0.0);
      if (!active) continue;
      int p = geo.interior_to_padded[k];
      int ei = p % pp[0], ej = p / pp[0];
      for (int dj = -2; dj <= 2; ++dj)
        for (int di = -2; di <= 2; ++di) {
          int a = ei + di, b = ej + dj;
          if (a < 0 || a >= pp[0] || b < 0 || b >= pp[1]) continue;
          emax = std::max(emax, e_pad[a + pp[0] * b]);
        }
    }
  }
  const double pmin = emax > 0.0 ? (big - emax) / (T1 * T1) : ws.phi_min();

  // Gamma_1: boundary entries with grad psi . nu >= 0
  std::vector<int> gamma1;
  for (size_t b = 0; b < g.boundary().size(); ++b) {
    const auto& bn = g.boundary()[b];
    int p = g.dim() == 1 ? bn.lattice[0] : g.padded_index(bn.lattice[0], bn.lattice[1]);
    double gn = geo.grad_x[p] * bn.normal[0] + geo.grad_y[p] * bn.normal[1];
    if (gn >= 0.0) gamma1.push_back(static_cast<int>(b));
  }

  double lhs = 0.0, rhs = 0.0;
  const cplx I(0.0, 1.0);
  rvec W(np), phi_t(np);
  for (double t : tg.t) {
    double D = T1 * T1 - t * t;
    for (int p = 0; p < np; ++p) {
      double phi = (big - e_pad[p]) / D;
      W[p] = std::exp(std::min(-s * (phi - pmin), 300.0));  // only exceeds 1 off the support
      phi_t[p] = (big - e_pad[p]) * 2.0 * t / (D * D);
    }
    cvec uv = u.value(t), ut = u.time_derivative(t);
    cvec Lu = I * ut - H * uv;
    int n = g.size();
    cvec w(n), wLu(n);
    rvec Wi(n);
    for (int k = 0; k < n; ++k) {
      int p = geo.interior_to_padded[k];
      Wi[k] = W[p];
      w[k] = W[p] * uv[k];
      wLu[k] = W[p] * Lu[k];
    }
    double slice_lhs = 0.0, slice_rhs = 0.0;
    if (estimate == CarlemanEstimate::full_boundary) {
      cvec wx = Gx * w, wy = Gy * w;
      cvec lw = lap * w;
      cvec P1(n), P2(n);
      for (int k = 0; k < n; ++k) {
        int p = geo.interior_to_padded[k];
        double gpx = -lam * e_pad[p] * geo.grad_x[p] / D;
        double gpy = -lam * e_pad[p] * geo.grad_y[p] / D;
        double lap_phi =
            -(lam * lam * e_pad[p] * (geo.grad_x[p] * geo.grad_x[p] + geo.grad_y[p] * geo.grad_y[p]) +
              lam * e_pad[p] * geo.lap_psi) / D;
        cplx wt = Wi[k] * (ut[k] - s * phi_t[p] * uv[k]);
        P1[k] = I * wt + lw[k] + s * s * (gpx * gpx + gpy * gpy) * w[k];
        P2[k] = I * s * phi_t[p] * w[k] + 2.0 * s * (gpx * wx[k] + gpy * wy[k]) + s * lap_phi * w[k];
      }
      cvec gux = Dx * uv, guy = Dy * uv;
      double grad = 0.0;
      for (int p = 0; p < np; ++p)
        grad += pw[p] * W[p] * W[p] * (std::norm(gux[p]) + std::norm(guy[p]));
      slice_lhs = s * s * s * std::pow(lam, 4) * sum_sq(w) * vol + s * lam * grad + sum_sq(P1) * vol +
                  sum_sq(P2) * vol;
      double bterm = 0.0;
      for (int b : gamma1) {
        const auto& bn = g.boundary()[b];
        int p = g.dim() == 1 ? bn.lattice[0] : g.padded_index(bn.lattice[0], bn.lattice[1]);
        if (bn.inward[0] < 0 || bn.inward[1] < 0) continue;  // corners: u and its trace vanish
        double h = (bn.face < 2) ? g.spacing()[0] : g.spacing()[1];
        cplx dn = (uv[bn.inward[1]] - 4.0 * uv[bn.inward[0]]) / (2.0 * h);
        double gn = geo.grad_x[p] * bn.normal[0] + geo.grad_y[p] * bn.normal[1];
        double theta = e_pad[p] / D;
        bterm += bn.weight * theta * W[p] * W[p] * std::norm(dn) * gn;
      }
      slice_rhs = sum_sq(wLu) * vol + s * lam * bterm;
    } else {
      cvec gx = Gx * uv, gy = Gy * uv;
      double in1 = 0.0, gr1 = 0.0, inb = 0.0, grb = 0.0;
      for (int k = 0; k < n; ++k) {
        double w2 = Wi[k] * Wi[k];
        double a = w2 * std::norm(uv[k]);
        double b = w2 * (std::norm(gx[k]) + std::norm(gy[k]));
        if (omega1[k]) {
          in1 += a;
          gr1 += b;
        } else if (band[k]) {
          inb += a;
          grb += b;
        }
      }
      double s3 = s * s * s * std::pow(lam, 4);
      slice_lhs = (s3 * in1 + s * lam * gr1) * vol;
      slice_rhs = sum_sq(wLu) * vol + (s3 * inb + s * lam * grb) * vol;
    }
    lhs += slice_lhs * tg.dt;
    rhs += slice_rhs * tg.dt;
  }

  RatioRow row;
  row.estimate = estimate;
  row.s = s;
  row.lambda = lam;
  row.suite_id = u.id;
  row.lhs = lhs;
  row.rhs = rhs;
  if (lhs == 0.0 && rhs == 0.0) {
    row.degenerate = true;
    row.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    row.ratio = lhs / rhs;
  }
  return row;
}

SweepReport carleman_ratio_sweep(const SpectralOperator& op, const CarlemanWeightSet& base,
                                 const std::vector<double>& s_ladder, const std::vector<SuiteMember>& suite,
                                 const RatioOptions& opt, const std::vector<CarlemanEstimate>& estimates) {
  if (s_ladder.empty() || suite.empty() || estimates.empty())
    throw ConfigError("sweep needs an s ladder, a suite and at least one estimate");
  for (size_t i = 1; i < s_ladder.size(); ++i)
    if (!(s_ladder[i] > s_ladder[i - 1])) throw ConfigError("s ladder must increase");
  size_t ns = s_ladder.size(), nm = suite.size(), ne = estimates.size();
  std::vector<RatioRow> rows(ne * nm * ns);
  parallel_for(static_cast<int>(rows.size()), [&](int idx) {
    size_t e = idx / (nm * ns), m = (idx / ns) % nm, k = idx % ns;
    rows[idx] = carleman_ratio(op, base.with_s(s_ladder[k]), suite[m], estimates[e], opt);
  });
  SweepReport rep;
  rep.rows = rows;
  for (size_t e = 0; e < ne; ++e)
    for (size_t m = 0; m < nm; ++m)
      for (size_t k = 0; k < ns; ++k) {
        const RatioRow& r = rows[(e * nm + m) * ns + k];
        if (r.degenerate) continue;
        if (!std::isfinite(r.ratio)) {
          rep.bounded = false;
          continue;
        }
        double& mx = estimates[e] == CarlemanEstimate::full_boundary ? rep.max_ratio_full : rep.max_ratio_interior;
        mx = std::max(mx, r.ratio);
        if (k > 0) {
          const RatioRow& prev = rows[(e * nm + m) * ns + k - 1];
          if (!prev.degenerate && r.ratio > prev.ratio * (1.0 + 1e-9)) rep.non_increasing = false;
        }
      }
  return rep;
}

S0Search find_s0(const SpectralOperator& op, const CarlemanWeightSet& base, const std::vector<double>& candidates,
                 const std::vector<SuiteMember>& suite, const RatioOptions& opt,
                 const std::vector<CarlemanEstimate>& estimates) {
  S0Search out;
  for (double s0 : candidates) {
    out.tried.push_back(s0);
    try {
      SweepReport rep = carleman_ratio_sweep(op, base, {s0, 2 * s0, 4 * s0, 8 * s0}, suite, opt, estimates);
      if (rep.pass()) {
        out.s0 = s0;
        out.found = true;
        return out;
      }
    } catch (const ResolutionError&) {
      return out;
    }
  }
  return out;
}

EnergyIdentity energy_identity(const SpectralOperator& op, const RSystem& rs, const CarlemanWeightSet& ws) {
  const Grid& g = *op.grid();
  require_same_grid(g, *ws.grid());
  const Trajectory& r = rs.r;
  int z = r.zero_index();
  if (z < 0) throw ConfigError("trajectory must contain t = 0");
  double T = -r.times.front();
  if (std::abs(T - ws.T1()) > 1e-12 * std::max(1.0, T)) throw ConfigError("energy identity needs T1 = T");
  Trajectory rt = time_derivative(op, rs);
  WeightGeometry geo = weight_geometry(ws);
  spmat lap = -assemble_operator(g, rvec::Zero(g.size()));
  const double s = ws.s(), lam = ws.lambda(), T1 = ws.T1();
  const double big = std::exp(2 * lam * ws.psi_inf());
  const double pmin = ws.phi_min();
  const cplx I(0.0, 1.0);
  double vol = g.cell_volume();
  int n = g.size();
  rvec e(n), gphi2(n);
  for (int k = 0; k < n; ++k) {
    int p = geo.interior_to_padded[k];
    e[k] = std::exp(lam * geo.psi_pad[p]);
    gphi2[k] = lam * lam * e[k] * e[k] * (geo.grad_x[p] * geo.grad_x[p] + geo.grad_y[p] * geo.grad_y[p]);
  }
  double dt = r.dt();
  // integrand on t_0 = -T, ..., t_z = 0; zero at t = -T
  std::vector<double> f(z + 1, 0.0);
  for (int j = 1; j <= z; ++j) {
    double t = r.times[j];
    double D = T1 * T1 - t * t;
    cvec w(n), wt(n);
    for (int k = 0; k < n; ++k) {
      double phi = (big - e[k]) / D;
      double pt = (big - e[k]) * 2.0 * t / (D * D);
      double W = std::exp(-s * (phi - pmin));
      w[k] = W * r.values(k, j);
      wt[k] = W * (rt.values(k, j) - s * pt * r.values(k, j));
    }
    cvec lw = lap * w;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      cplx p1 = I * wt[k] + lw[k] + s * s * gphi2[k] / (D * D) * w[k];
      acc += (p1 * std::conj(w[k])).imag();
    }
    f[j] = acc * vol;
  }
  // composite Simpson, with a 3/8 panel first when the interval count is odd
  double lhs = 0.0;
  int start = 0;
  if (z % 2 == 1) {
    if (z >= 3) {
      lhs += 3.0 * dt / 8.0 * (f[0] + 3 * f[1] + 3 * f[2] + f[3]);
      start = 3;
    } else {
      lhs += 0.5 * dt * (f[0] + f[1]);
      start = 1;
    }
  }
  for (int j = start; j + 2 <= z; j += 2) lhs += dt / 3.0 * (f[j] + 4 * f[j + 1] + f[j + 2]);
  double rhs = 0.0;
  for (int k = 0; k < n; ++k) {
    double phi = (big - e[k]) / (T1 * T1);
    double W = std::exp(-s * (phi - pmin));
    rhs += W * W * std::norm(r.values(k, z));
  }
  rhs *= 0.5 * vol;
  EnergyIdentity out;
  out.lhs = lhs;
  out.rhs = rhs;
  out.relative_error = rhs > 0 ? std::abs(lhs - rhs) / rhs : std::abs(lhs);
  return out;
}

bool weight_chain_holds(double psi0_inf, double a, double b) {
  return psi0_inf <= a && a < b && b < 2 * a - psi0_inf;
}

double ParabolicWeightSet::theta0(int node, double tau) const {
  if (!(std::abs(tau) < 1.0)) throw ConfigError("parabolic weights are singular at |tau| >= 1");
  return std::exp(lambda * psi0[node]) / (1.0 - tau * tau);
}

double ParabolicWeightSet::phi0(int node, double tau) const {
  if (!(std::abs(tau) < 1.0)) throw ConfigError("parabolic weights are singular at |tau| >= 1");
  return (std::exp(lambda * (psi0_inf + b)) - std::exp(lambda * (psi0[node] + a))) / (1.0 - tau * tau);
}

ParabolicWeightSet build_parabolic_weights(const GridPtr& grid, const std::vector<int>& gamma, double a, double b,
                                           double lambda, double sigma, double h) {
  if (!grid) throw ConfigError("parabolic weights need a grid");
  const Grid& g = *grid;
  if (gamma.empty()) throw ConfigError("Gamma must not be empty");
  for (int b_idx : gamma)
    if (b_idx < 0 || b_idx >= static_cast<int>(g.boundary().size())) throw ConfigError("Gamma entry out of range");
  if (!(lambda > 0.0) || !(sigma > 0.0)) throw ConfigError("lambda and sigma must be positive");
  if (!(h > 0.0 && h < 1.0)) throw ConfigError("h must lie in (0, 1)");

  std::vector<char> in_gamma(g.boundary().size(), 0);
  for (int b_idx : gamma) in_gamma[b_idx] = 1;
  const double c = g.collar_width();

  auto dist_to_rest = [&](std::array<double, 2> x) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < g.boundary().size(); ++k)
      if (!in_gamma[k]) d = std::min(d, std::sqrt(squared_distance(x, g.boundary()[k].pos, g.dim())));
    return d;
  };
  auto wall = [&](std::array<double, 2> x) {
    double d = std::min(x[0], g.extent()[0] - x[0]);
    if (g.dim() == 2) d = std::min({d, x[1], g.extent()[1] - x[1]});
    return d;
  };
  // smooth minimum of the distances to the inner collar boundary and to the
  // part of the outer boundary outside Gamma
  auto raw = [&](std::array<double, 2> x) {
    double d1 = std::max(0.0, c - wall(x));
    double d2 = dist_to_rest(x);
    if (!std::isfinite(d2)) return d1;
    if (d1 + d2 <= 0.0) return 0.0;
    return d1 * d2 / (d1 + d2);
  };

  ParabolicWeightSet pw;
  pw.grid = grid;
  pw.gamma = gamma;
  pw.a = a;
  pw.b = b;
  pw.lambda = lambda;
  pw.sigma = sigma;
  pw.h = h;
  pw.psi0 = rvec::Zero(g.size());
  double mx = 0.0;
  for (int n = 0; n < g.size(); ++n)
    if (g.in_collar(n)) {
      pw.psi0[n] = raw(g.coords(n));
      mx = std::max(mx, pw.psi0[n]);
    }
  if (!(mx > 0.0)) throw ConfigError("collar profile vanishes identically");
  pw.psi0 /= mx;
  pw.psi0_inf = 1.0;
  if (!weight_chain_holds(pw.psi0_inf, a, b))
    throw ConfigError("no admissible (a, b): need |psi0| <= a < b < 2a - |psi0| with |psi0| = 1");

  auto& cond = pw.conditions;
  for (int n = 0; n < g.size(); ++n)
    if (g.in_collar(n) && g.boundary_distance(n) < c - 1e-9 && !(pw.psi0[n] > 0.0)) cond.positive_inside = false;
  for (size_t k = 0; k < g.boundary().size(); ++k) {
    if (in_gamma[k]) continue;
    const auto& bn = g.boundary()[k];
    if (raw(bn.pos) / mx > 1e-12) cond.vanishes_off_gamma = false;
    if (bn.inward[0] >= 0 && bn.inward[1] >= 0) {
      double hh = bn.face < 2 ? g.spacing()[0] : g.spacing()[1];
      double dn = (3.0 * raw(bn.pos) / mx - 4.0 * pw.psi0[bn.inward[0]] + pw.psi0[bn.inward[1]]) / (2.0 * hh);
      if (dn > 1e-9) cond.outward_slope = false;
    }
  }
  // discrete critical points: no strict monotone direction along any axis
  auto pts = g.points();
  for (int n = 0; n < g.size(); ++n) {
    if (!g.in_collar(n)) continue;
    auto l = g.lattice(n);
    bool critical = true;
    bool checked = false;
    for (int ax = 0; ax < g.dim(); ++ax) {
      int lo = l[ax] - 1, hi = l[ax] + 1;
      if (lo < 0 || hi >= pts[ax]) {
        critical = false;  // next to the outer boundary
        break;
      }
      int nl = ax == 0 ? g.index(lo, l[1]) : g.index(l[0], lo);
      int nh = ax == 0 ? g.index(hi, l[1]) : g.index(l[0], hi);
      if (!g.in_collar(nl) || !g.in_collar(nh)) {
        critical = false;
        break;
      }
      checked = true;
      double fwd = pw.psi0[nh] - pw.psi0[n], bwd = pw.psi0[n] - pw.psi0[nl];
      if (fwd * bwd > 0.0) critical = false;
    }
    if (checked && critical) cond.critical_nodes.push_back(n);
  }
  cond.gradient_nonvanishing = cond.critical_nodes.empty();

  double c_out = 2.0 * c / 3.0, c_in = c / 3.0;
  double band_min = std::numeric_limits<double>::infinity();
  for (int n = 0; n < g.size(); ++n) {
    double d = g.boundary_distance(n);
    if (d > c_in + 1e-12 && d <= c_out + 1e-12) band_min = std::min(band_min, pw.psi0[n]);
  }
  pw.kappa = std::isfinite(band_min) ? 0.5 * band_min : 0.0;
  return pw;
}

}  // namespace nls
