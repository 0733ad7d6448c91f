#include "nls/fields.hpp"

#include <cmath>

#include "nls/errors.hpp"

namespace nls {

int Trajectory::zero_index() const {
  for (int j = 0; j < samples(); ++j)
    if (times[j] == 0.0) return j;
  return -1;
}

std::vector<double> time_samples(double T, double dt, bool symmetric) {
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("T and dt must be positive");
  double steps = T / dt;
  long m = std::lround(steps);
  if (m < 1 || std::abs(steps - m) > 1e-9 * std::max(1.0, steps)) throw ConfigError("dt must divide T");
  std::vector<double> t;
  long first = symmetric ? -m : 0;
  for (long j = first; j <= m; ++j) t.push_back(j * dt);
  if (t.size() < 3) throw ConfigError("at least 3 time samples are required");
  return t;
}

rvec sample(const Grid& g, const std::function<double(double, double)>& fn) {
  rvec v(g.size());
  for (int n = 0; n < g.size(); ++n) {
    auto x = g.coords(n);
    v[n] = fn(x[0], x[1]);
  }
  return v;
}

rvec sine_mode(const Grid& g, int m, int n) {
  double lx = g.extent()[0], ly = g.extent()[1];
  bool two = g.dim() == 2;
  return sample(g, [=](double x, double y) {
    double v = std::sin(m * M_PI * x / lx);
    if (two) v *= std::sin(n * M_PI * y / ly);
    return v;
  });
}

rvec sine_bump(const Grid& g, std::array<double, 2> c, std::array<double, 2> w, double amplitude) {
  int dim = g.dim();
  return sample(g, [=](double x, double y) {
    double v = amplitude;
    double pos[2] = {x, y};
    for (int a = 0; a < dim; ++a) {
      double s = (pos[a] - (c[a] - w[a])) / (2.0 * w[a]);
      if (s <= 0.0 || s >= 1.0) return 0.0;
      v *= std::pow(std::sin(M_PI * s), 4);
    }
    return v;
  });
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform(), u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

rvec random_sine_sum(const Grid& g, Rng& rng, int modes, double decay) {
  rvec v = rvec::Zero(g.size());
  int ny = g.dim() == 2 ? modes : 1;
  for (int m = 1; m <= modes; ++m)
    for (int n = 1; n <= ny; ++n) v += rng.normal() * std::pow(double(m * n), -decay) * sine_mode(g, m, n);
  return v;
}

cvec random_complex_sine_sum(const Grid& g, Rng& rng, int modes, double decay) {
  cvec v = cvec::Zero(g.size());
  int ny = g.dim() == 2 ? modes : 1;
  for (int m = 1; m <= modes; ++m)
    for (int n = 1; n <= ny; ++n) {
      cplx a(rng.normal(), rng.normal());
      v += a * std::pow(double(m * n), -decay) * sine_mode(g, m, n).cast<cplx>();
    }
  return v;
}

double l2_norm(const Grid& g, const cvec& v) { return std::sqrt(g.cell_volume()) * v.norm(); }
double l2_norm(const Grid& g, const rvec& v) { return std::sqrt(g.cell_volume()) * v.norm(); }
cplx l2_inner(const Grid& g, const cvec& a, const cvec& b) { return g.cell_volume() * b.dot(a); }

}  // namespace nls
