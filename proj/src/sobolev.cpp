#include "nls/sobolev.hpp"

#include <cmath>

#include "nls/errors.hpp"

namespace nls {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// First and second differences on a padded axis of n + 2 nodes.
spmat axis_d1(int n, double h) {
  int p = n + 2;
  Triplets t;
  double c = 1.0 / (2.0 * h);
  t.emplace_back(0, 0, -3 * c);
  t.emplace_back(0, 1, 4 * c);
  t.emplace_back(0, 2, -c);
  for (int i = 1; i < p - 1; ++i) {
    t.emplace_back(i, i + 1, c);
    t.emplace_back(i, i - 1, -c);
  }
  t.emplace_back(p - 1, p - 1, 3 * c);
  t.emplace_back(p - 1, p - 2, -4 * c);
  t.emplace_back(p - 1, p - 3, c);
  spmat m(p, p);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

spmat axis_d2(int n, double h) {
  int p = n + 2;
  Triplets t;
  double c = 1.0 / (h * h);
  const double edge[4] = {2, -5, 4, -1};
  for (int q = 0; q < 4; ++q) {
    t.emplace_back(0, q, edge[q] * c);
    t.emplace_back(p - 1, p - 1 - q, edge[q] * c);
  }
  for (int i = 1; i < p - 1; ++i) {
    t.emplace_back(i, i - 1, c);
    t.emplace_back(i, i, -2 * c);
    t.emplace_back(i, i + 1, c);
  }
  spmat m(p, p);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

spmat identity(int p) {
  spmat m(p, p);
  m.setIdentity();
  return m;
}

spmat axis_power(int order, int n, double h) {
  spmat d1 = axis_d1(n, h), d2 = axis_d2(n, h);
  switch (order) {
    case 0: return identity(n + 2);
    case 1: return d1;
    case 2: return d2;
    case 3: return spmat(d1 * d2);
    default: return spmat(d2 * d2);
  }
}

// A acting along x (fast index) or y on a px x py lattice.
spmat lift(const spmat& a, int px, int py, bool along_x) {
  Triplets t;
  for (int k = 0; k < a.outerSize(); ++k)
    for (spmat::InnerIterator it(a, k); it; ++it) {
      int r = it.row(), c = it.col();
      if (along_x) {
        for (int j = 0; j < py; ++j) t.emplace_back(r + px * j, c + px * j, it.value());
      } else {
        for (int i = 0; i < px; ++i) t.emplace_back(i + px * r, i + px * c, it.value());
      }
    }
  spmat m(px * py, px * py);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SobolevNorm::SobolevNorm(const Grid& g) : dim_(g.dim()) {
  auto pp = g.padded_points();
  int px = pp[0], py = pp[1];
  int nx = g.points()[0], ny = g.points()[1];
  double hx = g.spacing()[0], hy = g.spacing()[1];

  Triplets et;
  for (int n = 0; n < g.size(); ++n) {
    auto l = g.lattice(n);
    int ei = l[0] + 1, ej = dim_ == 2 ? l[1] + 1 : 0;
    et.emplace_back(ei + px * ej, n, 1.0);
  }
  embed_.resize(px * py, g.size());
  embed_.setFromTriplets(et.begin(), et.end());

  weights_.resize(px * py);
  for (int ej = 0; ej < py; ++ej)
    for (int ei = 0; ei < px; ++ei) {
      double w = (ei == 0 || ei == px - 1) ? 0.5 * hx : hx;
      if (dim_ == 2) w *= (ej == 0 || ej == py - 1) ? 0.5 * hy : hy;
      weights_[ei + px * ej] = w;
    }

  int maxy = dim_ == 2 ? kMaxOrder : 0;
  ops_.assign(kMaxOrder + 1, std::vector<spmat>(kMaxOrder + 1));
  for (int ax = 0; ax <= kMaxOrder; ++ax) {
    spmat dx = dim_ == 2 ? lift(axis_power(ax, nx, hx), px, py, true) : axis_power(ax, nx, hx);
    for (int ay = 0; ay + ax <= kMaxOrder && ay <= maxy; ++ay) {
      if (ay == 0) {
        ops_[ax][ay] = dx * embed_;
      } else {
        spmat dy = lift(axis_power(ay, ny, hy), px, py, false);
        ops_[ax][ay] = dy * dx * embed_;
      }
    }
  }

  indices_.resize(kMaxOrder + 1);
  stacked_.resize(kMaxOrder + 1);
  Eigen::VectorXd sw = weights_.cwiseSqrt();
  for (int k = 0; k <= kMaxOrder; ++k) {
    for (int ord = 0; ord <= k; ++ord)
      for (int ay = 0; ay <= ord && ay <= maxy; ++ay) indices_[k].push_back({ord - ay, ay});
    Triplets t;
    int block = 0;
    for (auto& a : indices_[k]) {
      spmat m = sw.asDiagonal() * ops_[a[0]][a[1]];
      for (int c = 0; c < m.outerSize(); ++c)
        for (spmat::InnerIterator it(m, c); it; ++it) t.emplace_back(block * px * py + it.row(), it.col(), it.value());
      ++block;
    }
    stacked_[k].resize(block * px * py, g.size());
    stacked_[k].setFromTriplets(t.begin(), t.end());
  }
}

const spmat& SobolevNorm::derivative(int ax, int ay) const {
  if (ax < 0 || ay < 0 || ax + ay > kMaxOrder || (dim_ == 1 && ay != 0))
    throw ConfigError("unsupported derivative multi-index");
  return ops_[ax][ay];
}

double SobolevNorm::norm(const cvec& u, int k) const {
  if (k < 0 || k > kMaxOrder) throw ConfigError("Sobolev order out of range");
  cvec r = stacked_[k] * u;
  return r.norm();
}

double SobolevNorm::norm(const rvec& u, int k) const {
  if (k < 0 || k > kMaxOrder) throw ConfigError("Sobolev order out of range");
  rvec r = stacked_[k] * u;
  return r.norm();
}

Eigen::VectorXd SobolevNorm::column_norms(const cmat& u, int k) const {
  if (k < 0 || k > kMaxOrder) throw ConfigError("Sobolev order out of range");
  cmat r = stacked_[k] * u;
  return r.colwise().norm().transpose();
}

spmat SobolevNorm::gram(int k) const { return spmat(stacked_[k].transpose() * stacked_[k]); }

double sobolev_norm(const ComplexField& f, int k) { return f.grid->sobolev().norm(f.values, k); }
double sobolev_norm(const PotentialField& f, int k) { return f.grid->sobolev().norm(f.values, k); }

double c0_da_norm(const Trajectory& u) {
  if (u.samples() == 0) return 0.0;
  return u.grid->sobolev().column_norms(u.values, 2).maxCoeff();
}

}  // namespace nls
