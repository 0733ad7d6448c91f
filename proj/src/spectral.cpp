#include "nls/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "nls/errors.hpp"

namespace nls {

spmat assemble_operator(const Grid& g, const rvec& p) {
  if (p.size() != g.size()) throw GridMismatch();
  std::vector<Eigen::Triplet<double>> t;
  int nx = g.points()[0], ny = g.points()[1];
  double cx = 1.0 / (g.spacing()[0] * g.spacing()[0]);
  double cy = g.dim() == 2 ? 1.0 / (g.spacing()[1] * g.spacing()[1]) : 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int n = g.index(i, j);
      t.emplace_back(n, n, 2 * cx + 2 * cy - p[n]);
      if (i > 0) t.emplace_back(n, g.index(i - 1, j), -cx);
      if (i < nx - 1) t.emplace_back(n, g.index(i + 1, j), -cx);
      if (g.dim() == 2) {
        if (j > 0) t.emplace_back(n, g.index(i, j - 1), -cy);
        if (j < ny - 1) t.emplace_back(n, g.index(i, j + 1), -cy);
      }
    }
  spmat m(g.size(), g.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SpectralOperator::SpectralOperator(GridPtr grid, PotentialField potential)
    : grid_(std::move(grid)), potential_(std::move(potential)) {
  if (potential_.grid) require_same_grid(*grid_, *potential_.grid);
  if (potential_.values.size() != grid_->size()) throw GridMismatch();
  if (!potential_.values.allFinite()) throw ConfigError("potential has non-finite values");
  matrix_ = assemble_operator(*grid_, potential_.values);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(matrix_), Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ConfigError("symmetric eigensolver did not converge");
  mu_ = es.eigenvalues();
  basis_ = es.eigenvectors();
}

rvec SpectralOperator::eigenvector(int m) const { return basis_.col(m) / std::sqrt(grid_->cell_volume()); }

cvec SpectralOperator::to_modal(const cvec& f) const {
  rvec re = basis_.transpose() * f.real();
  rvec im = basis_.transpose() * f.imag();
  cvec c(re.size());
  c.real() = re;
  c.imag() = im;
  return c;
}

cmat SpectralOperator::to_modal(const cmat& f) const {
  Eigen::MatrixXd re = basis_.transpose() * f.real();
  Eigen::MatrixXd im = basis_.transpose() * f.imag();
  cmat c(re.rows(), re.cols());
  c.real() = re;
  c.imag() = im;
  return c;
}

cvec SpectralOperator::from_modal(const cvec& c) const {
  rvec re = basis_ * c.real();
  rvec im = basis_ * c.imag();
  cvec f(re.size());
  f.real() = re;
  f.imag() = im;
  return f;
}

cmat SpectralOperator::from_modal(const cmat& c) const {
  Eigen::MatrixXd re = basis_ * c.real();
  Eigen::MatrixXd im = basis_ * c.imag();
  cmat f(re.rows(), re.cols());
  f.real() = re;
  f.imag() = im;
  return f;
}

ComplexField SpectralOperator::propagate(const ComplexField& f, double t) const {
  if (f.grid) require_same_grid(*grid_, *f.grid);
  if (f.values.size() != grid_->size()) throw GridMismatch();
  if (t == 0.0) return {grid_, f.values};
  cvec c = to_modal(f.values);
  for (int m = 0; m < c.size(); ++m) c[m] *= std::polar(1.0, -mu_[m] * t);
  return {grid_, from_modal(c)};
}

Trajectory SpectralOperator::propagate_samples(const ComplexField& f, const std::vector<double>& times) const {
  if (f.grid) require_same_grid(*grid_, *f.grid);
  if (f.values.size() != grid_->size()) throw GridMismatch();
  cvec c = to_modal(f.values);
  cmat modal(c.size(), times.size());
  for (size_t j = 0; j < times.size(); ++j)
    for (int m = 0; m < c.size(); ++m) modal(m, j) = c[m] * std::polar(1.0, -mu_[m] * times[j]);
  Trajectory out{grid_, times, from_modal(modal)};
  int z = out.zero_index();
  if (z >= 0) out.values.col(z) = f.values;
  return out;
}

ComplexField SpectralOperator::apply_h(const ComplexField& f) const {
  if (f.grid) require_same_grid(*grid_, *f.grid);
  cvec out = matrix_ * f.values;
  return {grid_, out};
}

ComplexField SpectralOperator::apply_generator(const ComplexField& f) const {
  ComplexField h = apply_h(f);
  h.values *= cplx(0.0, -1.0);
  return h;
}

SpectralOperator eigendecompose(const GridPtr& grid, const PotentialField& potential) {
  return SpectralOperator(grid, potential);
}

}  // namespace nls
