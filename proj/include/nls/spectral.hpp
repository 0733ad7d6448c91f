#pragma once

#include "nls/fields.hpp"
#include "nls/sobolev.hpp"

namespace nls {

// Full eigensystem of the discrete Dirichlet operator H = -Delta_h - p.
// The generator of the flow is A = -iH, so e^{tA} f = sum e^{-i mu_m t} <f, e_m> e_m.
class SpectralOperator {
 public:
  SpectralOperator(GridPtr grid, PotentialField potential);

  const GridPtr& grid() const { return grid_; }
  const PotentialField& potential() const { return potential_; }
  const rvec& eigenvalues() const { return mu_; }
  // Columns orthonormal in the Euclidean inner product.
  const Eigen::MatrixXd& basis() const { return basis_; }
  // Eigenvector m normalized in the discrete L^2 inner product.
  rvec eigenvector(int m) const;
  const spmat& matrix() const { return matrix_; }

  // Euclidean coefficients against the basis, and back.
  cvec to_modal(const cvec& f) const;
  cmat to_modal(const cmat& f) const;
  cvec from_modal(const cvec& c) const;
  cmat from_modal(const cmat& c) const;

  ComplexField propagate(const ComplexField& f, double t) const;
  Trajectory propagate_samples(const ComplexField& f, const std::vector<double>& times) const;
  // H f and A f = -i H f using the assembled stencil.
  ComplexField apply_h(const ComplexField& f) const;
  ComplexField apply_generator(const ComplexField& f) const;

 private:
  GridPtr grid_;
  PotentialField potential_;
  spmat matrix_;
  rvec mu_;
  Eigen::MatrixXd basis_;
};

spmat assemble_operator(const Grid& g, const rvec& potential);
SpectralOperator eigendecompose(const GridPtr& grid, const PotentialField& potential);

inline ComplexField propagate(const SpectralOperator& op, const ComplexField& f, double t) {
  return op.propagate(f, t);
}

}  // namespace nls
