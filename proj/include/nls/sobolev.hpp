#pragma once

#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "nls/fields.hpp"

namespace nls {

using spmat = Eigen::SparseMatrix<double>;

// Discrete H^k norms, k <= 4. Fields are padded with zero boundary values and
// differentiated on every lattice node: centered stencils inside, second-order
// one-sided stencils on the boundary layer. Orders 3 and 4 compose the first
// and second difference operators. Quadrature is the product trapezoid rule.
class SobolevNorm {
 public:
  static constexpr int kMaxOrder = 4;

  explicit SobolevNorm(const Grid& g);

  // D^alpha as a (padded nodes) x (interior nodes) matrix.
  const spmat& derivative(int ax, int ay) const;
  const std::vector<std::array<int, 2>>& multi_indices(int k) const { return indices_[k]; }
  // Stacked sqrt(weight) * D^alpha over |alpha| <= k; ||S_k u||_2 is the H^k norm.
  const spmat& stacked(int k) const { return stacked_[k]; }
  const Eigen::VectorXd& padded_weights() const { return weights_; }
  // Interior to padded embedding.
  const spmat& embedding() const { return embed_; }

  double norm(const cvec& u, int k) const;
  double norm(const rvec& u, int k) const;
  // Per-column norms of a trajectory.
  Eigen::VectorXd column_norms(const cmat& u, int k) const;
  // Gram matrix of the H^k inner product on interior unknowns.
  spmat gram(int k) const;

 private:
  int dim_;
  std::vector<std::vector<std::array<int, 2>>> indices_;
  std::vector<std::vector<spmat>> ops_;  // ops_[ax][ay]
  std::vector<spmat> stacked_;
  Eigen::VectorXd weights_;
  spmat embed_;
};

double sobolev_norm(const ComplexField& f, int k);
double sobolev_norm(const PotentialField& f, int k);
// max over samples of the H^2 norm
double c0_da_norm(const Trajectory& u);

}  // namespace nls
