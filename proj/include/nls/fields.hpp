#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nls/grid.hpp"

namespace nls {

using rvec = Eigen::VectorXd;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

struct ComplexField {
  GridPtr grid;
  cvec values;

  ComplexField conj() const { return {grid, values.conjugate()}; }
};

struct PotentialField {
  GridPtr grid;
  rvec values;
  std::string label;

  double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  ComplexField as_complex() const { return {grid, values.cast<cplx>()}; }
};

// Time samples t_j = t_0 + j dt; column j of values holds the field at t_j.
struct Trajectory {
  GridPtr grid;
  std::vector<double> times;
  cmat values;

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  int samples() const { return static_cast<int>(times.size()); }
  // Index of t = 0, or -1.
  int zero_index() const;
  ComplexField at(int j) const { return {grid, values.col(j)}; }
};

// Samples on [0, T] or [-T, T] with exact zero at index M when symmetric.
std::vector<double> time_samples(double T, double dt, bool symmetric);

// Samples a function of position on the interior nodes.
rvec sample(const Grid& g, const std::function<double(double, double)>& fn);

// sin(m pi x / Lx) [sin(n pi y / Ly)].
rvec sine_mode(const Grid& g, int m, int n = 1);

// Product of sin^4 humps on [c - w, c + w] per axis, zero outside.
rvec sine_bump(const Grid& g, std::array<double, 2> center, std::array<double, 2> half_width, double amplitude);

// Seeded generator that only uses the raw 64-bit engine output, so results do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal();

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Random combination of the lowest sine modes with amplitudes decaying like 1/(m n)^decay.
rvec random_sine_sum(const Grid& g, Rng& rng, int modes, double decay);
cvec random_complex_sine_sum(const Grid& g, Rng& rng, int modes, double decay);

double l2_norm(const Grid& g, const cvec& v);
double l2_norm(const Grid& g, const rvec& v);
cplx l2_inner(const Grid& g, const cvec& a, const cvec& b);

}  // namespace nls
