#pragma once

#include <string>
#include <vector>

#include "nls/errors.hpp"
#include "nls/nonlinearity.hpp"
#include "nls/spectral.hpp"

namespace nls {

struct SolveConfig {
  double T = 1.0;
  double dt = 0.01;
  std::string quadrature = "trapezoid";
  double picard_tol = 1e-13;  // on ||w_{j+1} - w_j|| / ||w_{j+1}|| in C0(D(A))
  int picard_max_iter = 60;
  bool symmetric = false;     // samples on [-T, T] instead of [0, T]
  double radius = 0.0;        // certified radius, 0 when unknown

  void validate() const;
  std::vector<double> times() const { return time_samples(T, dt, symmetric); }
};

struct PicardCertificate {
  double radius = 0.0;
  double data_norm = 0.0;
  bool certified = false;
  bool converged = false;
  int iterations = 0;
  std::vector<double> distances;  // d_j = ||w_j - w_{j-1}||
  std::vector<double> factors;    // d_{j+1} / d_j
  double residual = 0.0;          // relative to ||w||
  double residual_abs = 0.0;

  double max_factor() const;
};

class PicardFailure : public NumericalError {
 public:
  PicardFailure(const std::string& what, PicardCertificate cert)
      : NumericalError(what), cert_(std::move(cert)) {}
  const PicardCertificate& certificate() const { return cert_; }

 private:
  PicardCertificate cert_;
};

// Modal Duhamel recursion, composite trapezoid in s, exact propagation
// between samples. `source` may be empty (zero source).
cmat duhamel_modal(const SpectralOperator& op, const cvec& data, const cmat& source, const std::vector<double>& times);

// u(t) = e^{tA} f - i int_0^t e^{(t-s)A} g(s) ds
Trajectory solve_linear(const SpectralOperator& op, const ComplexField& f, const Trajectory* g, const SolveConfig& cfg);

struct RadiusResult {
  double base = 0.0;
  double radius = 0.0;
  bool capped = false;
};

RadiusResult contraction_radius(const NonlinearitySpec& spec, double kstar, double c1, double T, double q_norm,
                                double cap = 1e6);

struct NonlinearSolution {
  Trajectory u;
  PicardCertificate certificate;
};

NonlinearSolution solve_nonlinear(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                                  const ComplexField& f, const SolveConfig& cfg);

// ||w - S(-q N(v + w, conj(v + w)))|| / ||w|| for a solution u = v + w.
double fixed_point_residual(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                            const ComplexField& f, const Trajectory& u);

}  // namespace nls
