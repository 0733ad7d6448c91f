#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nls/forward.hpp"

namespace nls {

enum class VariationMethod { pde, quotient };

struct VariationSolution {
  int order = 1;
  Trajectory u;  // on [-T, T]
  PotentialField p;
  PotentialField q;
  VariationMethod method = VariationMethod::pde;
};

// (i d_t + Delta + p) u1 = 0, u1(0) = f.
VariationSolution first_variation(const SpectralOperator& op, const ComplexField& f, const SolveConfig& cfg);

// (i d_t + Delta + p) uk = -q sum_m binom(k,m) c[m][k-m] u1^m conj(u1)^{k-m}, uk(0) = 0.
VariationSolution kth_variation(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                                const ComplexField& f, const SolveConfig& cfg);

// (1/eps^l) sum_n binom(l,n) (-1)^n u_{(l-n) eps} with nonlinear solves on [-T, T].
VariationSolution difference_quotient_variation(const SpectralOperator& op, const NonlinearitySpec& spec,
                                                const PotentialField& q, const ComplexField& f, int l, double eps,
                                                const SolveConfig& cfg);

// sum_{n=0}^{k} binom(k,n) (-1)^n (k-n)^p, exact in integers.
std::int64_t alternating_power_sum(int k, int p);

// (1/eta^l) sum_n binom(l,n) (-1)^n g(x + (l-n) eta)
double forward_difference(const std::function<double(double)>& g, double x, int l, double eta);

struct ConvergenceRow {
  double eps = 0.0;
  double error = 0.0;
  double local_order = 0.0;  // against the previous rung, 0 for the first
};

struct ConvergenceReport {
  int order = 1;
  std::string reference;     // first_variation, kth_variation or zero
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0.0;
  int fit_points = 0;        // rungs before the floor used in the fit
  bool monotone = true;
  bool flagged = false;      // non-monotone ladder
};

// Least-squares slope of log(error) against log(eps) over the leading rungs,
// stopping where the ladder stops decreasing or the local order collapses.
void fit_convergence(ConvergenceReport& report);

ConvergenceReport convergence_study(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q,
                                    const ComplexField& f, int l, const std::vector<double>& ladder,
                                    const SolveConfig& cfg);

// Solution of the differentiated system for r = d_t of a linearization difference.
struct RSystem {
  std::string mode;      // "q" or "p"
  Trajectory r;          // on [-T, T]; negative times by reflection
  Trajectory v;          // source on [-T, T]
  cvec initial;
  PotentialField difference;  // q1 - q2 or p1 - p2
};

// q-mode: p1 = p2 = p (the operator's potential); requires q1 = q2 on the collar.
RSystem time_derivative_solution(const SpectralOperator& op, const NonlinearitySpec& spec, const PotentialField& q1,
                                 const PotentialField& q2, const ComplexField& f, const SolveConfig& cfg);

// p-mode: r1 = d_t (u1[p1] - u1[p2]); requires p1 = p2 on the collar.
RSystem time_derivative_solution(const SpectralOperator& op1, const SpectralOperator& op2, const ComplexField& f,
                                 const SolveConfig& cfg);

// d_t r = -i (H r + v), evaluated from the equation.
Trajectory time_derivative(const SpectralOperator& op, const RSystem& rs);

struct ExtensionCheck {
  double reflection_defect = 0.0;  // max_t ||r_direct(t) - r(t)|| / sup ||r||, t < 0
  double symmetry_defect = 0.0;    // max_t ||r_direct(t) + conj r_direct(-t)|| / sup ||r_direct||
};

// Solves the r-system directly on [-T, T] and compares with the reflected extension.
ExtensionCheck check_extension(const SpectralOperator& op, const RSystem& rs);

struct EstimateEntry {
  std::string name;
  double fitted = 0.0;     // max over samples of the normalized ratio
  double bound = 0.0;      // supplied bound, 0 if none
  double violation = 0.0;  // fitted / bound, 0 if no bound
  bool pass = true;
};

struct EstimateReport {
  std::vector<EstimateEntry> entries;
  bool pass() const;
};

// Checks ||v||_{H^{2j}}, ||r||_{H^{2j}} <= C ||g||_{H^{2j}} ||f||^k_{H^4} and
// ||d_t r||_{H^{2j}} <= C ||g||_{H^{2j+2}} ||f||^k_{H^4}, j = 0, 1, over t in (0, T].
// `bounds` optionally holds six constants in that order.
EstimateReport estimate_suite(const SpectralOperator& op, const RSystem& rs, const ComplexField& f, int k,
                              const std::vector<double>& bounds = {});

}  // namespace nls
