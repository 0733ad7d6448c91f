#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "nls/linearization.hpp"

namespace nls {

// psi = |x - x0|^2, theta = e^{lambda psi} / (T1^2 - t^2),
// phi = (e^{2 lambda |psi|_inf} - e^{lambda psi}) / (T1^2 - t^2).
class CarlemanWeightSet {
 public:
  CarlemanWeightSet(const GridPtr& grid, std::array<double, 2> x0, double lambda, double s, double T1);

  const GridPtr& grid() const { return grid_; }
  const std::array<double, 2>& x0() const { return x0_; }
  double lambda() const { return lambda_; }
  double s() const { return s_; }
  double T1() const { return T1_; }
  double psi_inf() const { return psi_inf_; }
  double psi_min() const { return psi_min_; }
  CarlemanWeightSet with_s(double s) const { return CarlemanWeightSet(grid_, x0_, lambda_, s, T1_); }

  double psi(std::array<double, 2> x) const;
  // min over the closure of phi(x, 0)
  double phi_min() const;

 private:
  GridPtr grid_;
  std::array<double, 2> x0_;
  double lambda_, s_, T1_;
  double psi_inf_ = 0.0, psi_min_ = 0.0;
};

struct WeightValues {
  double psi = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

WeightValues evaluate_weights(const CarlemanWeightSet& ws, std::array<double, 2> x, double t);

// Smallest lambda with e^{lambda psi} >= 2 on every node of the closed grid.
double lambda0_for_grid(const Grid& g, std::array<double, 2> x0);

// u(x, t) = sum_j a_j(t) F_j(x) with known a_j'.
struct SuiteMember {
  std::string id;
  std::vector<cvec> shapes;
  std::vector<std::function<cplx(double)>> amp;
  std::vector<std::function<cplx(double)>> rate;

  cvec value(double t) const;
  cvec time_derivative(double t) const;
  SuiteMember scaled(double c) const;
};

// Six members vanishing on the boundary: two exact homogeneous solutions and
// four non-solutions with different time profiles and spatial content.
std::vector<SuiteMember> manufactured_suite(const SpectralOperator& op, std::uint64_t seed);

enum class CarlemanEstimate { full_boundary, interior };
std::string to_string(CarlemanEstimate e);

struct RatioRow {
  CarlemanEstimate estimate = CarlemanEstimate::full_boundary;
  double s = 0.0;
  double lambda = 0.0;
  std::string suite_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool degenerate = false;  // 0 / 0
};

struct RatioOptions {
  double collar_inner = 0.0;  // omega_2 width for the interior estimate, default collar/3
  double collar_outer = 0.0;  // omega_1 width, default 2 collar/3
  double max_cell_jump = 13.815510557964274;  // ln(1e6)
  int min_time_nodes = 401;
  int max_time_nodes = 40001;
};

// Weighted LHS and RHS of one estimate for one member, both multiplied by
// e^{2 s c} with c the smallest phi(., 0) near the member's support.
// Throws ResolutionError when e^{-s phi} is not resolved.
RatioRow carleman_ratio(const SpectralOperator& op, const CarlemanWeightSet& ws, const SuiteMember& u,
                        CarlemanEstimate estimate, const RatioOptions& opt = {});

struct SweepReport {
  std::vector<RatioRow> rows;        // ordered by estimate, member, s
  double max_ratio_full = 0.0;
  double max_ratio_interior = 0.0;
  bool bounded = true;               // every ratio finite
  bool non_increasing = true;        // per member and estimate along the s ladder
  bool pass() const { return bounded && non_increasing; }
};

SweepReport carleman_ratio_sweep(const SpectralOperator& op, const CarlemanWeightSet& base,
                                 const std::vector<double>& s_ladder, const std::vector<SuiteMember>& suite,
                                 const RatioOptions& opt = {},
                                 const std::vector<CarlemanEstimate>& estimates = {CarlemanEstimate::full_boundary,
                                                                                   CarlemanEstimate::interior});

struct S0Search {
  double s0 = 0.0;
  bool found = false;
  std::vector<double> tried;
};

// Smallest candidate s0 whose ladder {s0, 2 s0, 4 s0, 8 s0} passes the sweep.
S0Search find_s0(const SpectralOperator& op, const CarlemanWeightSet& base, const std::vector<double>& candidates,
                 const std::vector<SuiteMember>& suite, const RatioOptions& opt = {},
                 const std::vector<CarlemanEstimate>& estimates = {CarlemanEstimate::full_boundary,
                                                                   CarlemanEstimate::interior});

struct EnergyIdentity {
  double lhs = 0.0;  // Im int_{-T}^{0} int (e^{-s phi} R1 r) conj(e^{-s phi} r)
  double rhs = 0.0;  // 1/2 int e^{-2 s phi(x,0)} |r(x,0)|^2
  double relative_error = 0.0;
};

// Uses T1 = the trajectory horizon and d_t r from the equation.
EnergyIdentity energy_identity(const SpectralOperator& op, const RSystem& rs, const CarlemanWeightSet& ws);

// Parabolic weights on the collar.
struct ParabolicWeightSet {
  GridPtr grid;
  std::vector<int> gamma;      // boundary entries forming Gamma
  rvec psi0;                   // on interior nodes, zero off the collar
  double psi0_inf = 0.0;
  double a = 0.0, b = 0.0, lambda = 1.0, sigma = 1.0, h = 0.5;
  double kappa = 0.0;

  struct Conditions {
    bool positive_inside = true;
    bool vanishes_off_gamma = true;
    bool gradient_nonvanishing = true;
    bool outward_slope = true;
    std::vector<int> critical_nodes;  // collar nodes where the gradient vanishes
  } conditions;

  double theta0(int node, double tau) const;
  double phi0(int node, double tau) const;
};

// Chain ||psi0|| <= a < b < 2a - ||psi0||.
bool weight_chain_holds(double psi0_inf, double a, double b);

ParabolicWeightSet build_parabolic_weights(const GridPtr& grid, const std::vector<int>& gamma, double a, double b,
                                           double lambda, double sigma = 1.0, double h = 0.5);

}  // namespace nls
