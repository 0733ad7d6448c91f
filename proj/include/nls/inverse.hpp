#pragma once

#include <array>
#include <string>
#include <vector>

#include "nls/carleman.hpp"
#include "nls/linearization.hpp"

namespace nls {

struct BoundarySelection {
  std::string mode = "gamma0";   // "gamma0" or "explicit"
  std::vector<int> nodes;        // entries of Grid::boundary()
  std::array<double, 2> x0{};    // gamma0 mode only
};

// Entries with (x - x0) . nu >= 0.
BoundarySelection gamma0_selection(const Grid& g, std::array<double, 2> x0);
BoundarySelection explicit_selection(const Grid& g, std::vector<int> nodes);
// Connected block of ceil(fraction * n) entries of `sel`, centred along the boundary.
BoundarySelection shrink_selection(const Grid& g, const BoundarySelection& sel, double fraction);

struct MeasurementSeries {
  BoundarySelection selection;
  std::vector<double> times;  // samples on [0, T]
  cmat values;                // d_nu per selected entry (rows) and sample (columns)
  std::vector<double> weights;

  // discrete L2(S x (0, T)) norm
  double l2() const;
};

// One-sided second-order outward difference (u(2h) - 4 u(h)) / (2h), using samples with t >= 0.
MeasurementSeries neumann_trace(const Trajectory& traj, const BoundarySelection& sel);

// Second-order time derivative of a series on uniform samples.
MeasurementSeries time_derivative(const MeasurementSeries& s);

enum class RecoveryMode { p, q };
std::string to_string(RecoveryMode m);

struct PerturbationMember {
  std::string id;
  rvec values;
};

// Five sums of sine bumps supported off the collar.
std::vector<PerturbationMember> perturbation_family(const Grid& g, double amplitude = 0.5);

struct StabilityInputs {
  RecoveryMode mode = RecoveryMode::q;
  PotentialField p;  // base potential
  PotentialField q;  // base coefficient in front of the nonlinearity
  NonlinearitySpec spec{2, {{1, 1, 1.0}}};
  ComplexField f;
  BoundarySelection selection;
  SolveConfig cfg;
  double gamma_minus = 0.0;  // |f| >= gamma_minus off the collar
  double gamma_plus = 1e300; // ||f||_{H^4} <= gamma_plus
  bool full_path = false;
  double full_eps = 0.0;     // quotient step for the full path, default 1e-3
  double agreement_tol = 0.05;
};

struct StabilityRow {
  std::string member_id;
  double pert_norm = 0.0;      // L2 off the collar
  double pert_h4 = 0.0;
  double delta = 0.0;          // fast path
  double delta_full = -1.0;    // negative when not computed
  double ratio = 0.0;          // pert_norm / delta
  bool degenerate = false;
  bool pass = true;
};

struct StabilityReport {
  std::string mode;
  std::vector<StabilityRow> rows;  // sorted by member id
  double fitted_c = 0.0;
  double max_disagreement = 0.0;   // relative |delta_full - delta| over members with a full path
  bool pass = true;
};

// Rejects perturbations touching the collar and data with |f| < gamma_minus off the collar.
void check_stability_hypotheses(const StabilityInputs& in, const PotentialField& pert);

// delta^{(l)} from the linearized r-system, l = k for q and l = 1 for p.
double fast_delta(const StabilityInputs& in, const PotentialField& pert);
// The same from nonlinear solves, difference quotients and a time difference.
double full_delta(const StabilityInputs& in, const PotentialField& pert);

StabilityReport stability_experiment(const StabilityInputs& in, const std::vector<PerturbationMember>& family);

struct LogLawRow {
  std::string member_id;
  double pert_norm = 0.0;
  double delta = 0.0;   // on Gamma
  double law = 0.0;     // [|ln delta|^{-1} + delta]^{1/2}
  double ratio = 0.0;   // pert / law
  bool degenerate = false;
};

struct ObservabilityFit {
  std::vector<double> gammas;
  double energy = 0.0;      // collar band energy of r
  double boundary = 0.0;    // int_Gamma int_{-T}^{T} |d_nu r|^2
  double c = 0.0;
  double mu = 0.0;
};

struct PartialDataReport {
  std::string mode;
  std::vector<double> fractions;               // of the gamma0 set, decreasing
  std::vector<std::vector<double>> deltas;     // [member][fraction], members sorted by id
  bool monotone = true;                        // delta non-increasing as Gamma shrinks
  std::vector<LogLawRow> rows;                 // at the smallest fraction
  double fitted_c = 0.0;
  StabilityReport lipschitz;                   // full gamma0 set
  bool never_tighter = true;                   // C log_law(d) >= C_lip d over the measured delta range
  ObservabilityFit observability;
  bool pass = true;
};

double log_law(double delta);

// `in.selection` must be a gamma0 selection; Gamma is the centred block of
// `fractions.back()` of it.
PartialDataReport partial_data_experiment(const StabilityInputs& in, const std::vector<PerturbationMember>& family,
                                          const std::vector<double>& fractions, const std::vector<double>& gammas);

// Fits E <= C (1/gamma + e^{-mu gamma} + e^{mu gamma} B) over the ladder:
// mu places the minimum over gamma of the right-hand side at the centre of the
// ladder, C is the smallest constant for that mu.
ObservabilityFit fit_observability(double energy, double boundary, const std::vector<double>& gammas);

// int_{band} int_{-T1}^{T1} |grad r|^2 + |r|^2 with band = {c/3 < dist <= 2c/3}.
double collar_band_energy(const Trajectory& r, double T1);

struct IdentityReport {
  double initial_residual = 0.0;   // relative, r(0) against the closed form
  double initial_abs = 0.0;
  EnergyIdentity energy;
  EnergyIdentity energy_doubled;   // at 2s
  double pert_sq = 0.0;            // ||q1 - q2||^2 off the collar
  double boundary = 0.0;           // int_{Gamma0 x (0,T)} |d_nu r|^2
  double ratio = 0.0;              // pert_sq / boundary
};

IdentityReport initial_identity_pipeline(const SpectralOperator& op, const NonlinearitySpec& spec,
                                         const PotentialField& q1, const PotentialField& q2, const ComplexField& f,
                                         const SolveConfig& cfg, const CarlemanWeightSet& ws,
                                         const BoundarySelection& sel);

}  // namespace nls
