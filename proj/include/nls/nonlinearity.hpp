#pragma once

#include <string>
#include <vector>

#include "nls/fields.hpp"

namespace nls {

// Truncated power series N(z1, z2) = sum_{k <= a+b <= L} c[a][b] z1^a z2^b / (a! b!).
// c[a][b] is the mixed derivative d^a_{z1} d^b_{z2} N(0, 0).
class NonlinearitySpec {
 public:
  struct Term {
    int a;
    int b;
    cplx value;
  };

  NonlinearitySpec(int k, std::vector<Term> terms, int L = -1, double delta = 1.0, double m0 = -1, double n0 = -1,
                   double c0 = 1.0);

  int k() const { return k_; }
  int L() const { return L_; }
  double delta() const { return delta_; }
  double m0() const { return m0_; }
  double n0() const { return n0_; }
  double c0() const { return c0_; }
  cplx coeff(int a, int b) const;
  const std::vector<Term>& terms() const { return terms_; }

  NonlinearitySpec with_c0(double c0) const;

 private:
  int k_, L_;
  double delta_, m0_, n0_, c0_;
  std::vector<Term> terms_;
  std::vector<std::vector<cplx>> table_;
};

struct SpecValidation {
  bool vanishing_low_order = true;
  bool nonzero_binomial_sum = true;
  bool real_leading_coefficients = true;
  bool growth_exponents = true;
  cplx binomial_sum = 0.0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

SpecValidation validate_spec(const NonlinearitySpec& spec);

// Pointwise series value on raw vectors.
cvec evaluate_values(const NonlinearitySpec& spec, const cvec& h1, const cvec& h2);
// sum_m binom(k, m) c[m][k-m] w^m conj(w)^{k-m}
cvec leading_values(const NonlinearitySpec& spec, const cvec& w);

// If kstar > 0 and the pair lies outside the analyticity disk, a warning is appended.
ComplexField evaluate(const NonlinearitySpec& spec, const ComplexField& h1, const ComplexField& h2,
                      double kstar = 0.0, std::vector<std::string>* warnings = nullptr);
ComplexField leading_term(const NonlinearitySpec& spec, const ComplexField& w);

double binomial(int n, int k);
double factorial(int n);

struct GrowthCheck {
  double max_ratio = 0.0;  // max ||N(h1,h2)||_{H^2} / (||h1||^m0 ||h2||^n0)
  int samples = 0;
  int violations = 0;      // samples with ratio > C0
};

// Random suite inside the disk ||h1||^2 + ||h2||^2 < delta / kstar^2.
GrowthCheck check_growth_bound(const NonlinearitySpec& spec, const GridPtr& grid, double kstar, std::uint64_t seed,
                               int samples = 200);

// C0 fitted from a growth check and inflated.
double calibrate_c0(const NonlinearitySpec& spec, const GridPtr& grid, double kstar, std::uint64_t seed,
                    int samples = 200, double inflation = 1.5);

std::string to_json(const NonlinearitySpec& spec);
NonlinearitySpec spec_from_json(const std::string& text);

}  // namespace nls
