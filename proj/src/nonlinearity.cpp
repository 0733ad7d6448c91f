#include "nls/nonlinearity.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "nls/errors.hpp"
#include "nls/sobolev.hpp"

namespace nls {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return std::round(b);
}

NonlinearitySpec::NonlinearitySpec(int k, std::vector<Term> terms, int L, double delta, double m0, double n0,
                                   double c0)
    : k_(k), L_(L < 0 ? k + 2 : L), delta_(delta), m0_(m0), n0_(n0), c0_(c0), terms_(std::move(terms)) {
  if (k_ < 2) throw ConfigError("nonlinearity order k must exceed 1");
  if (L_ < k_) throw ConfigError("truncation L must be at least k");
  if (!(delta_ > 0.0)) throw ConfigError("analyticity radius delta must be positive");
  if (!(c0_ > 0.0)) throw ConfigError("growth constant C0 must be positive");
  if (m0_ < 0) m0_ = std::ceil(k_ / 2.0);
  if (n0_ < 0) {
    n0_ = k_ - m0_;
    if (m0_ + n0_ <= 1) n0_ += 1;
  }
  table_.assign(L_ + 1, std::vector<cplx>(L_ + 1, 0.0));
  for (const auto& t : terms_) {
    if (t.a < 0 || t.b < 0 || t.a + t.b > L_) throw ConfigError("coefficient index outside the truncation");
    table_[t.a][t.b] += t.value;
  }
}

cplx NonlinearitySpec::coeff(int a, int b) const {
  if (a < 0 || b < 0 || a + b > L_) return 0.0;
  return table_[a][b];
}

NonlinearitySpec NonlinearitySpec::with_c0(double c0) const {
  return NonlinearitySpec(k_, terms_, L_, delta_, m0_, n0_, c0);
}

SpecValidation validate_spec(const NonlinearitySpec& spec) {
  SpecValidation v;
  for (int a = 0; a <= spec.L(); ++a)
    for (int b = 0; a + b <= spec.k() - 1; ++b)
      if (spec.coeff(a, b) != cplx(0.0)) v.vanishing_low_order = false;
  if (!v.vanishing_low_order) v.failures.push_back("low-order coefficients do not vanish");
  int k = spec.k();
  for (int m = 0; m <= k; ++m) {
    cplx c = spec.coeff(m, k - m);
    v.binomial_sum += binomial(k, m) * c;
    if (c.imag() != 0.0) v.real_leading_coefficients = false;
  }
  if (std::abs(v.binomial_sum) == 0.0) {
    v.nonzero_binomial_sum = false;
    v.failures.push_back("binomial sum of order-k coefficients vanishes");
  }
  if (!v.real_leading_coefficients) v.failures.push_back("order-k coefficients are not real");
  if (!(spec.m0() + spec.n0() > 1.0)) {
    v.growth_exponents = false;
    v.failures.push_back("growth exponents must satisfy m0 + n0 > 1");
  }
  return v;
}

cvec evaluate_values(const NonlinearitySpec& spec, const cvec& h1, const cvec& h2) {
  if (h1.size() != h2.size()) throw GridMismatch();
  int L = spec.L();
  std::vector<cvec> p1(L + 1), p2(L + 1);
  p1[0] = cvec::Ones(h1.size());
  p2[0] = cvec::Ones(h2.size());
  for (int a = 1; a <= L; ++a) {
    p1[a] = p1[a - 1].cwiseProduct(h1);
    p2[a] = p2[a - 1].cwiseProduct(h2);
  }
  cvec out = cvec::Zero(h1.size());
  for (int a = 0; a <= L; ++a)
    for (int b = 0; a + b <= L; ++b) {
      cplx c = spec.coeff(a, b);
      if (c == cplx(0.0)) continue;
      out += (c / (factorial(a) * factorial(b))) * p1[a].cwiseProduct(p2[b]);
    }
  return out;
}

cvec leading_values(const NonlinearitySpec& spec, const cvec& w) {
  int k = spec.k();
  cvec wb = w.conjugate();
  cvec out = cvec::Zero(w.size());
  for (int m = 0; m <= k; ++m) {
    cplx c = spec.coeff(m, k - m);
    if (c == cplx(0.0)) continue;
    cvec term = cvec::Constant(w.size(), binomial(k, m) * c);
    for (int i = 0; i < m; ++i) term = term.cwiseProduct(w);
    for (int i = 0; i < k - m; ++i) term = term.cwiseProduct(wb);
    out += term;
  }
  return out;
}

ComplexField evaluate(const NonlinearitySpec& spec, const ComplexField& h1, const ComplexField& h2, double kstar,
                      std::vector<std::string>* warnings) {
  if (h1.grid && h2.grid) require_same_grid(*h1.grid, *h2.grid);
  if (kstar > 0.0 && warnings && h1.grid) {
    const SobolevNorm& sob = h1.grid->sobolev();
    double n1 = sob.norm(h1.values, 2), n2 = sob.norm(h2.values, 2);
    if (n1 * n1 + n2 * n2 >= spec.delta() / (kstar * kstar))
      warnings->push_back("arguments lie outside the analyticity disk");
  }
  return {h1.grid, evaluate_values(spec, h1.values, h2.values)};
}

ComplexField leading_term(const NonlinearitySpec& spec, const ComplexField& w) {
  return {w.grid, leading_values(spec, w.values)};
}

GrowthCheck check_growth_bound(const NonlinearitySpec& spec, const GridPtr& grid, double kstar, std::uint64_t seed,
                               int samples) {
  Rng rng(seed);
  const SobolevNorm& sob = grid->sobolev();
  GrowthCheck out;
  double disk = std::sqrt(spec.delta()) / kstar;
  int modes = grid->dim() == 1 ? 8 : 5;
  for (int s = 0; s < samples; ++s) {
    double decay = 1.0 + 2.0 * rng.uniform();
    cvec h1 = random_complex_sine_sum(*grid, rng, modes, decay);
    cvec h2 = random_complex_sine_sum(*grid, rng, modes, decay);
    double rho = disk * (0.05 + 0.9 * rng.uniform());
    double ang = 0.5 * M_PI * (0.05 + 0.9 * rng.uniform());
    h1 *= rho * std::cos(ang) / sob.norm(h1, 2);
    h2 *= rho * std::sin(ang) / sob.norm(h2, 2);
    double den = std::pow(sob.norm(h1, 2), spec.m0()) * std::pow(sob.norm(h2, 2), spec.n0());
    double ratio = sob.norm(evaluate_values(spec, h1, h2), 2) / den;
    out.max_ratio = std::max(out.max_ratio, ratio);
    if (ratio > spec.c0()) ++out.violations;
    ++out.samples;
  }
  return out;
}

double calibrate_c0(const NonlinearitySpec& spec, const GridPtr& grid, double kstar, std::uint64_t seed, int samples,
                    double inflation) {
  return check_growth_bound(spec, grid, kstar, seed, samples).max_ratio * inflation;
}

std::string to_json(const NonlinearitySpec& spec) {
  nlohmann::json j;
  j["k"] = spec.k();
  j["L"] = spec.L();
  j["delta"] = spec.delta();
  j["m0"] = spec.m0();
  j["n0"] = spec.n0();
  j["C0"] = spec.c0();
  nlohmann::json coeffs = nlohmann::json::array();
  for (int a = 0; a <= spec.L(); ++a)
    for (int b = 0; a + b <= spec.L(); ++b) {
      cplx c = spec.coeff(a, b);
      if (c == cplx(0.0)) continue;
      if (c.imag() == 0.0)
        coeffs.push_back({a, b, c.real()});
      else
        coeffs.push_back({a, b, nlohmann::json::array({c.real(), c.imag()})});
    }
  j["coeffs"] = coeffs;
  return j.dump(2);
}

NonlinearitySpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("nonlinearity: ") + e.what());
  }
  try {
    std::vector<NonlinearitySpec::Term> terms;
    for (const auto& c : j.at("coeffs")) {
      if (!c.is_array() || c.size() != 3) throw ConfigError("nonlinearity.coeffs entries must be [a, b, value]");
      cplx v = c[2].is_array() ? cplx(c[2].at(0).get<double>(), c[2].at(1).get<double>()) : cplx(c[2].get<double>());
      terms.push_back({c[0].get<int>(), c[1].get<int>(), v});
    }
    return NonlinearitySpec(j.at("k").get<int>(), terms, j.value("L", -1), j.value("delta", 1.0),
                            j.value("m0", -1.0), j.value("n0", -1.0), j.value("C0", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("nonlinearity: ") + e.what());
  }
}

}  // namespace nls
