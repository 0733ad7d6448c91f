#include "nls/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nls/errors.hpp"

namespace nls {

using json = nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

enum class Kind { number, integer, boolean, string, numbers, strings, point, selection, profile, members };

struct Param {
  std::string key;
  Kind kind;
  json fallback;  // null means required
};

const std::vector<Param>& generator_params(const std::string& name) {
  static const std::vector<Param> zero_p{};
  static const std::vector<Param> constant_p{{"value", Kind::number, nullptr}};
  static const std::vector<Param> mode_p{
      {"m", Kind::integer, nullptr}, {"n", Kind::integer, 1}, {"amplitude", Kind::number, 1.0}};
  static const std::vector<Param> bump_p{
      {"center", Kind::point, nullptr}, {"half_width", Kind::point, nullptr}, {"amplitude", Kind::number, 1.0}};
  static const std::vector<Param> random_p{{"modes", Kind::integer, 4},
                                           {"decay", Kind::number, 2.0},
                                           {"amplitude", Kind::number, 1.0},
                                           {"stream", Kind::integer, 0}};
  if (name == "zero") return zero_p;
  if (name == "constant") return constant_p;
  if (name == "sine_mode") return mode_p;
  if (name == "sine_bump") return bump_p;
  return random_p;
}

const std::vector<Param>& operation_params(const std::string& op) {
  static const std::vector<Param> solve{{"nonlinear", Kind::boolean, true},
                                        {"symmetric", Kind::boolean, false},
                                        {"stride", Kind::integer, 1},
                                        {"c1_samples", Kind::integer, 8},
                                        {"banach_samples", Kind::integer, 200}};
  static const std::vector<Param> linearize{{"order", Kind::integer, 1},
                                            {"ladder", Kind::numbers, json::array({0.1, 0.05, 0.025, 0.0125})}};
  static const std::vector<Param> carleman{{"x0", Kind::point, nullptr},
                                           {"lambda", Kind::number, 0.0},
                                           {"T1", Kind::number, 0.0},
                                           {"s_candidates", Kind::numbers, json::array({8.0, 16.0, 32.0, 64.0})},
                                           {"estimates", Kind::strings, json::array({"full", "interior"})},
                                           {"collar_inner", Kind::number, 0.0},
                                           {"collar_outer", Kind::number, 0.0},
                                           {"energy_perturbation", Kind::profile, json::array()}};
  static const std::vector<Param> fbi{{"gammas", Kind::numbers, json::array({50.0, 100.0, 400.0})},
                                      {"zeta_points", Kind::integer, 2001},
                                      {"bound", Kind::number, 0.5},
                                      {"gamma", Kind::number, 100.0},
                                      {"T0", Kind::number, 0.0},
                                      {"taus", Kind::numbers, json::array({0.0, 0.1})},
                                      {"times", Kind::numbers, json::array({-0.5, 0.0, 0.5})}};
  static const std::vector<Param> recover{{"selection", Kind::selection, nullptr},
                                          {"gamma_minus", Kind::number, 0.0},
                                          {"gamma_plus", Kind::number, 0.0},
                                          {"amplitude", Kind::number, 0.02},
                                          {"members", Kind::members, json::array()},
                                          {"full_path", Kind::boolean, false},
                                          {"full_eps", Kind::number, 1e-3},
                                          {"agreement_tol", Kind::number, 0.05}};
  static const std::vector<Param> partial{{"mode", Kind::string, "q"},
                                          {"selection", Kind::selection, nullptr},
                                          {"gamma_minus", Kind::number, 0.0},
                                          {"gamma_plus", Kind::number, 0.0},
                                          {"amplitude", Kind::number, 0.02},
                                          {"members", Kind::members, json::array()},
                                          {"fractions", Kind::numbers, json::array({1.0, 0.75, 0.5, 0.25})},
                                          {"gammas", Kind::numbers, json::array({10.0, 20.0, 40.0})}};
  if (op == "solve") return solve;
  if (op == "linearize") return linearize;
  if (op == "carleman-check") return carleman;
  if (op == "fbi-check") return fbi;
  if (op == "partial-data") return partial;
  return recover;
}

class Checker {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  void unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }

  json value(const json& v, Kind kind, const std::string& path, int dim) {
    switch (kind) {
      case Kind::number:
        if (!v.is_number()) return bad(path, "expected a number");
        if (!std::isfinite(v.get<double>())) return bad(path, "must be finite");
        return v.get<double>();
      case Kind::integer:
        if (!v.is_number_integer()) return bad(path, "expected an integer");
        return v.get<long long>();
      case Kind::boolean:
        if (!v.is_boolean()) return bad(path, "expected true or false");
        return v;
      case Kind::string:
        if (!v.is_string()) return bad(path, "expected a string");
        return v;
      case Kind::numbers: {
        if (!v.is_array()) return bad(path, "expected a list of numbers");
        json out = json::array();
        for (size_t i = 0; i < v.size(); ++i) out.push_back(value(v[i], Kind::number, path + "[" + std::to_string(i) + "]", dim));
        return out;
      }
      case Kind::strings: {
        if (!v.is_array()) return bad(path, "expected a list of strings");
        for (size_t i = 0; i < v.size(); ++i)
          if (!v[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "expected a string");
        return v;
      }
      case Kind::point: {
        if (!v.is_array() || (v.size() != 1 && v.size() != 2)) return bad(path, "expected [x] or [x, y]");
        json out = json::array();
        for (size_t i = 0; i < v.size(); ++i) out.push_back(value(v[i], Kind::number, path + "[" + std::to_string(i) + "]", dim));
        if (out.size() == 1) out.push_back(0.0);
        return out;
      }
      case Kind::selection: return selection(v, path, dim);
      case Kind::profile: return profile(v, path, dim);
      case Kind::members: {
        if (!v.is_array()) return bad(path, "expected a list of members");
        json out = json::array();
        for (size_t i = 0; i < v.size(); ++i) {
          std::string p = path + "[" + std::to_string(i) + "]";
          if (!v[i].is_object()) {
            fail(p, "expected an object with id and profile");
            continue;
          }
          unknown_keys(v[i], {"id", "profile"}, p);
          json m;
          m["id"] = v[i].contains("id") ? value(v[i]["id"], Kind::string, p + ".id", dim) : bad(p + ".id", "missing");
          m["profile"] = v[i].contains("profile") ? profile(v[i]["profile"], p + ".profile", dim)
                                                   : bad(p + ".profile", "missing");
          out.push_back(m);
        }
        return out;
      }
    }
    return nullptr;
  }

  json params(const json& obj, const std::vector<Param>& spec, const std::string& path, int dim,
              const std::set<std::string>& extra = {}) {
    std::set<std::string> allowed = extra;
    for (const auto& p : spec) allowed.insert(p.key);
    unknown_keys(obj, allowed, path);
    json out = json::object();
    for (const auto& p : spec) {
      std::string kp = path + "." + p.key;
      if (obj.contains(p.key))
        out[p.key] = value(obj[p.key], p.kind, kp, dim);
      else if (p.fallback.is_null())
        fail(kp, "missing");
      else
        out[p.key] = p.fallback;
    }
    return out;
  }

  json profile(const json& v, const std::string& path, int dim) {
    json terms = v.is_object() ? json::array({v}) : v;
    if (!terms.is_array()) return bad(path, "expected a generator object or a list of them");
    json out = json::array();
    for (size_t i = 0; i < terms.size(); ++i) {
      std::string p = terms.size() == 1 && v.is_object() ? path : path + "[" + std::to_string(i) + "]";
      const json& t = terms[i];
      if (!t.is_object() || !t.contains("generator") || !t["generator"].is_string()) {
        fail(p + ".generator", "missing");
        continue;
      }
      std::string name = t["generator"].get<std::string>();
      const auto& names = generator_names();
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        fail(p + ".generator", "unknown generator '" + name + "'");
        continue;
      }
      json g = params(t, generator_params(name), p, dim, {"generator"});
      g["generator"] = name;
      out.push_back(g);
    }
    return out;
  }

  json selection(const json& v, const std::string& path, int dim) {
    if (!v.is_object() || !v.contains("mode") || !v["mode"].is_string()) return bad(path + ".mode", "missing");
    std::string mode = v["mode"].get<std::string>();
    json out;
    out["mode"] = mode;
    if (mode == "gamma0") {
      unknown_keys(v, {"mode", "x0"}, path);
      out["x0"] = v.contains("x0") ? value(v["x0"], Kind::point, path + ".x0", dim) : bad(path + ".x0", "missing");
    } else if (mode == "explicit") {
      unknown_keys(v, {"mode", "nodes"}, path);
      if (!v.contains("nodes") || !v["nodes"].is_array() || v["nodes"].empty()) return bad(path + ".nodes", "expected a non-empty list");
      for (size_t i = 0; i < v["nodes"].size(); ++i)
        if (!v["nodes"][i].is_number_integer()) fail(path + ".nodes[" + std::to_string(i) + "]", "expected an integer");
      out["nodes"] = v["nodes"];
    } else {
      fail(path + ".mode", "expected gamma0 or explicit");
    }
    return out;
  }

 private:
  json bad(const std::string& path, const std::string& what) {
    fail(path, what);
    return nullptr;
  }
};

template <class T>
T read(Checker& ck, const json& obj, const std::string& key, const std::string& path, T fallback, Kind kind) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  json v = ck.value(obj[key], kind, path + "." + key, 1);
  if (v.is_null()) return fallback;
  return v.get<T>();
}

void check_operation_values(Checker& ck, const Manifest& m) {
  const json& p = m.experiment.params;
  std::string base = "experiment.params";
  auto positive = [&](const char* key) {
    if (p.contains(key) && p[key].is_number() && !(p[key].get<double>() > 0.0)) ck.fail(base + "." + key, "must be positive");
  };
  auto positive_list = [&](const char* key) {
    if (!p.contains(key) || !p[key].is_array()) return;
    if (p[key].empty()) ck.fail(base + "." + key, "must not be empty");
    for (const auto& v : p[key])
      if (v.is_number() && !(v.get<double>() > 0.0)) {
        ck.fail(base + "." + key, "entries must be positive");
        break;
      }
  };
  const std::string& op = m.experiment.operation;
  if (op == "solve") {
    positive("stride");
    positive("c1_samples");
    positive("banach_samples");
  } else if (op == "linearize") {
    if (p.contains("order") && p["order"].is_number_integer()) {
      long long o = p["order"].get<long long>();
      if (o < 1 || o > 8) ck.fail(base + ".order", "must lie in 1..8");
    }
    positive_list("ladder");
  } else if (op == "carleman-check") {
    positive_list("s_candidates");
    if (p.contains("estimates") && p["estimates"].is_array()) {
      if (p["estimates"].empty()) ck.fail(base + ".estimates", "must not be empty");
      for (const auto& e : p["estimates"])
        if (e.is_string() && e != "full" && e != "interior") ck.fail(base + ".estimates", "entries must be full or interior");
    }
    for (const char* k : {"lambda", "T1", "collar_inner", "collar_outer"})
      if (p.contains(k) && p[k].is_number() && p[k].get<double>() < 0.0) ck.fail(base + "." + k, "must not be negative");
  } else if (op == "fbi-check") {
    positive_list("gammas");
    positive("gamma");
    positive("bound");
    if (p.contains("zeta_points") && p["zeta_points"].is_number_integer() && p["zeta_points"].get<long long>() < 2)
      ck.fail(base + ".zeta_points", "must be at least 2");
    if (p.contains("T0") && p["T0"].is_number() && p["T0"].get<double>() < 0.0) ck.fail(base + ".T0", "must not be negative");
  } else {
    positive("amplitude");
    if (op == "partial-data") {
      if (p.contains("mode") && p["mode"].is_string() && p["mode"] != "p" && p["mode"] != "q")
        ck.fail(base + ".mode", "expected p or q");
      positive_list("gammas");
      if (p.contains("fractions") && p["fractions"].is_array()) {
        const auto& fr = p["fractions"];
        if (fr.empty()) ck.fail(base + ".fractions", "must not be empty");
        for (size_t i = 0; i < fr.size(); ++i) {
          if (!fr[i].is_number()) continue;
          double v = fr[i].get<double>();
          if (!(v > 0.0 && v <= 1.0)) ck.fail(base + ".fractions[" + std::to_string(i) + "]", "must lie in (0, 1]");
          if (i > 0 && fr[i - 1].is_number() && !(v < fr[i - 1].get<double>()))
            ck.fail(base + ".fractions", "must decrease");
        }
        if (!fr.empty() && fr.back().is_number() && !(fr.back().get<double>() < 1.0))
          ck.fail(base + ".fractions", "last entry must be below 1");
      }
      if (p.contains("selection") && p["selection"].is_object() && p["selection"].value("mode", "") != "gamma0")
        ck.fail(base + ".selection.mode", "partial-data needs a gamma0 selection");
    }
  }
}

}  // namespace

ManifestError::ManifestError(std::vector<std::string> errors)
    : ConfigError("invalid manifest:\n  " + join(errors, "\n  ")), errors_(std::move(errors)) {}

const std::vector<std::string>& operations() {
  static const std::vector<std::string> ops{"solve",     "linearize", "carleman-check", "fbi-check",
                                            "recover-p", "recover-q", "partial-data"};
  return ops;
}

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"zero", "constant", "sine_mode", "sine_bump", "random_sine_sum"};
  return names;
}

Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError({std::string("manifest: ") + e.what()});
  }
  if (!root.is_object()) throw ManifestError({"manifest: expected an object"});
  Checker ck;
  Manifest m;
  m.base_dir = base_dir;
  ck.unknown_keys(root, {"domain", "coefficients", "nonlinearity", "solver", "experiment", "seed"}, "");
  for (const char* k : {"domain", "experiment", "seed"})
    if (!root.contains(k)) ck.fail(k, "missing");

  // domain
  if (root.contains("domain")) {
    const json& d = root["domain"];
    if (!d.is_object()) {
      ck.fail("domain", "expected an object");
    } else {
      ck.unknown_keys(d, {"dim", "extent", "points", "collar"}, "domain");
      for (const char* k : {"dim", "extent", "points", "collar"})
        if (!d.contains(k)) ck.fail(std::string("domain.") + k, "missing");
      m.domain.dim = read<int>(ck, d, "dim", "domain", 1, Kind::integer);
      if (m.domain.dim != 1 && m.domain.dim != 2) {
        ck.fail("domain.dim", "must be 1 or 2");
        m.domain.dim = 1;
      }
      int dim = m.domain.dim;
      if (d.contains("extent")) {
        const json& e = d["extent"];
        if (!e.is_array() || static_cast<int>(e.size()) != dim) {
          ck.fail("domain.extent", "expected " + std::to_string(dim) + " numbers");
        } else {
          for (int i = 0; i < dim; ++i) {
            if (!e[i].is_number() || !(e[i].get<double>() > 0.0))
              ck.fail("domain.extent[" + std::to_string(i) + "]", "must be a positive number");
            else
              m.domain.extent[i] = e[i].get<double>();
          }
        }
      }
      if (d.contains("points")) {
        const json& p = d["points"];
        if (!p.is_array() || static_cast<int>(p.size()) != dim) {
          ck.fail("domain.points", "expected " + std::to_string(dim) + " integers");
        } else {
          for (int i = 0; i < dim; ++i) {
            if (!p[i].is_number_integer() || p[i].get<long long>() < 8 || p[i].get<long long>() > 4095)
              ck.fail("domain.points[" + std::to_string(i) + "]", "must be an integer in 8..4095");
            else
              m.domain.points[i] = p[i].get<int>();
          }
        }
      }
      if (dim == 1) {
        m.domain.extent[1] = 0.0;
        m.domain.points[1] = 0;
      }
      m.domain.collar = read<double>(ck, d, "collar", "domain", 0.1, Kind::number);
      double half = 0.5 * (dim == 2 ? std::min(m.domain.extent[0], m.domain.extent[1]) : m.domain.extent[0]);
      if (!(m.domain.collar > 0.0 && m.domain.collar < half)) ck.fail("domain.collar", "must lie in (0, extent/2)");
    }
  }
  int dim = m.domain.dim;

  // coefficients
  if (root.contains("coefficients")) {
    const json& c = root["coefficients"];
    if (!c.is_object()) {
      ck.fail("coefficients", "expected an object");
    } else {
      ck.unknown_keys(c, {"p", "q", "f"}, "coefficients");
      auto prof = [&](const char* k, Profile& out) {
        if (!c.contains(k)) return;
        json v = ck.profile(c[k], std::string("coefficients.") + k, dim);
        if (v.is_array())
          for (auto& t : v) out.push_back(t);
      };
      prof("p", m.p);
      prof("q", m.q);
      prof("f", m.f);
    }
  }

  // nonlinearity
  if (root.contains("nonlinearity")) {
    const json& n = root["nonlinearity"];
    if (!n.is_object()) {
      ck.fail("nonlinearity", "expected an object");
    } else if (n.contains("file")) {
      ck.unknown_keys(n, {"file"}, "nonlinearity");
      if (!n["file"].is_string()) ck.fail("nonlinearity.file", "expected a path");
      m.nonlinearity = n;
    } else {
      ck.unknown_keys(n, {"k", "L", "delta", "m0", "n0", "C0", "coeffs"}, "nonlinearity");
      try {
        m.nonlinearity = json::parse(to_json(spec_from_json(n.dump())));
      } catch (const ConfigError& e) {
        ck.fail("nonlinearity", e.what());
      }
    }
  }
  if (m.nonlinearity.is_null()) m.nonlinearity = json::parse(to_json(NonlinearitySpec(2, {{1, 1, 1.0}})));
  if (m.nonlinearity.contains("file")) {
    try {
      load_nonlinearity(m);
    } catch (const ConfigError& e) {
      ck.fail("nonlinearity.file", e.what());
    }
  }

  // solver
  if (root.contains("solver")) {
    const json& s = root["solver"];
    if (!s.is_object()) {
      ck.fail("solver", "expected an object");
    } else {
      ck.unknown_keys(s, {"T", "dt", "quadrature", "picard_tol", "picard_max_iter"}, "solver");
      m.solver.T = read<double>(ck, s, "T", "solver", m.solver.T, Kind::number);
      m.solver.dt = read<double>(ck, s, "dt", "solver", m.solver.dt, Kind::number);
      m.solver.quadrature = read<std::string>(ck, s, "quadrature", "solver", m.solver.quadrature, Kind::string);
      m.solver.picard_tol = read<double>(ck, s, "picard_tol", "solver", m.solver.picard_tol, Kind::number);
      m.solver.picard_max_iter = read<int>(ck, s, "picard_max_iter", "solver", m.solver.picard_max_iter, Kind::integer);
      if (!(m.solver.T > 0.0)) ck.fail("solver.T", "must be positive");
      if (!(m.solver.dt > 0.0 && m.solver.dt <= m.solver.T)) ck.fail("solver.dt", "must lie in (0, T]");
      if (m.solver.quadrature != "trapezoid") ck.fail("solver.quadrature", "only trapezoid is supported");
      if (!(m.solver.picard_tol > 0.0)) ck.fail("solver.picard_tol", "must be positive");
      if (m.solver.picard_max_iter < 1) ck.fail("solver.picard_max_iter", "must be at least 1");
    }
  }

  // experiment
  if (root.contains("experiment")) {
    const json& e = root["experiment"];
    if (!e.is_object()) {
      ck.fail("experiment", "expected an object");
    } else {
      ck.unknown_keys(e, {"operation", "output", "params"}, "experiment");
      if (!e.contains("operation") || !e["operation"].is_string()) {
        ck.fail("experiment.operation", "missing");
      } else {
        m.experiment.operation = e["operation"].get<std::string>();
        const auto& ops = operations();
        if (std::find(ops.begin(), ops.end(), m.experiment.operation) == ops.end()) {
          ck.fail("experiment.operation", "unknown operation '" + m.experiment.operation + "'");
        } else {
          json params = e.contains("params") ? e["params"] : json::object();
          if (!params.is_object()) {
            ck.fail("experiment.params", "expected an object");
            params = json::object();
          }
          m.experiment.params = ck.params(params, operation_params(m.experiment.operation), "experiment.params", dim);
          check_operation_values(ck, m);
        }
      }
      m.experiment.output = read<std::string>(ck, e, "output", "experiment", "out/" + m.experiment.operation, Kind::string);
    }
  }

  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned())
      ck.fail("seed", "expected a non-negative integer");
    else
      m.seed = root["seed"].get<std::uint64_t>();
  }
  if (!ck.errors.empty()) throw ManifestError(ck.errors);
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError({"manifest: cannot read " + path.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

namespace {

json to_tree(const Manifest& m) {
  json root;
  json d;
  d["dim"] = m.domain.dim;
  d["extent"] = json::array();
  d["points"] = json::array();
  for (int i = 0; i < m.domain.dim; ++i) {
    d["extent"].push_back(m.domain.extent[i]);
    d["points"].push_back(m.domain.points[i]);
  }
  d["collar"] = m.domain.collar;
  root["domain"] = d;
  json c;
  c["p"] = json(m.p);
  c["q"] = json(m.q);
  c["f"] = json(m.f);
  root["coefficients"] = c;
  root["nonlinearity"] = m.nonlinearity;
  json s;
  s["T"] = m.solver.T;
  s["dt"] = m.solver.dt;
  s["quadrature"] = m.solver.quadrature;
  s["picard_tol"] = m.solver.picard_tol;
  s["picard_max_iter"] = m.solver.picard_max_iter;
  root["solver"] = s;
  json e;
  e["operation"] = m.experiment.operation;
  e["output"] = m.experiment.output;
  e["params"] = m.experiment.params.is_null() ? json::object() : m.experiment.params;
  root["experiment"] = e;
  root["seed"] = m.seed;
  return root;
}

}  // namespace

std::string serialize(const Manifest& m) { return to_tree(m).dump(2) + "\n"; }

std::string serialize_compact(const Manifest& m) { return to_tree(m).dump(); }

rvec evaluate_profile(const Grid& g, const Profile& profile, std::uint64_t seed) {
  rvec out = rvec::Zero(g.size());
  for (const auto& t : profile) {
    std::string name = t.at("generator").get<std::string>();
    if (name == "zero") continue;
    if (name == "constant") {
      out.array() += t.at("value").get<double>();
    } else if (name == "sine_mode") {
      out += t.at("amplitude").get<double>() * sine_mode(g, t.at("m").get<int>(), t.at("n").get<int>());
    } else if (name == "sine_bump") {
      auto c = t.at("center").get<std::array<double, 2>>();
      auto w = t.at("half_width").get<std::array<double, 2>>();
      if (g.dim() == 1) w[1] = 1.0;
      out += sine_bump(g, c, w, t.at("amplitude").get<double>());
    } else if (name == "random_sine_sum") {
      std::uint64_t stream = t.at("stream").get<std::uint64_t>();
      Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
      out += t.at("amplitude").get<double>() *
             random_sine_sum(g, rng, t.at("modes").get<int>(), t.at("decay").get<double>());
    } else {
      throw ConfigError("unknown generator '" + name + "'");
    }
  }
  return out;
}

NonlinearitySpec load_nonlinearity(const Manifest& m) {
  if (!m.nonlinearity.contains("file")) return spec_from_json(m.nonlinearity.dump());
  std::filesystem::path p = m.nonlinearity["file"].get<std::string>();
  if (p.is_relative()) p = m.base_dir / p;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

Problem build_problem(const Manifest& m) {
  Problem pr;
  pr.grid = build_grid(m.domain.dim, m.domain.extent, m.domain.points, m.domain.collar);
  pr.p = PotentialField{pr.grid, evaluate_profile(*pr.grid, m.p, m.seed), "p"};
  pr.q = PotentialField{pr.grid, evaluate_profile(*pr.grid, m.q, m.seed), "q"};
  pr.f = ComplexField{pr.grid, evaluate_profile(*pr.grid, m.f, m.seed).cast<cplx>()};
  pr.spec = load_nonlinearity(m);
  pr.cfg.T = m.solver.T;
  pr.cfg.dt = m.solver.dt;
  pr.cfg.quadrature = m.solver.quadrature;
  pr.cfg.picard_tol = m.solver.picard_tol;
  pr.cfg.picard_max_iter = m.solver.picard_max_iter;
  return pr;
}

}  // namespace nls
