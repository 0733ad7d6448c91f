#include "nls/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nls/errors.hpp"

namespace nls {

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw ConfigError("row width " + std::to_string(row.size()) + " does not match " + schema + " header");
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out = "# schema=" + schema + " v1\n";
  for (const auto& [k, v] : meta) out += "# " + k + "=" + v + "\n";
  for (size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot write " + path.string());
    out << text;
    if (!out) throw NumericalError("cannot write " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw NumericalError("cannot write " + path.string() + ": " + ec.message());
}

namespace {

void grid_meta(CsvTable& t, const Grid& g) {
  t.meta.push_back({"dim", std::to_string(g.dim())});
  t.meta.push_back({"extent", fmt(g.extent()[0]) + (g.dim() == 2 ? " " + fmt(g.extent()[1]) : "")});
  t.meta.push_back({"points", std::to_string(g.points()[0]) + (g.dim() == 2 ? " " + std::to_string(g.points()[1]) : "")});
  t.meta.push_back({"collar", fmt(g.collar_width())});
}

}  // namespace

CsvTable field_table(const ComplexField& f, const std::string& file) {
  const Grid& g = *f.grid;
  CsvTable t;
  t.file = file;
  t.schema = "field";
  grid_meta(t, g);
  t.columns = g.dim() == 2 ? std::vector<std::string>{"index", "x", "y", "re", "im"}
                           : std::vector<std::string>{"index", "x", "re", "im"};
  for (int n = 0; n < g.size(); ++n) {
    auto x = g.coords(n);
    std::vector<std::string> row{std::to_string(n), fmt(x[0])};
    if (g.dim() == 2) row.push_back(fmt(x[1]));
    row.push_back(fmt(f.values[n].real()));
    row.push_back(fmt(f.values[n].imag()));
    t.add(std::move(row));
  }
  return t;
}

CsvTable trajectory_table(const Trajectory& u, int stride, const std::string& file) {
  if (stride < 1) throw ConfigError("trajectory stride must be positive");
  CsvTable t;
  t.file = file;
  t.schema = "trajectory";
  grid_meta(t, *u.grid);
  t.meta.push_back({"stride", std::to_string(stride)});
  t.columns = {"t", "index", "re", "im"};
  for (int j = 0; j < u.samples(); j += stride)
    for (long n = 0; n < u.values.rows(); ++n)
      t.add({fmt(u.times[j]), std::to_string(n), fmt(u.values(n, j).real()), fmt(u.values(n, j).imag())});
  return t;
}

std::string certificate_text(const PicardCertificate& cert) {
  nlohmann::ordered_json j;
  j["schema"] = "picard_certificate v1";
  j["radius"] = cert.radius;
  j["data_norm"] = cert.data_norm;
  j["certified"] = cert.certified;
  j["converged"] = cert.converged;
  j["iterations"] = cert.iterations;
  j["residual"] = cert.residual;
  j["residual_abs"] = cert.residual_abs;
  j["max_factor"] = cert.max_factor();
  auto table = nlohmann::ordered_json::array();
  for (size_t i = 0; i < cert.distances.size(); ++i) {
    nlohmann::ordered_json row;
    row["iteration"] = i + 1;
    row["distance"] = cert.distances[i];
    if (i > 0 && i - 1 < cert.factors.size()) row["factor"] = cert.factors[i - 1];
    table.push_back(row);
  }
  j["table"] = table;
  return j.dump(2) + "\n";
}

CsvTable convergence_table(const ConvergenceReport& r, const std::string& file) {
  CsvTable t;
  t.file = file;
  t.schema = "convergence";
  t.meta = {{"order", std::to_string(r.order)},
            {"reference", r.reference},
            {"fit_points", std::to_string(r.fit_points)},
            {"monotone", fmt(r.monotone)}};
  t.columns = {"epsilon", "error", "fitted_order"};
  for (const auto& row : r.rows) t.add({fmt(row.eps), fmt(row.error), fmt(r.fitted_order)});
  return t;
}

CsvTable ratio_table(const SweepReport& r, CarlemanEstimate e, const std::string& file) {
  CsvTable t;
  t.file = file;
  t.schema = "carleman_ratio";
  t.meta = {{"estimate", to_string(e)}};
  t.columns = {"s", "lambda", "suite_id", "lhs", "rhs", "ratio"};
  for (const auto& row : r.rows)
    if (row.estimate == e)
      t.add({fmt(row.s), fmt(row.lambda), row.suite_id, fmt(row.lhs), fmt(row.rhs), fmt(row.ratio)});
  return t;
}

CsvTable kernel_table(const KernelBoundReport& r, const std::string& file) {
  CsvTable t;
  t.file = file;
  t.schema = "fbi_kernel_bound";
  t.meta = {{"bound", fmt(r.bound)}, {"convention", "unit-mass"}};
  t.columns = {"gamma", "max_scaled", "argmax_zeta"};
  for (const auto& row : r.rows) t.add({fmt(row.gamma), fmt(row.max_scaled), fmt(row.argmax_zeta)});
  return t;
}

CsvTable stability_table(const StabilityReport& r, const std::string& file) {
  CsvTable t;
  t.file = file;
  t.schema = "stability";
  t.meta = {{"mode", r.mode}};
  t.columns = {"member_id", "pert_norm", "delta", "ratio", "pass"};
  for (const auto& row : r.rows) t.add({row.member_id, fmt(row.pert_norm), fmt(row.delta), fmt(row.ratio), fmt(row.pass)});
  return t;
}

CsvTable log_law_table(const PartialDataReport& r, const std::string& file) {
  CsvTable t;
  t.file = file;
  t.schema = "log_law";
  t.meta = {{"mode", r.mode}, {"fraction", fmt(r.fractions.back())}};
  t.columns = {"member_id", "pert_norm", "delta", "ratio", "pass"};
  for (const auto& row : r.rows) {
    bool ok = row.degenerate ? row.pert_norm == 0.0 : row.pert_norm <= r.fitted_c * row.law * (1 + 1e-12);
    t.add({row.member_id, fmt(row.pert_norm), fmt(row.delta), fmt(row.ratio), fmt(ok)});
  }
  return t;
}

CsvTable partial_delta_table(const PartialDataReport& r, const std::string& file) {
  CsvTable t;
  t.file = file;
  t.schema = "partial_deltas";
  t.meta = {{"mode", r.mode}};
  t.columns = {"member_id", "fraction", "delta"};
  for (size_t i = 0; i < r.rows.size(); ++i)
    for (size_t k = 0; k < r.fractions.size(); ++k) t.add({r.rows[i].member_id, fmt(r.fractions[k]), fmt(r.deltas[i][k])});
  return t;
}

}  // namespace nls
