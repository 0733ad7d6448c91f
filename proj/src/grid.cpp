#include "nls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nls/errors.hpp"
#include "nls/sobolev.hpp"

namespace nls {

Grid::Grid(int dim, std::array<double, 2> extent, std::array<int, 2> points, double collar_width)
    : dim_(dim), extent_(extent), points_(points), collar_width_(collar_width) {
  if (dim != 1 && dim != 2) throw ConfigError("dim must be 1 or 2");
  if (dim == 1) {
    extent_[1] = 1.0;
    points_[1] = 1;
  }
  for (int a = 0; a < dim; ++a)
    if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a])) throw ConfigError("extent must be positive");
  double min_extent = dim == 1 ? extent_[0] : std::min(extent_[0], extent_[1]);
  if (!(collar_width > 0.0)) throw ConfigError("collar width must be positive");
  if (collar_width >= 0.5 * min_extent) throw ConfigError("collar covers the domain");
  for (int a = 0; a < dim; ++a)
    if (points_[a] < 8) throw ConfigError("at least 8 interior points per axis are required");

  for (int a = 0; a < dim; ++a) spacing_[a] = extent_[a] / (points_[a] + 1);
  if (dim == 1) spacing_[1] = 1.0;

  collar_.assign(size(), 0);
  for (int n = 0; n < size(); ++n) collar_[n] = boundary_distance(n) <= collar_width_ + 1e-12 ? 1 : 0;

  if (dim == 1) {
    int nx = points_[0];
    BoundaryNode left;
    left.face = 0;
    left.lattice = {0, 0};
    left.pos = {0.0, 0.0};
    left.normal = {-1.0, 0.0};
    left.inward = {0, 1};
    BoundaryNode right;
    right.face = 1;
    right.lattice = {nx + 1, 0};
    right.pos = {extent_[0], 0.0};
    right.normal = {1.0, 0.0};
    right.inward = {nx - 1, nx - 2};
    boundary_ = {left, right};
    return;
  }

  int nx = points_[0], ny = points_[1];
  double hx = spacing_[0], hy = spacing_[1];
  auto interior = [&](int ei, int ej) {
    if (ei < 1 || ei > nx || ej < 1 || ej > ny) return -1;
    return index(ei - 1, ej - 1);
  };
  // faces x = 0 and x = Lx run along y
  for (int face = 0; face < 2; ++face) {
    int ei = face == 0 ? 0 : nx + 1;
    int step = face == 0 ? 1 : -1;
    for (int ej = 0; ej <= ny + 1; ++ej) {
      BoundaryNode b;
      b.face = face;
      b.lattice = {ei, ej};
      b.pos = {ei * hx, ej * hy};
      b.normal = {face == 0 ? -1.0 : 1.0, 0.0};
      b.weight = (ej == 0 || ej == ny + 1) ? 0.5 * hy : hy;
      b.inward = {interior(ei + step, ej), interior(ei + 2 * step, ej)};
      boundary_.push_back(b);
    }
  }
  for (int face = 2; face < 4; ++face) {
    int ej = face == 2 ? 0 : ny + 1;
    int step = face == 2 ? 1 : -1;
    for (int ei = 0; ei <= nx + 1; ++ei) {
      BoundaryNode b;
      b.face = face;
      b.lattice = {ei, ej};
      b.pos = {ei * hx, ej * hy};
      b.normal = {0.0, face == 2 ? -1.0 : 1.0};
      b.weight = (ei == 0 || ei == nx + 1) ? 0.5 * hx : hx;
      b.inward = {interior(ei, ej + step), interior(ei, ej + 2 * step)};
      boundary_.push_back(b);
    }
  }
}

Grid::~Grid() = default;

double Grid::cell_volume() const { return dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1]; }

std::array<int, 2> Grid::lattice(int idx) const { return {idx % points_[0], idx / points_[0]}; }

std::array<double, 2> Grid::coords(int idx) const {
  auto l = lattice(idx);
  if (dim_ == 1) return {(l[0] + 1) * spacing_[0], 0.0};
  return {(l[0] + 1) * spacing_[0], (l[1] + 1) * spacing_[1]};
}

double Grid::boundary_distance(int idx) const {
  auto x = coords(idx);
  double d = std::min(x[0], extent_[0] - x[0]);
  if (dim_ == 2) d = std::min({d, x[1], extent_[1] - x[1]});
  return d;
}

std::array<int, 2> Grid::padded_points() const {
  return {points_[0] + 2, dim_ == 1 ? 1 : points_[1] + 2};
}

int Grid::padded_size() const {
  auto p = padded_points();
  return p[0] * p[1];
}

bool Grid::same_geometry(const Grid& o) const {
  if (this == &o) return true;
  return dim_ == o.dim_ && points_ == o.points_ && extent_ == o.extent_ && collar_width_ == o.collar_width_;
}

const SobolevNorm& Grid::sobolev() const {
  std::call_once(sobolev_once_, [this] { sobolev_ = std::make_unique<SobolevNorm>(*this); });
  return *sobolev_;
}

GridPtr build_grid(int dim, std::array<double, 2> extent, std::array<int, 2> points, double collar_width) {
  return std::make_shared<const Grid>(dim, extent, points, collar_width);
}

void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_geometry(b)) throw GridMismatch();
}

}  // namespace nls
