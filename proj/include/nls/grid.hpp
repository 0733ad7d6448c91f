#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <vector>

namespace nls {

class SobolevNorm;

// One entry per (boundary lattice node, face). Corners appear on both faces.
struct BoundaryNode {
  int face = 0;                       // 0: x=0, 1: x=Lx, 2: y=0, 3: y=Ly
  std::array<int, 2> lattice{};       // position on the padded lattice
  std::array<double, 2> pos{};
  std::array<double, 2> normal{};     // outward unit normal of the face
  double weight = 1.0;                // surface quadrature weight
  std::array<int, 2> inward{-1, -1};  // interior indices at h and 2h along -normal, -1 if on the boundary
};

// Uniform tensor grid on an interval or rectangle. Unknowns live on interior
// nodes; boundary values are zero.
class Grid {
 public:
  Grid(int dim, std::array<double, 2> extent, std::array<int, 2> points, double collar_width);
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;
  ~Grid();

  int dim() const { return dim_; }
  int size() const { return points_[0] * points_[1]; }
  const std::array<double, 2>& extent() const { return extent_; }
  const std::array<int, 2>& points() const { return points_; }
  const std::array<double, 2>& spacing() const { return spacing_; }
  double collar_width() const { return collar_width_; }
  double cell_volume() const;

  int index(int i, int j = 0) const { return i + points_[0] * j; }
  std::array<int, 2> lattice(int idx) const;
  std::array<double, 2> coords(int idx) const;
  // Distance from a node to the boundary of the box.
  double boundary_distance(int idx) const;

  bool in_collar(int idx) const { return collar_[idx] != 0; }
  const std::vector<char>& collar() const { return collar_; }
  const std::vector<BoundaryNode>& boundary() const { return boundary_; }

  // Padded lattice, interior plus one layer of boundary nodes.
  std::array<int, 2> padded_points() const;
  int padded_size() const;
  int padded_index(int ei, int ej) const { return ei + padded_points()[0] * ej; }

  bool same_geometry(const Grid& other) const;

  const SobolevNorm& sobolev() const;

 private:
  int dim_;
  std::array<double, 2> extent_;
  std::array<int, 2> points_;
  std::array<double, 2> spacing_{};
  double collar_width_;
  std::vector<char> collar_;
  std::vector<BoundaryNode> boundary_;
  mutable std::once_flag sobolev_once_;
  mutable std::unique_ptr<SobolevNorm> sobolev_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(int dim, std::array<double, 2> extent, std::array<int, 2> points, double collar_width);

void require_same_grid(const Grid& a, const Grid& b);

}  // namespace nls
