#pragma once

#include <array>
#include <span>
#include <vector>

#include "fragfem/geometry.hpp"
#include "fragfem/quadrature.hpp"

namespace fragfem {

struct DomainBox {
  int dim = 2;
  Point lower{0.0, 0.0, 0.0};
  Point upper{1.0, 1.0, 1.0};

  double measure() const;
  bool contains(const Point& x, double tol = 0.0) const;
  void validate() const;
};

enum class Grading { Uniform, Geometric };

struct GridSpec {
  std::array<int, 3> cells{1, 1, 1};
  Grading grading = Grading::Uniform;
};

using Index3 = std::array<int, 3>;

/// Structured simplicial mesh of a box. Each tensor cell is split into the
/// dim! Kuhn simplices {xi_p(0) >= xi_p(1) [>= xi_p(2)]} of its normalized
/// coordinates, which for dim 2 is the split along the low-low/high-high
/// diagonal. Element e belongs to cell e / dim! and uses permutation e % dim!.
class Mesh {
 public:
  Mesh(const DomainBox& box, const GridSpec& spec);

  int dim() const { return box_.dim; }
  const DomainBox& box() const { return box_; }
  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& lines(int axis) const { return lines_[axis]; }
  int cells(int axis) const { return axis < dim() ? spec_.cells[axis] : 1; }
  int num_cells() const { return num_cells_; }
  Index3 cell_index(int c) const;
  int cell_id(const Index3& idx) const;
  Point cell_lower(int c) const;
  Point cell_width(int c) const;
  double cell_measure(int c) const;

  int simplices_per_cell() const { return dim() == 2 ? 2 : 6; }
  int num_elements() const { return num_cells_ * simplices_per_cell(); }
  int cell_of_element(int e) const { return e / simplices_per_cell(); }
  int perm_of_element(int e) const { return e % simplices_per_cell(); }
  /// Axis order of permutation p, largest normalized coordinate first.
  const Index3& permutation(int p) const { return perms_[p]; }
  /// Offsets (0/1 per axis) of the vertices of permutation p, in element vertex order.
  std::array<Index3, 4> kuhn_vertex_offsets(int p) const;

  const std::vector<Point>& nodes() const { return nodes_; }
  std::span<const int> element_vertices(int e) const {
    return {elements_.data() + static_cast<std::size_t>(e) * (dim() + 1),
            static_cast<std::size_t>(dim() + 1)};
  }
  Simplex element(int e) const;
  double element_measure(int e) const { return measures_[e]; }
  double diameter(int e) const { return diameters_[e]; }
  double h() const { return h_; }

 private:
  DomainBox box_;
  GridSpec spec_;
  std::array<std::vector<double>, 3> lines_;
  int num_cells_ = 0;
  std::vector<Index3> perms_;
  std::vector<Point> nodes_;
  std::vector<int> elements_;
  std::vector<double> measures_;
  std::vector<double> diameters_;
  double h_ = 0.0;
};

Mesh build_mesh(const DomainBox& box, const GridSpec& spec);

/// 1D node sequence of one axis.
std::vector<double> axis_lines(double lower, double upper, int cells, Grading grading);

struct Location {
  int element = -1;
  std::array<double, 4> barycentric{};
};

/// Element containing x (lowest id on ties) and its barycentric coordinates.
Location locate_point(const Mesh& mesh, const Point& x);

/// Index of the cell interval of axis containing v (clamped to valid cells).
int locate_interval(const std::vector<double>& lines, double v);

struct Panel {
  Point lower{};
  Point upper{};
  Index3 cell{0, 0, 0};

  double measure(int dim) const;
};

/// Mesh-line aligned boxes tiling prod_k [lo_k, upper_k].
std::vector<Panel> axis_panels(const Mesh& mesh, const Point& lo);

}  // namespace fragfem
