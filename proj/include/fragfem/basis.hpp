#pragma once

#include <array>
#include <span>
#include <vector>

#include "fragfem/mesh.hpp"

namespace fragfem {

/// Equispaced Lagrange element of degree r on a simplex. Node k carries the
/// integer barycentric multi-index m_k (sum = r) and sits at lambda = m_k / r.
/// Nodes are ordered by descending m[0], then descending m[1], ...
class ReferenceElement {
 public:
  ReferenceElement(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int num_nodes() const { return static_cast<int>(multi_.size()); }
  const std::vector<std::array<int, 4>>& multi_indices() const { return multi_; }
  /// Node coordinates on the unit simplex.
  std::vector<Point> node_coordinates() const;

  /// Shape function values at barycentric coordinates lambda.
  void values(const std::array<double, 4>& lambda, double* out) const;
  /// d phi_k / d lambda_j into out[k * 4 + j].
  void bary_gradients(const std::array<double, 4>& lambda, double* out) const;

  std::vector<double> values_at(const Point& xi) const;
  /// Gradients with respect to the unit-simplex coordinates, num_nodes x dim, row major.
  std::vector<double> gradients_at(const Point& xi) const;

 private:
  int dim_;
  int degree_;
  std::vector<std::array<int, 4>> multi_;
};

ReferenceElement make_reference_element(int dim, int degree);

inline std::array<double, 4> unit_simplex_barycentric(const Point& xi) {
  return {1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]};
}

/// Global numbering of degree-r Lagrange nodes. On the Kuhn split every point
/// of the lattice refined r times per cell is a node, so dofs are numbered
/// lexicographically on that lattice (axis 0 fastest).
struct DofMap {
  int dim = 2;
  int degree = 1;
  Index3 extent{1, 1, 1};
  int num_dofs = 0;
  int nodes_per_element = 0;
  int nodes_per_cell = 0;
  std::vector<Point> coordinates;
  std::vector<int> element_table;
  /// Cell-local lattice (r+1)^dim, axis 0 fastest, to global dof.
  std::vector<int> cell_table;
  /// For each permutation: element-local node -> cell-local lattice index.
  std::vector<std::vector<int>> element_to_cell_local;

  std::span<const int> element_dofs(int e) const {
    return {element_table.data() + static_cast<std::size_t>(e) * nodes_per_element,
            static_cast<std::size_t>(nodes_per_element)};
  }
  std::span<const int> cell_dofs(int c) const {
    return {cell_table.data() + static_cast<std::size_t>(c) * nodes_per_cell,
            static_cast<std::size_t>(nodes_per_cell)};
  }
  int lattice_id(const Index3& q) const { return q[0] + extent[0] * (q[1] + extent[1] * q[2]); }
};

DofMap build_dof_map(const Mesh& mesh, int degree);

/// Mesh, dof numbering and reference element bundled together.
struct FeSpace {
  Mesh mesh;
  ReferenceElement element;
  DofMap dofs;

  FeSpace(const Mesh& m, int degree);
  int num_dofs() const { return dofs.num_dofs; }
  int degree() const { return element.degree(); }
  int dim() const { return mesh.dim(); }

  /// u_h(x) for coefficient vector alpha.
  double evaluate(std::span<const double> alpha, const Point& x) const;
};

}  // namespace fragfem
