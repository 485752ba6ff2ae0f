#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fragfem/basis.hpp"

namespace fragfem {

/// Evaluates integrals of the form
///
///   G_{j,c} = sum_y w(y) v_c(y) Psi_j(y),   Psi_j(y) = int_{x in D, x <= y} phi_j(x) dx,
///
/// over a fixed cell quadrature in y. For parent-only kernels the gain matrix is
/// B_{j,i} = int k(y) phi_i(y) Psi_j(y) dy, so it is such an integral with
/// payload v_i = k phi_i. Psi_j restricted to a Kuhn simplex is a polynomial
/// built from per-cell reference integrals, so only the payload is quadrature
/// dependent.
///
/// Psi_j(y) splits over the cells c' <= cell(y). The cells sharing the index of
/// cell(y) on an axis set P contribute a partial integral that depends on the
/// normalized coordinates of y on P (the "key"); the others contribute full
/// cell integrals. Grouping parent cells by (c', P) turns the sum into strict
/// suffix sums over the free axes, evaluated slab by slab.
class CumulativeGain {
 public:
  /// cell_ratio q > 1 maps each reference axis by eta = (q^s - 1)/(q - 1), which
  /// resolves 1/y-type payloads on geometric grids whose cells all satisfy
  /// y_hi = q y_lo. The map is the same on every axis, so Kuhn simplices are kept.
  CumulativeGain(const FeSpace& space, int degree, double cell_ratio = 1.0);

  const FeSpace& space() const { return *space_; }
  int degree() const { return degree_; }
  double cell_ratio() const { return ratio_; }
  int points_per_cell() const { return static_cast<int>(ref_points_.size()); }
  /// Physical points of cell c and their weights (cell volume included).
  void cell_points(int c, std::vector<Point>& points, std::vector<double>& weights) const;
  /// All points, cell-major.
  std::vector<Point> all_points() const;

  /// Reference cell basis values at the cell points, points x nodes_per_cell.
  const Eigen::MatrixXd& basis_values() const { return phi_; }

  /// B(j, i) = sum_y w k(y) phi_i(y) Psi_j(y); kernel holds k at all_points().
  /// Columns are split between workers; the result does not depend on workers.
  Eigen::MatrixXd assemble(const std::vector<double>& kernel, int workers) const;

  /// out(j, m) = sum_y w v_m(y) Psi_j(y); values is points x m, cell-major rows.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& values) const;

  /// Payload of one cell: global columns and per-point values (points x cols, row major).
  struct Payload {
    std::function<void(int cell, std::vector<int>& cols)> columns;
    std::function<void(int cell, std::vector<double>& values)> values;
  };
  /// Accumulates into out the contributions for columns in [col_lo, col_hi).
  void contract(const Payload& payload, Eigen::MatrixXd& out, int col_lo, int col_hi) const;

 private:
  const FeSpace* space_;
  int degree_;
  double ratio_;
  int dim_;
  int nloc_;
  std::vector<Point> ref_points_;
  std::vector<double> ref_weights_;
  Eigen::MatrixXd phi_;
  // per axis subset P (bit mask): key of each point, key count, reference integrals
  std::vector<std::vector<int>> key_of_;
  std::vector<int> num_keys_;
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ref_integrals_;
};

/// Common ratio y_hi / y_lo of every cell on every axis, or 0 if there is none.
double common_cell_ratio(const Mesh& mesh);

/// Picks the engine cell ratio (1 or common_cell_ratio) whose y-rule integrates
/// k times a degree 2r+d polynomial more accurately on a sample of cells.
double select_cell_ratio(const FeSpace& space, int degree, const std::function<double(const Point&)>& k);

}  // namespace fragfem
