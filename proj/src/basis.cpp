#include "fragfem/basis.hpp"

#include <algorithm>
#include <string>

#include "fragfem/errors.hpp"

namespace fragfem {

namespace {

void enumerate_multi(int dim, int r, int pos, int left, std::array<int, 4>& cur,
                     std::vector<std::array<int, 4>>& out) {
  if (pos == dim) {
    cur[pos] = left;
    out.push_back(cur);
    return;
  }
  for (int m = left; m >= 0; --m) {
    cur[pos] = m;
    enumerate_multi(dim, r, pos + 1, left - m, cur, out);
  }
}

}  // namespace

ReferenceElement::ReferenceElement(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim != 2 && dim != 3) throw UnsupportedDegree("reference element dimension must be 2 or 3");
  if (degree < 1 || degree > 3)
    throw UnsupportedDegree("Lagrange degree " + std::to_string(degree) + " not supported (1..3)");
  std::array<int, 4> cur{0, 0, 0, 0};
  enumerate_multi(dim, degree, 0, degree, cur, multi_);
}

ReferenceElement make_reference_element(int dim, int degree) { return ReferenceElement(dim, degree); }

std::vector<Point> ReferenceElement::node_coordinates() const {
  std::vector<Point> pts;
  for (const auto& m : multi_) {
    Point p{0.0, 0.0, 0.0};
    for (int k = 1; k <= dim_; ++k) p[k - 1] = static_cast<double>(m[k]) / degree_;
    pts.push_back(p);
  }
  return pts;
}

void ReferenceElement::values(const std::array<double, 4>& lambda, double* out) const {
  const int r = degree_;
  double p[4][4];
  for (int k = 0; k <= dim_; ++k) {
    p[k][0] = 1.0;
    for (int s = 1; s <= r; ++s) p[k][s] = p[k][s - 1] * (r * lambda[k] - (s - 1)) / s;
  }
  for (std::size_t n = 0; n < multi_.size(); ++n) {
    double v = 1.0;
    for (int k = 0; k <= dim_; ++k) v *= p[k][multi_[n][k]];
    out[n] = v;
  }
}

void ReferenceElement::bary_gradients(const std::array<double, 4>& lambda, double* out) const {
  const int r = degree_;
  double p[4][4], dp[4][4];
  for (int k = 0; k <= dim_; ++k) {
    p[k][0] = 1.0;
    dp[k][0] = 0.0;
    for (int s = 1; s <= r; ++s) {
      double f = (r * lambda[k] - (s - 1)) / s;
      p[k][s] = p[k][s - 1] * f;
      dp[k][s] = dp[k][s - 1] * f + p[k][s - 1] * r / s;
    }
  }
  for (std::size_t n = 0; n < multi_.size(); ++n) {
    for (int j = 0; j < 4; ++j) {
      if (j > dim_) {
        out[n * 4 + j] = 0.0;
        continue;
      }
      double v = 1.0;
      for (int k = 0; k <= dim_; ++k) v *= (k == j ? dp[k][multi_[n][k]] : p[k][multi_[n][k]]);
      out[n * 4 + j] = v;
    }
  }
}

std::vector<double> ReferenceElement::values_at(const Point& xi) const {
  std::vector<double> v(num_nodes());
  values(unit_simplex_barycentric(xi), v.data());
  return v;
}

std::vector<double> ReferenceElement::gradients_at(const Point& xi) const {
  std::vector<double> bg(num_nodes() * 4);
  bary_gradients(unit_simplex_barycentric(xi), bg.data());
  std::vector<double> g(num_nodes() * dim_);
  for (int n = 0; n < num_nodes(); ++n)
    for (int i = 0; i < dim_; ++i) g[n * dim_ + i] = bg[n * 4 + i + 1] - bg[n * 4];
  return g;
}

DofMap build_dof_map(const Mesh& mesh, int degree) {
  ReferenceElement ref(mesh.dim(), degree);
  const int d = mesh.dim();
  const int r = degree;
  DofMap dm;
  dm.dim = d;
  dm.degree = r;
  for (int k = 0; k < 3; ++k) dm.extent[k] = k < d ? r * mesh.cells(k) + 1 : 1;
  dm.num_dofs = dm.extent[0] * dm.extent[1] * dm.extent[2];
  dm.nodes_per_element = ref.num_nodes();
  dm.nodes_per_cell = 1;
  for (int k = 0; k < d; ++k) dm.nodes_per_cell *= r + 1;

  dm.coordinates.resize(dm.num_dofs);
  for (int q2 = 0; q2 < dm.extent[2]; ++q2)
    for (int q1 = 0; q1 < dm.extent[1]; ++q1)
      for (int q0 = 0; q0 < dm.extent[0]; ++q0) {
        Index3 q{q0, q1, q2};
        Point x{0.0, 0.0, 0.0};
        for (int k = 0; k < d; ++k) {
          const auto& ln = mesh.lines(k);
          int i = std::min(q[k] / r, mesh.cells(k) - 1);
          int s = q[k] - r * i;
          x[k] = s == 0 ? ln[i] : (s == r ? ln[i + 1] : ln[i] + (ln[i + 1] - ln[i]) * s / r);
        }
        dm.coordinates[dm.lattice_id(q)] = x;
      }

  const int spc = mesh.simplices_per_cell();
  dm.element_to_cell_local.assign(spc, std::vector<int>(ref.num_nodes()));
  for (int p = 0; p < spc; ++p) {
    auto off = mesh.kuhn_vertex_offsets(p);
    for (int n = 0; n < ref.num_nodes(); ++n) {
      Index3 a{0, 0, 0};
      for (int k = 0; k <= d; ++k)
        for (int i = 0; i < 3; ++i) a[i] += ref.multi_indices()[n][k] * off[k][i];
      dm.element_to_cell_local[p][n] = a[0] + (r + 1) * (a[1] + (r + 1) * a[2]);
    }
  }

  dm.cell_table.resize(static_cast<std::size_t>(mesh.num_cells()) * dm.nodes_per_cell);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    Index3 ci = mesh.cell_index(c);
    const int nz = d == 3 ? r + 1 : 1;
    int l = 0;
    for (int a2 = 0; a2 < nz; ++a2)
      for (int a1 = 0; a1 <= r; ++a1)
        for (int a0 = 0; a0 <= r; ++a0)
          dm.cell_table[static_cast<std::size_t>(c) * dm.nodes_per_cell + l++] =
              dm.lattice_id({r * ci[0] + a0, r * ci[1] + a1, r * ci[2] + a2});
  }

  dm.element_table.resize(static_cast<std::size_t>(mesh.num_elements()) * dm.nodes_per_element);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    auto cd = dm.cell_dofs(mesh.cell_of_element(e));
    const auto& loc = dm.element_to_cell_local[mesh.perm_of_element(e)];
    for (int n = 0; n < dm.nodes_per_element; ++n)
      dm.element_table[static_cast<std::size_t>(e) * dm.nodes_per_element + n] = cd[loc[n]];
  }
  return dm;
}

FeSpace::FeSpace(const Mesh& m, int degree)
    : mesh(m), element(m.dim(), degree), dofs(build_dof_map(m, degree)) {}

double FeSpace::evaluate(std::span<const double> alpha, const Point& x) const {
  Location loc = locate_point(mesh, x);
  double phi[20];
  element.values(loc.barycentric, phi);
  auto ed = dofs.element_dofs(loc.element);
  double u = 0.0;
  for (std::size_t n = 0; n < ed.size(); ++n) u += alpha[ed[n]] * phi[n];
  return u;
}

}  // namespace fragfem
