#include "fragfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fragfem/errors.hpp"

namespace fragfem {

double DomainBox::measure() const {
  double m = 1.0;
  for (int k = 0; k < dim; ++k) m *= upper[k] - lower[k];
  return m;
}

bool DomainBox::contains(const Point& x, double tol) const {
  for (int k = 0; k < dim; ++k) {
    double slack = tol * (upper[k] - lower[k]);
    if (!(x[k] >= lower[k] - slack && x[k] <= upper[k] + slack)) return false;
  }
  return true;
}

void DomainBox::validate() const {
  if (dim != 2 && dim != 3) throw Error("domain dimension must be 2 or 3, got " + std::to_string(dim));
  for (int k = 0; k < dim; ++k)
    if (!(lower[k] < upper[k]))
      throw Error("domain axis " + std::to_string(k) + " has lower >= upper");
}

std::vector<double> axis_lines(double lower, double upper, int cells, Grading grading) {
  if (cells < 1) throw Error("cells per axis must be >= 1");
  std::vector<double> x(cells + 1);
  if (grading == Grading::Uniform) {
    for (int i = 0; i <= cells; ++i) x[i] = lower + (upper - lower) * i / cells;
  } else {
    if (!(lower > 0.0)) throw Error("geometric grading needs a positive lower bound");
    const double ratio = upper / lower;
    for (int i = 0; i <= cells; ++i) x[i] = lower * std::pow(ratio, static_cast<double>(i) / cells);
  }
  x.front() = lower;
  x.back() = upper;
  for (int i = 0; i < cells; ++i)
    if (!(x[i] < x[i + 1])) throw Error("grid lines are not strictly increasing");
  return x;
}

Mesh::Mesh(const DomainBox& box, const GridSpec& spec) : box_(box), spec_(spec) {
  box_.validate();
  for (int k = 2; k >= box_.dim; --k) {
    box_.lower[k] = 0.0;
    box_.upper[k] = 0.0;
    spec_.cells[k] = 1;
  }
  const int d = dim();
  num_cells_ = 1;
  for (int k = 0; k < d; ++k) {
    lines_[k] = axis_lines(box_.lower[k], box_.upper[k], spec_.cells[k], spec_.grading);
    num_cells_ *= spec_.cells[k];
  }
  if (d == 2) {
    lines_[2] = {0.0, 0.0};
    perms_ = {Index3{0, 1, 2}, Index3{1, 0, 2}};
  } else {
    perms_ = {Index3{0, 1, 2}, Index3{0, 2, 1}, Index3{1, 0, 2},
              Index3{1, 2, 0}, Index3{2, 0, 1}, Index3{2, 1, 0}};
  }

  const int nx = cells(0) + 1, ny = cells(1) + 1, nz = d == 3 ? cells(2) + 1 : 1;
  nodes_.reserve(static_cast<std::size_t>(nx) * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        nodes_.push_back({lines_[0][i], lines_[1][j], d == 3 ? lines_[2][k] : 0.0});

  const int spc = simplices_per_cell();
  elements_.reserve(static_cast<std::size_t>(num_cells_) * spc * (d + 1));
  for (int c = 0; c < num_cells_; ++c) {
    Index3 ci = cell_index(c);
    for (int p = 0; p < spc; ++p) {
      auto off = kuhn_vertex_offsets(p);
      for (int v = 0; v <= d; ++v) {
        int i = ci[0] + off[v][0], j = ci[1] + off[v][1], k = ci[2] + off[v][2];
        elements_.push_back(i + nx * (j + ny * k));
      }
    }
  }

  const int ne = num_elements();
  measures_.resize(ne);
  diameters_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    Simplex s = element(e);
    measures_[e] = s.measure();
    double dmax = 0.0;
    for (int a = 0; a <= d; ++a)
      for (int b = a + 1; b <= d; ++b) {
        double dist = 0.0;
        for (int k = 0; k < d; ++k) dist += (s.v[a][k] - s.v[b][k]) * (s.v[a][k] - s.v[b][k]);
        dmax = std::max(dmax, std::sqrt(dist));
      }
    diameters_[e] = dmax;
    h_ = std::max(h_, dmax);
  }
}

Index3 Mesh::cell_index(int c) const {
  Index3 idx{0, 0, 0};
  idx[0] = c % cells(0);
  c /= cells(0);
  idx[1] = c % cells(1);
  idx[2] = c / cells(1);
  return idx;
}

int Mesh::cell_id(const Index3& idx) const { return idx[0] + cells(0) * (idx[1] + cells(1) * idx[2]); }

Point Mesh::cell_lower(int c) const {
  Index3 idx = cell_index(c);
  Point p{0.0, 0.0, 0.0};
  for (int k = 0; k < dim(); ++k) p[k] = lines_[k][idx[k]];
  return p;
}

Point Mesh::cell_width(int c) const {
  Index3 idx = cell_index(c);
  Point p{0.0, 0.0, 0.0};
  for (int k = 0; k < dim(); ++k) p[k] = lines_[k][idx[k] + 1] - lines_[k][idx[k]];
  return p;
}

double Mesh::cell_measure(int c) const {
  Point w = cell_width(c);
  double m = 1.0;
  for (int k = 0; k < dim(); ++k) m *= w[k];
  return m;
}

std::array<Index3, 4> Mesh::kuhn_vertex_offsets(int p) const {
  std::array<Index3, 4> off{};
  off[0] = {0, 0, 0};
  for (int k = 0; k < dim(); ++k) {
    off[k + 1] = off[k];
    off[k + 1][perms_[p][k]] = 1;
  }
  return off;
}

Simplex Mesh::element(int e) const {
  Simplex s;
  s.dim = dim();
  auto vs = element_vertices(e);
  for (int v = 0; v <= dim(); ++v) s.v[v] = nodes_[vs[v]];
  return s;
}

Mesh build_mesh(const DomainBox& box, const GridSpec& spec) { return Mesh(box, spec); }

int locate_interval(const std::vector<double>& lines, double v) {
  const int n = static_cast<int>(lines.size()) - 1;
  int i = static_cast<int>(std::upper_bound(lines.begin(), lines.end(), v) - lines.begin()) - 1;
  return std::clamp(i, 0, n - 1);
}

Location locate_point(const Mesh& mesh, const Point& x) {
  constexpr double tol = 1e-12;
  const int d = mesh.dim();
  if (!mesh.box().contains(x, tol)) throw OutOfDomain("point outside the mesh box");
  std::array<std::vector<int>, 3> cand;
  for (int k = 0; k < 3; ++k) {
    if (k >= d) {
      cand[k] = {0};
      continue;
    }
    const auto& ln = mesh.lines(k);
    const int n = mesh.cells(k);
    int i = locate_interval(ln, x[k]);
    double slack = tol * (ln.back() - ln.front());
    if (i > 0 && std::abs(x[k] - ln[i]) <= slack) cand[k].push_back(i - 1);
    cand[k].push_back(i);
    if (i + 1 < n && std::abs(x[k] - ln[i + 1]) <= slack) cand[k].push_back(i + 1);
  }
  for (int i2 : cand[2])
    for (int i1 : cand[1])
      for (int i0 : cand[0]) {
        int c = mesh.cell_id({i0, i1, i2});
        Point lo = mesh.cell_lower(c), w = mesh.cell_width(c);
        Point xi{0.0, 0.0, 0.0};
        for (int k = 0; k < d; ++k) xi[k] = (x[k] - lo[k]) / w[k];
        for (int p = 0; p < mesh.simplices_per_cell(); ++p) {
          const Index3& s = mesh.permutation(p);
          std::array<double, 4> l{0.0, 0.0, 0.0, 0.0};
          l[0] = 1.0 - xi[s[0]];
          for (int k = 1; k < d; ++k) l[k] = xi[s[k - 1]] - xi[s[k]];
          l[d] = xi[s[d - 1]];
          bool inside = true;
          for (int k = 0; k <= d; ++k) inside = inside && l[k] >= -tol && l[k] <= 1.0 + tol;
          if (inside) return {c * mesh.simplices_per_cell() + p, l};
        }
      }
  throw OutOfDomain("point location failed");
}

double Panel::measure(int dim) const {
  double m = 1.0;
  for (int k = 0; k < dim; ++k) m *= upper[k] - lower[k];
  return m;
}

std::vector<Panel> axis_panels(const Mesh& mesh, const Point& lo) {
  const int d = mesh.dim();
  struct Piece {
    double a, b;
    int cell;
  };
  std::array<std::vector<Piece>, 3> pieces;
  for (int k = 0; k < 3; ++k) {
    if (k >= d) {
      pieces[k] = {{0.0, 0.0, 0}};
      continue;
    }
    const auto& ln = mesh.lines(k);
    for (int i = 0; i < mesh.cells(k); ++i) {
      double a = std::max(lo[k], ln[i]), b = ln[i + 1];
      if (b > a) pieces[k].push_back({a, b, i});
    }
    if (pieces[k].empty()) return {};
  }
  std::vector<Panel> panels;
  panels.reserve(pieces[0].size() * pieces[1].size() * pieces[2].size());
  for (const auto& p2 : pieces[2])
    for (const auto& p1 : pieces[1])
      for (const auto& p0 : pieces[0]) {
        Panel pan;
        pan.lower = {p0.a, p1.a, p2.a};
        pan.upper = {p0.b, p1.b, p2.b};
        pan.cell = {p0.cell, p1.cell, p2.cell};
        panels.push_back(pan);
      }
  return panels;
}

}  // namespace fragfem
