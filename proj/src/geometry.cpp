#include "fragfem/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace fragfem {

namespace {

Point lerp(const Point& a, const Point& b, double t) {
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])};
}

Point mid(const Point& a, const Point& b) { return lerp(a, b, 0.5); }

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Simplex tri(const Point& a, const Point& b, const Point& c) {
  Simplex s;
  s.dim = 2;
  s.v = {a, b, c, Point{}};
  return s;
}

Simplex tet(const Point& a, const Point& b, const Point& c, const Point& d) {
  Simplex s;
  s.dim = 3;
  s.v = {a, b, c, d};
  return s;
}

// Prism with bottom (p0,p1,p2) and top (q0,q1,q2), qi joined to pi.
void push_prism(const Point& p0, const Point& p1, const Point& p2, const Point& q0, const Point& q1,
                const Point& q2, std::vector<Simplex>& out) {
  out.push_back(tet(p0, p1, p2, q0));
  out.push_back(tet(p1, p2, q0, q1));
  out.push_back(tet(p2, q0, q1, q2));
}

}  // namespace

double Simplex::measure() const {
  if (dim == 2) {
    double ax = v[1][0] - v[0][0], ay = v[1][1] - v[0][1];
    double bx = v[2][0] - v[0][0], by = v[2][1] - v[0][1];
    return 0.5 * std::abs(ax * by - ay * bx);
  }
  Eigen::Matrix3d m;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i) m(i, k) = v[k + 1][i] - v[0][i];
  return std::abs(m.determinant()) / 6.0;
}

Point Simplex::map(const std::array<double, 4>& lambda) const {
  Point x{0.0, 0.0, 0.0};
  for (int k = 0; k <= dim; ++k)
    for (int i = 0; i < 3; ++i) x[i] += lambda[k] * v[k][i];
  return x;
}

std::array<double, 4> Simplex::barycentric(const Point& x) const { return BarycentricMap(*this)(x); }

BarycentricMap::BarycentricMap(const Simplex& s) : dim(s.dim) {
  if (dim == 2) {
    Eigen::Matrix2d j;
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i) j(i, k) = s.v[k + 1][i] - s.v[0][i];
    Eigen::Matrix2d inv = j.inverse();
    for (int k = 0; k < 2; ++k) {
      g[k + 1] = {inv(k, 0), inv(k, 1), 0.0};
      c[k + 1] = -(inv(k, 0) * s.v[0][0] + inv(k, 1) * s.v[0][1]);
    }
  } else {
    Eigen::Matrix3d j;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) j(i, k) = s.v[k + 1][i] - s.v[0][i];
    Eigen::Matrix3d inv = j.inverse();
    for (int k = 0; k < 3; ++k) {
      g[k + 1] = {inv(k, 0), inv(k, 1), inv(k, 2)};
      c[k + 1] = -(inv(k, 0) * s.v[0][0] + inv(k, 1) * s.v[0][1] + inv(k, 2) * s.v[0][2]);
    }
  }
  c[0] = 1.0;
  g[0] = {0.0, 0.0, 0.0};
  for (int k = 1; k <= dim; ++k) {
    c[0] -= c[k];
    for (int i = 0; i < 3; ++i) g[0][i] -= g[k][i];
  }
}

std::array<double, 4> BarycentricMap::operator()(const Point& x) const {
  std::array<double, 4> l{0.0, 0.0, 0.0, 0.0};
  for (int k = 1; k <= dim; ++k) l[k] = c[k] + dot(g[k], x);
  double rest = 1.0;
  for (int k = 1; k <= dim; ++k) rest -= l[k];
  l[0] = rest;
  return l;
}

void clip_halfspace(const Simplex& s, const Point& normal, double offset, std::vector<Simplex>& out) {
  const int nv = s.dim + 1;
  std::array<double, 4> d{};
  std::array<int, 4> in{}, outside{};
  int ni = 0, no = 0;
  for (int k = 0; k < nv; ++k) {
    d[k] = dot(normal, s.v[k]) - offset;
    if (d[k] <= 0.0)
      in[ni++] = k;
    else
      outside[no++] = k;
  }
  if (no == 0) {
    out.push_back(s);
    return;
  }
  if (ni == 0) return;
  auto cut = [&](int a, int b) { return lerp(s.v[a], s.v[b], d[a] / (d[a] - d[b])); };
  if (s.dim == 2) {
    if (ni == 1) {
      int a = in[0];
      out.push_back(tri(s.v[a], cut(a, outside[0]), cut(a, outside[1])));
    } else {
      int a = in[0], b = in[1], c = outside[0];
      Point bc = cut(b, c), ac = cut(a, c);
      out.push_back(tri(s.v[a], s.v[b], bc));
      out.push_back(tri(s.v[a], bc, ac));
    }
    return;
  }
  if (ni == 1) {
    int a = in[0];
    out.push_back(tet(s.v[a], cut(a, outside[0]), cut(a, outside[1]), cut(a, outside[2])));
  } else if (ni == 3) {
    int a = in[0], b = in[1], c = in[2], e = outside[0];
    push_prism(s.v[a], s.v[b], s.v[c], cut(a, e), cut(b, e), cut(c, e), out);
  } else {
    int a = in[0], b = in[1], c = outside[0], e = outside[1];
    push_prism(s.v[a], cut(a, c), cut(a, e), s.v[b], cut(b, c), cut(b, e), out);
  }
}

std::vector<Simplex> clip_all(const Simplex& s, const std::vector<std::pair<Point, double>>& planes) {
  std::vector<Simplex> cur{s}, next;
  for (const auto& [n, c] : planes) {
    next.clear();
    for (const auto& piece : cur) clip_halfspace(piece, n, c, next);
    cur.swap(next);
    if (cur.empty()) break;
  }
  const double scale = s.measure();
  std::vector<Simplex> kept;
  kept.reserve(cur.size());
  for (const auto& piece : cur)
    if (piece.measure() > 1e-15 * scale) kept.push_back(piece);
  return kept;
}

void subdivide(const Simplex& s, std::vector<Simplex>& out) {
  const auto& v = s.v;
  if (s.dim == 2) {
    Point m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m12 = mid(v[1], v[2]);
    out.push_back(tri(v[0], m01, m02));
    out.push_back(tri(m01, v[1], m12));
    out.push_back(tri(m02, m12, v[2]));
    out.push_back(tri(m01, m12, m02));
    return;
  }
  Point m01 = mid(v[0], v[1]), m02 = mid(v[0], v[2]), m03 = mid(v[0], v[3]);
  Point m12 = mid(v[1], v[2]), m13 = mid(v[1], v[3]), m23 = mid(v[2], v[3]);
  out.push_back(tet(v[0], m01, m02, m03));
  out.push_back(tet(m01, v[1], m12, m13));
  out.push_back(tet(m02, m12, v[2], m23));
  out.push_back(tet(m03, m13, m23, v[3]));
  // the inner octahedron, split along the m02-m13 diagonal
  out.push_back(tet(m01, m02, m03, m13));
  out.push_back(tet(m01, m02, m12, m13));
  out.push_back(tet(m02, m03, m13, m23));
  out.push_back(tet(m02, m12, m13, m23));
}

void map_rule(const Simplex& s, const QuadratureRule& rule, std::vector<Point>& points,
              std::vector<double>& weights) {
  const double scale = s.measure() * (s.dim == 2 ? 2.0 : 6.0);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point& xi = rule.points[q];
    std::array<double, 4> lambda{1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]};
    points.push_back(s.map(lambda));
    weights.push_back(rule.weights[q] * scale);
  }
}

}  // namespace fragfem
