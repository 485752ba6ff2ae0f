#include "fragfem/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fragfem/errors.hpp"
#include "fragfem/gain_engine.hpp"
#include "fragfem/geometry.hpp"
#include "fragfem/threading.hpp"

namespace fragfem {

namespace {

struct ElementRule {
  QuadratureRule rule;
  std::vector<std::vector<double>> phi;  // per point, per local node
};

ElementRule element_rule(const FeSpace& space, int degree) {
  ElementRule er;
  er.rule = simplex_quadrature(space.dim(), degree);
  for (const auto& xi : er.rule.points) er.phi.push_back(space.element.values_at(xi));
  return er;
}

int default_degree(int requested, int fallback) { return requested > 0 ? requested : fallback; }

// Sparse Galerkin matrix of a weight w(x) >= 0 (or any finite function).
SparseMatrix weighted_mass(const FeSpace& space, int degree, const std::function<double(const Point&)>* weight) {
  const Mesh& mesh = space.mesh;
  const ElementRule er = element_rule(space, degree);
  const int nloc = space.dofs.nodes_per_element;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * nloc * nloc);
  std::vector<Point> pts;
  std::vector<double> wts;
  std::vector<double> local(static_cast<std::size_t>(nloc) * nloc);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    pts.clear();
    wts.clear();
    map_rule(mesh.element(e), er.rule, pts, wts);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      double w = wts[q];
      if (weight) {
        const double g = (*weight)(pts[q]);
        if (!std::isfinite(g)) throw NonFiniteEntry("selection rate is not finite inside the domain");
        w *= g;
      }
      const auto& phi = er.phi[q];
      for (int a = 0; a < nloc; ++a)
        for (int b = a; b < nloc; ++b) local[a * nloc + b] += w * phi[a] * phi[b];
    }
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < a; ++b) local[a * nloc + b] = local[b * nloc + a];
    auto ed = space.dofs.element_dofs(e);
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) triplets.emplace_back(ed[a], ed[b], local[a * nloc + b]);
  }
  SparseMatrix m(space.num_dofs(), space.num_dofs());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

std::vector<BarycentricMap> element_maps(const Mesh& mesh) {
  std::vector<BarycentricMap> maps;
  maps.reserve(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) maps.emplace_back(mesh.element(e));
  return maps;
}

// Elements touching dof rows in [lo, hi).
bool touches_rows(std::span<const int> dofs, long lo, long hi) {
  for (int j : dofs)
    if (j >= lo && j < hi) return true;
  return false;
}

// Inner integral over {y in D : y >= x}: calls fn(element, point, weight) for
// every inner quadrature point.
template <class Fn>
void for_each_upper_point(const Mesh& mesh, const QuadratureRule& rule, const Point& x, Fn&& fn) {
  const int d = mesh.dim();
  Index3 first{0, 0, 0}, count{1, 1, 1};
  for (int k = 0; k < d; ++k) {
    const auto& lines = mesh.lines(k);
    if (x[k] >= lines.back()) return;
    first[k] = locate_interval(lines, x[k]);
    count[k] = mesh.cells(k) - first[k];
  }
  const int spc = mesh.simplices_per_cell();
  std::vector<Point> pts;
  std::vector<double> wts;
  std::vector<std::pair<Point, double>> planes;
  for (int c2 = 0; c2 < count[2]; ++c2)
    for (int c1 = 0; c1 < count[1]; ++c1)
      for (int c0 = 0; c0 < count[0]; ++c0) {
        Index3 idx{first[0] + c0, first[1] + c1, first[2] + c2};
        const int c = mesh.cell_id(idx);
        const Point lo = mesh.cell_lower(c);
        planes.clear();
        for (int k = 0; k < d; ++k)
          if (lo[k] < x[k]) {
            Point n{0.0, 0.0, 0.0};
            n[k] = -1.0;
            planes.emplace_back(n, -x[k]);
          }
        for (int p = 0; p < spc; ++p) {
          const int e = c * spc + p;
          pts.clear();
          wts.clear();
          if (planes.empty()) {
            map_rule(mesh.element(e), rule, pts, wts);
          } else {
            for (const auto& piece : clip_all(mesh.element(e), planes)) map_rule(piece, rule, pts, wts);
          }
          for (std::size_t q = 0; q < pts.size(); ++q) fn(e, pts[q], wts[q]);
        }
      }
}

// Pieces of x-element ex mapped by 2x into y-element ey.
std::vector<Simplex> halving_pieces(const Simplex& ex, const BarycentricMap& ymap, int d) {
  std::vector<std::pair<Point, double>> planes;
  for (int k = 0; k <= d; ++k) {
    Point n{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) n[a] = -2.0 * ymap.g[k][a];
    planes.emplace_back(n, ymap.c[k]);
  }
  return clip_all(ex, planes);
}

// Range of cells of one axis overlapping [a, b].
std::pair<int, int> cell_range(const std::vector<double>& lines, double a, double b) {
  return {locate_interval(lines, a), locate_interval(lines, b)};
}

void check_finite(const Eigen::MatrixXd& b) {
  if (!b.allFinite()) throw NonFiniteEntry("gain matrix has non-finite entries");
}

Eigen::MatrixXd gain_exchanged(const FeSpace& space, const FragmentationKernel& beta, const SelectionFn& gamma,
                               int degree, int workers) {
  auto kernel = [&](const Point& y) { return beta.density(pair_variables(Point{0.0, 0.0, 0.0}, y)) * gamma(y); };
  CumulativeGain engine(space, degree, select_cell_ratio(space, degree, kernel));
  const auto pts = engine.all_points();
  std::vector<double> k(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) {
    k[p] = kernel(pts[p]);
    if (!std::isfinite(k[p])) throw NonFiniteEntry("fragmentation kernel is not finite inside the domain");
  }
  return engine.assemble(k, workers);
}

Eigen::MatrixXd gain_direct(const FeSpace& space, const FragmentationKernel& beta, const SelectionFn& gamma,
                            int outer_degree, int inner_degree, int workers) {
  const Mesh& mesh = space.mesh;
  const int m = space.num_dofs();
  const int nloc = space.dofs.nodes_per_element;
  const ElementRule outer = element_rule(space, outer_degree);
  const QuadratureRule inner = simplex_quadrature(space.dim(), inner_degree);
  const auto maps = element_maps(mesh);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);

  parallel_ranges(m, resolve_workers(workers), [&](long lo, long hi) {
    std::vector<double> col(m, 0.0);
    std::vector<int> touched;
    std::vector<char> mark(m, 0);
    std::vector<Point> pts;
    std::vector<double> wts;
    double phi[20];
    for (int e = 0; e < mesh.num_elements(); ++e) {
      auto ex = space.dofs.element_dofs(e);
      if (!touches_rows(ex, lo, hi)) continue;
      pts.clear();
      wts.clear();
      map_rule(mesh.element(e), outer.rule, pts, wts);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const Point x = pts[q];
        for_each_upper_point(mesh, inner, x, [&](int ey, const Point& y, double w) {
          const double kv = beta.density(pair_variables(x, y)) * gamma(y) * w;
          if (kv == 0.0) return;
          if (!std::isfinite(kv)) throw NonFiniteEntry("fragmentation kernel is not finite inside the domain");
          space.element.values(maps[ey](y), phi);
          auto ed = space.dofs.element_dofs(ey);
          for (int l = 0; l < nloc; ++l) {
            if (!mark[ed[l]]) {
              mark[ed[l]] = 1;
              touched.push_back(ed[l]);
            }
            col[ed[l]] += kv * phi[l];
          }
        });
        std::sort(touched.begin(), touched.end());
        for (int a = 0; a < nloc; ++a) {
          const int j = ex[a];
          if (j < lo || j >= hi) continue;
          const double s = wts[q] * outer.phi[q][a];
          for (int i : touched) b(j, i) += s * col[i];
        }
        for (int i : touched) {
          col[i] = 0.0;
          mark[i] = 0;
        }
        touched.clear();
      }
    }
  });
  return b;
}

}  // namespace

std::string mesh_id(const Mesh& mesh) {
  std::ostringstream os;
  os << mesh.dim() << "d ";
  for (int k = 0; k < mesh.dim(); ++k) os << (k ? "x" : "") << mesh.cells(k);
  os << (mesh.spec().grading == Grading::Geometric ? " geometric" : " uniform");
  const DomainBox& b = mesh.box();
  bool same = true;
  for (int k = 1; k < mesh.dim(); ++k) same = same && b.lower[k] == b.lower[0] && b.upper[k] == b.upper[0];
  char buf[64];
  for (int k = 0; k < (same ? 1 : mesh.dim()); ++k) {
    std::snprintf(buf, sizeof buf, "%s[%g,%g]", k ? "x" : " ", b.lower[k], b.upper[k]);
    os << buf;
  }
  return os.str();
}

SparseMatrix assemble_mass(const FeSpace& space, int degree) {
  return weighted_mass(space, default_degree(degree, 2 * space.degree()), nullptr);
}

SparseMatrix assemble_selection(const FeSpace& space, const SelectionFn& gamma, int degree) {
  std::function<double(const Point&)> w = [&](const Point& x) { return gamma(x); };
  return weighted_mass(space, default_degree(degree, 2 * space.degree() + 2), &w);
}

Eigen::MatrixXd assemble_gain_smooth(const FeSpace& space, const FragmentationKernel& beta, const SelectionFn& gamma,
                                     const AssemblyOptions& options) {
  if (beta.kind != KernelKind::SmoothDensity) throw Error("assemble_gain_smooth needs a smooth kernel");
  const int r = space.degree(), d = space.dim();
  Eigen::MatrixXd b;
  if (beta.parent_only() && options.method != GainMethod::Direct) {
    b = gain_exchanged(space, beta, gamma, default_degree(options.gain_degree, 2 * r + d + options.gain_extra),
                       options.workers);
  } else {
    if (options.method == GainMethod::Exchanged) throw Error("the exchanged gain path needs a parent-only kernel");
    b = gain_direct(space, beta, gamma, default_degree(options.gain_degree, 2 * r + 2),
                    default_degree(options.inner_degree, 2 * r + 2), options.workers);
  }
  check_finite(b);
  if (options.flip_gain_sign) b = -b;
  return b;
}

Eigen::MatrixXd assemble_gain_delta(const FeSpace& space, const SelectionFn& gamma, const AssemblyOptions& options) {
  const Mesh& mesh = space.mesh;
  const int d = space.dim(), m = space.num_dofs();
  const int nloc = space.dofs.nodes_per_element;
  const int spc = mesh.simplices_per_cell();
  const QuadratureRule rule = simplex_quadrature(d, default_degree(options.gain_degree, 2 * space.degree() + 2));
  const auto maps = element_maps(mesh);
  const double factor = std::pow(2.0, d + 1);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);

  parallel_ranges(m, resolve_workers(options.workers), [&](long lo, long hi) {
    std::vector<Point> pts;
    std::vector<double> wts;
    double phix[20], phiy[20];
    for (int e = 0; e < mesh.num_elements(); ++e) {
      auto ex = space.dofs.element_dofs(e);
      if (!touches_rows(ex, lo, hi)) continue;
      const Simplex sx = mesh.element(e);
      Point blo = sx.v[0], bhi = sx.v[0];
      for (int v = 1; v <= d; ++v)
        for (int k = 0; k < d; ++k) {
          blo[k] = std::min(blo[k], sx.v[v][k]);
          bhi[k] = std::max(bhi[k], sx.v[v][k]);
        }
      bool empty = false;
      Index3 first{0, 0, 0}, last{0, 0, 0};
      for (int k = 0; k < d; ++k) {
        const auto& lines = mesh.lines(k);
        if (2.0 * blo[k] >= lines.back()) empty = true;
        std::tie(first[k], last[k]) = cell_range(lines, 2.0 * blo[k], 2.0 * bhi[k]);
      }
      if (empty) continue;
      for (int c2 = first[2]; c2 <= last[2]; ++c2)
        for (int c1 = first[1]; c1 <= last[1]; ++c1)
          for (int c0 = first[0]; c0 <= last[0]; ++c0) {
            const int c = mesh.cell_id({c0, c1, c2});
            for (int p = 0; p < spc; ++p) {
              const int ey = c * spc + p;
              pts.clear();
              wts.clear();
              for (const auto& piece : halving_pieces(sx, maps[ey], d)) map_rule(piece, rule, pts, wts);
              if (pts.empty()) continue;
              auto ed = space.dofs.element_dofs(ey);
              for (std::size_t q = 0; q < pts.size(); ++q) {
                Point y{2.0 * pts[q][0], 2.0 * pts[q][1], 2.0 * pts[q][2]};
                const double g = gamma(y);
                if (!std::isfinite(g)) throw NonFiniteEntry("selection rate is not finite inside the domain");
                space.element.values(maps[e](pts[q]), phix);
                space.element.values(maps[ey](y), phiy);
                const double w = factor * wts[q] * g;
                for (int a = 0; a < nloc; ++a) {
                  const int j = ex[a];
                  if (j < lo || j >= hi) continue;
                  for (int l = 0; l < nloc; ++l) b(j, ed[l]) += w * phix[a] * phiy[l];
                }
              }
            }
          }
    }
  });
  check_finite(b);
  if (options.flip_gain_sign) b = -b;
  return b;
}

SystemMatrices assemble_system(const FeSpace& space, const SelectionFn& gamma, const FragmentationKernel& beta,
                               const AssemblyOptions& options) {
  const int r = space.degree(), d = space.dim();
  SystemMatrices s;
  s.info.mesh_id = mesh_id(space.mesh);
  s.info.degree = r;
  s.info.mass_degree = default_degree(options.mass_degree, 2 * r);
  s.info.selection_degree = default_degree(options.selection_degree, 2 * r + 2);
  s.M = assemble_mass(space, s.info.mass_degree);
  s.A = assemble_selection(space, gamma, s.info.selection_degree);
  if (beta.kind == KernelKind::HalvingDelta) {
    s.info.gain_path = "halving";
    s.info.gain_degree = default_degree(options.gain_degree, 2 * r + 2);
    s.B = assemble_gain_delta(space, gamma, options);
  } else if (beta.parent_only() && options.method != GainMethod::Direct) {
    s.info.gain_path = "exchanged";
    s.info.gain_degree = default_degree(options.gain_degree, 2 * r + d + options.gain_extra);
    s.B = assemble_gain_smooth(space, beta, gamma, options);
  } else {
    s.info.gain_path = "direct";
    s.info.gain_degree = default_degree(options.gain_degree, 2 * r + 2);
    s.info.inner_degree = default_degree(options.inner_degree, 2 * r + 2);
    s.B = assemble_gain_smooth(space, beta, gamma, options);
  }
  return s;
}

Eigen::VectorXd load_vector(const FeSpace& space, const std::function<double(const Point&)>& f, int degree) {
  const Mesh& mesh = space.mesh;
  const ElementRule er = element_rule(space, default_degree(degree, 2 * space.degree() + 2));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.num_dofs());
  std::vector<Point> pts;
  std::vector<double> wts;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    pts.clear();
    wts.clear();
    map_rule(mesh.element(e), er.rule, pts, wts);
    auto ed = space.dofs.element_dofs(e);
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double v = wts[q] * f(pts[q]);
      for (std::size_t a = 0; a < ed.size(); ++a) b[ed[a]] += v * er.phi[q][a];
    }
  }
  return b;
}

struct GainLoad::Impl {
  const FeSpace& space;
  FragmentationKernel beta;
  SelectionFn gamma;
  std::unique_ptr<CumulativeGain> engine;
  std::vector<Point> points;
  std::vector<double> kernel;  // exchanged: beta*Gamma at points
  // halving: flattened (point, weight*factor*Gamma(2x), element)
  std::vector<double> weights;
  std::vector<int> elements;
  std::vector<BarycentricMap> maps;
  QuadratureRule inner;
  int outer_degree = 0;

  Impl(const FeSpace& s, const FragmentationKernel& b, const SelectionFn& g) : space(s), beta(b), gamma(g) {}
};

GainLoad::GainLoad(const FeSpace& space, const FragmentationKernel& beta, const SelectionFn& gamma,
                   const AssemblyOptions& options)
    : impl_(std::make_unique<Impl>(space, beta, gamma)) {
  const int r = space.degree(), d = space.dim();
  const Mesh& mesh = space.mesh;
  Impl& im = *impl_;
  if (beta.kind == KernelKind::HalvingDelta) {
    const QuadratureRule rule = simplex_quadrature(d, default_degree(options.gain_degree, 2 * r + 4));
    const double factor = std::pow(2.0, d + 1);
    std::vector<std::pair<Point, double>> planes;
    for (int k = 0; k < d; ++k) {
      Point n{0.0, 0.0, 0.0};
      n[k] = 1.0;
      planes.emplace_back(n, 0.5 * mesh.box().upper[k]);
    }
    std::vector<Point> pts;
    std::vector<double> wts;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      pts.clear();
      wts.clear();
      for (const auto& piece : clip_all(mesh.element(e), planes)) map_rule(piece, rule, pts, wts);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        Point y{2.0 * pts[q][0], 2.0 * pts[q][1], 2.0 * pts[q][2]};
        im.points.push_back(pts[q]);
        im.weights.push_back(factor * wts[q] * gamma(y));
        im.elements.push_back(e);
      }
    }
    im.maps = element_maps(mesh);
  } else if (beta.parent_only() && options.method != GainMethod::Direct) {
    auto kernel = [&](const Point& y) { return beta.density(pair_variables(Point{0.0, 0.0, 0.0}, y)) * gamma(y); };
    const int degree = default_degree(options.gain_degree, 2 * r + d + options.gain_extra);
    im.engine = std::make_unique<CumulativeGain>(space, degree, select_cell_ratio(space, degree, kernel));
    im.points = im.engine->all_points();
    im.kernel.resize(im.points.size());
    for (std::size_t p = 0; p < im.points.size(); ++p) im.kernel[p] = kernel(im.points[p]);
  } else {
    const ElementRule outer = element_rule(space, default_degree(options.gain_degree, 2 * r + 2));
    for (int e = 0; e < mesh.num_elements(); ++e)
      map_rule(mesh.element(e), outer.rule, im.points, im.weights);
    for (int e = 0; e < mesh.num_elements(); ++e)
      for (std::size_t q = 0; q < outer.rule.size(); ++q) im.elements.push_back(e);
    im.inner = simplex_quadrature(d, default_degree(options.inner_degree, 2 * r + 4));
    im.maps = element_maps(mesh);
  }
}

GainLoad::~GainLoad() = default;

Eigen::VectorXd GainLoad::operator()(const std::function<double(const Point&)>& g) const {
  const Impl& im = *impl_;
  const FeSpace& space = im.space;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.num_dofs());
  double phi[20];
  if (im.engine) {
    Eigen::MatrixXd vals(im.points.size(), 1);
    for (std::size_t p = 0; p < im.points.size(); ++p) vals(p, 0) = im.kernel[p] * g(im.points[p]);
    return im.engine->apply(vals).col(0);
  }
  const bool halving = im.beta.kind == KernelKind::HalvingDelta;
  for (std::size_t q = 0; q < im.points.size(); ++q) {
    const Point& x = im.points[q];
    double v = 0.0;
    if (halving) {
      v = im.weights[q] * g(Point{2.0 * x[0], 2.0 * x[1], 2.0 * x[2]});
    } else {
      for_each_upper_point(space.mesh, im.inner, x, [&](int, const Point& y, double w) {
        v += w * im.beta.density(pair_variables(x, y)) * im.gamma(y) * g(y);
      });
      v *= im.weights[q];
    }
    const int e = im.elements[q];
    space.element.values(im.maps[e](x), phi);
    auto ed = space.dofs.element_dofs(e);
    for (std::size_t a = 0; a < ed.size(); ++a) out[ed[a]] += v * phi[a];
  }
  return out;
}

void write_triplets(std::ostream& os, const SparseMatrix& m) {
  char buf[96];
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()), static_cast<long>(it.col()),
                    it.value());
      os << buf;
    }
}

void write_triplets(std::ostream& os, const Eigen::MatrixXd& m) {
  char buf[96];
  for (long c = 0; c < m.cols(); ++c)
    for (long r = 0; r < m.rows(); ++r) {
      if (m(r, c) == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", r, c, m(r, c));
      os << buf;
    }
}

}  // namespace fragfem
