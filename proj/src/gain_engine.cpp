#include "fragfem/gain_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fragfem/geometry.hpp"
#include "fragfem/quadrature.hpp"
#include "fragfem/threading.hpp"

namespace fragfem {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::array<double, 4> kuhn_barycentric(const Point& eta, const Index3& perm, int dim) {
  std::array<double, 4> l{0.0, 0.0, 0.0, 0.0};
  l[0] = 1.0 - eta[perm[0]];
  for (int k = 1; k < dim; ++k) l[k] = eta[perm[k - 1]] - eta[perm[k]];
  l[dim] = eta[perm[dim - 1]];
  return l;
}

// eta(s) = (q^s - 1)/(q - 1) and its derivative; identity for q <= 1.
struct AxisMap {
  double lq = 0.0, den = 1.0;
  explicit AxisMap(double q) {
    if (q > 1.0) {
      lq = std::log(q);
      den = std::expm1(lq);
    }
  }
  double eta(double s) const { return lq == 0.0 ? s : std::expm1(s * lq) / den; }
  double deta(double s) const { return lq == 0.0 ? 1.0 : lq * std::exp(s * lq) / den; }
};

void reference_rule(const Mesh& mesh, int degree, double ratio, std::vector<Point>& points,
                    std::vector<double>& weights, std::vector<int>& simplex_of) {
  const int d = mesh.dim();
  const QuadratureRule ordered = ordered_simplex_quadrature(d, degree);
  const AxisMap map(ratio);
  for (int s = 0; s < mesh.simplices_per_cell(); ++s) {
    const Index3& perm = mesh.permutation(s);
    for (std::size_t q = 0; q < ordered.size(); ++q) {
      Point eta{0.0, 0.0, 0.0};
      double w = ordered.weights[q];
      for (int k = 0; k < d; ++k) {
        eta[perm[k]] = map.eta(ordered.points[q][k]);
        w *= map.deta(ordered.points[q][k]);
      }
      points.push_back(eta);
      weights.push_back(w);
      simplex_of.push_back(s);
    }
  }
}

}  // namespace

double common_cell_ratio(const Mesh& mesh) {
  double q = 0.0;
  for (int k = 0; k < mesh.dim(); ++k) {
    const auto& lines = mesh.lines(k);
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
      if (!(lines[i] > 0.0)) return 0.0;
      const double r = lines[i + 1] / lines[i];
      if (q == 0.0)
        q = r;
      else if (std::abs(r - q) > 1e-9 * q)
        return 0.0;
    }
  }
  return q > 1.0 + 1e-9 ? q : 0.0;
}

double select_cell_ratio(const FeSpace& space, int degree, const std::function<double(const Point&)>& k) {
  const Mesh& mesh = space.mesh;
  const double q = common_cell_ratio(mesh);
  if (q == 0.0) return 1.0;
  const int d = mesh.dim();
  const int pdeg = 2 * space.degree() + d;
  auto poly = [&](const Point& eta) {
    double s = 1.0;
    for (int a = 0; a < d; ++a) s += (a + 1) * eta[a];
    return std::pow(s, pdeg);
  };

  // samples: the diagonal cells and the cells along the first axis
  std::vector<int> cells;
  int n = mesh.cells(0);
  for (int a = 1; a < d; ++a) n = std::min(n, mesh.cells(a));
  for (int i = 0; i < n; ++i) cells.push_back(mesh.cell_id(Index3{i, d > 1 ? i : 0, d > 2 ? i : 0}));
  for (int i = 1; i < mesh.cells(0); ++i) cells.push_back(mesh.cell_id(Index3{i, 0, 0}));

  // The linear rule is kept when it already integrates k * poly exactly (a
  // polynomial payload); rational payloads are smooth in the log variable.
  std::vector<Point> pts[2];
  std::vector<double> wts[2];
  const int degrees[2] = {degree, std::min(degree + 6, kMaxSimplexDegree)};
  for (int m = 0; m < 2; ++m) {
    std::vector<int> simplex_of;
    reference_rule(mesh, degrees[m], 1.0, pts[m], wts[m], simplex_of);
  }
  for (int c : cells) {
    const Point lo = mesh.cell_lower(c), w = mesh.cell_width(c);
    double sum[2] = {0.0, 0.0}, mag = 0.0;
    for (int m = 0; m < 2; ++m)
      for (std::size_t p = 0; p < pts[m].size(); ++p) {
        Point y{0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) y[a] = lo[a] + pts[m][p][a] * w[a];
        const double v = wts[m][p] * k(y) * poly(pts[m][p]);
        sum[m] += v;
        if (m == 1) mag += std::abs(v);
      }
    if (std::abs(sum[0] - sum[1]) > 1e-12 * mag) return q;
  }
  return 1.0;
}

CumulativeGain::CumulativeGain(const FeSpace& space, int degree, double cell_ratio)
    : space_(&space), degree_(degree), ratio_(cell_ratio > 1.0 ? cell_ratio : 1.0), dim_(space.dim()),
      nloc_(space.dofs.nodes_per_cell) {
  const Mesh& mesh = space.mesh;
  const ReferenceElement& el = space.element;
  const int d = dim_;
  const int spc = mesh.simplices_per_cell();
  std::vector<int> simplex_of;
  reference_rule(mesh, degree, ratio_, ref_points_, ref_weights_, simplex_of);
  const int npts = points_per_cell();

  phi_ = Eigen::MatrixXd::Zero(npts, nloc_);
  std::vector<double> vals(el.num_nodes());
  for (int p = 0; p < npts; ++p) {
    const int s = simplex_of[p];
    el.values(kuhn_barycentric(ref_points_[p], mesh.permutation(s), d), vals.data());
    const auto& e2c = space.dofs.element_to_cell_local[s];
    for (int n = 0; n < el.num_nodes(); ++n) phi_(p, e2c[n]) = vals[n];
  }

  std::vector<Simplex> cell_simplices(spc);
  for (int s = 0; s < spc; ++s) {
    cell_simplices[s].dim = d;
    auto off = mesh.kuhn_vertex_offsets(s);
    for (int v = 0; v <= d; ++v)
      for (int k = 0; k < 3; ++k) cell_simplices[s].v[v][k] = off[v][k];
  }
  std::vector<BarycentricMap> bary;
  for (const auto& s : cell_simplices) bary.emplace_back(s);
  const QuadratureRule exact_rule = simplex_quadrature(d, el.degree());

  const int nsub = 1 << d;
  key_of_.assign(nsub, std::vector<int>(npts, 0));
  num_keys_.assign(nsub, 0);
  ref_integrals_.resize(nsub);
  std::vector<Point> qp;
  std::vector<double> qw;
  for (int mask = 0; mask < nsub; ++mask) {
    std::map<Point, int> keys;
    std::vector<Point> key_values;
    for (int p = 0; p < npts; ++p) {
      Point key{0.0, 0.0, 0.0};
      for (int k = 0; k < d; ++k)
        if (mask >> k & 1) key[k] = ref_points_[p][k];
      auto [it, inserted] = keys.emplace(key, static_cast<int>(key_values.size()));
      if (inserted) key_values.push_back(key);
      key_of_[mask][p] = it->second;
    }
    num_keys_[mask] = static_cast<int>(key_values.size());
    RowMatrix& ref = ref_integrals_[mask];
    ref = RowMatrix::Zero(num_keys_[mask], nloc_);
    for (int kk = 0; kk < num_keys_[mask]; ++kk) {
      std::vector<std::pair<Point, double>> planes;
      for (int k = 0; k < d; ++k)
        if (mask >> k & 1) {
          Point n{0.0, 0.0, 0.0};
          n[k] = 1.0;
          planes.emplace_back(n, key_values[kk][k]);
        }
      for (int s = 0; s < spc; ++s) {
        const auto& e2c = space.dofs.element_to_cell_local[s];
        for (const Simplex& piece : clip_all(cell_simplices[s], planes)) {
          qp.clear();
          qw.clear();
          map_rule(piece, exact_rule, qp, qw);
          for (std::size_t q = 0; q < qp.size(); ++q) {
            el.values(bary[s](qp[q]), vals.data());
            for (int n = 0; n < el.num_nodes(); ++n) ref(kk, e2c[n]) += qw[q] * vals[n];
          }
        }
      }
    }
  }
}

void CumulativeGain::cell_points(int c, std::vector<Point>& points, std::vector<double>& weights) const {
  const Mesh& mesh = space_->mesh;
  const Point lo = mesh.cell_lower(c), w = mesh.cell_width(c);
  const double vol = mesh.cell_measure(c);
  points.resize(ref_points_.size());
  weights.resize(ref_points_.size());
  for (std::size_t p = 0; p < ref_points_.size(); ++p) {
    Point y{0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) y[k] = lo[k] + ref_points_[p][k] * w[k];
    points[p] = y;
    weights[p] = ref_weights_[p] * vol;
  }
}

std::vector<Point> CumulativeGain::all_points() const {
  std::vector<Point> all, pts;
  std::vector<double> w;
  const int nc = space_->mesh.num_cells();
  all.reserve(static_cast<std::size_t>(nc) * ref_points_.size());
  for (int c = 0; c < nc; ++c) {
    cell_points(c, pts, w);
    all.insert(all.end(), pts.begin(), pts.end());
  }
  return all;
}

Eigen::MatrixXd CumulativeGain::assemble(const std::vector<double>& kernel, int workers) const {
  const Mesh& mesh = space_->mesh;
  const int npts = points_per_cell();
  const int m = space_->num_dofs();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  Payload payload;
  payload.columns = [this](int c, std::vector<int>& cols) {
    auto cd = space_->dofs.cell_dofs(c);
    cols.assign(cd.begin(), cd.end());
  };
  payload.values = [&, this](int c, std::vector<double>& vals) {
    const double vol = mesh.cell_measure(c);
    vals.resize(static_cast<std::size_t>(npts) * nloc_);
    const double* kc = kernel.data() + static_cast<std::size_t>(c) * npts;
    for (int p = 0; p < npts; ++p) {
      const double s = kc[p] * ref_weights_[p] * vol;
      for (int l = 0; l < nloc_; ++l) vals[static_cast<std::size_t>(p) * nloc_ + l] = s * phi_(p, l);
    }
  };
  parallel_ranges(m, resolve_workers(workers), [&](long lo, long hi) {
    contract(payload, out, static_cast<int>(lo), static_cast<int>(hi));
  });
  return out;
}

Eigen::MatrixXd CumulativeGain::apply(const Eigen::MatrixXd& values) const {
  const Mesh& mesh = space_->mesh;
  const int npts = points_per_cell();
  const int ncol = static_cast<int>(values.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(space_->num_dofs(), ncol);
  Payload payload;
  payload.columns = [ncol](int, std::vector<int>& cols) {
    cols.resize(ncol);
    for (int j = 0; j < ncol; ++j) cols[j] = j;
  };
  payload.values = [&, this](int c, std::vector<double>& vals) {
    const double vol = mesh.cell_measure(c);
    vals.resize(static_cast<std::size_t>(npts) * ncol);
    for (int p = 0; p < npts; ++p) {
      const double w = ref_weights_[p] * vol;
      for (int j = 0; j < ncol; ++j)
        vals[static_cast<std::size_t>(p) * ncol + j] = w * values(static_cast<long>(c) * npts + p, j);
    }
  };
  contract(payload, out, 0, ncol);
  return out;
}

void CumulativeGain::contract(const Payload& payload, Eigen::MatrixXd& out, int col_lo, int col_hi) const {
  const Mesh& mesh = space_->mesh;
  const DofMap& dm = space_->dofs;
  const int d = dim_;
  const int npts = points_per_cell();
  std::vector<int> compact(out.cols(), -1);
  std::vector<int> cols, slab_cols;
  std::vector<double> vals, tmp;

  for (int mask = 0; mask < (1 << d); ++mask) {
    std::vector<int> fixed, free;
    for (int k = 0; k < d; ++k) (mask >> k & 1 ? fixed : free).push_back(k);
    const int m = static_cast<int>(free.size());
    const int nkeys = num_keys_[mask];
    const std::vector<int>& key = key_of_[mask];
    const RowMatrix& ref = ref_integrals_[mask];

    // rest[l] = number of cells spanned by the free axes after level l
    std::vector<long> rest(m + 1, 1);
    for (int l = 0; l < m; ++l) {
      rest[l] = 1;
      for (int k = l + 1; k < m; ++k) rest[l] *= mesh.cells(free[k]);
    }
    long free_cells = 1;
    for (int k : free) free_cells *= mesh.cells(k);
    long slabs = 1;
    for (int k : fixed) slabs *= mesh.cells(k);

    for (long s = 0; s < slabs; ++s) {
      Index3 ci{0, 0, 0};
      long rem = s;
      for (int k : fixed) {
        ci[k] = static_cast<int>(rem % mesh.cells(k));
        rem /= mesh.cells(k);
      }
      auto set_free = [&](long f, int from_level) {
        // decodes f over free[from_level..m-1], first axis slowest
        for (int l = m - 1; l >= from_level; --l) {
          ci[free[l]] = static_cast<int>(f % mesh.cells(free[l]));
          f /= mesh.cells(free[l]);
        }
      };

      slab_cols.clear();
      for (long f = 0; f < free_cells; ++f) {
        set_free(f, 0);
        payload.columns(mesh.cell_id(ci), cols);
        for (int col : cols)
          if (col >= col_lo && col < col_hi && compact[col] == -1) {
            compact[col] = -2;
            slab_cols.push_back(col);
          }
      }
      if (slab_cols.empty()) continue;
      std::sort(slab_cols.begin(), slab_cols.end());
      const int ncs = static_cast<int>(slab_cols.size());
      for (int i = 0; i < ncs; ++i) compact[slab_cols[i]] = i;
      const long blk = static_cast<long>(nkeys) * ncs;

      auto add_cell = [&](int c, double* dst) {
        payload.columns(c, cols);
        payload.values(c, vals);
        const int nc = static_cast<int>(cols.size());
        for (int p = 0; p < npts; ++p) {
          double* row = dst + static_cast<long>(key[p]) * ncs;
          const double* v = vals.data() + static_cast<long>(p) * nc;
          for (int jl = 0; jl < nc; ++jl) {
            const int jc = compact[cols[jl]];
            if (jc >= 0) row[jc] += v[jl];
          }
        }
      };

      std::vector<double> t(static_cast<std::size_t>(ncs));
      auto visit = [&](const double* sum) {
        bool any = false;
        for (long q = 0; q < blk && !any; ++q) any = sum[q] != 0.0;
        if (!any) return;
        const int c = mesh.cell_id(ci);
        const double vol = mesh.cell_measure(c);
        auto cd = dm.cell_dofs(c);
        for (int l = 0; l < nloc_; ++l) {
          std::fill(t.begin(), t.end(), 0.0);
          for (int kk = 0; kk < nkeys; ++kk) {
            const double a = ref(kk, l);
            if (a == 0.0) continue;
            const double* srow = sum + static_cast<long>(kk) * ncs;
            for (int jc = 0; jc < ncs; ++jc) t[jc] += a * srow[jc];
          }
          const long row = cd[l];
          for (int jc = 0; jc < ncs; ++jc) out(row, slab_cols[jc]) += vol * t[jc];
        }
      };

      if (m == 0) {
        tmp.assign(blk, 0.0);
        add_cell(mesh.cell_id(ci), tmp.data());
        visit(tmp.data());
      } else {
        std::vector<std::vector<double>> buf(m);
        for (int l = 0; l < m; ++l) buf[l].assign(rest[l] * blk, 0.0);
        // buf[l] holds, over the axes after level l, the sum of the level-l
        // input over indices strictly above the current one on axis free[l]
        auto run = [&](auto&& self, int level) -> void {
          const int axis = free[level];
          std::vector<double>& b = buf[level];
          std::fill(b.begin(), b.end(), 0.0);
          for (int i = mesh.cells(axis) - 1; i >= 0; --i) {
            ci[axis] = i;
            if (level == m - 1)
              visit(b.data());
            else
              self(self, level + 1);
            ci[axis] = i;
            if (level == 0) {
              for (long r = 0; r < rest[0]; ++r) {
                set_free(r, 1);
                add_cell(mesh.cell_id(ci), b.data() + r * blk);
              }
            } else {
              const double* in = buf[level - 1].data() + static_cast<long>(i) * rest[level] * blk;
              const long len = rest[level] * blk;
              for (long q = 0; q < len; ++q) b[q] += in[q];
            }
          }
        };
        run(run, 0);
      }
      for (int col : slab_cols) compact[col] = -1;
    }
  }
}

}  // namespace fragfem
