#pragma once

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "fragfem/assembly.hpp"
#include "fragfem/basis.hpp"

namespace testutil {

inline fragfem::DomainBox box(int dim, double lo, double hi) {
  fragfem::DomainBox b;
  b.dim = dim;
  for (int k = 0; k < dim; ++k) {
    b.lower[k] = lo;
    b.upper[k] = hi;
  }
  for (int k = dim; k < 3; ++k) b.lower[k] = b.upper[k] = 0.0;
  return b;
}

inline fragfem::GridSpec grid(int dim, int n, fragfem::Grading g = fragfem::Grading::Uniform) {
  return {{n, n, dim == 3 ? n : 1}, g};
}

inline Eigen::VectorXd interpolate(const fragfem::FeSpace& sp, const std::function<double(const fragfem::Point&)>& f) {
  Eigen::VectorXd v(sp.num_dofs());
  for (int i = 0; i < sp.num_dofs(); ++i) v[i] = f(sp.dofs.coordinates[i]);
  return v;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testutil
