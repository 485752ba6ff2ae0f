#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fragfem/basis.hpp"
#include "fragfem/model.hpp"

namespace fragfem {

enum class GainMethod { Auto, Exchanged, Direct };

struct AssemblyOptions {
  int mass_degree = -1;       // default 2r
  int selection_degree = -1;  // default 2r+2
  int gain_degree = -1;       // default 2r+d+gain_extra (exchanged), 2r+2 (direct outer, delta)
  int gain_extra = 6;
  int inner_degree = -1;      // direct path inner rule, default 2r+2
  int workers = 0;            // 0: FRAGFEM_THREADS or hardware
  GainMethod method = GainMethod::Auto;
  bool flip_gain_sign = false;  // fault injection for negative controls
};

struct AssemblyInfo {
  std::string mesh_id;
  int degree = 1;
  int mass_degree = 0;
  int selection_degree = 0;
  int gain_degree = 0;
  int inner_degree = 0;
  std::string gain_path;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct SystemMatrices {
  SparseMatrix M;
  SparseMatrix A;
  Eigen::MatrixXd B;
  AssemblyInfo info;
};

/// Describes the mesh in one line, e.g. "2d 20x20 geometric [1e-09,2]".
std::string mesh_id(const Mesh& mesh);

SparseMatrix assemble_mass(const FeSpace& space, int degree = -1);
SparseMatrix assemble_selection(const FeSpace& space, const SelectionFn& gamma, int degree = -1);

/// Smooth kernel. Parent-only kernels use the exchanged order unless
/// options.method is Direct.
Eigen::MatrixXd assemble_gain_smooth(const FeSpace& space, const FragmentationKernel& beta,
                                     const SelectionFn& gamma, const AssemblyOptions& options = {});
/// Halving kernel: B_ji = 2^(d+1) int_{2x in D} phi_j(x) Gamma(2x) phi_i(2x) dx.
Eigen::MatrixXd assemble_gain_delta(const FeSpace& space, const SelectionFn& gamma, const AssemblyOptions& options = {});

SystemMatrices assemble_system(const FeSpace& space, const SelectionFn& gamma, const FragmentationKernel& beta,
                               const AssemblyOptions& options = {});

/// Gain applied to a function: F_j = int phi_j(x) int_{y in D, y >= x} beta(x|y) Gamma(y) g(y) dy dx.
class GainLoad {
 public:
  GainLoad(const FeSpace& space, const FragmentationKernel& beta, const SelectionFn& gamma,
           const AssemblyOptions& options = {});
  ~GainLoad();
  GainLoad(const GainLoad&) = delete;
  GainLoad& operator=(const GainLoad&) = delete;

  Eigen::VectorXd operator()(const std::function<double(const Point&)>& g) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Element quadrature of (f, phi_j).
Eigen::VectorXd load_vector(const FeSpace& space, const std::function<double(const Point&)>& f, int degree = -1);

/// Plain-text "row col value" lines with 17 significant digits.
void write_triplets(std::ostream& os, const SparseMatrix& m);
void write_triplets(std::ostream& os, const Eigen::MatrixXd& m);

}  // namespace fragfem
