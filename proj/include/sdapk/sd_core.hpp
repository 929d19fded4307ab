#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdapk/apk_basis.hpp"
#include "sdapk/mod_filter.hpp"
#include "sdapk/ref_geom.hpp"

namespace sdapk {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DiscretizationOps {
  int N = 0;
  ApkParams params;
  RefNodeSets nodes;
  MatrixXd V;       // K_F x K_F, basis k at flux point j
  MatrixXd Vinv;
  double cond = 0;  // 2-norm condition number of V
  MatrixXd Dxi, Deta;        // K_s x K_F basis derivatives at solution points
  MatrixXd E;                // K_F x K_s Lagrange extension to flux points
  MatrixXd DxiLag, DetaLag;  // K_s x K_F, D V^{-1} computed in a well conditioned basis
  MatrixXd Vsol_inv;         // solution values -> degree-N modal coefficients

  std::size_t Ks() const { return nodes.Ks(); }
  std::size_t Kf() const { return nodes.Kf(); }
};

DiscretizationOps build_ops(const ApkParams& prm, int N);
MatrixXd apk_vandermonde(const ApkBasis& basis, const std::vector<Point2>& pts);
double vandermonde_condition(const ApkParams& prm, int N);
// monomial basis at the same flux points
double lagrange_reference_condition(int N);

// Scalar flux F(u) = c2 u^2 + c1 u + c0 per component, or a general callable.
struct Flux {
  enum class Kind { Quadratic, General } kind = Kind::Quadratic;
  Point2 c0{}, c1{}, c2{};
  std::function<Point2(double)> general;
  int samples = 257;

  Point2 operator()(double u) const;
  static Flux linear(Point2 a);
  static Flux burgers();
  static Flux from_function(std::function<Point2(double)> f, int samples = 257);
};

struct GodunovResult {
  double H = 0;
  double u_star = 0;
  bool own = true;  // extremum attained at the own trace (ties included)
};

GodunovResult godunov_flux(double u_minus, double u_plus, Point2 n, const Flux& F);

enum class TangentialMode { Upwind, Own };
// Selector reproduces the printed connectivity matrices; Conservative imposes
// the Godunov normal flux on both edges through a vertex.
enum class VertexRule { Selector, Conservative };

Point2 edge_numerical_flux(double u_own, double u_nb, Point2 n, Point2 t, const Flux& F,
                           TangentialMode mode = TangentialMode::Upwind);
// flux point shared by two edges of the same cell
Point2 vertex_numerical_flux(double u_own, double u_a, Point2 n_a, Point2 t_a, double u_b, Point2 n_b, Point2 t_b,
                             const Flux& F, VertexRule rule = VertexRule::Conservative);

// Linear-flux version of the rule: F_nu = sum_j C(nu, j) u_j over sources
// j = own, neighbour across edges[0], neighbour across edges[1].
struct FluxStencil {
  std::array<int, 2> edges{kNoEdge, kNoEdge};
  Eigen::Matrix<double, 2, 3> C = Eigen::Matrix<double, 2, 3>::Zero();
};
FluxStencil linear_flux_stencil(const FluxPointTag& tag, Point2 a, const std::array<Point2, 3>& normals,
                                const std::array<Point2, 3>& tangents, TangentialMode mode = TangentialMode::Upwind,
                                VertexRule rule = VertexRule::Selector);

// Filtered operators D diag(sigma) V^{-1}.
struct FilteredOps {
  MatrixXd Bxi, Beta;
};
FilteredOps filtered_operators(const DiscretizationOps& ops, const std::vector<double>& sigma);

VectorXd cell_residual(const DiscretizationOps& ops, const AffineMap& T, const VectorXd& F1, const VectorXd& F2,
                       const FilteredOps* filter = nullptr);

double indicator_value(const DiscretizationOps& ops, const VectorXd& u);
double default_indicator_threshold(int N);
bool shock_indicator(const DiscretizationOps& ops, const VectorXd& u, double threshold);

double time_step(double C_fix, int N, double h, double lambda_max);

using RhsFn = std::function<void(const MatrixXd& u, double t, MatrixXd& du)>;
// one 5-stage 2N-storage RK4 step
void rk_step(MatrixXd& u, double t, double dt, const RhsFn& rhs);

struct Problem {
  std::string name;
  Flux flux;
  Field2 u0;
  std::function<double(double, double, double)> exact;  // empty when unknown
  double lambda_max = 1;
};

Problem advection_problem(double psi);
Problem burgers_problem();

struct FilterSettings {
  bool enabled = false;
  int p = 2;
  double c = 8;
  double gamma_filter = std::numeric_limits<double>::quiet_NaN();  // NaN: basis gamma
  bool use_indicator = false;
  double threshold = std::numeric_limits<double>::quiet_NaN();     // NaN: default
  bool approximate = false;
};

struct RunConfig {
  ApkParams params;
  int N = 3;
  FilterSettings filter;
  double C_fix = 0.5;
  double t_end = 0.5;
  TangentialMode mode = TangentialMode::Upwind;
  VertexRule vertex_rule = VertexRule::Conservative;
  double blowup_bound = 1e3;
  bool with_exact = true;
};

struct DiagnosticsRow {
  double t = 0, min = 0, max = 0, L1 = 0, L2 = 0, Linf = 0, wall_ms = 0;
};

struct SolveResult {
  MatrixXd U;  // K_s x cells
  double t = 0;
  double dt = 0;
  int steps = 0;
  bool blew_up = false;
  double last_finite_t = 0;
  int offending_cell = -1;
  std::vector<DiagnosticsRow> diagnostics;
};

class SdSolver {
 public:
  SdSolver(const TriMesh& mesh, Problem problem, RunConfig cfg);

  const DiscretizationOps& ops() const { return ops_; }
  const TriMesh& mesh() const { return mesh_; }
  double dt() const { return dt_; }

  MatrixXd initial_state() const;
  MatrixXd interpolate(const Field2& f) const;
  void residual(const MatrixXd& U, MatrixXd& R) const;
  Point2 solution_point(std::size_t cell, std::size_t j) const;

  struct Norms {
    double L1 = 0, L2 = 0, Linf = 0;
  };
  Norms error_norms(const MatrixXd& U, double t) const;
  Norms error_norms(const MatrixXd& U, const Field2& exact) const;
  // domain integral of u by per-cell quadrature
  double integral(const MatrixXd& U) const;

  SolveResult run(const std::function<void(const DiagnosticsRow&)>& on_step = {}) const;

 private:
  TriMesh mesh_;
  Problem problem_;
  RunConfig cfg_;
  DiscretizationOps ops_;
  double dt_ = 0;
  std::vector<std::array<Point2, 3>> normals_, tangents_;
  // per cell, per flux point, per edge: neighbour flux point index or -1
  std::vector<std::vector<std::array<int, 3>>> nb_index_;
  std::vector<int> filter_group_;  // per cell, index into filtered_
  std::vector<FilteredOps> filtered_;
  double threshold_ = 0;
  MatrixXd quad_interp_;  // solution values -> quadrature points
  QuadRule quad_;
};

double eoc(double e_coarse, double e_fine, double r_coarse, double r_fine);

}  // namespace sdapk
