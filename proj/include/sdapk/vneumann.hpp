#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "sdapk/eigsolve.hpp"
#include "sdapk/sd_core.hpp"

namespace sdapk {

struct StabilityCase {
  double psi = 0;
  double wx = 0, wy = 0;
};

// psi on n_psi points of [0, pi/2], wave numbers on n_w points of [-pi, pi]
std::vector<StabilityCase> case_grid(int n_psi = 5, int n_w = 5);

// Source of each flux-point flux component on the reference pattern cell.
enum SourceCode { kOwn = 0, kLeft = 1, kBottom = 2, kTop = 3 };

struct Connectivity {
  std::array<std::vector<int>, 2> src;  // per component, per flux point
  // 0/1 diagonals M[nu][code], code in {own, left, bottom}
  std::array<std::array<Eigen::VectorXd, 3>, 2> M;
};

// Built from the linear flux stencil with a = (1,1)/sqrt(2); throws when a
// component is not attributed to exactly one source.
Connectivity connectivity_matrices(const RefNodeSets& nodes, TangentialMode mode = TangentialMode::Upwind,
                                   VertexRule rule = VertexRule::Selector);

struct PhaseMatrices {
  Eigen::VectorXcd left, bottom;  // diagonals of T_{-1,0} and T_{0,-1}
};
PhaseMatrices phase_matrices(const StabilityCase& c, const std::vector<Point2>& flux_points);

struct StabilityOps {
  Eigen::MatrixXd Bxi, Beta;  // K_s x K_F, derivative of the flux interpolant
  Eigen::MatrixXd E;          // K_F x K_s
  Connectivity conn;
  std::vector<Point2> flux_points;
};

// lagrange = true uses D^Lag; false forms D V^{-1} in the APK basis itself
StabilityOps stability_ops(const DiscretizationOps& ops, bool lagrange = true);

struct FilteredStabilitySettings {
  int p = 2;
  double c = 8;
  double h = std::sqrt(2.0) / 6.0;
  double C_fix = 0.5;
  double lambda_max = 1;
  double gamma_filter = std::numeric_limits<double>::quiet_NaN();  // NaN: basis gamma
  bool approximate = false;
};
StabilityOps filtered_stability_ops(const DiscretizationOps& ops, const FilteredStabilitySettings& s);
// damping diagonal used by filtered_stability_ops
std::vector<double> stability_filter_sigma(const DiscretizationOps& ops, const FilteredStabilitySettings& s);

Eigen::MatrixXcd assemble_S(const StabilityCase& c, const StabilityOps& so);

struct EigMax {
  double L = 0;
  cplx lambda{};
};
EigMax max_real_eig(const Eigen::MatrixXcd& S);

struct StabilityResult {
  double L = -std::numeric_limits<double>::infinity();
  StabilityCase argmax;
  cplx lambda{};
};
StabilityResult stability_L(const StabilityOps& so, const std::vector<StabilityCase>& cases);

struct SweepRow {
  double alpha = 0, beta = 0, gamma = 0;
  int p = 0;
  double c = 0;
  double L = 0;
  double psi = 0, wx = 0, wy = 0;
};

struct SweepSpec {
  int N = 3;
  std::vector<ApkParams> tuples;
  bool filtered = false;
  std::vector<int> p_values{2};
  std::vector<double> c_values{8};
  FilteredStabilitySettings base;  // p and c overwritten per row
  bool lagrange = true;            // unfiltered path
  std::vector<StabilityCase> cases = case_grid();
  std::string checkpoint;          // empty: none
};

// alpha, beta on lo:step:hi, gamma on alpha+beta:step:gamma_max
std::vector<ApkParams> parameter_grid(double ab_lo, double ab_hi, double ab_step, double gamma_max, double gamma_step);

// Rows in (tuple, p, c) order.  With a checkpoint file, finished rows are read
// back and new rows are appended as they complete.
std::vector<SweepRow> sweep(const SweepSpec& spec);

std::string sweep_csv_header();
std::string sweep_csv_line(const SweepRow& r);

}  // namespace sdapk
