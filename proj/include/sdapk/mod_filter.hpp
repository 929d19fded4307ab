#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sdapk/apk_basis.hpp"
#include "sdapk/ref_geom.hpp"

namespace sdapk {

using Field2 = std::function<double(double, double)>;

enum class FilterKind { Identity, Exponential, Cosine, Natural };

struct FilterProfile {
  FilterKind kind = FilterKind::Identity;
  // exponential
  double alpha_f = 0;
  double p_f = 2;
  // natural
  int p = 2;
  double epsilon = 0;
  double dt = 0;
  double gamma_filter = 2;
  bool approximate = false;  // exp(-eps dt (m+l)^{2p}) instead of the exact eigenvalue form

  static FilterProfile identity() { return {}; }
  static FilterProfile exponential(double alpha_f, double p_f);
  static FilterProfile cosine();
  static FilterProfile natural(int p, double epsilon, double dt, double gamma_filter);

  // damping factor of mode idx in an expansion of the given degree
  double sigma(MultiIndex idx, int basis_degree) const;
};

double sigma_exponential(double eta, double alpha_f, double p_f);
double sigma_cosine(double eta);
double natural_filter(MultiIndex idx, double epsilon, double dt, int p, double gamma_filter);
double viscosity_strength(double c, double h, int N, int p);

// diagonal of M_sigma in basis order
std::vector<double> build_filter_matrix(const ApkBasis& basis, const FilterProfile& profile);

struct SeriesExpansion {
  ApkBasis basis;
  std::vector<double> coeffs;

  double eval(double x, double y) const;
};

SeriesExpansion project(const Field2& f, const ApkBasis& basis, const QuadRule& quad);
SeriesExpansion apply_filter(const SeriesExpansion& u, const FilterProfile& profile);
// weighted L2 norm squared, using the basis norms
double weighted_norm_sq(const SeriesExpansion& u, int quad_order);

struct ErrorStudyRow {
  int N = 0;
  std::string region;
  double max_error = 0;
  double x = 0, y = 0;
  double fitted_exponent = 0;
  double fitted_constant = 0;
};

struct ErrorStudyOptions {
  int grid = 200;         // lattice points per edge
  int quad_extra = 20;    // projection rule exactness 2N + quad_extra
  double rate = 1.25;     // nominal decay rate for the bound constant
  int fit_from = 2;       // fits skip smaller N
  bool all_regions = true;
};

struct PowerFit {
  double exponent = 0;
  double constant = 0;
};

// least squares fit of log e = log K - r log N
PowerFit fit_power_law(const std::vector<int>& Ns, const std::vector<double>& errs);
// smallest K with e(N) <= K / N^rate for every sample
double envelope_constant(const std::vector<int>& Ns, const std::vector<double>& errs, double rate);

struct ErrorPeak {
  double value = 0;
  double x = 0, y = 0;
};

// largest interior local maximum of |g| on a barycentric lattice, refined
ErrorPeak interior_peak(const Field2& g, int grid);

std::vector<ErrorStudyRow> error_study(const Field2& f, const ApkParams& prm, const FilterProfile& profile,
                                       const std::vector<int>& Ns, const ErrorStudyOptions& opt = {});

}  // namespace sdapk
