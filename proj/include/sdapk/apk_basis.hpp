#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sdapk {

struct ApkParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 2.0;

  // exponent of the (1-x-y) weight factor
  double p() const { return gamma - alpha - beta; }
  bool valid() const;
  void validate() const;  // throws std::invalid_argument
};

struct MultiIndex {
  int m = 0;
  int l = 0;
  int degree() const { return m + l; }
  bool operator==(const MultiIndex&) const = default;
};

// Value plus first and second partials in (x, y).  Enough forward-mode
// differentiation to assemble D A without dividing by (1-x).
struct Jet2 {
  double v = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;

  static Jet2 constant(double c) { return {c, 0, 0, 0, 0, 0}; }
  static Jet2 var_x(double x0) { return {x0, 1, 0, 0, 0, 0}; }
  static Jet2 var_y(double y0) { return {y0, 0, 1, 0, 0, 0}; }
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator*(double s, const Jet2& a);

double jacobi_eval(int n, double a, double b, double x);
// order 1 or 2
double jacobi_deriv(int n, double a, double b, double x, int order);

// Homogenised Jacobi value r^n P_n^{a,b}(s/r), polynomial in (s, r).
Jet2 jacobi_homog(int n, double a, double b, const Jet2& s, const Jet2& r);

double apk_eval(const ApkParams& prm, MultiIndex idx, double x, double y);
std::pair<double, double> apk_grad(const ApkParams& prm, MultiIndex idx, double x, double y);
Jet2 apk_jet(const ApkParams& prm, MultiIndex idx, double x, double y);
double apply_D(const ApkParams& prm, MultiIndex idx, double x, double y);

double eigenvalue(MultiIndex idx, double gamma);
double pochhammer(double xi, int j);
// Gamma(xi+s)/Gamma(xi) for real s
double rising_real(double xi, double s);

double norm_squared(const ApkParams& prm, MultiIndex idx, int quad_order);
// closed-form weighted norm; only meaningful for m >= 1
double norm_squared_closed(const ApkParams& prm, MultiIndex idx);

bool in_unit_triangle(double x, double y, double tol = 1e-12);

class ApkBasis {
 public:
  ApkBasis(ApkParams prm, int degree);

  const ApkParams& params() const { return prm_; }
  int degree() const { return degree_; }
  std::size_t size() const { return order_.size(); }
  const std::vector<MultiIndex>& ordering() const { return order_; }
  MultiIndex at(std::size_t k) const { return order_[k]; }
  std::size_t index_of(MultiIndex idx) const;

  static std::size_t count(int degree) {
    return static_cast<std::size_t>((degree + 1) * (degree + 2) / 2);
  }

 private:
  ApkParams prm_;
  int degree_;
  std::vector<MultiIndex> order_;
};

}  // namespace sdapk
