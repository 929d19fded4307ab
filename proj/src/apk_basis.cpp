#include "sdapk/apk_basis.hpp"

#include <cmath>
#include <sstream>

#include "sdapk/ref_geom.hpp"

namespace sdapk {

bool ApkParams::valid() const {
  return alpha > 0 && beta > 0 && gamma > alpha + beta - 1;
}

void ApkParams::validate() const {
  if (!valid()) {
    std::ostringstream os;
    os << "invalid APK parameters (" << alpha << ", " << beta << ", " << gamma
       << "): need alpha > 0, beta > 0, gamma > alpha + beta - 1";
    throw std::invalid_argument(os.str());
  }
}

Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.v + b.v, a.x + b.x, a.y + b.y, a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}

Jet2 operator-(const Jet2& a, const Jet2& b) {
  return {a.v - b.v, a.x - b.x, a.y - b.y, a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v,
          a.x * b.v + a.v * b.x,
          a.y * b.v + a.v * b.y,
          a.xx * b.v + 2 * a.x * b.x + a.v * b.xx,
          a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy,
          a.yy * b.v + 2 * a.y * b.y + a.v * b.yy};
}

Jet2 operator*(double s, const Jet2& a) {
  return {s * a.v, s * a.x, s * a.y, s * a.xx, s * a.xy, s * a.yy};
}

namespace {

// P_n = ((c1 t + c0) P_{n-1} - c2 P_{n-2}) / d
struct RecCoef {
  double c1, c0, c2, d;
};

RecCoef rec_coef(int n, double a, double b) {
  const double s = 2.0 * n + a + b;
  return {(s - 1) * s * (s - 2), (s - 1) * (a * a - b * b),
          2 * (n + a - 1) * (n + b - 1) * s, 2.0 * n * (n + a + b) * (s - 2)};
}

}  // namespace

double jacobi_eval(int n, double a, double b, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = 0.5 * (a - b) + 0.5 * (a + b + 2) * x;
  for (int k = 2; k <= n; ++k) {
    const RecCoef c = rec_coef(k, a, b);
    const double p2 = ((c.c1 * x + c.c0) * p1 - c.c2 * p0) / c.d;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double jacobi_deriv(int n, double a, double b, double x, int order) {
  if (order < 1 || order > 2) throw std::invalid_argument("jacobi_deriv: order must be 1 or 2");
  if (n < order) return 0.0;
  // d^k/dx^k P_n^{a,b} = (n+a+b+1)_k / 2^k * P_{n-k}^{a+k,b+k}
  return pochhammer(n + a + b + 1, order) / std::ldexp(1.0, order) *
         jacobi_eval(n - order, a + order, b + order, x);
}

Jet2 jacobi_homog(int n, double a, double b, const Jet2& s, const Jet2& r) {
  if (n == 0) return Jet2::constant(1.0);
  Jet2 q0 = Jet2::constant(1.0);
  Jet2 q1 = 0.5 * (a - b) * r + 0.5 * (a + b + 2) * s;
  const Jet2 r2 = r * r;
  for (int k = 2; k <= n; ++k) {
    const RecCoef c = rec_coef(k, a, b);
    Jet2 q2 = (1.0 / c.d) * ((c.c1 * s + c.c0 * r) * q1 - c.c2 * (r2 * q0));
    q0 = q1;
    q1 = q2;
  }
  return q1;
}

bool in_unit_triangle(double x, double y, double tol) {
  return x >= -tol && y >= -tol && x + y <= 1 + tol;
}

Jet2 apk_jet(const ApkParams& prm, MultiIndex idx, double x, double y) {
  const double p = prm.p();
  const double al = p + prm.beta + 2 * idx.l;
  const Jet2 X = Jet2::var_x(x);
  const Jet2 Y = Jet2::var_y(y);
  const Jet2 one = Jet2::constant(1.0);
  const Jet2 fm = jacobi_homog(idx.m, prm.alpha - 1, al, one - 2.0 * X, one);
  // (1-x)^l P_l(2y/(1-x)-1) written without the quotient
  const Jet2 fl = jacobi_homog(idx.l, p, prm.beta - 1, 2.0 * Y + X - one, one - X);
  return fm * fl;
}

double apk_eval(const ApkParams& prm, MultiIndex idx, double x, double y) {
  if (!in_unit_triangle(x, y)) throw std::domain_error("apk_eval: point outside the unit triangle");
  return apk_jet(prm, idx, x, y).v;
}

std::pair<double, double> apk_grad(const ApkParams& prm, MultiIndex idx, double x, double y) {
  const Jet2 j = apk_jet(prm, idx, x, y);
  return {j.x, j.y};
}

double apply_D(const ApkParams& prm, MultiIndex idx, double x, double y) {
  if (!(x > 0 && y > 0 && x + y < 1)) throw std::domain_error("apply_D: point must be interior");
  const Jet2 j = apk_jet(prm, idx, x, y);
  const double g1 = prm.gamma + 1;
  return (x * x - x) * j.xx + 2 * x * y * j.xy + (y * y - y) * j.yy + (g1 * x - prm.alpha) * j.x +
         (g1 * y - prm.beta) * j.y;
}

double eigenvalue(MultiIndex idx, double gamma) {
  const double n = idx.degree();
  return n * (n + gamma);
}

double pochhammer(double xi, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= xi + i;
  return r;
}

double rising_real(double xi, double s) {
  if (s == 0) return 1.0;
  if (xi > 0 && xi + s > 0) return std::exp(std::lgamma(xi + s) - std::lgamma(xi));
  return std::tgamma(xi + s) / std::tgamma(xi);
}

double norm_squared(const ApkParams& prm, MultiIndex idx, int quad_order) {
  const QuadRule q = weighted_quadrature(prm, quad_order);
  double s = 0;
  for (std::size_t i = 0; i < q.w.size(); ++i) {
    const double a = apk_jet(prm, idx, q.x[i], q.y[i]).v;
    s += q.w[i] * a * a;
  }
  return s;
}

double norm_squared_closed(const ApkParams& prm, MultiIndex idx) {
  const double p = prm.p();
  const int m = idx.m, l = idx.l;
  const double al = p + prm.beta + 2 * l;
  const double k2 = rising_real(l + prm.beta, p) * m * rising_real(m + al, prm.alpha) /
                    (rising_real(l + 1, p) * rising_real(m, prm.alpha) * (m + al));
  return 1.0 / ((2 * l + prm.gamma - prm.alpha) * (2 * (m + l) + prm.gamma) * k2);
}

ApkBasis::ApkBasis(ApkParams prm, int degree) : prm_(prm), degree_(degree) {
  prm_.validate();
  if (degree < 0) throw std::invalid_argument("ApkBasis: negative degree");
  for (int d = 0; d <= degree; ++d)
    for (int l = 0; l <= d; ++l) order_.push_back({d - l, l});
}

std::size_t ApkBasis::index_of(MultiIndex idx) const {
  const int d = idx.degree();
  if (idx.m < 0 || idx.l < 0 || d > degree_) throw std::out_of_range("ApkBasis::index_of");
  return count(d - 1) + static_cast<std::size_t>(idx.l);
}

}  // namespace sdapk
