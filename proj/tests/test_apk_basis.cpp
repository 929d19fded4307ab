#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "sdapk/apk_basis.hpp"
#include "sdapk/ref_geom.hpp"

using namespace sdapk;
using doctest::Approx;

namespace {

double fd1(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

double fd2(const std::function<double(double)>& f, double x, double h = 1e-4) {
  return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}

std::vector<std::pair<double, double>> interior_points(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::vector<std::pair<double, double>> pts;
  while (static_cast<int>(pts.size()) < n) {
    const double x = u(rng), y = u(rng);
    if (x + y < 0.98) pts.push_back({x, y});
  }
  return pts;
}

const ApkParams kFamilies[] = {{1, 1, 2}, {2, 2, 5}, {1, 2, 3}};

}  // namespace

TEST_CASE("jacobi_eval examples") {
  CHECK(jacobi_eval(0, 1, 3, 0.7) == 1.0);
  CHECK(jacobi_eval(1, 0, 0, 0.5) == Approx(0.5));
  CHECK(jacobi_eval(2, 0, 0, 0.5) == Approx(-0.125));
  // degree-one closed form for general parameters
  for (double a : {0.0, 0.5, 2.0})
    for (double b : {-0.5, 1.0, 3.0})
      for (double x : {-0.9, 0.1, 0.8})
        CHECK(jacobi_eval(1, a, b, x) == Approx((a - b) / 2 + (a + b + 2) * x / 2).epsilon(1e-14));
  // Legendre P3 closed form
  CHECK(jacobi_eval(3, 0, 0, 0.3) == Approx(0.5 * (5 * 0.027 - 3 * 0.3)).epsilon(1e-14));
}

TEST_CASE("jacobi_deriv against finite differences") {
  CHECK(jacobi_deriv(0, 1.5, 2.0, 0.3, 1) == 0.0);
  CHECK(jacobi_deriv(1, 0, 0, 0.3, 1) == Approx(1.0).epsilon(1e-12));
  auto p = [](double x) { return jacobi_eval(3, 2, 1, x); };
  CHECK(jacobi_deriv(3, 2, 1, 0.2, 2) == Approx(fd2(p, 0.2)).epsilon(1e-5));
  for (int n = 1; n <= 6; ++n) {
    auto q = [n](double x) { return jacobi_eval(n, 0.5, 1.5, x); };
    CHECK(jacobi_deriv(n, 0.5, 1.5, -0.4, 1) == Approx(fd1(q, -0.4)).epsilon(1e-6));
  }
}

TEST_CASE("apk_eval examples") {
  CHECK(apk_eval({1, 1, 2}, {0, 0}, 0.3, 0.3) == 1.0);
  CHECK(apk_eval({1, 1, 2}, {0, 1}, 0.25, 0.25) == Approx(-0.25));
  // A_{0,1} = 2y - 1 + x for the Dubiner parameters
  for (auto [x, y] : interior_points(10, 3))
    CHECK(apk_eval({1, 1, 2}, {0, 1}, x, y) == Approx(2 * y - 1 + x).epsilon(1e-13));
  CHECK_THROWS(apk_eval({1, 1, 2}, {1, 1}, 0.8, 0.5));
  CHECK_THROWS(apk_eval({1, 1, 2}, {1, 1}, -0.1, 0.5));
  // the collapsed factor vanishes at x = 1 for l > 0
  CHECK(apk_eval({2, 2, 5}, {2, 1}, 1.0, 0.0) == Approx(0.0));
}

TEST_CASE("point value at (1,0) is a binomial coefficient") {
  for (const ApkParams& p : {ApkParams{1, 1, 2}, ApkParams{2, 2, 5}, ApkParams{1, 2, 4}, ApkParams{0.5, 1, 3.5}})
    for (int m = 0; m <= 6; ++m) {
      const int k = static_cast<int>(std::lround(p.gamma - p.alpha));
      const double binom = std::tgamma(m + k + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(k + 1.0));
      CHECK(std::abs(apk_eval(p, {m, 0}, 1.0, 0.0)) == Approx(binom).epsilon(1e-10));
    }
}

TEST_CASE("apk_grad") {
  auto g0 = apk_grad({2, 2, 5}, {0, 0}, 0.3, 0.2);
  CHECK(g0.first == 0.0);
  CHECK(g0.second == 0.0);
  auto g = apk_grad({1, 1, 2}, {0, 1}, 0.25, 0.25);
  CHECK(g.first == Approx(1.0));
  CHECK(g.second == Approx(2.0));
  // edge points with x < 1 are fine, no division by 1 - x
  auto ge = apk_grad({2, 2, 5}, {1, 3}, 0.999999, 0.0);
  CHECK(std::isfinite(ge.first));
  CHECK(std::isfinite(ge.second));
}

TEST_CASE("gradient check against finite differences") {
  for (const auto& prm : kFamilies)
    for (int d = 0; d <= 6; ++d)
      for (int l = 0; l <= d; ++l)
        for (auto [x, y] : interior_points(5, 11 + d)) {
          const MultiIndex idx{d - l, l};
          auto [gx, gy] = apk_grad(prm, idx, x, y);
          const double fx = fd1([&](double t) { return apk_eval(prm, idx, t, y); }, x);
          const double fy = fd1([&](double t) { return apk_eval(prm, idx, x, t); }, y);
          const double scale = 1 + std::abs(gx) + std::abs(gy);
          CHECK(std::abs(gx - fx) < 1e-6 * scale);
          CHECK(std::abs(gy - fy) < 1e-6 * scale);
        }
}

TEST_CASE("apply_D and eigenvalues") {
  CHECK(apply_D({1, 1, 2}, {0, 0}, 0.2, 0.3) == Approx(0.0));
  CHECK(apply_D({1, 1, 2}, {1, 0}, 0.3, 0.4) == Approx(3 * apk_eval({1, 1, 2}, {1, 0}, 0.3, 0.4)));
  CHECK(apply_D({2, 2, 5}, {1, 1}, 0.25, 0.25) == Approx(14 * apk_eval({2, 2, 5}, {1, 1}, 0.25, 0.25)));
  CHECK_THROWS(apply_D({1, 1, 2}, {1, 0}, 0.0, 0.4));
  CHECK(eigenvalue({0, 0}, 2) == 0.0);
  CHECK(eigenvalue({1, 0}, 2) == 3.0);
  CHECK(eigenvalue({1, 1}, 5) == 14.0);
}

TEST_CASE("eigenrelation on random interior points") {
  for (const auto& prm : {ApkParams{1, 1, 2}, ApkParams{2, 2, 5}})
    for (int d = 0; d <= 6; ++d)
      for (int l = 0; l <= d; ++l)
        for (auto [x, y] : interior_points(50, 100 + d)) {
          const MultiIndex idx{d - l, l};
          const double la = eigenvalue(idx, prm.gamma) * apk_eval(prm, idx, x, y);
          CHECK(std::abs(apply_D(prm, idx, x, y) - la) < 1e-8 * (1 + std::abs(la)));
        }
}

TEST_CASE("pochhammer") {
  CHECK(pochhammer(5, 0) == 1.0);
  CHECK(pochhammer(3, 2) == 12.0);
  CHECK(pochhammer(0.5, 3) == Approx(1.875));
  CHECK(rising_real(2.5, 3) == Approx(pochhammer(2.5, 3)));
}

TEST_CASE("norms") {
  CHECK(norm_squared({1, 1, 2}, {0, 0}, 4) == Approx(0.5).epsilon(1e-14));
  CHECK(norm_squared({1, 1, 2}, {1, 0}, 6) == Approx(norm_squared_closed({1, 1, 2}, {1, 0})).epsilon(1e-12));
  CHECK(norm_squared({2, 2, 5}, {0, 1}, 4) == Approx(norm_squared({2, 2, 5}, {0, 1}, 8)).epsilon(1e-13));
  for (const auto& prm : kFamilies)
    for (int d = 1; d <= 6; ++d)
      for (int l = 0; l < d; ++l) {
        const MultiIndex idx{d - l, l};
        CHECK(norm_squared(prm, idx, 2 * d + 2) == Approx(norm_squared_closed(prm, idx)).epsilon(1e-11));
      }
}

TEST_CASE("orthogonality") {
  for (const auto& prm : kFamilies) {
    const ApkBasis b(prm, 8);
    const QuadRule q = weighted_quadrature(prm, 18);
    Eigen::MatrixXd A(q.w.size(), b.size());
    for (std::size_t i = 0; i < q.w.size(); ++i)
      for (std::size_t k = 0; k < b.size(); ++k) A(i, k) = apk_jet(prm, b.at(k), q.x[i], q.y[i]).v;
    const Eigen::Map<const Eigen::VectorXd> w(q.w.data(), static_cast<Eigen::Index>(q.w.size()));
    const Eigen::MatrixXd G = A.transpose() * w.asDiagonal() * A;
    double worst = 0;
    for (Eigen::Index i = 0; i < G.rows(); ++i)
      for (Eigen::Index j = 0; j < i; ++j) worst = std::max(worst, std::abs(G(i, j)) / std::sqrt(G(i, i) * G(j, j)));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("degree along a line") {
  const ApkParams prm{2, 2, 5};
  const double x0 = 0.1, y0 = 0.15, dx = 0.4, dy = 0.3;
  for (int d = 0; d <= 6; ++d)
    for (int l = 0; l <= d; ++l) {
      const MultiIndex idx{d - l, l};
      const int n = d + 1;
      std::vector<double> t(n + 1), v(n + 1);
      for (int i = 0; i <= n; ++i) {
        t[i] = static_cast<double>(i) / n;
        v[i] = apk_eval(prm, idx, x0 + dx * t[i], y0 + dy * t[i]);
      }
      // Lagrange interpolant through the first n samples predicts the last
      double pred = 0;
      for (int i = 0; i < n; ++i) {
        double li = 1;
        for (int j = 0; j < n; ++j)
          if (j != i) li *= (t[n] - t[j]) / (t[i] - t[j]);
        pred += li * v[i];
      }
      CHECK(std::abs(pred - v[n]) < 1e-10 * (1 + std::abs(v[n])));
    }
}

TEST_CASE("ordering") {
  const ApkBasis b({1, 1, 2}, 5);
  CHECK(b.size() == 21);
  CHECK(b.at(0) == MultiIndex{0, 0});
  std::set<std::pair<int, int>> seen;
  int last_degree = 0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    const MultiIndex idx = b.at(k);
    CHECK(idx.degree() >= last_degree);
    last_degree = idx.degree();
    CHECK(b.index_of(idx) == k);
    seen.insert({idx.m, idx.l});
  }
  CHECK(seen.size() == b.size());
  CHECK(b.at(1) == MultiIndex{1, 0});
  CHECK(b.at(2) == MultiIndex{0, 1});
}

TEST_CASE("parameter domain") {
  CHECK(ApkParams{1, 1, 2}.valid());
  CHECK_FALSE(ApkParams{0, 1, 2}.valid());
  CHECK_FALSE(ApkParams{1, 1, 0.5}.valid());
  CHECK_THROWS_AS(ApkParams({1, -1, 2}).validate(), std::invalid_argument);
}
