#include "sdapk/eigsolve.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sdapk {

namespace {

double abs1(cplx z) { return std::abs(z.real()) + std::abs(z.imag()); }

}  // namespace

Eigen::MatrixXcd balance_matrix(const Eigen::MatrixXcd& A0) {
  Eigen::MatrixXcd A = A0;
  const Eigen::Index n = A.rows();
  const double radix = 2.0, sqrdx = 4.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0, c = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += abs1(A(j, i));
        r += abs1(A(i, j));
      }
      if (c == 0 || r == 0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
  return A;
}

Eigen::MatrixXcd hessenberg_reduce(const Eigen::MatrixXcd& A0) {
  Eigen::MatrixXcd A = A0;
  const Eigen::Index n = A.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    Eigen::VectorXcd v = A.block(k + 1, k, m, 1);
    const double xn = v.norm();
    if (xn == 0) continue;
    const cplx x0 = v(0);
    const cplx ph = std::abs(x0) > 0 ? x0 / std::abs(x0) : cplx(1, 0);
    v(0) += ph * xn;
    const double vn = v.norm();
    if (vn == 0) continue;
    v /= vn;
    // A <- H A H with H = I - 2 v v^*
    Eigen::MatrixXcd rows = A.block(k + 1, 0, m, n);
    rows -= 2.0 * v * (v.adjoint() * rows);
    A.block(k + 1, 0, m, n) = rows;
    Eigen::MatrixXcd cols = A.block(0, k + 1, n, m);
    cols -= 2.0 * (cols * v) * v.adjoint();
    A.block(0, k + 1, n, m) = cols;
    A.block(k + 2, k, m - 1, 1).setZero();
  }
  return A;
}

std::vector<cplx> eigenvalues(const Eigen::MatrixXcd& A0, const EigOptions& opt) {
  if (A0.rows() != A0.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  const int n = static_cast<int>(A0.rows());
  std::vector<cplx> ev;
  if (n == 0) return ev;
  if (!A0.allFinite()) throw std::domain_error("eigenvalues: matrix has non-finite entries");
  Eigen::MatrixXcd H = hessenberg_reduce(opt.balance ? balance_matrix(A0) : A0);
  const double eps = std::numeric_limits<double>::epsilon();

  int hi = n - 1;
  int iter = 0, total = 0;
  const int budget = opt.max_sweeps_per_eig * n;
  while (hi >= 0) {
    if (hi == 0) {
      ev.push_back(H(0, 0));
      break;
    }
    int l = hi;
    for (; l > 0; --l) {
      double s = abs1(H(l - 1, l - 1)) + abs1(H(l, l));
      if (s == 0) s = H.norm();
      if (abs1(H(l, l - 1)) <= eps * s) {
        H(l, l - 1) = 0;
        break;
      }
    }
    if (l == hi) {
      ev.push_back(H(hi, hi));
      --hi;
      iter = 0;
      continue;
    }
    if (++total > budget) {
      std::ostringstream os;
      os << "eigenvalues: QR iteration did not converge (remaining block size " << hi - l + 1
         << ", subdiagonal " << std::abs(H(hi, hi - 1)) << ")";
      throw std::runtime_error(os.str());
    }
    ++iter;
    cplx mu;
    if (iter % 11 == 10) {
      // exceptional shift to break cycles
      const double t = std::abs(H(hi, hi - 1));
      mu = H(hi, hi) + cplx(0.75 * t, 0.5 * t);
    } else {
      const cplx a = H(hi - 1, hi - 1), b = H(hi - 1, hi), c = H(hi, hi - 1), d = H(hi, hi);
      const cplx half = 0.5 * (a - d);
      const cplx disc = std::sqrt(half * half + b * c);
      const cplx m1 = 0.5 * (a + d) + disc, m2 = 0.5 * (a + d) - disc;
      mu = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
    }
    for (int k = l; k <= hi; ++k) H(k, k) -= mu;
    std::vector<cplx> cs(hi - l), sn(hi - l);
    for (int k = l; k < hi; ++k) {
      const cplx x = H(k, k), y = H(k + 1, k);
      const double r = std::hypot(std::abs(x), std::abs(y));
      cplx c(1, 0), s(0, 0);
      if (r > 0) {
        c = x / r;
        s = y / r;
      }
      cs[k - l] = c;
      sn[k - l] = s;
      for (int j = k; j <= hi; ++j) {
        const cplx hk = H(k, j), hk1 = H(k + 1, j);
        H(k, j) = std::conj(c) * hk + std::conj(s) * hk1;
        H(k + 1, j) = -s * hk + c * hk1;
      }
    }
    for (int k = l; k < hi; ++k) {
      const cplx c = cs[k - l], s = sn[k - l];
      const int top = std::min(k + 2, hi);
      for (int i = l; i <= top; ++i) {
        const cplx hk = H(i, k), hk1 = H(i, k + 1);
        H(i, k) = hk * c + hk1 * s;
        H(i, k + 1) = -hk * std::conj(s) + hk1 * std::conj(c);
      }
    }
    for (int k = l; k <= hi; ++k) H(k, k) += mu;
  }
  return ev;
}

Eigen::VectorXcd eigenvector_for(const Eigen::MatrixXcd& A, cplx lambda) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXcd M = A - lambda * Eigen::MatrixXcd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().col(n - 1);
}

}  // namespace sdapk
