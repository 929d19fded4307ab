#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace sdapk {

using cplx = std::complex<double>;

struct EigOptions {
  bool balance = true;
  int max_sweeps_per_eig = 60;
};

// All eigenvalues of a dense complex matrix: balancing, Householder
// reduction to Hessenberg form, then single-shift complex QR.
std::vector<cplx> eigenvalues(const Eigen::MatrixXcd& A, const EigOptions& opt = {});

// Unit vector minimising |(A - lambda I) v|, the eigenvector when lambda is exact.
Eigen::VectorXcd eigenvector_for(const Eigen::MatrixXcd& A, cplx lambda);

// Balancing and Hessenberg steps, exposed for testing.
Eigen::MatrixXcd balance_matrix(const Eigen::MatrixXcd& A);
Eigen::MatrixXcd hessenberg_reduce(const Eigen::MatrixXcd& A);

}  // namespace sdapk
