// numerics.hpp — dense kernels shared by the physics modules: symmetric
// eigendecomposition, spectral propagators, matrix exponentials, Kronecker
// products.
#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qdet/errors.hpp"

namespace qdet {

using Complex = std::complex<double>;

// Hard cap on dense matrix dimension (rows == cols). Keeps a runaway kron
// request from exhausting memory; configurable per call.
inline constexpr Eigen::Index kMatrixDimCap = 4096;

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
};

/// Eigendecomposition of a real symmetric matrix. Eigenvalues come out
/// ascending; each eigenvector column is flipped so that its first
/// non-negligible component is positive, which makes the output
/// deterministic across runs and platforms.
/// Throws NumericalError (with dimension and residual) if the solver fails
/// or the reconstruction residual exceeds tolerance.
SpectralDecomposition eig_sym(const Eigen::MatrixXd& m);

/// U_t = exp(-i H t) assembled spectrally from eig_sym output. Exactly
/// unitary up to round-off; Hermitian generators never go through expm().
Eigen::MatrixXcd propagator(const SpectralDecomposition& spec, double t);

/// exp(M) for a general complex matrix, Pade-13 scaling and squaring.
/// Used for the non-normal generators (effective and absorbing
/// Hamiltonians) where a spectral route is not available.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& m);

/// Kronecker product a (x) b: entry ((ia*rb + ib), (ja*cb + jb)) equals
/// a(ia,ja) * b(ib,jb), i.e. the left factor varies slowest. Throws
/// CapacityError when the result would exceed dim_cap in either direction.
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                      Eigen::Index dim_cap = kMatrixDimCap);

}  // namespace qdet
