#include "qdet/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <sstream>

namespace qdet {

namespace {

constexpr double kReconstructTol = 1e-10;  // relative Frobenius
constexpr double kOrthoTol = 1e-12;        // max |Q^T Q - I|

void fix_column_signs(Eigen::MatrixXd& q) {
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    auto col = q.col(c);
    const double floor = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col(r)) > floor) {
        if (col(r) < 0.0) col = -col;
        break;
      }
    }
  }
}

}  // namespace

SpectralDecomposition eig_sym(const Eigen::MatrixXd& m) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw NumericalError("eig_sym: matrix must be square and non-empty");
  if (!m.allFinite()) throw NumericalError("eig_sym: non-finite entries");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_sym: eigensolver failed to converge (dim " << m.rows() << ")";
    throw NumericalError(os.str());
  }

  SpectralDecomposition spec{solver.eigenvalues(), solver.eigenvectors()};
  fix_column_signs(spec.eigenvectors);

  const Eigen::MatrixXd rebuilt = spec.eigenvectors *
                                  spec.eigenvalues.asDiagonal() *
                                  spec.eigenvectors.transpose();
  const double scale = std::max(m.norm(), 1e-300);
  const double residual = (rebuilt - m).norm() / scale;
  const double ortho = (spec.eigenvectors.transpose() * spec.eigenvectors -
                        Eigen::MatrixXd::Identity(m.rows(), m.rows()))
                           .cwiseAbs()
                           .maxCoeff();
  if (residual > kReconstructTol || ortho > kOrthoTol) {
    std::ostringstream os;
    os << "eig_sym: decomposition out of tolerance (dim " << m.rows()
       << ", residual " << residual << ", orthogonality " << ortho << ")";
    throw NumericalError(os.str());
  }
  return spec;
}

Eigen::MatrixXcd propagator(const SpectralDecomposition& spec, double t) {
  if (!std::isfinite(t)) throw NumericalError("propagator: non-finite time");
  const Eigen::VectorXcd phases =
      (Complex(0.0, -t) * spec.eigenvalues.cast<Complex>().array()).exp();
  return spec.eigenvectors.cast<Complex>() * phases.asDiagonal() *
         spec.eigenvectors.transpose().cast<Complex>();
}

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& m) {
  if (m.rows() < 1 || m.rows() != m.cols())
    throw NumericalError("expm: matrix must be square and non-empty");
  if (!m.allFinite()) throw NumericalError("expm: non-finite entries");

  const Eigen::Index n = m.rows();
  // Pade-13 coefficients and the standard theta_13 switching threshold.
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    if (squarings > 60) {
      std::ostringstream os;
      os << "expm: matrix norm " << norm1 << " too large";
      throw NumericalError(os.str());
    }
  }

  const Eigen::MatrixXcd a = m / std::ldexp(1.0, squarings);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd a2 = a * a;
  const Eigen::MatrixXcd a4 = a2 * a2;
  const Eigen::MatrixXcd a6 = a2 * a4;

  const Eigen::MatrixXcd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
           b[5] * a4 + b[3] * a2 + b[1] * id);
  const Eigen::MatrixXcd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) +
                             b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

  Eigen::MatrixXcd f = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) f = f * f;

  if (!f.allFinite())
    throw NumericalError("expm: overflow while evaluating the exponential");
  return f;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b,
                      Eigen::Index dim_cap) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (rows > dim_cap || cols > dim_cap) {
    std::ostringstream os;
    os << "kron: result " << rows << "x" << cols << " exceeds cap " << dim_cap;
    throw CapacityError(os.str());
  }
  Eigen::MatrixXcd out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qdet
