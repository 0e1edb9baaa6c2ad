#pragma once

// Dense matrix exponential by scaling-and-squaring with a [13/13] diagonal
// Pade approximant.  The flow matrices here can have repeated or zero
// eigenvalues, so eigendecomposition is deliberately avoided.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace hybridexec {

inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M) {
  using Eigen::MatrixXd;
  if (M.rows() != M.cols())
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  if (!M.allFinite())
    throw std::invalid_argument("matrix_exponential: non-finite entries");

  const int n = static_cast<int>(M.rows());
  const MatrixXd I = MatrixXd::Identity(n, n);
  const double norm = M.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  if (norm == 0.0) return I;

  // theta_13 from Higham's analysis of the [13/13] approximant.
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    if (squarings > 1024)
      throw std::overflow_error("matrix_exponential: norm too large after scaling");
  }
  const MatrixXd A = M / std::pow(2.0, squarings);

  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};

  const MatrixXd A2 = A * A;
  const MatrixXd A4 = A2 * A2;
  const MatrixXd A6 = A4 * A2;
  const MatrixXd U =
      A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
           b[3] * A2 + b[1] * I);
  const MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                     b[4] * A4 + b[2] * A2 + b[0] * I;

  MatrixXd E = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) E = E * E;
  return E;
}

}  // namespace hybridexec
