#pragma once

// Random matrices and states for property tests and Monte-Carlo estimates.

#include <random>

#include "qsc/linalg.hpp"

namespace qsc {

template <class Rng>
Matrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  return g;
}

template <class Rng>
HermitianMatrix random_hermitian(Index dim, Rng& rng) {
  Matrix g = ginibre(dim, dim, rng);
  Matrix h = 0.5 * (g + g.adjoint());
  return HermitianMatrix(std::move(h));
}

/// Haar-random unit vector.
template <class Rng>
Vector random_unit_vector(Index dim, Rng& rng) {
  Vector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

/// Induced-measure random state: G G^dagger / Tr with G of shape dim x rank.
template <class Rng>
DensityMatrix random_density_matrix(int qubits, Rng& rng, Index rank = -1) {
  const Index dim = Index{1} << qubits;
  Matrix g = ginibre(dim, rank < 0 ? dim : rank, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(0.5 * (rho + rho.adjoint()), Validation::structural);
}

/// Random unitary from the QR decomposition of a Ginibre matrix (Haar after
/// fixing the phases of R's diagonal).
template <class Rng>
Matrix random_unitary(Index dim, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(ginibre(dim, dim, rng));
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

}  // namespace qsc
