#pragma once

// Dense complex linear algebra over qubit registers.
//
// Conventions used throughout the library:
//   * site 0 is the most significant tensor factor of a register;
//   * every matrix is stored as double-precision complex;
//   * eigendecompositions split a matrix into the blocks that are exactly
//     decoupled (no nonzero entry between them) and diagonalize each block
//     separately, so parity-conserving operators cost two half-size solves.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qsc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when the eigensolver fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kNegativityTolerance = 1e-10;
inline constexpr double kRelativeSupportCutoff = 1e-10;

class HermitianMatrix {
 public:
  /// Validates that `entries` is square and equals its adjoint to within
  /// `tolerance` (scaled by the largest entry when that exceeds one).
  explicit HermitianMatrix(Matrix entries, double tolerance = kHermitianTolerance);

  Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  Matrix release() && { return std::move(entries_); }

 private:
  Matrix entries_;
};

/// How much of the DensityMatrix invariant to check on construction.
/// `structural` checks Hermiticity, dimension and trace; it is used by
/// internal constructions (spectral sums, partial traces) that are positive
/// by construction. `full` additionally diagonalizes to check positivity.
enum class Validation { structural, full };

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries, Validation validation = Validation::full);

  Index dim() const { return matrix_.dim(); }
  int qubit_count() const { return qubits_; }
  const Matrix& entries() const { return matrix_.entries(); }
  const HermitianMatrix& hermitian() const { return matrix_; }

  static DensityMatrix maximally_mixed(int qubits);
  static DensityMatrix from_pure(const Vector& amplitudes);

 private:
  HermitianMatrix matrix_;
  int qubits_;
};

class PureState {
 public:
  explicit PureState(Vector amplitudes);

  Index dim() const { return amplitudes_.size(); }
  const Vector& amplitudes() const { return amplitudes_; }

 private:
  Vector amplitudes_;
};

/// Eigenpairs of one decoupled block. `indices` are ascending basis labels of
/// the parent matrix; `vectors` (or `real_vectors` when the block is real)
/// hold local eigenvector columns matching `values`.
struct SpectralBlock {
  std::vector<Index> indices;
  RealVector values;
  Matrix vectors;
  RealMatrix real_vectors;
  bool real = false;

  Matrix complex_vectors() const;
};

class SpectralDecomposition {
 public:
  SpectralDecomposition(Index dim, std::vector<SpectralBlock> blocks);

  Index dim() const { return dim_; }
  const std::vector<SpectralBlock>& blocks() const { return blocks_; }

  /// All eigenvalues, ascending.
  RealVector eigenvalues() const;
  /// Dense unitary whose columns match eigenvalues(). Costs dim^2 memory.
  Matrix eigenvectors() const;
  double max_abs_eigenvalue() const;

 private:
  Index dim_;
  std::vector<SpectralBlock> blocks_;
};

/// Partition of {0..dim-1} into groups connected by nonzero entries.
std::vector<std::vector<Index>> decoupled_blocks(const Matrix& m);

SpectralDecomposition eigh(const HermitianMatrix& h);
/// Eigenvalues only (ascending); cheaper than eigh().
RealVector eigvalsh(const HermitianMatrix& h);

/// V f(diag(lambda)) V^dagger. When `support_cutoff` is set, eigenvalues with
/// |lambda| <= cutoff map to zero instead of being passed to `f`.
HermitianMatrix matrix_function(const HermitianMatrix& h,
                                const std::function<double(double)>& f,
                                std::optional<double> support_cutoff = std::nullopt);
HermitianMatrix matrix_function(const SpectralDecomposition& spectrum,
                                const std::function<double(double)>& f,
                                std::optional<double> support_cutoff = std::nullopt);
/// Same spectral sum for complex-valued f (the result is not Hermitian).
Matrix spectral_apply(const SpectralDecomposition& spectrum,
                      const std::function<Complex(double)>& f,
                      std::optional<double> support_cutoff = std::nullopt);

/// kRelativeSupportCutoff times the largest |eigenvalue|.
double default_support_cutoff(const SpectralDecomposition& spectrum);

Matrix kron(const Matrix& a, const Matrix& b);

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// Places `op` (2^k x 2^k, first factor on sites[0]) on the given sites of an
/// n-qubit register with identity elsewhere.
Matrix embed_operator(const Matrix& op, std::span<const int> sites, int n);
HermitianMatrix embed_site_operator(const Matrix& op, std::span<const int> sites, int n);

/// Reduced density matrix on `keep` (sorted ascending; relative order of the
/// kept qubits is preserved).
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);
Matrix partial_trace(const Matrix& m, int qubits, std::span<const int> keep);

/// Uhlmann root fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), clamped to [0,1].
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// A pure state on ancilla (most significant) times system. The amplitude
/// of |a>|x> sits at a * system_dim + x, so `as_matrix()` is the
/// system_dim x ancilla_dim matrix M with rho = M M^dagger.
struct Purification {
  PureState state;
  Index ancilla_dim;
  Index system_dim;

  Eigen::Map<const Matrix> as_matrix() const {
    return {state.amplitudes().data(), system_dim, ancilla_dim};
  }
  /// Tr_ancilla |Psi><Psi|.
  Matrix reduced_system() const;
};

struct PurifyOptions {
  bool truncate_to_rank = false;
  double rank_cutoff = kRelativeSupportCutoff;
};

Purification purify(const DensityMatrix& rho, PurifyOptions options = {});
/// Purification built from a given spectral decomposition of rho.
Purification purify(const SpectralDecomposition& spectrum, PurifyOptions options = {});
/// Generic purification from M with rho = M M^dagger.
Purification purification_from_matrix(const Matrix& m);

/// Square root of a PSD spectrum, with eigenvalues in [-tol, 0) clamped.
HermitianMatrix psd_sqrt(const HermitianMatrix& h);

/// Bit mask of register site `site` in an n-qubit basis label.
inline std::uint64_t site_bit(int site, int n) { return std::uint64_t{1} << (n - 1 - site); }

}  // namespace qsc
