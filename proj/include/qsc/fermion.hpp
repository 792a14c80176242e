#pragma once

// Free-fermion description of the Ising ring.
//
// Jordan-Wigner Majoranas (0-based sites, normalization {w_a, w_b} = 2 delta):
//   w_{2j}   = Z_0 ... Z_{j-1} X_j
//   w_{2j+1} = Z_0 ... Z_{j-1} Y_j
// With these, Z_j = -i w_{2j} w_{2j+1}, X_j X_{j+1} = -i w_{2j+1} w_{2j+2} and
// X_{n-1} X_0 = i P w_{2n-1} w_0, so on the sector P = p the ring Hamiltonian
// equals
//   H = sum_{a=0}^{2n-2} i w_a w_{a+1} - p i w_{2n-1} w_0.
// The even sector therefore sees the antiperiodic Majorana ring and the odd
// sector the periodic one. Quadratic Hamiltonians are written
// H = (i/4) sum_ab A_ab w_a w_b with A real antisymmetric.
//
// Covariance convention: Gamma_ab = (i/2) Tr(rho [w_a, w_b]), so the vacuum
// |0...0> has Gamma = direct sum of [[0, -1], [1, 0]].

#include <cstdint>
#include <span>
#include <vector>

#include "qsc/entropy.hpp"
#include "qsc/linalg.hpp"
#include "qsc/spin_model.hpp"

namespace qsc {

/// Sign of the Majorana ring's closing bond.
enum class Boundary { periodic, antiperiodic };

/// Majorana boundary condition that reproduces the spin sector with P = +-1.
Boundary boundary_for(Sector sector);

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// phase * X^x Z^z on an n-qubit register (Z applied first): maps basis state
/// |s> to phase * (-1)^{popcount(z & s)} |s ^ x>.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  Complex phase = 1.0;

  PauliString operator*(const PauliString& other) const;
  Matrix to_dense(int n) const;
  /// Tr(rho * this).
  Complex expectation(const Matrix& rho) const;
};

/// The 2n Majorana operators as Pauli strings.
std::vector<PauliString> jw_majoranas(int n);
/// Dense matrices of the same operators.
std::vector<HermitianMatrix> jw_majorana_operators(int n);

class MajoranaCovariance {
 public:
  /// Checks antisymmetry (1e-10) and singular values <= 1 + 1e-9.
  explicit MajoranaCovariance(RealMatrix gamma);

  int mode_count() const { return static_cast<int>(gamma_.rows() / 2); }
  const RealMatrix& matrix() const { return gamma_; }

 private:
  RealMatrix gamma_;
};

MajoranaCovariance covariance_from_state(const DensityMatrix& rho);

/// Coupling matrix A of the critical Majorana ring with the given boundary.
RealMatrix ring_coupling_matrix(int n, Boundary boundary);
/// (i/4) sum A_ab w_a w_b as a dense spin operator.
HermitianMatrix quadratic_hamiltonian(const RealMatrix& coupling);

/// Canonical form A = O (+)_k [[0, e_k], [-e_k, 0]] O^T with e_k >= 0.
struct NormalModes {
  RealVector energies;
  RealMatrix rotation;
  /// det(rotation): the fermion parity P equals orientation * prod_k (1 - 2 n_k).
  int orientation = 1;
};
NormalModes normal_modes(const RealMatrix& coupling);

/// Covariance of exp(-beta H_maj) / Z over the whole Fock space.
MajoranaCovariance thermal_covariance(int n, double beta, Boundary boundary);

/// Second moments of P_sector exp(-beta H) / Tr[...] for the sector's own
/// Majorana Hamiltonian (equivalently, of the spin Gibbs state restricted to
/// that sector), and log Tr[P_sector exp(-beta H)].
struct SectorMoments {
  MajoranaCovariance covariance;
  double log_partition = 0.0;
};
SectorMoments sector_thermal_moments(int n, double beta, Sector sector);
/// Covariance of the full spin Gibbs state, mixing both sectors.
MajoranaCovariance gibbs_covariance(int n, double beta);

struct SectorSpectrum {
  Sector sector = Sector::even;
  RealVector single_particle_energies;
  /// Ascending many-body energies of occupation patterns with the sector's parity.
  RealVector many_body_energies;
};
SectorSpectrum sector_spectrum(int n, Sector sector);

/// Compares sorted(even u odd) with the ED spectrum of build_hamiltonian(n);
/// returns the max deviation and throws CalibrationError above `tolerance`.
double calibrate_sector_pairing(int n, double tolerance = 1e-8);

/// Entropy (nats) of the Gaussian state with covariance gamma restricted to
/// a contiguous, non-wrapping run of sites.
double gaussian_entropy(const MajoranaCovariance& gamma, std::span<const int> region);

struct ExtremalityResult {
  double cmi_exact = 0.0;
  double cmi_gaussian = 0.0;
  double slack = 0.0;
};
/// S_C + S_BC - S_B of rho against the same combination for the Gaussian
/// state with rho's second moments. Both B and C must be contiguous.
ExtremalityResult extremality_check(const DensityMatrix& rho, const Partition& partition);

/// exp(-beta H_maj) / Z for the ring with the given boundary, built by exact
/// diagonalization in the spin basis: a Gaussian test state.
DensityMatrix gaussian_thermal_state(int n, double beta, Boundary boundary);

}  // namespace qsc
