#pragma once

// Critical transverse-field Ising ring
//
//   H = sum_{j} ( -X_j X_{j+1} - Z_j ),  site n wraps to site 0,
//
// its spin-flip parity P = Z_0 Z_1 ... Z_{n-1}, and (parity-projected)
// thermal states. P is diagonal in the computational basis: a basis state
// with an even number of 1 bits has P = +1.

#include <string>
#include <string_view>

#include "qsc/linalg.hpp"

namespace qsc {

enum class Sector { even, odd, full };

std::string_view to_string(Sector s);
Sector parse_sector(std::string_view text);

class UnderflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpinChainSpec {
  int n = 2;
  double beta = 0.0;
  Sector sector = Sector::even;

  /// Throws std::invalid_argument unless n >= 2 and beta is finite and >= 0.
  void validate() const;
};

struct ParityDecomposition {
  HermitianMatrix parity_operator;
  HermitianMatrix projector_even;
  HermitianMatrix projector_odd;
};

HermitianMatrix build_hamiltonian(int n);
ParityDecomposition parity_decomposition(int n);

/// +1 / -1 eigenvalue of P on computational basis state `label`.
inline int basis_parity(std::uint64_t label) { return (__builtin_popcountll(label) % 2 == 0) ? 1 : -1; }

DensityMatrix gibbs_state(const HermitianMatrix& h, double beta);

/// Thermal state exp(-beta H) restricted to `sector` and renormalized, from a
/// precomputed decomposition of a P-conserving H on `n` qubits. Boltzmann
/// factors are taken relative to the lowest retained energy.
DensityMatrix thermal_state(const SpectralDecomposition& h_spectrum, int n, double beta, Sector sector);

DensityMatrix parity_projected_thermal(const SpinChainSpec& spec);

/// Thermofield double sum_j sqrt(p_j) |j>_A |E_j> over the retained sector
/// (ancilla of dimension 2^n, ancilla label j = position in the ascending
/// energy list of the retained sector).
Purification thermofield_double(const SpectralDecomposition& h_spectrum, int n, double beta,
                                Sector sector);

/// Cached eigendecomposition of the ring Hamiltonian for repeated thermal
/// states at different inverse temperatures.
class IsingRing {
 public:
  explicit IsingRing(int n);

  int n() const { return n_; }
  const SpectralDecomposition& spectrum() const { return spectrum_; }

  DensityMatrix thermal(double beta, Sector sector) const {
    return thermal_state(spectrum_, n_, beta, sector);
  }

 private:
  int n_;
  SpectralDecomposition spectrum_;
};

}  // namespace qsc
