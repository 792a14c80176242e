#pragma once

// Von Neumann entropies (natural log) and conditional mutual information.

#include <span>
#include <string_view>
#include <vector>

#include "qsc/linalg.hpp"

namespace qsc {

enum class Units { nats, bits };

std::string_view to_string(Units u);
Units parse_units(std::string_view text);
/// Converts a value in nats to `units`.
double in_units(double nats, Units units);

/// Eigenvalues below this are dropped from entropy sums.
inline constexpr double kEntropyCutoff = 1e-14;

/// Erased region C and its complement B on an n-site ring. C is the
/// contiguous run of `length` sites starting at `start` (0-based) and may wrap
/// past site n-1. A is the implicit purifying system.
class Partition {
 public:
  static Partition contiguous(int n, int start, int length);

  int n() const { return n_; }
  int start() const { return start_; }
  int length() const { return static_cast<int>(c_.size()); }
  /// Sorted site lists.
  const std::vector<int>& region_c() const { return c_; }
  const std::vector<int>& region_b() const { return b_; }

 private:
  Partition(int n, int start, std::vector<int> c, std::vector<int> b)
      : n_(n), start_(start), c_(std::move(c)), b_(std::move(b)) {}
  int n_;
  int start_;
  std::vector<int> c_;
  std::vector<int> b_;
};

struct CmiReport {
  double S_C = 0.0;
  double S_B = 0.0;
  double S_BC = 0.0;
  double cmi = 0.0;
  /// 1 - cmi, possibly negative.
  double one_minus_cmi = 1.0;
  /// max(0, 1 - cmi); lower bound on the entanglement fidelity.
  double fidelity_lower_bound = 1.0;

  /// Entropies and CMI rescaled to `units`. The fidelity bound is a pure
  /// number computed in nats and is left unchanged.
  CmiReport converted(Units units) const;
};

/// -sum p ln p over the given eigenvalues (values below kEntropyCutoff dropped).
double entropy_of_spectrum(const RealVector& eigenvalues);

double von_neumann_entropy(const DensityMatrix& rho);
double subsystem_entropy(const DensityMatrix& rho, std::span<const int> region);

/// I(A:C|B) = S_C + S_BC - S_B for a global pure state on A B C, given
/// rho_BC on the physical register.
CmiReport cmi_pure_global(const DensityMatrix& rho_bc, const Partition& partition);
/// Same, reusing a known S_BC = von_neumann_entropy(rho_bc).
CmiReport cmi_pure_global(const DensityMatrix& rho_bc, const Partition& partition, double s_bc);

/// S_AB + S_BC - S_ABC - S_B for a state on the whole register; A, B and C
/// must be disjoint and cover it (any one of them may be empty).
double cmi_general(const DensityMatrix& rho, std::span<const int> a, std::span<const int> b,
                   std::span<const int> c);

/// Entropy of `region` for a pure state on `qubits` qubits, from the Gram
/// matrix of the smaller side of the bipartition.
double pure_state_entropy(const PureState& psi, int qubits, std::span<const int> region);

/// cmi_general for a pure global state, without forming |psi><psi|.
double cmi_general(const PureState& psi, int qubits, std::span<const int> a, std::span<const int> b,
                   std::span<const int> c);

}  // namespace qsc
