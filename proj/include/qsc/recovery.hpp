#pragma once

// Erasure noise, Petz-type recovery channels and fidelity measures.
//
// All channels are finite Kraus lists. Recovery maps for the erasure of C
// send the register B (its qubits in ascending site order) back to the full
// register BC in its physical site order.

#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "qsc/entropy.hpp"
#include "qsc/linalg.hpp"

namespace qsc {

inline constexpr double kChannelTolerance = 1e-9;
inline constexpr double kBoundSlack = 1e-7;

class QuantumChannel {
 public:
  /// Checks sum_k K^dagger K = S within `tolerance`, where S is `support`
  /// (an orthogonal projector on the input space) or the identity.
  explicit QuantumChannel(std::vector<Matrix> kraus, std::optional<Matrix> support = std::nullopt,
                          double tolerance = kChannelTolerance);

  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return output_dim_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }
  /// Projector on the subspace where the channel is trace preserving.
  const Matrix& support() const { return support_; }

  Matrix apply(const Matrix& x) const;
  /// max |sum K^dagger K - support|.
  double trace_preservation_defect() const;

 private:
  std::vector<Matrix> kraus_;
  Matrix support_;
  Index input_dim_;
  Index output_dim_;
};

/// second o first.
QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first);

QuantumChannel identity_channel(Index dim);
/// X -> (1 - p) X + p Tr(X) I / d, as d^2 + 1 Kraus operators.
QuantumChannel depolarizing_channel(Index dim, double p);
/// Independent amplitude damping with rate gamma on each of `qubits` qubits.
QuantumChannel amplitude_damping_channel(int qubits, double gamma);
/// Independent Z errors with probability p on each qubit.
QuantumChannel dephasing_channel(int qubits, double p);

/// Trace over C: Kraus operators I_B (x) <c| mapping BC -> B.
QuantumChannel erasure_channel(const Partition& partition);

/// Petz transpose map of the erasure with respect to rho_BC:
/// K_c = rho_BC^{1/2} (rho_B^{-1/2} (x) |c>), pseudo-inverse on the support
/// of rho_B. Trace preserving on that support.
QuantumChannel petz_recovery(const DensityMatrix& rho_bc, const Partition& partition);

/// Nodes and normalized weights of the rotation-angle mixture.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Gauss-Legendre nodes on [-half_width, half_width], weights multiplied by
  /// beta0(t) = (pi/2) / (cosh(pi t) + 1) and renormalized to sum 1.
  static Quadrature rotated_petz(double half_width = 6.0, int nodes = 41);
  /// Explicit grid; weights must already sum to 1 within 1e-6.
  static Quadrature explicit_grid(std::vector<double> nodes, std::vector<double> weights);
};

/// Density of the rotation angle in the universal recovery map.
double rotation_density(double t);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

/// sum_t w_t R_t with R_t Kraus operators
/// sqrt(w_t) rho_BC^{(1+it)/2} (rho_B^{-(1+it)/2} (x) |c>).
QuantumChannel rotated_petz_recovery(const DensityMatrix& rho_bc, const Partition& partition,
                                     const Quadrature& quadrature = Quadrature::rotated_petz());

/// <Psi| (id (x) E)(|Psi><Psi|) |Psi> = sum_k |<Psi| I (x) K_k |Psi>|^2.
double entanglement_fidelity(const Purification& psi, const QuantumChannel& channel);
/// Same for E = second o first, without materializing the composite.
double entanglement_fidelity(const Purification& psi, const QuantumChannel& second,
                             const QuantumChannel& first);
/// Uses the rank-truncated spectral purification of rho.
double entanglement_fidelity(const DensityMatrix& rho, const QuantumChannel& channel);

/// <psi| E(|psi><psi|) |psi>.
double pure_state_fidelity(const Vector& psi, const QuantumChannel& channel);

struct EnsembleMember {
  double weight;
  Vector state;
};
/// Weighted average of pure_state_fidelity over a finite ensemble.
double ensemble_average_fidelity(std::span<const EnsembleMember> ensemble, const QuantumChannel& channel);

enum class RecoveryKind { petz, rotated_petz };
std::string_view to_string(RecoveryKind k);
RecoveryKind parse_recovery_kind(std::string_view text);

struct FidelityReport {
  double entanglement_fidelity = 0.0;
  double cmi = 0.0;
  /// cmi >= -2 ln F = -ln F_e (up to kBoundSlack).
  bool bound_eq6_satisfied = false;
  /// 1 - cmi <= F^2 = F_e (up to kBoundSlack).
  bool bound_eq7_satisfied = false;
  RecoveryKind recovery_kind = RecoveryKind::rotated_petz;
  CmiReport entropies;
};

/// Erases C, recovers with the chosen map, and checks both bounds.
FidelityReport verify_bound_chain(const DensityMatrix& rho_bc, const Partition& partition,
                                  RecoveryKind kind = RecoveryKind::rotated_petz,
                                  const Quadrature& quadrature = Quadrature::rotated_petz());

/// max |R(rho_B) - rho_BC| for the plain Petz map.
double petz_fixed_point_error(const DensityMatrix& rho_bc, const Partition& partition);

/// (D F_e + 1) / (D + 1).
double haar_average_fidelity(int code_dim, double entanglement_fidelity);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int samples = 0;
};

/// Average of <psi|E(psi)|psi> over Haar-random psi in the column span of the
/// isometry `code` (physical_dim x D).
MonteCarloEstimate haar_monte_carlo_fidelity(const QuantumChannel& channel, const Matrix& code,
                                             int samples, std::mt19937_64& rng);

}  // namespace qsc
