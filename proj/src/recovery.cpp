#include "qsc/recovery.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "qsc/random.hpp"

namespace qsc {

QuantumChannel::QuantumChannel(std::vector<Matrix> kraus, std::optional<Matrix> support, double tolerance)
    : kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
  input_dim_ = kraus_.front().cols();
  output_dim_ = kraus_.front().rows();
  for (const auto& k : kraus_)
    if (k.rows() != output_dim_ || k.cols() != input_dim_)
      throw std::invalid_argument("Kraus operators have inconsistent shapes");
  support_ = support ? std::move(*support) : Matrix::Identity(input_dim_, input_dim_);
  if (support_.rows() != input_dim_ || support_.cols() != input_dim_)
    throw std::invalid_argument("channel support projector has the wrong dimension");
  const double defect = trace_preservation_defect();
  if (defect > tolerance)
    throw std::invalid_argument(
        fmt::format("Kraus operators are not trace preserving: |sum K^dagger K - I| = {:.3e}", defect));
}

Matrix QuantumChannel::apply(const Matrix& x) const {
  if (x.rows() != input_dim_ || x.cols() != input_dim_)
    throw std::invalid_argument(fmt::format("channel input is {}x{}, expected dimension {}", x.rows(),
                                            x.cols(), input_dim_));
  Matrix out = Matrix::Zero(output_dim_, output_dim_);
  for (const auto& k : kraus_) out.noalias() += k * x * k.adjoint();
  return out;
}

double QuantumChannel::trace_preservation_defect() const {
  Matrix sum = -support_;
  for (const auto& k : kraus_) sum.noalias() += k.adjoint() * k;
  return sum.cwiseAbs().maxCoeff();
}

QuantumChannel compose(const QuantumChannel& second, const QuantumChannel& first) {
  if (second.input_dim() != first.output_dim())
    throw std::invalid_argument(fmt::format("cannot compose: output dimension {} vs input dimension {}",
                                            first.output_dim(), second.input_dim()));
  std::vector<Matrix> kraus;
  kraus.reserve(second.kraus().size() * first.kraus().size());
  for (const auto& k2 : second.kraus())
    for (const auto& k1 : first.kraus()) kraus.push_back(k2 * k1);
  // Trace preserving on first's support only when first maps it into
  // second's support; the constructor verifies that.
  return QuantumChannel(std::move(kraus), first.support(), 1e-8);
}

QuantumChannel identity_channel(Index dim) { return QuantumChannel({Matrix::Identity(dim, dim)}); }

QuantumChannel depolarizing_channel(Index dim, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing probability must lie in [0, 1]");
  std::vector<Matrix> kraus;
  kraus.push_back(std::sqrt(1.0 - p) * Matrix::Identity(dim, dim));
  // p Tr(X) I/d = sum_{ij} (sqrt(p/d) |i><j|) X (...)^dagger
  const double a = std::sqrt(p / static_cast<double>(dim));
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) {
      Matrix k = Matrix::Zero(dim, dim);
      k(i, j) = a;
      kraus.push_back(std::move(k));
    }
  return QuantumChannel(std::move(kraus));
}

namespace {

QuantumChannel independent_qubits(int qubits, const Matrix& k0, const Matrix& k1) {
  std::vector<Matrix> kraus{Matrix::Identity(1, 1)};
  for (int q = 0; q < qubits; ++q) {
    std::vector<Matrix> next;
    for (const auto& k : kraus) {
      next.push_back(kron(k, k0));
      next.push_back(kron(k, k1));
    }
    kraus = std::move(next);
  }
  return QuantumChannel(std::move(kraus));
}

}  // namespace

QuantumChannel amplitude_damping_channel(int qubits, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("damping rate must lie in [0, 1]");
  Matrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  return independent_qubits(qubits, k0, k1);
}

QuantumChannel dephasing_channel(int qubits, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("dephasing probability must lie in [0, 1]");
  return independent_qubits(qubits, std::sqrt(1.0 - p) * Matrix(Matrix::Identity(2, 2)), std::sqrt(p) * pauli_z());
}

namespace {

// Register label of the basis state with B bits `b` and C bits `c`.
std::vector<std::vector<Index>> joint_labels(const Partition& partition) {
  const int n = partition.n();
  const auto& bs = partition.region_b();
  const auto& cs = partition.region_c();
  const Index db = Index{1} << bs.size();
  const Index dc = Index{1} << cs.size();
  std::vector<std::vector<Index>> labels(static_cast<std::size_t>(dc), std::vector<Index>(db));
  for (Index c = 0; c < dc; ++c)
    for (Index b = 0; b < db; ++b) {
      std::uint64_t x = 0;
      for (std::size_t f = 0; f < bs.size(); ++f)
        if ((b >> (bs.size() - 1 - f)) & 1) x |= site_bit(bs[f], n);
      for (std::size_t f = 0; f < cs.size(); ++f)
        if ((c >> (cs.size() - 1 - f)) & 1) x |= site_bit(cs[f], n);
      labels[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)] = static_cast<Index>(x);
    }
  return labels;
}

// Columns `cols` of m, in order.
Matrix select_columns(const Matrix& m, const std::vector<Index>& cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = m.col(cols[j]);
  return out;
}

// rho_B is factored as W^dagger W with W the stack of the blocks
// W_c = rho_BC^{1/2} (I_B (x) |c>). Taking rho_B^{-1/2} from the SVD of that
// same W keeps sum_c K_c^dagger K_c on the support of rho_B accurate to
// eps * sqrt(cond rho_B) instead of eps * cond rho_B.
struct RecoveryInputs {
  SpectralDecomposition bc;
  std::vector<Matrix> blocks;  // W_c
  RealVector sigma;            // retained singular values of W
  Matrix v;                    // matching right singular vectors
  Matrix support_b;
};

RecoveryInputs recovery_inputs(const DensityMatrix& rho_bc, const Partition& partition) {
  if (partition.n() != rho_bc.qubit_count())
    throw std::invalid_argument("recovery: partition does not match the state");
  if (partition.region_b().empty())
    throw std::invalid_argument("recovery: region B is empty, nothing to recover from");
  RecoveryInputs in{eigh(rho_bc.hermitian()), {}, {}, {}, {}};
  const Matrix root =
      spectral_apply(in.bc, [](double x) { return x > 0.0 ? Complex(std::sqrt(x)) : Complex(0.0); }, 0.0);
  const auto labels = joint_labels(partition);
  const Index db = Index{1} << partition.region_b().size();
  Matrix w(root.rows() * static_cast<Index>(labels.size()), db);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    in.blocks.push_back(select_columns(root, labels[c]));
    w.middleRows(static_cast<Index>(c) * root.rows(), root.rows()) = in.blocks.back();
  }
  // QR first so the SVD runs on a square factor.
  const Eigen::HouseholderQR<Matrix> qr(w);
  const Matrix r = qr.matrixQR().topRows(db).triangularView<Eigen::Upper>();
  const Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  if (!(s(0) > 1e-150)) throw std::domain_error("recovery: rho_B is numerically zero");
  // Same relative cutoff on the eigenvalues sigma^2 of rho_B as elsewhere.
  const double cutoff = s(0) * std::sqrt(kRelativeSupportCutoff);
  Index kept = 0;
  while (kept < s.size() && s(kept) > cutoff) ++kept;
  in.sigma = s.head(kept);
  in.v = svd.matrixV().leftCols(kept);
  in.support_b = in.v * in.v.adjoint();
  return in;
}

// Kraus operators sqrt(w) rho_BC^{it/2} W_c rho_B^{-(1+it)/2}.
void rotated_kraus(const RecoveryInputs& in, double t, double weight, std::vector<Matrix>& out) {
  Vector scale(in.sigma.size());
  for (Index k = 0; k < in.sigma.size(); ++k)
    scale(k) = std::exp(Complex(-1.0, -t) * std::log(in.sigma(k)));
  const Matrix right = in.v * scale.asDiagonal() * in.v.adjoint();
  const double amp = std::sqrt(weight);
  if (t == 0.0) {
    for (const auto& block : in.blocks) out.push_back(amp * (block * right));
    return;
  }
  const Matrix phase = spectral_apply(
      in.bc, [t](double x) { return x > 0.0 ? std::exp(Complex(0.0, 0.5 * t * std::log(x))) : Complex(0.0); },
      0.0);
  for (const auto& block : in.blocks) out.push_back(amp * (phase * block * right));
}

}  // namespace

QuantumChannel erasure_channel(const Partition& partition) {
  const auto labels = joint_labels(partition);
  const Index db = Index{1} << partition.region_b().size();
  const Index dbc = Index{1} << partition.n();
  std::vector<Matrix> kraus;
  for (const auto& cols : labels) {
    Matrix k = Matrix::Zero(db, dbc);
    for (Index b = 0; b < db; ++b) k(b, cols[static_cast<std::size_t>(b)]) = 1.0;
    kraus.push_back(std::move(k));
  }
  return QuantumChannel(std::move(kraus));
}

QuantumChannel petz_recovery(const DensityMatrix& rho_bc, const Partition& partition) {
  const auto in = recovery_inputs(rho_bc, partition);
  std::vector<Matrix> kraus;
  rotated_kraus(in, 0.0, 1.0, kraus);
  return QuantumChannel(std::move(kraus), in.support_b);
}

double rotation_density(double t) {
  return (std::numbers::pi / 2.0) / (std::cosh(std::numbers::pi * t) + 1.0);
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  if (count < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  nodes.assign(static_cast<std::size_t>(count), 0.0);
  weights.assign(static_cast<std::size_t>(count), 0.0);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(count - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(count - 1 - i)] = w;
  }
  if (count % 2 == 1) nodes[static_cast<std::size_t>(count / 2)] = 0.0;
}

Quadrature Quadrature::rotated_petz(double half_width, int count) {
  if (!(half_width > 0.0)) throw std::invalid_argument("quadrature half width must be positive");
  Quadrature q;
  gauss_legendre(count, q.nodes, q.weights);
  double total = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    q.nodes[i] *= half_width;
    q.weights[i] *= half_width * rotation_density(q.nodes[i]);
    total += q.weights[i];
  }
  for (auto& w : q.weights) w /= total;
  return q;
}

Quadrature Quadrature::explicit_grid(std::vector<double> nodes, std::vector<double> weights) {
  if (nodes.empty() || nodes.size() != weights.size())
    throw std::invalid_argument("quadrature: nodes and weights must be non-empty and equally long");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument(fmt::format("quadrature weights sum to {:.9g}, expected 1", total));
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("quadrature weights must be non-negative");
  return Quadrature{std::move(nodes), std::move(weights)};
}

QuantumChannel rotated_petz_recovery(const DensityMatrix& rho_bc, const Partition& partition,
                                     const Quadrature& quadrature) {
  const double total = std::accumulate(quadrature.weights.begin(), quadrature.weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument(fmt::format("quadrature weights sum to {:.9g}, expected 1", total));
  const auto in = recovery_inputs(rho_bc, partition);
  std::vector<Matrix> kraus;
  for (std::size_t i = 0; i < quadrature.nodes.size(); ++i)
    rotated_kraus(in, quadrature.nodes[i], quadrature.weights[i], kraus);
  return QuantumChannel(std::move(kraus), in.support_b, 1e-8);
}

double entanglement_fidelity(const Purification& psi, const QuantumChannel& channel) {
  if (channel.input_dim() != psi.system_dim || channel.output_dim() != psi.system_dim)
    throw std::invalid_argument(fmt::format("entanglement_fidelity: channel {}->{} on a {}-dim state",
                                            channel.input_dim(), channel.output_dim(), psi.system_dim));
  const auto m = psi.as_matrix();
  double f = 0.0;
  for (const auto& k : channel.kraus()) f += std::norm((m.adjoint() * (k * m)).trace());
  return std::clamp(f, 0.0, 1.0);
}

double entanglement_fidelity(const Purification& psi, const QuantumChannel& second,
                             const QuantumChannel& first) {
  if (first.input_dim() != psi.system_dim || second.output_dim() != psi.system_dim ||
      second.input_dim() != first.output_dim())
    throw std::invalid_argument("entanglement_fidelity: channel dimensions do not chain");
  const auto m = psi.as_matrix();
  std::vector<Matrix> right;  // K1 M
  for (const auto& k1 : first.kraus()) right.push_back(k1 * m);
  double f = 0.0;
  for (const auto& k2 : second.kraus()) {
    const Matrix left = m.adjoint() * k2;  // ancilla x mid
    for (const auto& r : right) f += std::norm(left.cwiseProduct(r.transpose()).sum());
  }
  return std::clamp(f, 0.0, 1.0);
}

double entanglement_fidelity(const DensityMatrix& rho, const QuantumChannel& channel) {
  return entanglement_fidelity(purify(rho, {.truncate_to_rank = true}), channel);
}

double pure_state_fidelity(const Vector& psi, const QuantumChannel& channel) {
  double f = 0.0;
  for (const auto& k : channel.kraus()) f += std::norm(psi.dot(k * psi));
  return f;
}

double ensemble_average_fidelity(std::span<const EnsembleMember> ensemble, const QuantumChannel& channel) {
  double total = 0.0, avg = 0.0;
  for (const auto& m : ensemble) {
    total += m.weight;
    avg += m.weight * pure_state_fidelity(m.state / m.state.norm(), channel);
  }
  return avg / total;
}

std::string_view to_string(RecoveryKind k) { return k == RecoveryKind::petz ? "petz" : "rotated_petz"; }

RecoveryKind parse_recovery_kind(std::string_view text) {
  if (text == "petz") return RecoveryKind::petz;
  if (text == "rotated_petz" || text == "rotated") return RecoveryKind::rotated_petz;
  throw std::invalid_argument(fmt::format("unknown recovery kind '{}' (expected petz or rotated_petz)", text));
}

FidelityReport verify_bound_chain(const DensityMatrix& rho_bc, const Partition& partition,
                                  RecoveryKind kind, const Quadrature& quadrature) {
  FidelityReport r;
  r.recovery_kind = kind;
  r.entropies = cmi_pure_global(rho_bc, partition);
  r.cmi = r.entropies.cmi;
  const QuantumChannel noise = erasure_channel(partition);
  const QuantumChannel recovery = kind == RecoveryKind::petz
                                      ? petz_recovery(rho_bc, partition)
                                      : rotated_petz_recovery(rho_bc, partition, quadrature);
  const auto psi = purify(rho_bc, {.truncate_to_rank = true});
  r.entanglement_fidelity = entanglement_fidelity(psi, recovery, noise);
  const double neg_log = r.entanglement_fidelity > 0.0 ? -std::log(r.entanglement_fidelity)
                                                       : std::numeric_limits<double>::infinity();
  r.bound_eq6_satisfied = r.cmi + kBoundSlack >= neg_log;
  r.bound_eq7_satisfied = 1.0 - r.cmi <= r.entanglement_fidelity + kBoundSlack;
  return r;
}

double petz_fixed_point_error(const DensityMatrix& rho_bc, const Partition& partition) {
  const auto r = petz_recovery(rho_bc, partition);
  const Matrix rho_b = partial_trace(rho_bc.entries(), rho_bc.qubit_count(), partition.region_b());
  return (r.apply(rho_b) - rho_bc.entries()).cwiseAbs().maxCoeff();
}

double haar_average_fidelity(int code_dim, double fe) {
  if (code_dim < 2) throw std::invalid_argument("code dimension must be at least 2");
  if (fe < 0.0 || fe > 1.0) throw std::invalid_argument("entanglement fidelity must lie in [0, 1]");
  const double d = code_dim;
  return (d * fe + 1.0) / (d + 1.0);
}

MonteCarloEstimate haar_monte_carlo_fidelity(const QuantumChannel& channel, const Matrix& code,
                                             int samples, std::mt19937_64& rng) {
  if (samples < 2) throw std::invalid_argument("Monte-Carlo estimate needs at least two samples");
  if (code.rows() != channel.input_dim())
    throw std::invalid_argument("code isometry does not match the channel input");
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector psi = code * random_unit_vector(code.cols(), rng);
    const double f = pure_state_fidelity(psi, channel);
    sum += f;
    sum_sq += f * f;
  }
  MonteCarloEstimate e;
  e.samples = samples;
  e.mean = sum / samples;
  const double var = std::max(0.0, (sum_sq - samples * e.mean * e.mean) / (samples - 1));
  e.standard_error = std::sqrt(var / samples);
  return e;
}

}  // namespace qsc
