#include "qsc/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace qsc {

std::string_view to_string(Units u) { return u == Units::nats ? "nats" : "bits"; }

Units parse_units(std::string_view text) {
  if (text == "nats") return Units::nats;
  if (text == "bits") return Units::bits;
  throw std::invalid_argument(fmt::format("unknown units '{}' (expected nats or bits)", text));
}

double in_units(double nats, Units units) {
  return units == Units::nats ? nats : nats / std::numbers::ln2;
}

Partition Partition::contiguous(int n, int start, int length) {
  if (n < 1) throw std::invalid_argument(fmt::format("partition: n = {} < 1", n));
  if (length < 1 || length > n)
    throw std::invalid_argument(fmt::format("partition: region length {} not in [1, {}]", length, n));
  if (start < 0 || start >= n)
    throw std::out_of_range(fmt::format("partition: start site {} outside [0, {})", start, n));
  std::vector<int> c, b;
  for (int k = 0; k < length; ++k) c.push_back((start + k) % n);
  std::sort(c.begin(), c.end());
  for (int q = 0; q < n; ++q)
    if (!std::binary_search(c.begin(), c.end(), q)) b.push_back(q);
  return Partition(n, start, std::move(c), std::move(b));
}

CmiReport CmiReport::converted(Units units) const {
  CmiReport r = *this;
  r.S_C = in_units(S_C, units);
  r.S_B = in_units(S_B, units);
  r.S_BC = in_units(S_BC, units);
  r.cmi = r.S_C + r.S_BC - r.S_B;
  return r;
}

double entropy_of_spectrum(const RealVector& eigenvalues) {
  double s = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const double p = eigenvalues(i);
    if (p > kEntropyCutoff) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_of_spectrum(eigvalsh(rho.hermitian()));
}

double subsystem_entropy(const DensityMatrix& rho, std::span<const int> region) {
  if (region.empty()) return 0.0;
  if (static_cast<int>(region.size()) == rho.qubit_count()) {
    std::vector<int> all(region.begin(), region.end());
    std::sort(all.begin(), all.end());
    for (int q = 0; q < rho.qubit_count(); ++q)
      if (all[static_cast<std::size_t>(q)] != q)
        throw std::invalid_argument("subsystem_entropy: invalid region");
    return von_neumann_entropy(rho);
  }
  return von_neumann_entropy(partial_trace(rho, region));
}

CmiReport cmi_pure_global(const DensityMatrix& rho_bc, const Partition& partition) {
  return cmi_pure_global(rho_bc, partition, von_neumann_entropy(rho_bc));
}

CmiReport cmi_pure_global(const DensityMatrix& rho_bc, const Partition& partition, double s_bc) {
  if (partition.n() != rho_bc.qubit_count())
    throw std::invalid_argument(fmt::format("partition of {} sites does not match a {}-qubit state",
                                            partition.n(), rho_bc.qubit_count()));
  CmiReport r;
  r.S_BC = s_bc;
  r.S_C = subsystem_entropy(rho_bc, partition.region_c());
  r.S_B = subsystem_entropy(rho_bc, partition.region_b());
  r.cmi = r.S_C + r.S_BC - r.S_B;
  r.one_minus_cmi = 1.0 - r.cmi;
  r.fidelity_lower_bound = std::max(0.0, r.one_minus_cmi);
  return r;
}

namespace {

void check_tripartition(int qubits, std::span<const int> a, std::span<const int> b,
                        std::span<const int> c) {
  std::vector<int> seen(static_cast<std::size_t>(qubits), 0);
  for (auto region : {a, b, c})
    for (int q : region) {
      if (q < 0 || q >= qubits)
        throw std::out_of_range(fmt::format("cmi_general: site {} outside [0, {})", q, qubits));
      if (seen[static_cast<std::size_t>(q)]++)
        throw std::invalid_argument(fmt::format("cmi_general: site {} in more than one region", q));
    }
  for (int q = 0; q < qubits; ++q)
    if (!seen[static_cast<std::size_t>(q)])
      throw std::invalid_argument(fmt::format("cmi_general: site {} not covered by A, B or C", q));
}

std::vector<int> join(std::span<const int> x, std::span<const int> y) {
  std::vector<int> out(x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double cmi_general(const DensityMatrix& rho, std::span<const int> a, std::span<const int> b,
                   std::span<const int> c) {
  check_tripartition(rho.qubit_count(), a, b, c);
  const auto ab = join(a, b);
  const auto bc = join(b, c);
  const auto abc = join(ab, c);
  return subsystem_entropy(rho, ab) + subsystem_entropy(rho, bc) - subsystem_entropy(rho, abc) -
         subsystem_entropy(rho, b);
}

double pure_state_entropy(const PureState& psi, int qubits, std::span<const int> region) {
  if (psi.dim() != (Index{1} << qubits))
    throw std::invalid_argument("pure_state_entropy: state does not match the register size");
  std::vector<int> x(region.begin(), region.end());
  std::sort(x.begin(), x.end());
  if (x.empty() || static_cast<int>(x.size()) == qubits) return 0.0;
  std::vector<int> rest;
  for (int q = 0; q < qubits; ++q)
    if (!std::binary_search(x.begin(), x.end(), q)) rest.push_back(q);

  const Index dx = Index{1} << x.size();
  const Index dr = Index{1} << rest.size();
  Matrix m(dx, dr);
  const auto& amps = psi.amplitudes();
  for (Index label = 0; label < psi.dim(); ++label) {
    const auto bits = static_cast<std::uint64_t>(label);
    Index ix = 0, ir = 0;
    for (int q : x) ix = (ix << 1) | ((bits & site_bit(q, qubits)) ? 1 : 0);
    for (int q : rest) ir = (ir << 1) | ((bits & site_bit(q, qubits)) ? 1 : 0);
    m(ix, ir) = amps(label);
  }
  Matrix gram = dx <= dr ? Matrix(m * m.adjoint()) : Matrix(m.adjoint() * m);
  gram = 0.5 * (gram + gram.adjoint());
  return entropy_of_spectrum(eigvalsh(HermitianMatrix(std::move(gram))));
}

double cmi_general(const PureState& psi, int qubits, std::span<const int> a, std::span<const int> b,
                   std::span<const int> c) {
  check_tripartition(qubits, a, b, c);
  const auto ab = join(a, b);
  const auto bc = join(b, c);
  const auto abc = join(ab, c);
  return pure_state_entropy(psi, qubits, ab) + pure_state_entropy(psi, qubits, bc) -
         pure_state_entropy(psi, qubits, abc) - pure_state_entropy(psi, qubits, b);
}

}  // namespace qsc
