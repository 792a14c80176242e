#include "qsc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>


namespace qsc {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_real(const Matrix& m) {
  const Complex* p = m.data();
  for (Index i = 0; i < m.size(); ++i)
    if (p[i].imag() != 0.0) return false;
  return true;
}

Matrix gather(const Matrix& m, const std::vector<Index>& idx) {
  const Index k = static_cast<Index>(idx.size());
  Matrix out(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) out(i, j) = m(idx[i], idx[j]);
  return out;
}

// Diagonalizes one block; values ascending.
SpectralBlock solve_block(Matrix block, std::vector<Index> indices, bool vectors) {
  SpectralBlock out;
  out.indices = std::move(indices);
  const Index k = block.rows();
  out.values.resize(k);
  if (k == 1) {
    out.values(0) = block(0, 0).real();
    out.real = true;
    if (vectors) out.real_vectors = RealMatrix::Ones(1, 1);
    return out;
  }
  const auto options = vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
  Eigen::ComputationInfo info;
  if (is_real(block)) {
    // Real symmetric blocks (the Hamiltonian and its thermal states) take the
    // cheaper real tridiagonalization.
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(RealMatrix(block.real()), options);
    info = es.info();
    out.real = true;
    if (info == Eigen::Success) {
      out.values = es.eigenvalues();
      if (vectors) out.real_vectors = es.eigenvectors();
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(block, options);
    info = es.info();
    if (info == Eigen::Success) {
      out.values = es.eigenvalues();
      if (vectors) out.vectors = es.eigenvectors();
    }
  }
  if (info != Eigen::Success)
    throw ConvergenceError(fmt::format("Hermitian eigensolver did not converge on a {}x{} block", k, k));
  return out;
}

std::vector<SpectralBlock> solve(const Matrix& m, bool vectors) {
  auto groups = decoupled_blocks(m);
  std::vector<SpectralBlock> blocks;
  blocks.reserve(groups.size());
  if (groups.size() == 1) {
    blocks.push_back(solve_block(m, std::move(groups.front()), vectors));
    return blocks;
  }
  for (auto& g : groups) {
    Matrix sub = gather(m, g);
    blocks.push_back(solve_block(std::move(sub), std::move(g), vectors));
  }
  return blocks;
}

RealVector merged_values(const std::vector<SpectralBlock>& blocks, Index dim) {
  RealVector all(dim);
  Index pos = 0;
  for (const auto& b : blocks) {
    all.segment(pos, b.values.size()) = b.values;
    pos += b.values.size();
  }
  std::sort(all.data(), all.data() + all.size());
  return all;
}

// Scatters V diag(w) V^dagger of every block into a dense matrix.
template <class Weight>
Matrix spectral_sum(const SpectralDecomposition& s, Weight&& weight) {
  Matrix out = Matrix::Zero(s.dim(), s.dim());
  for (const auto& b : s.blocks()) {
    const Index k = static_cast<Index>(b.indices.size());
    Eigen::VectorXcd w(k);
    bool any = false;
    bool real_weights = true;
    for (Index i = 0; i < k; ++i) {
      w(i) = weight(b.values(i));
      any = any || w(i) != Complex(0.0);
      real_weights = real_weights && w(i).imag() == 0.0;
    }
    if (!any) continue;
    Matrix local;
    if (b.real && real_weights) {
      const RealVector wr = w.real();
      RealMatrix scaled = b.real_vectors * wr.asDiagonal();
      local = (scaled * b.real_vectors.transpose()).cast<Complex>();
    } else {
      const Matrix v = b.complex_vectors();
      local = (v * w.asDiagonal()) * v.adjoint();
    }
    if (s.blocks().size() == 1 && k == s.dim()) return local;
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < k; ++i) out(b.indices[i], b.indices[j]) = local(i, j);
  }
  return out;
}

std::vector<int> sorted_unique_sites(std::span<const int> sites, int n, const char* what) {
  std::vector<int> s(sites.begin(), sites.end());
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw std::invalid_argument(fmt::format("{}: repeated site index", what));
  for (int q : s)
    if (q < 0 || q >= n)
      throw std::out_of_range(fmt::format("{}: site {} outside register of {} qubits", what, q, n));
  return s;
}

}  // namespace

HermitianMatrix::HermitianMatrix(Matrix entries, double tolerance) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
    throw std::invalid_argument(
        fmt::format("Hermitian matrix must be square and non-empty, got {}x{}", entries_.rows(),
                    entries_.cols()));
  const Index n = entries_.rows();
  const double scale = std::max(1.0, max_abs(entries_));
  double worst = 0.0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i)
      worst = std::max(worst, std::abs(entries_(i, j) - std::conj(entries_(j, i))));
  if (worst > tolerance * scale)
    throw std::invalid_argument(
        fmt::format("matrix is not Hermitian: max |A - A^dagger| = {:.3e}", worst));
}

DensityMatrix::DensityMatrix(Matrix entries, Validation validation)
    : matrix_(std::move(entries)), qubits_(0) {
  const Index d = matrix_.dim();
  if ((d & (d - 1)) != 0)
    throw std::invalid_argument(fmt::format("density matrix dimension {} is not a power of two", d));
  while ((Index{1} << qubits_) < d) ++qubits_;
  const double tr = matrix_.entries().trace().real();
  if (std::abs(tr - 1.0) > kTraceTolerance)
    throw std::invalid_argument(fmt::format("density matrix trace is {:.15g}, expected 1", tr));
  if (validation == Validation::full) {
    const RealVector ev = eigvalsh(matrix_);
    if (ev(0) < -kNegativityTolerance)
      throw std::invalid_argument(
          fmt::format("density matrix has negative eigenvalue {:.3e}", ev(0)));
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int qubits) {
  const Index d = Index{1} << qubits;
  return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), Validation::structural);
}

DensityMatrix DensityMatrix::from_pure(const Vector& amplitudes) {
  const PureState psi(amplitudes);
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), Validation::structural);
}

PureState::PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > 1e-12)
    throw std::invalid_argument(fmt::format("pure state has norm {:.15g}, expected 1", norm));
}

Matrix SpectralBlock::complex_vectors() const {
  return real ? Matrix(real_vectors.cast<Complex>()) : vectors;
}

SpectralDecomposition::SpectralDecomposition(Index dim, std::vector<SpectralBlock> blocks)
    : dim_(dim), blocks_(std::move(blocks)) {}

RealVector SpectralDecomposition::eigenvalues() const { return merged_values(blocks_, dim_); }

Matrix SpectralDecomposition::eigenvectors() const {
  struct Column {
    double value;
    std::size_t block;
    Index local;
  };
  std::vector<Column> cols;
  cols.reserve(static_cast<std::size_t>(dim_));
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    for (Index i = 0; i < blocks_[b].values.size(); ++i) cols.push_back({blocks_[b].values(i), b, i});
  std::stable_sort(cols.begin(), cols.end(),
                   [](const Column& a, const Column& b) { return a.value < b.value; });
  Matrix v = Matrix::Zero(dim_, dim_);
  for (Index c = 0; c < dim_; ++c) {
    const auto& blk = blocks_[cols[static_cast<std::size_t>(c)].block];
    const Index local = cols[static_cast<std::size_t>(c)].local;
    for (std::size_t r = 0; r < blk.indices.size(); ++r) {
      const Index ri = static_cast<Index>(r);
      v(blk.indices[r], c) = blk.real ? Complex(blk.real_vectors(ri, local)) : blk.vectors(ri, local);
    }
  }
  return v;
}

double SpectralDecomposition::max_abs_eigenvalue() const {
  double m = 0.0;
  for (const auto& b : blocks_)
    if (b.values.size() > 0) m = std::max(m, b.values.cwiseAbs().maxCoeff());
  return m;
}

std::vector<std::vector<Index>> decoupled_blocks(const Matrix& m) {
  const Index n = m.rows();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      if (m(i, j) == Complex(0.0) && m(j, i) == Complex(0.0)) continue;
      const Index a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::vector<Index>> groups;
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    const Index r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<Index>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return groups;
}

SpectralDecomposition eigh(const HermitianMatrix& h) {
  return SpectralDecomposition(h.dim(), solve(h.entries(), true));
}

RealVector eigvalsh(const HermitianMatrix& h) {
  return merged_values(solve(h.entries(), false), h.dim());
}

HermitianMatrix matrix_function(const HermitianMatrix& h, const std::function<double(double)>& f,
                                std::optional<double> support_cutoff) {
  return matrix_function(eigh(h), f, support_cutoff);
}

HermitianMatrix matrix_function(const SpectralDecomposition& spectrum,
                                const std::function<double(double)>& f,
                                std::optional<double> support_cutoff) {
  auto weight = [&](double lambda) -> Complex {
    if (support_cutoff && std::abs(lambda) <= *support_cutoff) return 0.0;
    const double y = f(lambda);
    if (!std::isfinite(y))
      throw std::domain_error(
          fmt::format("matrix function undefined at retained eigenvalue {:.6e}", lambda));
    return y;
  };
  Matrix out = spectral_sum(spectrum, weight);
  return HermitianMatrix(std::move(out), 1e-10);
}

Matrix spectral_apply(const SpectralDecomposition& spectrum, const std::function<Complex(double)>& f,
                      std::optional<double> support_cutoff) {
  auto weight = [&](double lambda) -> Complex {
    if (support_cutoff && std::abs(lambda) <= *support_cutoff) return 0.0;
    const Complex y = f(lambda);
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag()))
      throw std::domain_error(
          fmt::format("matrix function undefined at retained eigenvalue {:.6e}", lambda));
    return y;
  };
  return spectral_sum(spectrum, weight);
}

double default_support_cutoff(const SpectralDecomposition& spectrum) {
  return kRelativeSupportCutoff * spectrum.max_abs_eigenvalue();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix embed_operator(const Matrix& op, std::span<const int> sites, int n) {
  if (sites.empty()) throw std::invalid_argument("embed_operator: no sites given");
  const Index local_dim = Index{1} << sites.size();
  if (op.rows() != local_dim || op.cols() != local_dim)
    throw std::invalid_argument(fmt::format("embed_operator: {}x{} operator does not act on {} site(s)",
                                            op.rows(), op.cols(), sites.size()));
  sorted_unique_sites(sites, n, "embed_operator");
  const Index dim = Index{1} << n;
  const int k = static_cast<int>(sites.size());
  // bits[s] = register bits for local basis label s (factor 0 most significant)
  std::vector<std::uint64_t> bits(static_cast<std::size_t>(local_dim), 0);
  std::uint64_t mask = 0;
  for (Index s = 0; s < local_dim; ++s)
    for (int f = 0; f < k; ++f)
      if ((s >> (k - 1 - f)) & 1) bits[static_cast<std::size_t>(s)] |= site_bit(sites[f], n);
  for (int f = 0; f < k; ++f) mask |= site_bit(sites[f], n);

  Matrix out = Matrix::Zero(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    const std::uint64_t rest = static_cast<std::uint64_t>(col) & ~mask;
    Index s_col = 0;
    for (int f = 0; f < k; ++f)
      s_col = (s_col << 1) | ((static_cast<std::uint64_t>(col) & site_bit(sites[f], n)) ? 1 : 0);
    for (Index s_row = 0; s_row < local_dim; ++s_row) {
      const Complex v = op(s_row, s_col);
      if (v == Complex(0.0)) continue;
      out(static_cast<Index>(rest | bits[static_cast<std::size_t>(s_row)]), col) = v;
    }
  }
  return out;
}

HermitianMatrix embed_site_operator(const Matrix& op, std::span<const int> sites, int n) {
  return HermitianMatrix(embed_operator(op, sites, n));
}

Matrix partial_trace(const Matrix& m, int qubits, std::span<const int> keep) {
  if (keep.empty())
    throw std::invalid_argument("partial_trace: empty keep set (use the trace instead)");
  if (m.rows() != (Index{1} << qubits) || m.cols() != m.rows())
    throw std::invalid_argument("partial_trace: matrix does not match the register size");
  const auto kept = sorted_unique_sites(keep, qubits, "partial_trace");
  std::vector<int> traced;
  for (int q = 0; q < qubits; ++q)
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);

  auto labels = [&](const std::vector<int>& sites) {
    const int k = static_cast<int>(sites.size());
    std::vector<Index> out(std::size_t{1} << k, 0);
    for (std::size_t s = 0; s < out.size(); ++s)
      for (int f = 0; f < k; ++f)
        if ((s >> (k - 1 - f)) & 1) out[s] |= static_cast<Index>(site_bit(sites[f], qubits));
    return out;
  };
  const auto keep_bits = labels(kept);
  const auto trace_bits = labels(traced);
  const Index dk = static_cast<Index>(keep_bits.size());
  if (traced.empty()) return m;

  Matrix out = Matrix::Zero(dk, dk);
  for (Index j = 0; j < dk; ++j) {
    for (Index i = 0; i < dk; ++i) {
      Complex acc = 0.0;
      for (Index t : trace_bits) acc += m(keep_bits[i] | t, keep_bits[j] | t);
      out(i, j) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  Matrix reduced = partial_trace(rho.entries(), rho.qubit_count(), keep);
  return DensityMatrix(std::move(reduced), Validation::structural);
}

HermitianMatrix psd_sqrt(const HermitianMatrix& h) {
  const auto spectrum = eigh(h);
  const RealVector ev = spectrum.eigenvalues();
  if (ev(0) < -kNegativityTolerance * std::max(1.0, spectrum.max_abs_eigenvalue()))
    throw std::invalid_argument(
        fmt::format("square root of a matrix with negative eigenvalue {:.3e}", ev(0)));
  return matrix_function(spectrum, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim())
    throw std::invalid_argument(
        fmt::format("state_fidelity: dimensions {} and {} differ", rho.dim(), sigma.dim()));
  const Matrix root = psd_sqrt(rho.hermitian()).entries();
  Matrix inner = root * sigma.entries() * root;
  inner = 0.5 * (inner + inner.adjoint());
  const RealVector ev = eigvalsh(HermitianMatrix(std::move(inner), 1e-10));
  if (ev(0) < -1e-9)
    throw std::invalid_argument(
        fmt::format("state_fidelity: argument is not positive semidefinite ({:.3e})", ev(0)));
  double f = 0.0;
  for (Index i = 0; i < ev.size(); ++i) f += std::sqrt(std::max(ev(i), 0.0));
  return std::clamp(f, 0.0, 1.0);
}

Matrix Purification::reduced_system() const {
  const auto m = as_matrix();
  return m * m.adjoint();
}

Purification purification_from_matrix(const Matrix& m) {
  Vector amps = Eigen::Map<const Vector>(m.data(), m.size());
  return Purification{PureState(std::move(amps)), m.cols(), m.rows()};
}

Purification purify(const SpectralDecomposition& spectrum, PurifyOptions options) {
  const Index dim = spectrum.dim();
  const double cutoff = options.rank_cutoff * std::max(spectrum.max_abs_eigenvalue(), 1e-300);
  struct Column {
    double weight;
    std::size_t block;
    Index local;
  };
  std::vector<Column> cols;
  for (std::size_t b = 0; b < spectrum.blocks().size(); ++b) {
    const auto& blk = spectrum.blocks()[b];
    for (Index i = 0; i < blk.values.size(); ++i)
      if (!options.truncate_to_rank || blk.values(i) > cutoff) cols.push_back({blk.values(i), b, i});
  }
  // Largest weight on ancilla label 0.
  std::stable_sort(cols.begin(), cols.end(),
                   [](const Column& a, const Column& b) { return a.weight > b.weight; });
  const Index ancilla = options.truncate_to_rank ? static_cast<Index>(cols.size()) : dim;
  Matrix m = Matrix::Zero(dim, ancilla);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const double amp = std::sqrt(std::max(cols[c].weight, 0.0));
    if (amp == 0.0) continue;
    const auto& blk = spectrum.blocks()[cols[c].block];
    for (std::size_t r = 0; r < blk.indices.size(); ++r) {
      const Index ri = static_cast<Index>(r);
      m(blk.indices[r], static_cast<Index>(c)) =
          amp * (blk.real ? Complex(blk.real_vectors(ri, cols[c].local)) : blk.vectors(ri, cols[c].local));
    }
  }
  // Renormalize away clamping and truncation error.
  m /= m.norm();
  return purification_from_matrix(m);
}

Purification purify(const DensityMatrix& rho, PurifyOptions options) {
  return purify(eigh(rho.hermitian()), options);
}

}  // namespace qsc
