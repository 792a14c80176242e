#include "qsc/spin_model.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qsc {

std::string_view to_string(Sector s) {
  switch (s) {
    case Sector::even: return "even";
    case Sector::odd: return "odd";
    case Sector::full: return "full";
  }
  return "?";
}

Sector parse_sector(std::string_view text) {
  if (text == "even") return Sector::even;
  if (text == "odd") return Sector::odd;
  if (text == "full") return Sector::full;
  throw std::invalid_argument(fmt::format("unknown sector '{}' (expected even, odd or full)", text));
}

void SpinChainSpec::validate() const {
  if (n < 2) throw std::invalid_argument(fmt::format("ring needs n >= 2 sites, got {}", n));
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument(fmt::format("inverse temperature must be finite and >= 0, got {}", beta));
}

HermitianMatrix build_hamiltonian(int n) {
  if (n < 2) throw std::invalid_argument(fmt::format("build_hamiltonian: n = {} < 2", n));
  const Index dim = Index{1} << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    const auto label = static_cast<std::uint64_t>(s);
    double diag = 0.0;
    for (int j = 0; j < n; ++j) diag -= (label & site_bit(j, n)) ? -1.0 : 1.0;
    h(s, s) = diag;
    for (int j = 0; j < n; ++j) {
      const std::uint64_t flipped = label ^ site_bit(j, n) ^ site_bit((j + 1) % n, n);
      h(static_cast<Index>(flipped), s) -= 1.0;
    }
  }
  return HermitianMatrix(std::move(h));
}

ParityDecomposition parity_decomposition(int n) {
  if (n < 1) throw std::invalid_argument(fmt::format("parity_decomposition: n = {} < 1", n));
  const Index dim = Index{1} << n;
  RealVector p(dim);
  for (Index s = 0; s < dim; ++s) p(s) = basis_parity(static_cast<std::uint64_t>(s));
  const Matrix parity = p.cast<Complex>().asDiagonal();
  const Matrix id = Matrix::Identity(dim, dim);
  return ParityDecomposition{HermitianMatrix(parity), HermitianMatrix(0.5 * (id + parity)),
                             HermitianMatrix(0.5 * (id - parity))};
}

namespace {

int block_parity(const SpectralBlock& b) {
  const int p = basis_parity(static_cast<std::uint64_t>(b.indices.front()));
  for (Index i : b.indices)
    if (basis_parity(static_cast<std::uint64_t>(i)) != p)
      throw std::invalid_argument("Hamiltonian couples the two parity sectors");
  return p;
}

bool retained(Sector sector, int parity) {
  return sector == Sector::full || (sector == Sector::even) == (parity > 0);
}

// Lowest retained energy and partition function relative to it.
std::pair<double, double> shifted_partition(const SpectralDecomposition& spectrum, double beta,
                                            Sector sector) {
  double e0 = std::numeric_limits<double>::infinity();
  for (const auto& b : spectrum.blocks())
    if (retained(sector, block_parity(b))) e0 = std::min(e0, b.values.minCoeff());
  if (!std::isfinite(e0)) throw UnderflowError("no eigenstates in the requested parity sector");
  double z = 0.0;
  for (const auto& b : spectrum.blocks()) {
    if (!retained(sector, block_parity(b))) continue;
    for (Index i = 0; i < b.values.size(); ++i) z += std::exp(-beta * (b.values(i) - e0));
  }
  if (!(z >= 1e-300))
    throw UnderflowError(fmt::format("sector partition function underflowed ({:.3e})", z));
  return {e0, z};
}

}  // namespace

DensityMatrix thermal_state(const SpectralDecomposition& h_spectrum, int n, double beta, Sector sector) {
  SpinChainSpec{std::max(n, 2), beta, sector}.validate();
  if (h_spectrum.dim() != (Index{1} << n))
    throw std::invalid_argument("thermal_state: spectrum does not match the register size");
  const auto [e0, z] = shifted_partition(h_spectrum, beta, sector);

  // Keep only retained blocks, then one spectral sum.
  std::vector<SpectralBlock> kept;
  for (const auto& b : h_spectrum.blocks()) {
    SpectralBlock w = b;
    const bool keep = retained(sector, block_parity(b));
    for (Index i = 0; i < w.values.size(); ++i)
      w.values(i) = keep ? std::exp(-beta * (b.values(i) - e0)) / z : 0.0;
    kept.push_back(std::move(w));
  }
  const SpectralDecomposition weights(h_spectrum.dim(), std::move(kept));
  Matrix rho = matrix_function(weights, [](double w) { return w; }).release();
  return DensityMatrix(std::move(rho), Validation::structural);
}

DensityMatrix gibbs_state(const HermitianMatrix& h, double beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument(fmt::format("gibbs_state: beta must be finite and >= 0, got {}", beta));
  const auto spectrum = eigh(h);
  const RealVector ev = spectrum.eigenvalues();
  const double e0 = ev(0);
  double z = 0.0;
  for (Index i = 0; i < ev.size(); ++i) z += std::exp(-beta * (ev(i) - e0));
  Matrix rho = matrix_function(spectrum, [&](double e) { return std::exp(-beta * (e - e0)) / z; })
                   .release();
  return DensityMatrix(std::move(rho), Validation::structural);
}

DensityMatrix parity_projected_thermal(const SpinChainSpec& spec) {
  spec.validate();
  const auto spectrum = eigh(build_hamiltonian(spec.n));
  return thermal_state(spectrum, spec.n, spec.beta, spec.sector);
}

Purification thermofield_double(const SpectralDecomposition& h_spectrum, int n, double beta,
                                Sector sector) {
  SpinChainSpec{std::max(n, 2), beta, sector}.validate();
  const Index dim = Index{1} << n;
  const auto [e0, z] = shifted_partition(h_spectrum, beta, sector);
  struct Level {
    double energy;
    std::size_t block;
    Index local;
  };
  std::vector<Level> levels;
  for (std::size_t b = 0; b < h_spectrum.blocks().size(); ++b) {
    const auto& blk = h_spectrum.blocks()[b];
    if (!retained(sector, block_parity(blk))) continue;
    for (Index i = 0; i < blk.values.size(); ++i) levels.push_back({blk.values(i), b, i});
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const Level& a, const Level& b) { return a.energy < b.energy; });
  Matrix m = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const auto& blk = h_spectrum.blocks()[levels[j].block];
    const double amp = std::sqrt(std::exp(-beta * (levels[j].energy - e0)) / z);
    for (std::size_t r = 0; r < blk.indices.size(); ++r) {
      const Index ri = static_cast<Index>(r);
      const Complex v = blk.real ? Complex(blk.real_vectors(ri, levels[j].local))
                                 : blk.vectors(ri, levels[j].local);
      m(blk.indices[r], static_cast<Index>(j)) = amp * v;
    }
  }
  m /= m.norm();
  return purification_from_matrix(m);
}

IsingRing::IsingRing(int n) : n_(n), spectrum_(eigh(build_hamiltonian(n))) {}

}  // namespace qsc
