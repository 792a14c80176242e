#include "qsc/fermion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

namespace qsc {

Boundary boundary_for(Sector sector) {
  if (sector == Sector::full)
    throw std::invalid_argument("the full spin space mixes both Majorana boundary conditions");
  return sector == Sector::even ? Boundary::antiperiodic : Boundary::periodic;
}

PauliString PauliString::operator*(const PauliString& other) const {
  const int sign = (std::popcount(z & other.x) % 2) ? -1 : 1;
  return PauliString{x ^ other.x, z ^ other.z, phase * other.phase * static_cast<double>(sign)};
}

Matrix PauliString::to_dense(int n) const {
  const Index dim = Index{1} << n;
  Matrix m = Matrix::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    const auto bits = static_cast<std::uint64_t>(s);
    const double sign = (std::popcount(z & bits) % 2) ? -1.0 : 1.0;
    m(static_cast<Index>(bits ^ x), s) = phase * sign;
  }
  return m;
}

Complex PauliString::expectation(const Matrix& rho) const {
  Complex acc = 0.0;
  for (Index s = 0; s < rho.rows(); ++s) {
    const auto bits = static_cast<std::uint64_t>(s);
    const double sign = (std::popcount(z & bits) % 2) ? -1.0 : 1.0;
    acc += sign * rho(s, static_cast<Index>(bits ^ x));
  }
  return phase * acc;
}

std::vector<PauliString> jw_majoranas(int n) {
  if (n < 1 || n > 30) throw std::invalid_argument(fmt::format("jw_majoranas: unsupported n = {}", n));
  std::vector<PauliString> w;
  std::uint64_t string = 0;
  for (int j = 0; j < n; ++j) {
    const std::uint64_t bit = site_bit(j, n);
    w.push_back(PauliString{bit, string, 1.0});
    w.push_back(PauliString{bit, string | bit, Complex(0.0, 1.0)});  // Y = i X Z
    string |= bit;
  }
  return w;
}

std::vector<HermitianMatrix> jw_majorana_operators(int n) {
  if (n > 13) throw std::invalid_argument("jw_majorana_operators: dense operators need n <= 13");
  std::vector<HermitianMatrix> out;
  for (const auto& w : jw_majoranas(n)) out.emplace_back(w.to_dense(n));
  return out;
}

MajoranaCovariance::MajoranaCovariance(RealMatrix gamma) : gamma_(std::move(gamma)) {
  if (gamma_.rows() != gamma_.cols() || gamma_.rows() % 2 != 0 || gamma_.rows() == 0)
    throw std::invalid_argument("covariance matrix must be square of even dimension");
  const double asym = (gamma_ + gamma_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw std::invalid_argument(fmt::format("covariance matrix is not antisymmetric ({:.3e})", asym));
  const double top = Eigen::JacobiSVD<RealMatrix>(gamma_).singularValues()(0);
  if (top > 1.0 + 1e-9)
    throw std::invalid_argument(fmt::format("unphysical covariance: singular value {:.12g} > 1", top));
}

MajoranaCovariance covariance_from_state(const DensityMatrix& rho) {
  const int n = rho.qubit_count();
  const auto w = jw_majoranas(n);
  const Index m = 2 * n;
  RealMatrix gamma = RealMatrix::Zero(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = a + 1; b < m; ++b) {
      const Complex value = Complex(0.0, 1.0) * (w[a] * w[b]).expectation(rho.entries());
      gamma(a, b) = value.real();
      gamma(b, a) = -value.real();
    }
  return MajoranaCovariance(std::move(gamma));
}

RealMatrix ring_coupling_matrix(int n, Boundary boundary) {
  if (n < 2) throw std::invalid_argument(fmt::format("Majorana ring needs n >= 2, got {}", n));
  const Index m = 2 * n;
  RealMatrix a = RealMatrix::Zero(m, m);
  for (Index k = 0; k + 1 < m; ++k) {
    a(k, k + 1) += 2.0;
    a(k + 1, k) -= 2.0;
  }
  const double b = boundary == Boundary::periodic ? 1.0 : -1.0;
  a(m - 1, 0) += 2.0 * b;
  a(0, m - 1) -= 2.0 * b;
  return a;
}

HermitianMatrix quadratic_hamiltonian(const RealMatrix& coupling) {
  const Index m = coupling.rows();
  const int n = static_cast<int>(m / 2);
  const auto w = jw_majoranas(n);
  const Index dim = Index{1} << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (Index a = 0; a < m; ++a)
    for (Index b = a + 1; b < m; ++b) {
      // (i/4)(A_ab w_a w_b + A_ba w_b w_a) = (i/2) A_ab w_a w_b
      const double coeff = 0.5 * (coupling(a, b) - coupling(b, a)) * 0.5;
      if (coeff == 0.0) continue;
      const PauliString q = w[a] * w[b];
      for (Index s = 0; s < dim; ++s) {
        const auto bits = static_cast<std::uint64_t>(s);
        const double sign = (std::popcount(q.z & bits) % 2) ? -1.0 : 1.0;
        h(static_cast<Index>(bits ^ q.x), s) += Complex(0.0, coeff) * q.phase * sign;
      }
    }
  return HermitianMatrix(std::move(h));
}

NormalModes normal_modes(const RealMatrix& coupling) {
  const Index m = coupling.rows();
  const int n = static_cast<int>(m / 2);
  const Matrix ia = Complex(0.0, 1.0) * coupling.cast<Complex>();
  const auto spectrum = eigh(HermitianMatrix(ia));
  const RealVector values = spectrum.eigenvalues();
  const Matrix vectors = spectrum.eigenvectors();
  const double tol = 1e-9 * std::max(1.0, values.cwiseAbs().maxCoeff());

  NormalModes modes;
  modes.energies = RealVector::Zero(n);
  modes.rotation = RealMatrix::Zero(m, m);
  int k = 0;
  for (Index i = 0; i < m && values(i) < -tol; ++i, ++k) {
    // iA u = -e u  =>  u = (o1 + i o2) / sqrt(2)
    modes.energies(k) = -values(i);
    modes.rotation.col(2 * k) = std::sqrt(2.0) * vectors.col(i).real();
    modes.rotation.col(2 * k + 1) = std::sqrt(2.0) * vectors.col(i).imag();
  }
  const int zero_modes = n - k;
  if (zero_modes > 0) {
    // Real orthonormal basis of ker A from the symmetric A^T A.
    Eigen::SelfAdjointEigenSolver<RealMatrix> kernel(coupling.transpose() * coupling);
    for (int z = 0; z < 2 * zero_modes; ++z) modes.rotation.col(2 * k + z) = kernel.eigenvectors().col(z);
  }
  const double defect =
      (modes.rotation.transpose() * modes.rotation - RealMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
  if (defect > 1e-8)
    throw std::runtime_error(fmt::format("normal mode rotation is not orthogonal ({:.3e})", defect));
  modes.orientation = modes.rotation.determinant() > 0 ? 1 : -1;
  return modes;
}

namespace {

double binary_entropy(double p) {
  double s = 0.0;
  if (p > 0.0) s -= p * std::log(p);
  if (p < 1.0) s -= (1.0 - p) * std::log(1.0 - p);
  return s;
}

RealMatrix mode_blocks(const RealVector& values) {
  const Index n = values.size();
  RealMatrix g = RealMatrix::Zero(2 * n, 2 * n);
  for (Index k = 0; k < n; ++k) {
    g(2 * k, 2 * k + 1) = values(k);
    g(2 * k + 1, 2 * k) = -values(k);
  }
  return g;
}

RealMatrix symmetrized(const RealMatrix& g) { return 0.5 * (g - g.transpose()); }

}  // namespace

MajoranaCovariance thermal_covariance(int n, double beta, Boundary boundary) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument(fmt::format("thermal_covariance: beta must be >= 0, got {}", beta));
  // Gamma = i tanh(i beta A / 2)
  const RealMatrix a = ring_coupling_matrix(n, boundary);
  const Matrix ia = Complex(0.0, 1.0) * a.cast<Complex>();
  const auto spectrum = eigh(HermitianMatrix(ia));
  const HermitianMatrix t = matrix_function(spectrum, [&](double x) { return std::tanh(0.5 * beta * x); });
  const Matrix gamma = Complex(0.0, 1.0) * t.entries();
  return MajoranaCovariance(symmetrized(gamma.real()));
}

SectorMoments sector_thermal_moments(int n, double beta, Sector sector) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument(fmt::format("sector_thermal_moments: beta must be >= 0, got {}", beta));
  const auto modes = normal_modes(ring_coupling_matrix(n, boundary_for(sector)));
  const double s = sector == Sector::even ? 1.0 : -1.0;
  const double sd = s * modes.orientation;
  RealVector t(n);
  double log_cosh = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = 0.5 * beta * modes.energies(k);
    t(k) = std::tanh(x);
    log_cosh += x + std::log1p(std::exp(-2.0 * x));  // log(2 cosh x)
  }
  const double prod = t.prod();
  const double norm = 1.0 + sd * prod;
  RealVector block(n);
  for (int k = 0; k < n; ++k) {
    double others = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != k) others *= t(j);
    block(k) = -(t(k) + sd * others) / norm;
  }
  const RealMatrix gamma = modes.rotation * mode_blocks(block) * modes.rotation.transpose();
  return SectorMoments{MajoranaCovariance(symmetrized(gamma)), log_cosh + std::log(0.5 * norm)};
}

MajoranaCovariance gibbs_covariance(int n, double beta) {
  const auto even = sector_thermal_moments(n, beta, Sector::even);
  const auto odd = sector_thermal_moments(n, beta, Sector::odd);
  const double top = std::max(even.log_partition, odd.log_partition);
  const double we = std::exp(even.log_partition - top);
  const double wo = std::exp(odd.log_partition - top);
  const RealMatrix g = (we * even.covariance.matrix() + wo * odd.covariance.matrix()) / (we + wo);
  return MajoranaCovariance(symmetrized(g));
}

SectorSpectrum sector_spectrum(int n, Sector sector) {
  if (n < 2 || n > 24) throw std::invalid_argument(fmt::format("sector_spectrum: unsupported n = {}", n));
  const auto modes = normal_modes(ring_coupling_matrix(n, boundary_for(sector)));
  const int parity = sector == Sector::even ? 1 : -1;
  std::vector<double> energies;
  const double ground = -0.5 * modes.energies.sum();
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << n); ++pattern) {
    const int p = modes.orientation * ((std::popcount(pattern) % 2) ? -1 : 1);
    if (p != parity) continue;
    double e = ground;
    for (int k = 0; k < n; ++k)
      if ((pattern >> k) & 1) e += modes.energies(k);
    energies.push_back(e);
  }
  std::sort(energies.begin(), energies.end());
  SectorSpectrum out;
  out.sector = sector;
  out.single_particle_energies = modes.energies;
  out.many_body_energies = Eigen::Map<RealVector>(energies.data(), static_cast<Index>(energies.size()));
  return out;
}

double calibrate_sector_pairing(int n, double tolerance) {
  const RealVector ed = eigvalsh(build_hamiltonian(n));
  const auto even = sector_spectrum(n, Sector::even);
  const auto odd = sector_spectrum(n, Sector::odd);
  if (even.many_body_energies.size() + odd.many_body_energies.size() != ed.size())
    throw CalibrationError(fmt::format("sector spectra hold {} + {} levels, expected {}",
                                       even.many_body_energies.size(), odd.many_body_energies.size(),
                                       ed.size()));
  RealVector both(ed.size());
  both << even.many_body_energies, odd.many_body_energies;
  std::sort(both.data(), both.data() + both.size());
  const double deviation = (both - ed).cwiseAbs().maxCoeff();
  if (deviation > tolerance)
    throw CalibrationError(
        fmt::format("free-fermion sectors deviate from exact diagonalization by {:.3e} at n = {}",
                    deviation, n));
  return deviation;
}

double gaussian_entropy(const MajoranaCovariance& gamma, std::span<const int> region) {
  if (region.empty()) return 0.0;
  std::vector<int> sites(region.begin(), region.end());
  std::sort(sites.begin(), sites.end());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] < 0 || sites[i] >= gamma.mode_count())
      throw std::out_of_range(fmt::format("gaussian_entropy: site {} out of range", sites[i]));
    if (i > 0 && sites[i] != sites[i - 1] + 1)
      throw std::invalid_argument("gaussian_entropy: region must be a contiguous, non-wrapping run of sites");
  }
  const Index m = 2 * static_cast<Index>(sites.size());
  const Index first = 2 * sites.front();
  const RealMatrix sub = gamma.matrix().block(first, first, m, m);
  const Matrix isub = Complex(0.0, 1.0) * sub.cast<Complex>();
  const RealVector ev = eigvalsh(HermitianMatrix(isub));
  double s = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    const double sigma = std::abs(ev(i));
    if (sigma > 1.0 + 1e-8)
      throw std::invalid_argument(fmt::format("unphysical covariance: eigenvalue {:.12g}", sigma));
    s += 0.5 * binary_entropy(0.5 * (1.0 + std::min(sigma, 1.0)));
  }
  return s;
}

ExtremalityResult extremality_check(const DensityMatrix& rho, const Partition& partition) {
  const CmiReport exact = cmi_pure_global(rho, partition);
  const auto gamma = covariance_from_state(rho);
  std::vector<int> all(static_cast<std::size_t>(rho.qubit_count()));
  for (int q = 0; q < rho.qubit_count(); ++q) all[static_cast<std::size_t>(q)] = q;
  ExtremalityResult r;
  r.cmi_exact = exact.cmi;
  r.cmi_gaussian = gaussian_entropy(gamma, partition.region_c()) + gaussian_entropy(gamma, all) -
                   gaussian_entropy(gamma, partition.region_b());
  r.slack = r.cmi_gaussian - r.cmi_exact;
  return r;
}

DensityMatrix gaussian_thermal_state(int n, double beta, Boundary boundary) {
  return gibbs_state(quadratic_hamiltonian(ring_coupling_matrix(n, boundary)), beta);
}

}  // namespace qsc
