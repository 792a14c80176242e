#include <doctest.h>

#include <algorithm>
#include <bit>
#include <numbers>
#include <random>

#include "qsc/fermion.hpp"
#include "qsc/random.hpp"
#include "qsc/spin_model.hpp"
#include "support.hpp"

using namespace qsc;
using qsc::testing::max_abs;

namespace {

// Textbook single-particle energies 4 |sin(k/2)| of the critical ring.
std::vector<double> mode_energies(int n, Boundary boundary) {
  std::vector<double> e;
  for (int m = 0; m < n; ++m) {
    const double k = boundary == Boundary::antiperiodic ? std::numbers::pi * (2 * m + 1) / n
                                                        : 2 * std::numbers::pi * m / n;
    e.push_back(4.0 * std::abs(std::sin(k / 2.0)));
  }
  std::sort(e.begin(), e.end());
  return e;
}

// Entropy of exp(-beta H) over the full Fock space of the given modes.
double fock_entropy(const std::vector<double>& modes, double beta) {
  std::vector<double> weights;
  const auto count = static_cast<std::uint32_t>(modes.size());
  double z = 0.0;
  for (std::uint32_t occ = 0; occ < (1u << count); ++occ) {
    double e = 0.0;
    for (std::uint32_t k = 0; k < count; ++k) e += modes[k] * (((occ >> k) & 1) ? 0.5 : -0.5);
    weights.push_back(std::exp(-beta * e));
    z += weights.back();
  }
  for (auto& w : weights) w /= z;
  return qsc::testing::entropy_of(weights);
}

RealMatrix vacuum_covariance(int n) {
  RealMatrix g = RealMatrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    g(2 * j, 2 * j + 1) = -1.0;
    g(2 * j + 1, 2 * j) = 1.0;
  }
  return g;
}

Matrix basis_projector(Index dim, Index label) {
  Matrix m = Matrix::Zero(dim, dim);
  m(label, label) = 1.0;
  return m;
}

DensityMatrix random_even_state(int n, std::mt19937_64& rng) {
  const Index d = Index{1} << n;
  Matrix g = ginibre(d, d, rng);
  for (Index i = 0; i < d; ++i)
    if (basis_parity(static_cast<std::uint64_t>(i)) < 0) g.row(i).setZero();
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

std::vector<int> sites(int from, int to) {
  std::vector<int> out;
  for (int i = from; i < to; ++i) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("Majoranas of a single site are X and Y") {
  const auto w = jw_majorana_operators(1);
  REQUIRE(w.size() == 2);
  CHECK(max_abs(w[0].entries() - pauli_x()) == 0.0);
  CHECK(max_abs(w[1].entries() - pauli_y()) == 0.0);
}

TEST_CASE("Majorana anticommutation") {
  for (int n = 1; n <= 5; ++n) {
    const auto w = jw_majorana_operators(n);
    const Index d = Index{1} << n;
    double worst = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a)
      for (std::size_t b = 0; b < w.size(); ++b) {
        const Matrix ac = w[a].entries() * w[b].entries() + w[b].entries() * w[a].entries();
        const Matrix expected = (a == b ? 2.0 : 0.0) * Matrix::Identity(d, d);
        worst = std::max(worst, max_abs(ac - expected));
      }
    CAPTURE(n);
    CHECK(worst <= 1e-12);
  }
  // Pauli-string algebra at sizes beyond dense matrices.
  const auto w = jw_majoranas(30);
  for (std::size_t a = 0; a < w.size(); a += 7)
    for (std::size_t b = 0; b < w.size(); b += 5) {
      const auto ab = w[a] * w[b];
      const auto ba = w[b] * w[a];
      CHECK(ab.x == ba.x);
      CHECK(ab.z == ba.z);
      CHECK(std::abs(ab.phase + (a == b ? -1.0 : 1.0) * ba.phase) <= 1e-15);
      if (a == b) CHECK(std::abs(ab.phase - 1.0) <= 1e-15);
    }
  CHECK_THROWS(jw_majoranas(31));
  CHECK_THROWS(jw_majorana_operators(14));
}

TEST_CASE("Majoranas are Hermitian and Pauli strings match their dense form") {
  const auto w = jw_majorana_operators(4);
  const auto s = jw_majoranas(4);
  for (std::size_t a = 0; a < w.size(); ++a) {
    CHECK(max_abs(w[a].entries() - w[a].entries().adjoint()) == 0.0);
    CHECK(max_abs(s[a].to_dense(4) - w[a].entries()) == 0.0);
  }
  std::mt19937_64 rng(1);
  const auto rho = random_density_matrix(4, rng);
  const auto p = s[2] * s[5];
  CHECK(std::abs(p.expectation(rho.entries()) - (p.to_dense(4) * rho.entries()).trace()) <= 1e-14);
}

TEST_CASE("product of all Majoranas is proportional to the parity") {
  for (int n : {1, 2, 3, 4}) {
    const auto w = jw_majorana_operators(n);
    Matrix prod = Matrix::Identity(Index{1} << n, Index{1} << n);
    for (const auto& op : w) prod = prod * op.entries();
    prod *= std::pow(Complex(0.0, -1.0), n);
    const Matrix p = parity_decomposition(n).parity_operator.entries();
    CAPTURE(n);
    CHECK(max_abs(prod - p) <= 1e-12);
  }
}

TEST_CASE("spin bilinears in terms of Majoranas") {
  const int n = 4;
  const auto w = jw_majorana_operators(n);
  const Complex i(0.0, 1.0);
  const Matrix p = parity_decomposition(n).parity_operator.entries();
  for (int j = 0; j < n; ++j) {
    const int site[] = {j};
    CHECK(max_abs(embed_operator(pauli_z(), site, n) + i * w[2 * j].entries() * w[2 * j + 1].entries()) <= 1e-14);
  }
  for (int j = 0; j + 1 < n; ++j) {
    const int bond[] = {j, j + 1};
    CHECK(max_abs(embed_operator(kron(pauli_x(), pauli_x()), bond, n) +
                  i * w[2 * j + 1].entries() * w[2 * j + 2].entries()) <= 1e-14);
  }
  const int seam[] = {n - 1, 0};
  CHECK(max_abs(embed_operator(kron(pauli_x(), pauli_x()), seam, n) -
                i * p * w[2 * n - 1].entries() * w[0].entries()) <= 1e-14);
}

TEST_CASE("covariance of simple states") {
  const auto mixed = covariance_from_state(DensityMatrix::maximally_mixed(3));
  CHECK(mixed.matrix().cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(mixed.mode_count() == 3);

  const auto vac = covariance_from_state(DensityMatrix(basis_projector(8, 0)));
  CHECK((vac.matrix() - vacuum_covariance(3)).cwiseAbs().maxCoeff() <= 1e-15);

  // Direct expectation values i/2 Tr(rho [w_a, w_b]) on a random state.
  std::mt19937_64 rng(2);
  const auto rho = random_density_matrix(3, rng);
  const auto w = jw_majorana_operators(3);
  const auto g = covariance_from_state(rho).matrix();
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      const Matrix comm = w[a].entries() * w[b].entries() - w[b].entries() * w[a].entries();
      const Complex expected = Complex(0.0, 0.5) * (rho.entries() * comm).trace();
      CHECK(std::abs(expected.imag()) <= 1e-12);
      CHECK(std::abs(g(a, b) - expected.real()) <= 1e-12);
    }
}

TEST_CASE("MajoranaCovariance rejects invalid matrices") {
  CHECK_THROWS_AS(MajoranaCovariance(RealMatrix::Identity(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(MajoranaCovariance(RealMatrix::Zero(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(MajoranaCovariance(RealMatrix(1.01 * vacuum_covariance(2))), std::invalid_argument);
  CHECK_NOTHROW(MajoranaCovariance(RealMatrix((1.0 + 1e-12) * vacuum_covariance(2))));
}

TEST_CASE("ring coupling and quadratic Hamiltonian") {
  const RealMatrix a = ring_coupling_matrix(4, Boundary::periodic);
  CHECK((a + a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a(0, 1) == 2.0);
  CHECK(a(7, 0) == 2.0);
  CHECK(ring_coupling_matrix(4, Boundary::antiperiodic)(7, 0) == -2.0);
  CHECK_THROWS(ring_coupling_matrix(1, Boundary::periodic));

  // Restricted to its sector, the Majorana ring reproduces the spin ring.
  for (int n : {3, 4, 5}) {
    const Matrix h = build_hamiltonian(n).entries();
    const auto pd = parity_decomposition(n);
    for (Sector s : {Sector::even, Sector::odd}) {
      const Matrix proj = (s == Sector::even ? pd.projector_even : pd.projector_odd).entries();
      const Matrix hf = quadratic_hamiltonian(ring_coupling_matrix(n, boundary_for(s))).entries();
      CHECK(max_abs(proj * (hf - h) * proj) <= 1e-12);
    }
  }
  CHECK(boundary_for(Sector::even) == Boundary::antiperiodic);
  CHECK(boundary_for(Sector::odd) == Boundary::periodic);
  CHECK_THROWS(boundary_for(Sector::full));
}

TEST_CASE("normal modes") {
  for (int n : {2, 5, 8})
    for (Boundary bc : {Boundary::periodic, Boundary::antiperiodic}) {
      const RealMatrix a = ring_coupling_matrix(n, bc);
      const auto modes = normal_modes(a);
      const RealMatrix& o = modes.rotation;
      CHECK((o.transpose() * o - RealMatrix::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() <= 1e-10);
      RealMatrix canon = RealMatrix::Zero(2 * n, 2 * n);
      for (int k = 0; k < n; ++k) {
        canon(2 * k, 2 * k + 1) = modes.energies(k);
        canon(2 * k + 1, 2 * k) = -modes.energies(k);
      }
      CHECK((o * canon * o.transpose() - a).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(std::abs(modes.orientation) == 1);
      std::vector<double> e(modes.energies.data(), modes.energies.data() + n);
      std::sort(e.begin(), e.end());
      const auto expected = mode_energies(n, bc);
      for (int k = 0; k < n; ++k) CHECK(std::abs(e[k] - expected[k]) <= 1e-10);
    }
}

TEST_CASE("sector spectra pair with the spin parity sectors") {
  for (int n = 2; n <= 10; ++n) {
    CAPTURE(n);
    CHECK(calibrate_sector_pairing(n) <= 1e-8);
    const auto even = sector_spectrum(n, Sector::even);
    const auto odd = sector_spectrum(n, Sector::odd);
    CHECK(even.many_body_energies.size() + odd.many_body_energies.size() == (Index{1} << n));
    CHECK(std::is_sorted(even.many_body_energies.begin(), even.many_body_energies.end()));
  }
  // n = 2 against the full 4 x 4 diagonalization.
  const RealVector ed = eigvalsh(build_hamiltonian(2));
  std::vector<double> ff;
  for (Sector s : {Sector::even, Sector::odd})
    for (double e : sector_spectrum(2, s).many_body_energies) ff.push_back(e);
  std::sort(ff.begin(), ff.end());
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ff[i] - ed(i)) <= 1e-10);

  const RealVector ed8 = eigvalsh(build_hamiltonian(8));
  const double lowest = std::min(sector_spectrum(8, Sector::even).many_body_energies.minCoeff(),
                                 sector_spectrum(8, Sector::odd).many_body_energies.minCoeff());
  CHECK(std::abs(lowest - ed8(0)) <= 1e-8);
  CHECK(std::abs(lowest - qsc::testing::ring_ground_energy(8)) <= 1e-8);
  CHECK_THROWS_AS(calibrate_sector_pairing(4, -1.0), CalibrationError);
  CHECK_THROWS(sector_spectrum(5, Sector::full));
}

TEST_CASE("swapped boundary pairing is detected") {
  // The wrong pairing yields a spectrum visibly different from ED.
  const int n = 6;
  std::vector<double> wrong;
  for (Boundary bc : {Boundary::periodic, Boundary::antiperiodic}) {
    const auto modes = normal_modes(ring_coupling_matrix(n, bc));
    const int want = bc == Boundary::periodic ? 1 : -1;  // swapped
    for (std::uint32_t occ = 0; occ < (1u << n); ++occ) {
      int parity = modes.orientation;
      double e = 0.0;
      for (int k = 0; k < n; ++k) {
        const bool on = (occ >> k) & 1;
        parity *= on ? -1 : 1;
        e += modes.energies(k) * (on ? 0.5 : -0.5);
      }
      if (parity == want) wrong.push_back(e);
    }
  }
  std::sort(wrong.begin(), wrong.end());
  const RealVector ed = eigvalsh(build_hamiltonian(n));
  double worst = 0.0;
  for (std::size_t i = 0; i < wrong.size(); ++i) worst = std::max(worst, std::abs(wrong[i] - ed(static_cast<Index>(i))));
  CHECK(worst > 1e-3);
}

TEST_CASE("thermal covariance limits") {
  CHECK(thermal_covariance(5, 0.0, Boundary::antiperiodic).matrix().cwiseAbs().maxCoeff() <= 1e-15);
  const auto cold = thermal_covariance(6, 60.0, Boundary::antiperiodic);
  const RealVector sv = Eigen::JacobiSVD<RealMatrix>(cold.matrix()).singularValues();
  CHECK(sv.minCoeff() >= 1.0 - 1e-10);
  CHECK(sv.maxCoeff() <= 1.0 + 1e-9);
  CHECK(gaussian_entropy(cold, sites(0, 6)) <= 1e-9);
  CHECK_THROWS(thermal_covariance(4, -1.0, Boundary::periodic));
}

TEST_CASE("thermal covariance entropy matches the Boltzmann distribution") {
  for (Boundary bc : {Boundary::periodic, Boundary::antiperiodic}) {
    const auto g = thermal_covariance(8, 1.6, bc);
    CHECK(std::abs(gaussian_entropy(g, sites(0, 8)) - fock_entropy(mode_energies(8, bc), 1.6)) <= 1e-10);
  }
}

TEST_CASE("thermal covariance equals the covariance of the ED Gaussian state") {
  for (Boundary bc : {Boundary::periodic, Boundary::antiperiodic}) {
    const auto rho = gaussian_thermal_state(6, 1.2, bc);
    const auto g = covariance_from_state(rho);
    CHECK((g.matrix() - thermal_covariance(6, 1.2, bc).matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("sector moments and the full Gibbs covariance") {
  const IsingRing ring(6);
  for (Sector s : {Sector::even, Sector::odd}) {
    const auto moments = sector_thermal_moments(6, 1.2, s);
    const auto ed = covariance_from_state(ring.thermal(1.2, s));
    CHECK((moments.covariance.matrix() - ed.matrix()).cwiseAbs().maxCoeff() <= 1e-8);
  }
  const auto gibbs = covariance_from_state(gibbs_state(build_hamiltonian(6), 1.2));
  CHECK((gibbs_covariance(6, 1.2).matrix() - gibbs.matrix()).cwiseAbs().maxCoeff() <= 1e-8);

  // log Tr[P_s exp(-beta H)] against the ED levels.
  const RealVector ev = eigvalsh(build_hamiltonian(6));
  const auto even = sector_spectrum(6, Sector::even).many_body_energies;
  double z_even = 0.0;
  for (Index i = 0; i < even.size(); ++i) z_even += std::exp(-1.2 * even(i));
  CHECK(std::abs(sector_thermal_moments(6, 1.2, Sector::even).log_partition - std::log(z_even)) <= 1e-10);
  double z_all = 0.0;
  for (Index i = 0; i < ev.size(); ++i) z_all += std::exp(-1.2 * ev(i));
  const double z_odd = std::exp(sector_thermal_moments(6, 1.2, Sector::odd).log_partition);
  CHECK(std::abs(z_even + z_odd - z_all) <= 1e-9 * z_all);
}

TEST_CASE("gaussian entropy examples") {
  const MajoranaCovariance zero(RealMatrix::Zero(10, 10));
  for (int m = 1; m <= 5; ++m) CHECK(gaussian_entropy(zero, sites(0, m)) == doctest::Approx(m * std::numbers::ln2));
  const MajoranaCovariance vac(vacuum_covariance(4));
  CHECK(std::abs(gaussian_entropy(vac, sites(0, 4))) <= 1e-12);

  // Regions of the ED Gaussian state, at every contiguous placement.
  const auto rho = gaussian_thermal_state(8, 1.6, Boundary::antiperiodic);
  const auto g = thermal_covariance(8, 1.6, Boundary::antiperiodic);
  for (int start = 0; start + 3 <= 8; ++start) {
    const auto region = sites(start, start + 3);
    CHECK(std::abs(gaussian_entropy(g, region) - subsystem_entropy(rho, region)) <= 1e-7);
  }
  const int gap[] = {0, 2};
  CHECK_THROWS_AS(gaussian_entropy(g, gap), std::invalid_argument);
  const int wrap[] = {0, 7};
  CHECK_THROWS_AS(gaussian_entropy(g, wrap), std::invalid_argument);
  const int outside[] = {8};
  CHECK_THROWS_AS(gaussian_entropy(g, outside), std::out_of_range);
}

TEST_CASE("Gaussian states saturate the extremality inequality") {
  for (Boundary bc : {Boundary::periodic, Boundary::antiperiodic}) {
    const auto rho = gaussian_thermal_state(6, 1.2, bc);
    for (int c = 1; c <= 3; ++c) {
      const auto r = extremality_check(rho, Partition::contiguous(6, 0, c));
      CHECK(std::abs(r.slack) <= 1e-8);
    }
  }
}

TEST_CASE("extremality on the even-sector ring") {
  for (int n : {4, 6, 8}) {
    const IsingRing ring(n);
    const auto rho = ring.thermal(0.2 * n, Sector::even);
    for (int c = 1; c <= 3; ++c) {
      CAPTURE(n);
      CAPTURE(c);
      const auto r = extremality_check(rho, Partition::contiguous(n, 0, c));
      CHECK(r.slack >= -1e-9);
      CHECK(std::abs(r.cmi_exact - cmi_pure_global(rho, Partition::contiguous(n, 0, c)).cmi) <= 1e-10);
      CHECK(r.slack == r.cmi_gaussian - r.cmi_exact);
    }
  }
  const auto rho6 = parity_projected_thermal({6, 1.2, Sector::even});
  CHECK(extremality_check(rho6, Partition::contiguous(6, 0, 1)).slack >= 0.0);
}

TEST_CASE("extremality on random even-parity states") {
  std::mt19937_64 rng(3);
  double worst = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto rho = random_even_state(4, rng);
    worst = std::min(worst, extremality_check(rho, Partition::contiguous(4, 0, 1 + trial % 3)).slack);
  }
  CHECK(worst >= -1e-9);
}

TEST_CASE("covariances of tested states are physical") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = covariance_from_state(random_density_matrix(3, rng, 1 + trial % 3));
    const RealVector sv = Eigen::JacobiSVD<RealMatrix>(g.matrix()).singularValues();
    CHECK(sv.maxCoeff() <= 1.0 + 1e-9);
  }
}
