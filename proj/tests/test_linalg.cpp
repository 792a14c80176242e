#include <doctest.h>

#include <random>

#include "qsc/linalg.hpp"
#include "qsc/random.hpp"
#include "support.hpp"

using namespace qsc;
using qsc::testing::max_abs;

namespace {

double reconstruction_error(const HermitianMatrix& h) {
  const auto s = eigh(h);
  const Matrix v = s.eigenvectors();
  const Matrix back = v * s.eigenvalues().cast<Complex>().asDiagonal() * v.adjoint();
  return (back - h.entries()).norm() / h.entries().norm();
}

double unitarity_error(const HermitianMatrix& h) {
  const Matrix v = eigh(h).eigenvectors();
  return max_abs(v.adjoint() * v - Matrix::Identity(h.dim(), h.dim()));
}

}  // namespace

TEST_CASE("eigh of the identity and of Pauli X") {
  const auto id = eigvalsh(HermitianMatrix(Matrix::Identity(4, 4)));
  for (Index i = 0; i < 4; ++i) CHECK(id(i) == doctest::Approx(1.0).epsilon(1e-14));
  const auto x = eigvalsh(HermitianMatrix(pauli_x()));
  CHECK(x(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigh round trip on random Hermitian matrices") {
  std::mt19937_64 rng(11);
  for (Index dim : {2, 7, 64, 256, 1024}) {
    const auto h = random_hermitian(dim, rng);
    CAPTURE(dim);
    CHECK(reconstruction_error(h) <= 1e-10);
    CHECK(unitarity_error(h) <= 1e-10);
  }
}

TEST_CASE("eigh round trip at dimension 4096") {
  std::mt19937_64 rng(12);
  const auto h = random_hermitian(4096, rng);
  CHECK(reconstruction_error(h) <= 1e-10);
}

TEST_CASE("eigh splits decoupled blocks and matches the dense solve") {
  std::mt19937_64 rng(3);
  const Matrix a = random_hermitian(5, rng).entries();
  const Matrix b = random_hermitian(3, rng).entries();
  // Interleave the two blocks on labels {0,2,4,6,7} and {1,3,5}.
  const std::vector<Index> la{0, 2, 4, 6, 7}, lb{1, 3, 5};
  Matrix m = Matrix::Zero(8, 8);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) m(la[i], la[j]) = a(i, j);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) m(lb[i], lb[j]) = b(i, j);
  const auto blocks = decoupled_blocks(m);
  REQUIRE(blocks.size() == 2);
  const auto s = eigh(HermitianMatrix(m));
  CHECK(s.blocks().size() == 2);
  Eigen::SelfAdjointEigenSolver<Matrix> dense(m);
  CHECK((s.eigenvalues() - dense.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(reconstruction_error(HermitianMatrix(m)) <= 1e-12);
}

TEST_CASE("eigh keeps real symmetric blocks real") {
  std::mt19937_64 rng(5);
  RealMatrix g = RealMatrix::Random(6, 6);
  RealMatrix sym = g + g.transpose();
  const auto s = eigh(HermitianMatrix(sym.cast<Complex>()));
  REQUIRE(s.blocks().size() == 1);
  CHECK(s.blocks().front().real);
  CHECK(reconstruction_error(HermitianMatrix(sym.cast<Complex>())) <= 1e-12);
}

TEST_CASE("HermitianMatrix rejects non-Hermitian input") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianMatrix{m}, std::invalid_argument);
  CHECK_THROWS_AS(HermitianMatrix{Matrix::Zero(2, 3)}, std::invalid_argument);
}

TEST_CASE("DensityMatrix invariants") {
  CHECK_THROWS_AS(DensityMatrix{Matrix(Matrix::Identity(2, 2))}, std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix{Matrix(Matrix::Identity(3, 3) / 3.0)}, std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix{qsc::testing::diag({1.5, -0.5})}, std::invalid_argument);
  const auto mixed = DensityMatrix::maximally_mixed(3);
  CHECK(mixed.qubit_count() == 3);
  CHECK(mixed.entries().trace().real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(PureState{Vector::Ones(2)}, std::invalid_argument);
}

TEST_CASE("matrix_function basics") {
  const auto e = matrix_function(HermitianMatrix(Matrix::Zero(3, 3)), [](double x) { return std::exp(x); });
  CHECK(max_abs(e.entries() - Matrix::Identity(3, 3)) <= 1e-14);
  const auto r = matrix_function(HermitianMatrix(qsc::testing::diag({4.0, 9.0})), [](double x) { return std::sqrt(x); });
  CHECK(max_abs(r.entries() - qsc::testing::diag({2.0, 3.0})) <= 1e-14);
}

TEST_CASE("inverse square root on a rank-deficient matrix annihilates the kernel") {
  std::mt19937_64 rng(7);
  const Matrix u = random_unitary(6, rng);
  const std::vector<double> lambda{0.0, 0.0, 0.1, 0.2, 0.3, 0.4};
  Matrix h = Matrix::Zero(6, 6);
  Matrix expected = Matrix::Zero(6, 6);
  for (Index k = 0; k < 6; ++k) {
    const Matrix proj = u.col(k) * u.col(k).adjoint();
    h += lambda[static_cast<std::size_t>(k)] * proj;
    if (lambda[static_cast<std::size_t>(k)] > 0) expected += proj / std::sqrt(lambda[static_cast<std::size_t>(k)]);
  }
  h = 0.5 * (h + h.adjoint());
  const auto spectrum = eigh(HermitianMatrix(h));
  const auto inv = matrix_function(spectrum, [](double x) { return 1.0 / std::sqrt(x); },
                                   default_support_cutoff(spectrum));
  CHECK(max_abs(inv.entries() - expected) <= 1e-6);
  CHECK(max_abs(inv.entries() * u.col(0)) <= 1e-6);
  CHECK(max_abs(inv.entries() * u.col(1)) <= 1e-6);
}

TEST_CASE("matrix_function reports undefined values") {
  const auto h = HermitianMatrix(qsc::testing::diag({-1.0, 1.0}));
  CHECK_THROWS_AS(matrix_function(h, [](double x) { return std::log(x); }), std::domain_error);
}

TEST_CASE("embed_site_operator ordering") {
  const int z0[] = {0};
  CHECK(max_abs(embed_site_operator(pauli_z(), z0, 2).entries() - qsc::testing::diag({1, 1, -1, -1})) == 0.0);
  const int xx[] = {0, 1};
  Matrix anti = Matrix::Zero(4, 4);
  for (Index i = 0; i < 4; ++i) anti(i, 3 - i) = 1.0;
  CHECK(max_abs(embed_site_operator(kron(pauli_x(), pauli_x()), xx, 2).entries() - anti) == 0.0);

  // Naive triple loop for I (x) I (x) Z.
  Matrix naive = Matrix::Zero(8, 8);
  const Matrix z = pauli_z();
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 2; ++b)
      for (Index c = 0; c < 2; ++c)
        for (Index cc = 0; cc < 2; ++cc) naive(4 * a + 2 * b + c, 4 * a + 2 * b + cc) = z(c, cc);
  const int z2[] = {2};
  CHECK(max_abs(embed_site_operator(z, z2, 3).entries() - naive) == 0.0);
}

TEST_CASE("embed_operator on non-adjacent sites in given order") {
  std::mt19937_64 rng(9);
  const Matrix a = random_hermitian(2, rng).entries();
  const Matrix b = random_hermitian(2, rng).entries();
  const Matrix id = Matrix::Identity(2, 2);
  // a on site 2, b on site 0 of a 3-site register.
  const int sites[] = {2, 0};
  const Matrix expected = kron(kron(b, id), a);
  CHECK(max_abs(embed_operator(kron(a, b), sites, 3) - expected) <= 1e-14);
}

TEST_CASE("embed_operator errors") {
  const int bad[] = {0, 0};
  CHECK_THROWS_AS(embed_operator(kron(pauli_x(), pauli_x()), bad, 3), std::invalid_argument);
  const int out[] = {3};
  CHECK_THROWS_AS(embed_operator(pauli_x(), out, 3), std::out_of_range);
  const int one[] = {0};
  CHECK_THROWS_AS(embed_operator(kron(pauli_x(), pauli_x()), one, 3), std::invalid_argument);
}

TEST_CASE("partial_trace examples") {
  std::mt19937_64 rng(21);
  const auto rb = random_density_matrix(1, rng);
  const auto rc = random_density_matrix(1, rng);
  const DensityMatrix prod(kron(rb.entries(), rc.entries()));
  const int keep0[] = {0};
  CHECK(max_abs(partial_trace(prod, keep0).entries() - rb.entries()) <= 1e-15);

  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto half = partial_trace(DensityMatrix::from_pure(bell), keep0);
  CHECK(max_abs(half.entries() - Matrix::Identity(2, 2) / 2.0) <= 1e-15);

  const auto rho = random_density_matrix(4, rng);
  const int keep13[] = {1, 3};
  CHECK(max_abs(partial_trace(rho, keep13).entries() - qsc::testing::brute_partial_trace(rho.entries(), 4, {1, 3})) <=
        1e-14);
}

TEST_CASE("partial_trace properties") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = random_density_matrix(5, rng, 1 + trial % 4);
    const int keep[] = {0, 2, 3};
    const auto r = partial_trace(rho, keep);
    CHECK(std::abs(r.entries().trace().real() - 1.0) <= 1e-12);
    CHECK(eigvalsh(r.hermitian()).minCoeff() >= -1e-12);
    // Nested: keeping {0,3} of the kept {0,2,3} is positions {0,2}.
    const int inner[] = {0, 2};
    const int direct[] = {0, 3};
    CHECK(max_abs(partial_trace(r, inner).entries() - partial_trace(rho, direct).entries()) <= 1e-14);
  }
  const auto rho = random_density_matrix(3, rng);
  CHECK_THROWS(partial_trace(rho, std::span<const int>{}));
  const int outside[] = {5};
  CHECK_THROWS(partial_trace(rho, outside));
}

TEST_CASE("state_fidelity") {
  std::mt19937_64 rng(31);
  const auto rho = random_density_matrix(2, rng);
  CHECK(state_fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));

  Vector zero = Vector::Zero(2), one = Vector::Zero(2);
  zero(0) = 1.0;
  one(1) = 1.0;
  CHECK(state_fidelity(DensityMatrix::from_pure(zero), DensityMatrix::from_pure(one)) <= 1e-10);

  for (int trial = 0; trial < 10; ++trial) {
    const Vector psi = random_unit_vector(8, rng);
    const Vector phi = random_unit_vector(8, rng);
    const double f = state_fidelity(DensityMatrix::from_pure(psi), DensityMatrix::from_pure(phi));
    CHECK(std::abs(f - std::abs(psi.dot(phi))) <= 1e-7);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_density_matrix(2, rng);
    const auto b = random_density_matrix(2, rng);
    CHECK(std::abs(state_fidelity(a, b) - state_fidelity(b, a)) <= 1e-10);
    CHECK(state_fidelity(a, b) < 1.0 - 1e-6);
  }
  CHECK_THROWS(state_fidelity(DensityMatrix::maximally_mixed(1), DensityMatrix::maximally_mixed(2)));
}

TEST_CASE("purify examples") {
  Vector zero = Vector::Zero(2);
  zero(0) = 1.0;
  const auto p = purify(DensityMatrix::from_pure(zero));
  CHECK(p.ancilla_dim == 2);
  CHECK(max_abs(p.reduced_system() - zero * zero.adjoint()) <= 1e-15);
  const Complex overlap = p.state.amplitudes().cwiseAbs().maxCoeff();
  CHECK(std::abs(overlap) == doctest::Approx(1.0));

  // Maximally mixed qubit purifies to a maximally entangled state.
  const auto bell = purify(DensityMatrix::maximally_mixed(1));
  const Matrix m = bell.as_matrix();
  CHECK(max_abs(m * m.adjoint() - Matrix::Identity(2, 2) / 2.0) <= 1e-15);
  CHECK(max_abs(m.adjoint() * m - Matrix::Identity(2, 2) / 2.0) <= 1e-15);

  // Gibbs qubit for H = Z at beta = 1.
  const double z = std::exp(-1.0) + std::exp(1.0);
  const DensityMatrix gibbs(qsc::testing::diag({std::exp(-1.0) / z, std::exp(1.0) / z}));
  CHECK(max_abs(purify(gibbs).reduced_system() - gibbs.entries()) <= 1e-12);
}

TEST_CASE("purify round trip, with and without rank truncation") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rho = random_density_matrix(3, rng, 1 + trial % 8);
    const auto full = purify(rho);
    CHECK(full.ancilla_dim == rho.dim());
    CHECK(max_abs(full.reduced_system() - rho.entries()) <= 1e-10);
    const auto cut = purify(rho, {.truncate_to_rank = true});
    CHECK(cut.ancilla_dim == 1 + trial % 8);
    CHECK(max_abs(cut.reduced_system() - rho.entries()) <= 1e-10);
  }
}

TEST_CASE("psd_sqrt clamps tiny negative eigenvalues") {
  const auto r = psd_sqrt(HermitianMatrix(qsc::testing::diag({4.0, -1e-13})));
  CHECK(max_abs(r.entries() - qsc::testing::diag({2.0, 0.0})) <= 1e-12);
}
