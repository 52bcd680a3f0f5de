#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ptframe/algebra.hpp"
#include "ptframe/layout.hpp"
#include "ptframe/types.hpp"

using namespace ptframe;

namespace {

CMatrix random_matrix(int n, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * Complex(nd(rng), nd(rng));
  return m;
}

}  // namespace

TEST_CASE("space layout dimensions and indexing") {
  const SpaceLayout qubit = SpaceLayout::single_qubit();
  CHECK(qubit.dim() == 2);
  CHECK(qubit.subsystem_dim(0) == 2);
  CHECK_FALSE(qubit.is_boson(0));

  const SpaceLayout modes = SpaceLayout::bosonic_modes(2, 3);
  CHECK(modes.dim() == 16);
  CHECK(modes.is_boson(0));
  CHECK(modes.is_boson(1));
  // Second mode varies fastest: |n_a, n_b> sits at n_a*(n_max+1) + n_b.
  const int idx = 2 * 4 + 3;
  CHECK(modes.local_index(0, idx) == 2);
  CHECK(modes.local_index(1, idx) == 3);
  CHECK(modes.total_occupation(idx) == 5);
  // Only bosonic occupations count toward the total.
  CHECK(qubit.total_occupation(0) == 0);
  CHECK(qubit.total_occupation(1) == 0);
}

TEST_CASE("low occupation index selection") {
  const SpaceLayout modes = SpaceLayout::bosonic_modes(2, 2);
  const std::vector<int> block = low_occupation_indices(modes, 2);
  CHECK(block == std::vector<int>{0, 1, 2, 3, 4, 6});
  CHECK(low_occupation_indices(modes, 0) == std::vector<int>{0});
  CHECK_THROWS_AS(low_occupation_indices(modes, -1), std::invalid_argument);
}

TEST_CASE("truncated ladder commutator") {
  const SpaceLayout modes = SpaceLayout::bosonic_modes(1, 4);
  const CMatrix a = algebra::annihilation(modes, 0);
  const CMatrix n = algebra::number(modes, 0);
  CHECK((a.adjoint() * a - n).norm() <= 1e-14);  // sqrt(n)^2 rounds at the last bit

  // [a, a+] = 1 everywhere except the top level, which absorbs -n_max.
  const CMatrix c = algebra::commutator(a, a.adjoint().eval());
  CVector expected(5);
  expected << 1, 1, 1, 1, -4;
  CHECK((c - CMatrix(expected.asDiagonal())).norm() <= 1e-14);
}

TEST_CASE("two-mode hop moves one quantum between modes") {
  const SpaceLayout modes = SpaceLayout::bosonic_modes(2, 1);
  const CMatrix a = algebra::annihilation(modes, 0);
  const CMatrix b = algebra::annihilation(modes, 1);
  const CMatrix hop = a.adjoint() * b + b.adjoint() * a;
  // |0,1> at index 1 -> |1,0> at index 2 with unit amplitude.
  CHECK(hop(2, 1) == Complex(1.0, 0.0));
  CHECK(hop(1, 2) == Complex(1.0, 0.0));
  CHECK(hop(0, 3) == Complex(0.0, 0.0));

  const CMatrix n_total = algebra::total_number(modes);
  CHECK(algebra::commutator(hop, n_total).norm() == 0.0);
}

TEST_CASE("operators on disjoint subsystems commute exactly") {
  const SpaceLayout modes = SpaceLayout::bosonic_modes(2, 3);
  const CMatrix a = algebra::annihilation(modes, 0);
  const CMatrix b = algebra::annihilation(modes, 1);
  CHECK(algebra::commutator(a, b).norm() == 0.0);
  CHECK(algebra::commutator(a, b.adjoint().eval()).norm() == 0.0);
  CHECK(algebra::commutator(a.adjoint() * a, b.adjoint() * b).norm() == 0.0);
}

TEST_CASE("qubit operators are matrix units in the (e, g) basis") {
  const SpaceLayout qubit = SpaceLayout::single_qubit();
  using algebra::QubitLevel;
  const CMatrix s_eg = algebra::qubit_op(qubit, 0, QubitLevel::e, QubitLevel::g);
  CHECK(s_eg(0, 1) == Complex(1.0, 0.0));
  CHECK(s_eg.cwiseAbs().sum() == 1.0);
  const CMatrix s_ee = algebra::qubit_op(qubit, 0, QubitLevel::e, QubitLevel::e);
  CHECK(s_ee(0, 0) == Complex(1.0, 0.0));

  const SpaceLayout modes = SpaceLayout::bosonic_modes(1, 2);
  CHECK_THROWS_AS(algebra::qubit_op(modes, 0, QubitLevel::e, QubitLevel::g),
                  std::invalid_argument);
  CHECK_THROWS_AS(algebra::annihilation(qubit, 0), std::invalid_argument);
}

TEST_CASE("embed places a local operator on the requested subsystem") {
  const SpaceLayout modes = SpaceLayout::bosonic_modes(2, 1);
  CMatrix local(2, 2);
  local << 1, 2, 3, 4;
  const CMatrix on_b = algebra::embed(modes, 1, local);
  // Block-diagonal over mode a: each diagonal block is the local operator.
  CHECK(on_b(0, 0) == Complex(1.0, 0.0));
  CHECK(on_b(0, 1) == Complex(2.0, 0.0));
  CHECK(on_b(2, 3) == Complex(2.0, 0.0));
  CHECK(on_b(0, 2) == Complex(0.0, 0.0));
  CHECK_THROWS_AS(algebra::embed(modes, 2, local), std::invalid_argument);
  CHECK_THROWS_AS(algebra::embed(modes, 0, CMatrix::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("matrix exponential reproduces closed forms") {
  SUBCASE("diagonal phases") {
    CVector d(3);
    d << 0.0, 1.0, 2.0;
    const CMatrix m = kI * M_PI * CMatrix(d.asDiagonal());
    CMatrix expected = CMatrix::Zero(3, 3);
    expected(0, 0) = 1.0;
    expected(1, 1) = -1.0;
    expected(2, 2) = 1.0;
    CHECK((algebra::expm(m) - expected).norm() <= 1e-12);
  }
  SUBCASE("qubit rotation") {
    CMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    const double theta = 0.7;
    const CMatrix rot = algebra::expm(-kI * theta * sx);
    const CMatrix expected =
        std::cos(theta) * CMatrix::Identity(2, 2) - kI * std::sin(theta) * sx;
    CHECK((rot - expected).norm() <= 1e-14);
  }
  SUBCASE("inverse pairs up to machine rounding") {
    for (unsigned seed : {11u, 12u, 13u}) {
      CMatrix a = random_matrix(12, seed);
      a *= 5.0 / a.norm();
      const CMatrix prod = algebra::expm(a) * algebra::expm((-a).eval());
      CHECK((prod - CMatrix::Identity(12, 12)).norm() <= 1e-11);
    }
  }
  SUBCASE("rejects non-square and non-finite input") {
    CHECK_THROWS_AS(algebra::expm(CMatrix::Zero(2, 3)), std::invalid_argument);
    CMatrix bad = CMatrix::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(algebra::expm(bad), std::invalid_argument);
  }
}

TEST_CASE("eigensolver meets the residual contract across sizes") {
  for (int n : {2, 8, 40, 200}) {
    const CMatrix m = random_matrix(n, 100u + static_cast<unsigned>(n));
    const algebra::EigResult r = algebra::eig(m);
    REQUIRE(r.eigenvalues.size() == n);
    for (int i = 0; i < n; ++i) {
      const double res = (m * r.right_vectors.col(i) - r.eigenvalues(i) * r.right_vectors.col(i))
                             .norm();
      CHECK(res <= 1e-10 * m.norm());
      CHECK(std::abs(r.right_vectors.col(i).norm() - 1.0) <= 1e-12);
      CHECK(r.residual_norms(i) <= 1e-10 * m.norm());
    }
    // Values arrive sorted by real part, then imaginary part.
    for (int i = 0; i + 1 < n; ++i) {
      const Complex a = r.eigenvalues(i), b = r.eigenvalues(i + 1);
      CHECK((a.real() < b.real() || (a.real() == b.real() && a.imag() <= b.imag())));
    }
  }
}

TEST_CASE("left eigenvectors are biorthogonal to right eigenvectors") {
  const CMatrix m = random_matrix(24, 7u);
  const algebra::EigResult r = algebra::eig(m);
  const CMatrix overlap = r.left_vectors.adjoint() * r.right_vectors;
  CHECK((overlap - CMatrix::Identity(24, 24)).norm() <= 1e-8);
  for (int i = 0; i < 24; ++i) {
    const double res =
        (m.adjoint() * r.left_vectors.col(i) -
         std::conj(r.eigenvalues(i)) * r.left_vectors.col(i))
            .norm();
    CHECK(res <= 1e-8 * m.norm() * r.left_vectors.col(i).norm());
  }
}

TEST_CASE("condition estimate separates normal from near-defective spectra") {
  CMatrix normal(2, 2);
  normal << 0, 1, 1, 0;
  CHECK(algebra::eig(normal).condition_estimate <= 1.0 + 1e-10);

  // One step away from a second-order degeneracy the eigenbasis collapses.
  CMatrix near_ep(2, 2);
  near_ep << Complex(0.0, -2.0 + 1e-12), Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(0.0, 0.0);
  CHECK(algebra::eig(near_ep).condition_estimate >= 1e5);
}

TEST_CASE("eigensolver output is deterministic") {
  const CMatrix m = random_matrix(30, 99u);
  CVector v1, v2;
  CMatrix w1, w2;
  algebra::eig_right(m, v1, w1);
  algebra::eig_right(m, v2, w2);
  CHECK((v1.array() == v2.array()).all());
  CHECK((w1.array() == w2.array()).all());
}

TEST_CASE("eigensolver guards") {
  CHECK_THROWS_AS(algebra::eig(CMatrix::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(algebra::eig(CMatrix::Zero(0, 0)), std::invalid_argument);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(algebra::eig(bad), std::invalid_argument);
  CHECK_THROWS_AS(algebra::eig(CMatrix::Zero(2049, 2049)), std::invalid_argument);
}

TEST_CASE("submatrix extracts the requested block") {
  const SpaceLayout modes = SpaceLayout::bosonic_modes(2, 2);
  const CMatrix n_total = algebra::total_number(modes);
  const std::vector<int> block = low_occupation_indices(modes, 2);
  const CMatrix sub = algebra::submatrix(n_total, block);
  REQUIRE(sub.rows() == 6);
  CVector expected(6);
  expected << 0, 1, 2, 1, 2, 2;
  CHECK((sub - CMatrix(expected.asDiagonal())).norm() == 0.0);
  CHECK_THROWS_AS(algebra::submatrix(n_total, std::vector<int>{0, 9}), std::invalid_argument);
  CHECK_THROWS_AS(algebra::submatrix(n_total, std::vector<int>{-1}), std::invalid_argument);
}

TEST_CASE("commutator is antisymmetric and bilinear") {
  const CMatrix a = random_matrix(6, 21u);
  const CMatrix b = random_matrix(6, 22u);
  CHECK((algebra::commutator(a, b) + algebra::commutator(b, a)).norm() == 0.0);
  CHECK((algebra::commutator(a, a)).norm() == 0.0);
  CHECK_THROWS_AS(algebra::commutator(a, CMatrix::Zero(5, 5)), std::invalid_argument);
}
