#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "ptframe/algebra.hpp"
#include "ptframe/frames.hpp"
#include "ptframe/models.hpp"
#include "ptframe/symmetry.hpp"
#include "ptframe/types.hpp"

using namespace ptframe;

namespace {

CMatrix sigma_x() {
  CMatrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

CMatrix sigma_z() {
  CMatrix s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

std::vector<CVector> seeded_states(int dim, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<CVector> states;
  for (int s = 0; s < count; ++s) {
    CVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(nd(rng), nd(rng));
    states.push_back(v.normalized());
  }
  return states;
}

}  // namespace

TEST_CASE("hidden split of the coupled-mode pair certifies cleanly") {
  const models::ModelSystem m = models::build_h2({1.0, 1.1, 0.1, 4});
  const frames::Decomposition d =
      frames::check_decomposition(m.H, m.H_pt, m.H0, m.parity);
  CHECK(d.sum_residual <= 1e-13);
  CHECK(d.commutator_residual <= 1e-13);
  CHECK(d.pt_residual <= 1e-13);
  CHECK(frames::certified(d));
}

TEST_CASE("parts that do not sum to the generator are rejected") {
  const models::ModelSystem m = models::build_h2({1.0, 1.1, 0.1, 3});
  CHECK_THROWS_AS(
      frames::check_decomposition(m.H, m.H_pt, (0.5 * m.H0).eval(), m.parity),
      std::invalid_argument);
}

TEST_CASE("splitting off a single-mode drift fails certification") {
  const models::ModelSystem m = models::build_h2({1.0, 1.1, 0.1, 3});
  const CMatrix h0_bad = -kI * 1.1 * algebra::number(m.layout, 0);
  const CMatrix h_pt_bad = m.H - h0_bad;
  const frames::Decomposition d =
      frames::check_decomposition(m.H, h_pt_bad, h0_bad, m.parity);
  CHECK(d.sum_residual <= 1e-15);
  CHECK(d.commutator_residual >= 1e-2);  // hop moves quanta in and out of mode a
  CHECK(d.pt_residual >= 1e-2);
  CHECK_FALSE(frames::certified(d));
  CHECK(frames::certified(d, 10.0));  // any split passes at a vacuous tolerance
}

TEST_CASE("frame drift grows linearly for a non-commuting split") {
  // exp(i sz t) sx exp(-i sz t) = cos(2t) sx - sin(2t) sy: drift = 2 |sin t|.
  const frames::Decomposition d = frames::check_decomposition(
      (sigma_x() + sigma_z()).eval(), sigma_x(), sigma_z(), symmetry::parity_qubit());
  CHECK_FALSE(frames::certified(d));
  const frames::FrameCheck small = frames::ef_drift(d, 1e-3);
  CHECK(small.time == 1e-3);
  CHECK(small.drift / 1e-3 == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(frames::ef_drift(d, 1.0).drift == doctest::Approx(2.0 * std::sin(1.0)).epsilon(1e-9));
}

TEST_CASE("commuting split stays pinned in the rotated frame") {
  const models::ModelSystem m = models::build_h2({1.0, 1.1, 0.1, 4});
  const frames::Decomposition d =
      frames::check_decomposition(m.H, m.H_pt, m.H0, m.parity);
  for (double t : {0.1, 1.0, 5.0, -5.0}) {
    CAPTURE(t);
    CHECK(frames::ef_drift(d, t).drift <= 1e-9);
  }
  // Decaying directions only: backward in time the amplification factor
  // e^(gamma n |t|) turns rounding noise into an absolute gap.
  const std::vector<CVector> states = seeded_states(m.layout.dim(), 5, 77);
  for (double t : {0.5, 1.0, 2.0}) {
    CAPTURE(t);
    CHECK(frames::ef_drift(d, t, states).evolution_gap <= 1e-8);
  }
}

TEST_CASE("frame map with runaway conditioning is refused") {
  const models::ModelSystem m = models::build_h2({1.0, 0.5, 0.5, 6});
  const frames::Decomposition d =
      frames::check_decomposition(m.H, m.H_pt, m.H0, m.parity);
  // exp(gamma t n_max_total) = e^30: the round trip loses all digits.
  CHECK_THROWS_WITH_AS(frames::ef_drift(d, 5.0), doctest::Contains("exceeds 1e12"),
                       std::runtime_error);
}

TEST_CASE("frame map is a similarity: the spectrum survives the transform") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix m(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  CMatrix h0 = CMatrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i) h0(i, i) = Complex(0.3 * i, -0.05 * i);

  const CMatrix s = frames::ef_frame_operator(h0, 0.7);
  const CMatrix transformed = s.inverse() * m * s;
  const CVector before = algebra::eig(m).eigenvalues;
  const CVector after = algebra::eig(transformed).eigenvalues;
  CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("frame operator closed forms") {
  const models::ModelSystem m = models::build_h1({1.0, 0.8});
  // Scalar drift -0.4 i: the frame is a uniform decay envelope.
  const CMatrix s = frames::ef_frame_operator(m.H0, 2.5);
  CHECK((s - std::exp(-1.0) * CMatrix::Identity(2, 2)).norm() <= 1e-14);
  const CMatrix at_zero = frames::ef_frame_operator(m.H0, 0.0);
  CHECK((at_zero - CMatrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("state evolution matches the qubit closed form") {
  CVector ground(2);
  ground << 0, 1;
  const double t = 0.9;
  const CVector psi = frames::evolve(sigma_x(), ground, t);
  CVector expected(2);
  expected << -kI * std::sin(t), Complex(std::cos(t), 0.0);
  CHECK((psi - expected).norm() <= 1e-14);
}

TEST_CASE("eigenvalue additivity holds pair by pair for the lossy qubit") {
  const models::ModelSystem m = models::build_h1({1.0, 1.0});
  const frames::Decomposition d =
      frames::check_decomposition(m.H, m.H_pt, m.H0, m.parity);
  REQUIRE(frames::certified(d));
  const std::vector<frames::SumCheckEntry> entries = frames::eigenvalue_sum_check(d);
  REQUIRE(entries.size() == 2);
  for (const frames::SumCheckEntry& e : entries) {
    CHECK(e.gap <= 1e-12);
    CHECK(std::abs(e.value - e.value_pt - e.value_drift) == e.gap);
    // The drift contributes the uniform decay -i gamma_e / 2.
    CHECK(std::abs(e.value_drift - Complex(0.0, -0.5)) <= 1e-12);
  }
}

TEST_CASE("eigenvalue additivity requires a certified split") {
  const frames::Decomposition d = frames::check_decomposition(
      (sigma_x() + sigma_z()).eval(), sigma_x(), sigma_z(), symmetry::parity_qubit());
  CHECK_THROWS_WITH_AS(frames::eigenvalue_sum_check(d), doctest::Contains("not certified"),
                       std::invalid_argument);
}

TEST_CASE("eigenvalue additivity refuses a defective eigenbasis") {
  // Balanced rate imbalance kappa = g: every supermode pair coalesces.
  const models::ModelSystem m = models::build_h2({1.0, 2.0, 0.0, 6});
  const frames::Decomposition d =
      frames::check_decomposition(m.H, m.H_pt, m.H0, m.parity);
  REQUIRE(frames::certified(d));
  CHECK_THROWS_WITH_AS(frames::eigenvalue_sum_check(d),
                       doctest::Contains("unreliable near an exceptional point"),
                       std::runtime_error);
}

TEST_CASE("driven-pair split certifies on the interior block") {
  const models::ModelSystem m = models::build_h3({1.0, 0.6, -0.4, 0.1, 8});
  const frames::Decomposition full =
      frames::check_decomposition(m.H, m.H_pt, m.H0, m.parity);
  CHECK_FALSE(frames::certified(full));  // the cutoff boundary breaks the ladder algebra

  const std::vector<int> interior = low_occupation_indices(m.layout, 8 - 2);
  const frames::Decomposition d =
      frames::check_decomposition(m.H, m.H_pt, m.H0, m.parity, interior);
  CHECK(d.commutator_residual <= 1e-10);
  CHECK(frames::certified(d));

  // The frame map spreads boundary defects inward; measure drift deeper in.
  const std::vector<int> drift_interior = low_occupation_indices(m.layout, 8 - 6);
  const frames::FrameCheck fc = frames::ef_drift(d, 1.0, {}, drift_interior);
  CHECK(fc.drift <= 1e-9);
}
