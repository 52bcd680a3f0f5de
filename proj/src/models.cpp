#include "ptframe/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ptframe::models {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(std::initializer_list<double> values, const char* who) {
  for (double v : values) {
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string(who) + ": parameters must be finite");
  }
}

void validate(const H1Params& p) {
  require_finite({p.omega, p.gamma_e}, "h1");
  if (!(p.omega > 0)) throw std::invalid_argument("h1: omega must be positive");
  if (p.gamma_e < 0) throw std::invalid_argument("h1: gamma_e must be non-negative");
}

void validate(const H2Params& p) {
  require_finite({p.g, p.gamma_a, p.gamma_b}, "h2");
  if (!(p.g > 0)) throw std::invalid_argument("h2: coupling g must be positive");
  if (p.n_max < 2) throw std::invalid_argument("h2: occupation cutoff n_max must be >= 2");
}

void validate(const H3Params& p) {
  require_finite({p.g, p.gamma_a, p.gamma_b, p.epsilon}, "h3");
  if (!(p.g > 0)) throw std::invalid_argument("h3: coupling g must be positive");
  if (p.epsilon < 0) throw std::invalid_argument("h3: drive epsilon must be non-negative");
  if (p.n_max < 2) throw std::invalid_argument("h3: occupation cutoff n_max must be >= 2");
  if (!(std::abs(p.kappa()) < p.g)) {
    std::ostringstream msg;
    msg << "h3: |kappa| = " << std::abs(p.kappa()) << " >= g = " << p.g
        << " enters the spectral singularity regime; the driven model is only "
           "defined for |kappa| < g";
    throw singular_error(msg.str());
  }
}

// Branch convention: principal cos(alpha/2), and sin(alpha/2) chosen so that
// sin^2 + cos^2 = 1 exactly (not two independent principal roots, which break
// the identity once lambda turns imaginary).
void half_angle(Complex lambda, double g, double kappa, Complex& sin_half, Complex& cos_half) {
  cos_half = std::sqrt((lambda - kI * kappa) / (2.0 * lambda));
  sin_half = g / (2.0 * lambda * cos_half);
}

SupermodeMap ladder_map(const SpaceLayout& layout, Complex lambda, double g, double kappa) {
  SupermodeMap map;
  map.lambda = lambda;
  half_angle(lambda, g, kappa, map.alpha_half_sin, map.alpha_half_cos);
  const Complex cc = map.alpha_half_cos;
  const Complex ss = map.alpha_half_sin;
  map.R << cc, ss, ss, -cc;
  const CMatrix a = algebra::annihilation(layout, 0);
  const CMatrix b = algebra::annihilation(layout, 1);
  const CMatrix a_dag = a.adjoint();
  const CMatrix b_dag = b.adjoint();
  map.c = cc * a + ss * b;
  map.c_plus = cc * a_dag + ss * b_dag;
  map.d = ss * a - cc * b;
  map.d_plus = ss * a_dag - cc * b_dag;
  return map;
}

}  // namespace

Complex H2Params::lambda() const {
  return std::sqrt(Complex(g * g - kappa() * kappa(), 0.0));
}

double H3Params::lambda() const {
  if (!(std::abs(kappa()) < g))
    throw singular_error("h3: |kappa| >= g enters the spectral singularity regime");
  return std::sqrt(g * g - kappa() * kappa());
}

Complex H3Params::theta() const {
  const double l2 = lambda() * lambda();
  return gamma() * Complex(g, -kappa()) / l2;
}

double H3Params::chi() const {
  const double l2 = lambda() * lambda();
  return 2.0 * gamma() * epsilon * epsilon / l2;
}

double H3Params::lambda0() const {
  const double l2 = lambda() * lambda();
  return -2.0 * g * epsilon * epsilon / l2;
}

ModelSystem build_h1(const H1Params& p) {
  validate(p);
  ModelSystem sys{SpaceLayout::single_qubit(), {}, {}, {}, symmetry::parity_qubit()};
  const SpaceLayout& L = sys.layout;
  using algebra::QubitLevel;
  const CMatrix s_eg = algebra::qubit_op(L, 0, QubitLevel::e, QubitLevel::g);
  const CMatrix s_ge = algebra::qubit_op(L, 0, QubitLevel::g, QubitLevel::e);
  const CMatrix s_ee = algebra::qubit_op(L, 0, QubitLevel::e, QubitLevel::e);
  const CMatrix s_gg = algebra::qubit_op(L, 0, QubitLevel::g, QubitLevel::g);
  sys.H = p.omega * (s_eg + s_ge) - kI * p.gamma_e * s_ee;
  // Pulling half the decay out as a uniform drift leaves a balanced
  // gain/loss pair, which is symmetric under level exchange + conjugation.
  sys.H_pt = p.omega * (s_eg + s_ge) - kI * (0.5 * p.gamma_e) * s_ee +
             kI * (0.5 * p.gamma_e) * s_gg;
  sys.H0 = -kI * (0.5 * p.gamma_e) * algebra::identity(L);
  return sys;
}

ModelSystem build_h2(const H2Params& p) {
  validate(p);
  SpaceLayout layout = SpaceLayout::bosonic_modes(2, p.n_max);
  ModelSystem sys{layout, {}, {}, {}, symmetry::parity_two_mode(layout)};
  const CMatrix a = algebra::annihilation(layout, 0);
  const CMatrix b = algebra::annihilation(layout, 1);
  const CMatrix hop = a.adjoint() * b + b.adjoint() * a;
  const CMatrix n_a = algebra::number(layout, 0);
  const CMatrix n_b = algebra::number(layout, 1);
  sys.H = p.g * hop - kI * p.gamma_a * n_a - kI * p.gamma_b * n_b;
  // Splitting off the mean damping leaves the rate imbalance, which swaps
  // sign under mode exchange and is restored by conjugation.
  sys.H_pt = p.g * hop - kI * p.kappa() * n_a + kI * p.kappa() * n_b;
  sys.H0 = -kI * p.gamma() * (n_a + n_b);
  return sys;
}

ModelSystem build_h3(const H3Params& p) {
  validate(p);
  SpaceLayout layout = SpaceLayout::bosonic_modes(2, p.n_max);
  ModelSystem sys{layout, {}, {}, {}, symmetry::parity_two_mode(layout)};
  const CMatrix a = algebra::annihilation(layout, 0);
  const CMatrix b = algebra::annihilation(layout, 1);
  const CMatrix hop = a.adjoint() * b + b.adjoint() * a;
  const CMatrix n_a = algebra::number(layout, 0);
  const CMatrix n_b = algebra::number(layout, 1);
  const CMatrix drive_a = a - a.adjoint();
  const CMatrix drive_b = b - b.adjoint();
  const CMatrix one = algebra::identity(layout);
  const Complex th = p.theta();
  const double eps = p.epsilon;
  sys.H = p.g * hop + kI * eps * (1.0 - kI * th) * drive_a +
          kI * eps * (1.0 - kI * std::conj(th)) * drive_b - kI * p.gamma_a * n_a -
          kI * p.gamma_b * n_b - kI * p.chi() * one;
  sys.H_pt = p.g * hop + kI * eps * drive_a + kI * eps * drive_b - kI * p.kappa() * n_a +
             kI * p.kappa() * n_b;
  // The drift keeps the mean damping plus the drive counter-terms that make
  // it a displaced total-occupation operator commuting with the symmetric part.
  sys.H0 = eps * th * drive_a + eps * std::conj(th) * drive_b - kI * p.gamma() * (n_a + n_b) -
           kI * p.chi() * one;
  return sys;
}

SupermodeMap supermodes(const H2Params& p) {
  validate(p);
  const Complex lam = p.lambda();
  if (std::abs(lam) < 1e-12 * p.g)
    throw singular_error(
        "supermodes: exceptional point at |kappa| = g; supermode map singular");
  return ladder_map(SpaceLayout::bosonic_modes(2, p.n_max), lam, p.g, p.kappa());
}

SupermodeMap supermodes(const H3Params& p) {
  validate(p);
  const double lam = p.lambda();
  SpaceLayout layout = SpaceLayout::bosonic_modes(2, p.n_max);
  SupermodeMap map = ladder_map(layout, lam, p.g, p.kappa());
  map.displaced = true;
  map.eps_c = p.epsilon * (map.alpha_half_cos + map.alpha_half_sin);
  map.eps_d = p.epsilon * (map.alpha_half_cos - map.alpha_half_sin);
  const CMatrix one = algebra::identity(layout);
  // Completing the square in each ladder: shifts of -+ i eps/lambda absorb
  // the linear drive into displaced occupation operators.
  map.c_eps = map.c - kI * (map.eps_c / lam) * one;
  map.c_eps_plus = map.c_plus + kI * (map.eps_c / lam) * one;
  map.d_eps = map.d - kI * (map.eps_d / lam) * one;
  map.d_eps_plus = map.d_plus + kI * (map.eps_d / lam) * one;
  return map;
}

const std::vector<std::pair<int, int>>& tracked_pairs() {
  static const std::vector<std::pair<int, int>> pairs{{1, 0}, {0, 1}, {2, 0}, {0, 2}};
  return pairs;
}

std::vector<Complex> analytic_eigs_h2(const H2Params& p, Frame frame,
                                      const std::vector<std::pair<int, int>>& occupations) {
  validate(p);
  const Complex lam = p.lambda();
  const double gam = p.gamma();
  std::vector<Complex> out;
  out.reserve(occupations.size());
  for (const auto& [nc, nd] : occupations) {
    if (nc < 0 || nd < 0)
      throw std::invalid_argument("analytic_eigs_h2: occupations must be non-negative");
    out.push_back(frame == Frame::initial
                      ? (lam - kI * gam) * static_cast<double>(nc) -
                            (lam + kI * gam) * static_cast<double>(nd)
                      : lam * static_cast<double>(nc - nd));
  }
  return out;
}

std::vector<Complex> analytic_eigs_h3(const H3Params& p, Frame frame,
                                      const std::vector<std::pair<int, int>>& occupations) {
  validate(p);
  const Complex lam = p.lambda();
  const double gam = p.gamma();
  const double l0 = p.lambda0();
  std::vector<Complex> out;
  out.reserve(occupations.size());
  for (const auto& [nc, nd] : occupations) {
    if (nc < 0 || nd < 0)
      throw std::invalid_argument("analytic_eigs_h3: occupations must be non-negative");
    out.push_back(frame == Frame::initial
                      ? (lam - kI * gam) * static_cast<double>(nc) -
                            (lam + kI * gam) * static_cast<double>(nd) + l0
                      : lam * static_cast<double>(nc - nd) + l0);
  }
  return out;
}

FitResult fit_scalar_generator(const CMatrix& h, const CMatrix& g,
                               const symmetry::ParityOperator& parity) {
  if (h.rows() != h.cols() || g.rows() != g.cols() || h.rows() != g.rows() ||
      h.rows() != parity.matrix.rows())
    throw std::invalid_argument("fit_scalar_generator: dimensions do not agree");

  const auto asym = [&](const CMatrix& x) -> CMatrix {
    return symmetry::pt_transform(x, parity) - x;
  };
  // asym(beta G) = Re(beta) asym(G) - i Im(beta) (P conj(G) P + G): linear in
  // (Re beta, Im beta) with two real directions.
  const CMatrix target = asym(h);
  const CMatrix dir_re = asym(g);
  const CMatrix dir_im = -kI * (symmetry::pt_transform(g, parity) + g);

  const double scale = std::max(1.0, g.norm());
  if (dir_re.norm() <= 1e-13 * scale && dir_im.norm() <= 1e-13 * scale)
    throw std::invalid_argument(
        "fit_scalar_generator: generator is PT-symmetric; cannot fit a scalar "
        "multiple (no asymmetric direction available)");

  const auto rdot = [](const CMatrix& x, const CMatrix& y) {
    return (x.conjugate().cwiseProduct(y)).sum().real();
  };
  Eigen::Matrix2d gram;
  gram << rdot(dir_re, dir_re), rdot(dir_re, dir_im), rdot(dir_im, dir_re),
      rdot(dir_im, dir_im);
  Eigen::Vector2d rhs(rdot(dir_re, target), rdot(dir_im, target));
  // Minimum-norm least squares keeps the unconstrained direction at zero
  // when the generator is symmetric in one of the two.
  auto cod = gram.completeOrthogonalDecomposition();
  cod.setThreshold(1e-12);
  const Eigen::Vector2d beta_xy = cod.solve(rhs);

  FitResult fit;
  fit.beta = Complex(beta_xy(0), beta_xy(1));
  fit.residual = (target - beta_xy(0) * dir_re - beta_xy(1) * dir_im).norm();
  return fit;
}

}  // namespace ptframe::models
