#pragma once

#include <utility>
#include <vector>

#include "ptframe/algebra.hpp"
#include "ptframe/symmetry.hpp"
#include "ptframe/types.hpp"

namespace ptframe::models {

// Driven qubit whose excited level decays: omega couples the levels, gamma_e
// drains |e>. Basis order (e, g).
struct H1Params {
  double omega = 1.0;
  double gamma_e = 0.0;
};

// Two coupled bosonic modes with independent loss rates gamma_a, gamma_b and
// hopping g. Negative rates describe gain and are accepted.
struct H2Params {
  double g = 1.0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  int n_max = 2;

  double kappa() const { return 0.5 * (gamma_a - gamma_b); }  // rate imbalance
  double gamma() const { return 0.5 * (gamma_a + gamma_b); }  // mean rate
  Complex lambda() const;  // principal sqrt(g^2 - kappa^2)
};

// The coupled lossy pair driven coherently on both modes with amplitude
// epsilon; only the oscillatory regime |kappa| < g is representable.
struct H3Params {
  double g = 1.0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double epsilon = 0.0;
  int n_max = 2;

  double kappa() const { return 0.5 * (gamma_a - gamma_b); }
  double gamma() const { return 0.5 * (gamma_a + gamma_b); }
  double lambda() const;   // sqrt(g^2 - kappa^2) > 0
  Complex theta() const;   // gamma (g - i kappa) / lambda^2
  double chi() const;      // 2 gamma epsilon^2 / lambda^2
  double lambda0() const;  // -2 g epsilon^2 / lambda^2
};

// A model instance: generator, its symmetric/drift split, and the parity
// under which the symmetric part is checked.
struct ModelSystem {
  SpaceLayout layout;
  CMatrix H;
  CMatrix H_pt;
  CMatrix H0;
  symmetry::ParityOperator parity;
};

ModelSystem build_h1(const H1Params& p);
ModelSystem build_h2(const H2Params& p);
ModelSystem build_h3(const H3Params& p);

// Non-unitary pair rotation (and, for the driven model, displacement) that
// brings the symmetric part to ladder form lambda (c+ c - d+ d) (+ lambda0).
// The branch is fixed so that sin^2 + cos^2 = 1 holds exactly on both sides
// of the oscillatory/overdamped transition.
struct SupermodeMap {
  Eigen::Matrix2cd R;  // rows: (c, d) in terms of (a, b)
  Complex lambda{};
  Complex alpha_half_sin{};
  Complex alpha_half_cos{};
  CMatrix c, c_plus, d, d_plus;
  bool displaced = false;
  Complex eps_c{}, eps_d{};
  CMatrix c_eps, c_eps_plus, d_eps, d_eps_plus;
};

SupermodeMap supermodes(const H2Params& p);
SupermodeMap supermodes(const H3Params& p);

// The four supermode occupation pairs followed across sweeps.
const std::vector<std::pair<int, int>>& tracked_pairs();

// Closed-form eigenvalues attached to supermode occupations (n_c, n_d).
std::vector<Complex> analytic_eigs_h2(
    const H2Params& p, Frame frame,
    const std::vector<std::pair<int, int>>& occupations = tracked_pairs());
std::vector<Complex> analytic_eigs_h3(
    const H3Params& p, Frame frame,
    const std::vector<std::pair<int, int>>& occupations = tracked_pairs());

struct FitResult {
  Complex beta{};
  double residual = 0.0;  // Frobenius norm of the remaining asymmetry
};

// Least-squares scalar beta making H - beta G as parity-time symmetric as
// possible; the asymmetry of beta G is linear in (Re beta, Im beta).
FitResult fit_scalar_generator(const CMatrix& h, const CMatrix& g,
                               const symmetry::ParityOperator& parity);

}  // namespace ptframe::models
