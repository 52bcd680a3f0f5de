#include "ptframe/symmetry.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ptframe::symmetry {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_matching(const CMatrix& h, const ParityOperator& parity, const char* who) {
  if (h.rows() != h.cols()) throw std::invalid_argument(std::string(who) + ": matrix must be square");
  if (h.rows() != parity.matrix.rows())
    throw std::invalid_argument(std::string(who) + ": matrix and parity dimensions differ");
}

}  // namespace

ParityOperator parity_qubit() {
  SpaceLayout layout = SpaceLayout::single_qubit();
  CMatrix p(2, 2);
  p << 0, 1, 1, 0;
  return ParityOperator{p, layout, ParityKind::qubit_sigma_x};
}

ParityOperator parity_two_mode(const SpaceLayout& layout) {
  if (layout.subsystems.size() != 2 || !layout.is_boson(0) || !layout.is_boson(1))
    throw std::invalid_argument("parity_two_mode: layout must hold exactly two bosonic modes");
  if (layout.subsystem_dim(0) != layout.subsystem_dim(1))
    throw std::invalid_argument("parity_two_mode: the two modes must share one cutoff");
  const int d = layout.subsystem_dim(0);
  const int dim = layout.dim();
  CMatrix p = CMatrix::Zero(dim, dim);
  // P |n_a, n_b> = (-1)^(n_a + n_b) |n_b, n_a>: mode shuffle times occupation phase.
  for (int na = 0; na < d; ++na) {
    for (int nb = 0; nb < d; ++nb) {
      const int from = na * d + nb;
      const int to = nb * d + na;
      p(to, from) = ((na + nb) % 2 == 0) ? 1.0 : -1.0;
    }
  }
  return ParityOperator{p, layout, ParityKind::two_mode_shuffle_phase};
}

CMatrix pt_transform(const CMatrix& h, const ParityOperator& parity) {
  require_matching(h, parity, "pt_transform");
  return parity.matrix * h.conjugate() * parity.matrix;
}

SymmetryReport pt_residual(const CMatrix& h, const ParityOperator& parity, double tol) {
  require_matching(h, parity, "pt_residual");
  if (tol <= 0) throw std::invalid_argument("pt_residual: tolerance must be positive");
  const double defect = (pt_transform(h, parity) - h).norm();
  const double residual = defect / std::max(h.norm(), kEps);
  return SymmetryReport{residual, residual <= tol, tol};
}

double pseudo_hermiticity_residual(const CMatrix& h, const CMatrix& eta) {
  if (h.rows() != h.cols() || eta.rows() != eta.cols() || h.rows() != eta.rows())
    throw std::invalid_argument("pseudo_hermiticity_residual: dimensions do not agree");
  Eigen::BDCSVD<CMatrix> svd(eta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double s_max = svd.singularValues()(0);
  const double s_min = svd.singularValues()(eta.rows() - 1);
  if (!(s_min > 0.0) || s_max / s_min >= 1e12)
    throw std::invalid_argument(
        "pseudo_hermiticity_residual: metric condition number exceeds 1e12");
  // X = eta H eta^-1 through an SVD solve of eta^T X^T = (eta H)^T;
  // eta is never inverted densely.
  Eigen::BDCSVD<CMatrix> svd_t(eta.transpose().eval(),
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CMatrix transformed = svd_t.solve((eta * h).transpose().eval()).transpose();
  return (transformed - h.adjoint()).norm() / std::max(h.norm(), kEps);
}

}  // namespace ptframe::symmetry
