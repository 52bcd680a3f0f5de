#include "ptframe/frames.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ptframe/algebra.hpp"

namespace ptframe::frames {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double interior_norm(const CMatrix& m, const std::vector<int>& interior) {
  return interior.empty() ? m.norm() : algebra::submatrix(m, interior).norm();
}

}  // namespace

Decomposition check_decomposition(const CMatrix& h, const CMatrix& h_pt, const CMatrix& h0,
                                  const symmetry::ParityOperator& parity,
                                  const std::vector<int>& interior) {
  if (h.rows() != h.cols() || h_pt.rows() != h.rows() || h_pt.cols() != h.cols() ||
      h0.rows() != h.rows() || h0.cols() != h.cols())
    throw std::invalid_argument("check_decomposition: all parts must be square and equal-sized");
  Decomposition d;
  d.H = h;
  d.H_pt = h_pt;
  d.H0 = h0;
  d.sum_residual = (h - h_pt - h0).norm() / std::max(h.norm(), kEps);
  if (d.sum_residual > 1e-12) {
    std::ostringstream msg;
    msg << "check_decomposition: parts do not sum to the generator (relative defect "
        << d.sum_residual << " > 1e-12)";
    throw std::invalid_argument(msg.str());
  }
  // Commutation that holds exactly in the full algebra can break on the
  // truncation boundary; `interior` restricts the defect measurement to the
  // sub-block where the identity is meaningful.
  d.commutator_residual = interior_norm(algebra::commutator(h_pt, h0), interior) /
                          std::max(h_pt.norm() * h0.norm(), kEps);
  d.pt_residual = symmetry::pt_residual(h_pt, parity).residual;
  return d;
}

bool certified(const Decomposition& d, double tol) {
  if (tol <= 0) throw std::invalid_argument("certified: tolerance must be positive");
  return d.sum_residual <= 1e-12 && d.commutator_residual <= tol && d.pt_residual <= tol;
}

CMatrix ef_frame_operator(const CMatrix& h0, double t) {
  return algebra::expm(Complex(0.0, -t) * h0);
}

FrameCheck ef_drift(const Decomposition& d, double t, const std::vector<CVector>& states,
                    const std::vector<int>& interior) {
  const CMatrix s = ef_frame_operator(d.H0, t);
  // S^-1 comes from the exponential at -t, never from a matrix inversion.
  const CMatrix s_inv = ef_frame_operator(d.H0, -t);
  const double cond = s.norm() * s_inv.norm();
  if (cond > 1e12) {
    std::ostringstream msg;
    msg << "ef_drift: frame operator condition " << cond << " exceeds 1e12 at t = " << t
        << "; use a smaller |t|";
    throw std::runtime_error(msg.str());
  }

  FrameCheck check;
  check.time = t;
  const CMatrix transformed = s_inv * d.H_pt * s;
  check.drift = interior_norm(transformed - d.H_pt, interior) /
                std::max(interior_norm(d.H_pt, interior), kEps);

  if (!states.empty()) {
    const CMatrix full_prop = algebra::expm(Complex(0.0, -t) * d.H);
    const CMatrix pt_prop = algebra::expm(Complex(0.0, -t) * d.H_pt);
    double worst = 0.0;
    for (const CVector& psi : states) {
      if (psi.size() != d.H.rows())
        throw std::invalid_argument("ef_drift: state dimension does not match the generator");
      worst = std::max(worst, (full_prop * psi - s * (pt_prop * psi)).norm());
    }
    check.evolution_gap = worst;
  }
  return check;
}

CVector evolve(const CMatrix& h, const CVector& psi0, double t) {
  if (psi0.size() != h.rows())
    throw std::invalid_argument("evolve: state dimension does not match the generator");
  return algebra::expm(Complex(0.0, -t) * h) * psi0;
}

std::vector<SumCheckEntry> eigenvalue_sum_check(const Decomposition& d) {
  if (!certified(d))
    throw std::invalid_argument(
        "eigenvalue_sum_check: decomposition is not certified; residuals exceed tolerance");
  const algebra::EigResult full = algebra::eig(d.H);
  if (!(full.condition_estimate < 1e8)) {
    std::ostringstream msg;
    msg << "eigenvalue_sum_check: eigenvector matching unreliable near an exceptional point "
           "(right-vector condition "
        << full.condition_estimate << " >= 1e8)";
    throw std::runtime_error(msg.str());
  }
  const algebra::EigResult pt = algebra::eig(d.H_pt);
  const algebra::EigResult drift = algebra::eig(d.H0);
  const int n = static_cast<int>(full.eigenvalues.size());

  // A shared eigenvector of the commuting parts is singled out through the
  // left vectors: w_j^+ v_i peaks at the matching pair even when the right
  // vectors are skewed. Ties fall back to eigenvalue proximity.
  const auto match = [&](const algebra::EigResult& part, const CVector& v,
                         const Complex& proximity_target) {
    int best = 0;
    double best_overlap = -1.0;
    for (int j = 0; j < n; ++j) {
      double overlap = std::abs(part.left_vectors.col(j).dot(v)) /
                       std::max(part.left_vectors.col(j).norm(), kEps);
      if (overlap > best_overlap * (1.0 + 1e-9)) {
        best_overlap = overlap;
        best = j;
      } else if (overlap > best_overlap * (1.0 - 1e-9)) {
        if (std::abs(part.eigenvalues(j) - proximity_target) <
            std::abs(part.eigenvalues(best) - proximity_target))
          best = j;
      }
    }
    return best;
  };

  std::vector<SumCheckEntry> entries;
  entries.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const CVector v = full.right_vectors.col(i);
    SumCheckEntry e;
    e.value = full.eigenvalues(i);
    const int j0 = match(drift, v, e.value);
    e.value_drift = drift.eigenvalues(j0);
    const int j1 = match(pt, v, e.value - e.value_drift);
    e.value_pt = pt.eigenvalues(j1);
    e.gap = std::abs(e.value - e.value_pt - e.value_drift);
    entries.push_back(e);
  }
  return entries;
}

}  // namespace ptframe::frames
