#pragma once

#include "ptframe/algebra.hpp"
#include "ptframe/layout.hpp"
#include "ptframe/types.hpp"

namespace ptframe::symmetry {

enum class ParityKind { qubit_sigma_x, two_mode_shuffle_phase };

// Real involutive parity matrix together with the layout it acts on.
struct ParityOperator {
  CMatrix matrix;
  SpaceLayout layout;
  ParityKind kind;
};

struct SymmetryReport {
  double residual = 0.0;
  bool is_symmetric = false;
  double tol = 0.0;
};

// Level-exchange parity of a single qubit (sigma_x in the (e, g) basis).
ParityOperator parity_qubit();

// Mode-exchange parity of two equal-cutoff bosonic modes combined with the
// occupation phase (-1)^(n_a + n_b); maps |1,0> to -|0,1>.
ParityOperator parity_two_mode(const SpaceLayout& layout);

// Antilinear composite transform: P conj(H) P.
CMatrix pt_transform(const CMatrix& h, const ParityOperator& parity);

// Relative Frobenius defect |P conj(H) P - H| / max(|H|, eps).
SymmetryReport pt_residual(const CMatrix& h, const ParityOperator& parity, double tol = 1e-10);

// Relative defect |eta H eta^-1 - H^+| / max(|H|, eps) for an invertible
// metric eta (condition number must stay below 1e12).
double pseudo_hermiticity_residual(const CMatrix& h, const CMatrix& eta);

}  // namespace ptframe::symmetry
