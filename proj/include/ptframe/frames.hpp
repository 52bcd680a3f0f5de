#pragma once

#include <vector>

#include "ptframe/symmetry.hpp"
#include "ptframe/types.hpp"

namespace ptframe::frames {

// Split of a generator H into a symmetric part H_pt and a drift part H0,
// with the certification residuals measured on construction.
struct Decomposition {
  CMatrix H;
  CMatrix H_pt;
  CMatrix H0;
  double sum_residual = 0.0;         // |H - H_pt - H0| / |H|
  double commutator_residual = 0.0;  // |[H_pt, H0]| / (|H_pt| |H0|)
  double pt_residual = 0.0;          // symmetry defect of H_pt under the given parity
};

// Diagnostics of the equilibrium-frame map at one time.
struct FrameCheck {
  double time = 0.0;
  double drift = 0.0;           // |S^-1 H_pt S - H_pt| / |H_pt|
  double evolution_gap = 0.0;   // max_psi |e^(-iHt) psi - S e^(-iH_pt t) psi|
};

struct SumCheckEntry {
  Complex value;        // eigenvalue of H
  Complex value_pt;     // matched eigenvalue of H_pt
  Complex value_drift;  // matched eigenvalue of H0
  double gap;           // |value - value_pt - value_drift|
};

// Measures the three residuals; the parts must sum to H within 1e-12.
// `interior` optionally restricts the commutator defect to a sub-block of
// basis indices: identities that hold exactly in the full operator algebra
// break on the truncation boundary of a cut-off space.
Decomposition check_decomposition(const CMatrix& h, const CMatrix& h_pt, const CMatrix& h0,
                                  const symmetry::ParityOperator& parity,
                                  const std::vector<int>& interior = {});

// A decomposition is certified once every residual is at or below tol.
bool certified(const Decomposition& d, double tol = 1e-10);

// Frame map S(t) = exp(-i H0 t).
CMatrix ef_frame_operator(const CMatrix& h0, double t);

// Drift of the symmetric part under the frame map, plus the state-evolution
// gap over the supplied states (empty list: gap 0). `interior` optionally
// restricts the drift measurement to a sub-block of basis indices, for
// generators whose truncation boundary leaks under the frame map.
FrameCheck ef_drift(const Decomposition& d, double t,
                    const std::vector<CVector>& states = {},
                    const std::vector<int>& interior = {});

// State evolution psi(t) = exp(-i H t) psi0.
CVector evolve(const CMatrix& h, const CVector& psi0, double t);

// Per-eigenpair additivity of the split: eigenvalues of H against the
// matched eigenvalues of H_pt and H0 through left-vector overlaps.
std::vector<SumCheckEntry> eigenvalue_sum_check(const Decomposition& d);

}  // namespace ptframe::frames
