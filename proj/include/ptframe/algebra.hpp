#pragma once

#include <cstddef>
#include <vector>

#include "ptframe/layout.hpp"
#include "ptframe/types.hpp"

namespace ptframe::algebra {

// Eigen-decomposition of a general (non-normal) complex matrix with matched
// left/right pairs. Right vectors have unit norm; the matched left vector is
// rescaled so that left.col(i).dot(right.col(i)) == 1 whenever the pair is
// far enough from defectiveness for that to be meaningful.
struct EigResult {
  CVector eigenvalues;
  CMatrix right_vectors;
  CMatrix left_vectors;
  RVector residual_norms;     // per pair: |H v - E v|_2 with |v|_2 = 1
  double condition_estimate;  // spectral condition number of the right-vector matrix
};

CMatrix identity(const SpaceLayout& layout);

// Operator acting as `local` on subsystem `site` and trivially elsewhere.
CMatrix embed(const SpaceLayout& layout, std::size_t site, const CMatrix& local);

// Truncated bosonic annihilation operator of the given mode.
CMatrix annihilation(const SpaceLayout& layout, std::size_t mode_index);

// Occupation-number operator of the given bosonic mode.
CMatrix number(const SpaceLayout& layout, std::size_t mode_index);

// Total occupation over all bosonic modes.
CMatrix total_number(const SpaceLayout& layout);

// Qubit levels in basis order (e, g).
enum class QubitLevel { e = 0, g = 1 };

// |bra><ket| on the qubit at `site`.
CMatrix qubit_op(const SpaceLayout& layout, std::size_t site, QubitLevel bra, QubitLevel ket);

CMatrix commutator(const CMatrix& a, const CMatrix& b);

// Matrix exponential (scaling-and-squaring with Pade approximants).
CMatrix expm(const CMatrix& m);

EigResult eig(const CMatrix& m);

// Eigenvalues plus right vectors only; the workhorse for parameter sweeps.
void eig_right(const CMatrix& m, CVector& values, CMatrix& vectors);

// Principal submatrix on the given basis indices.
CMatrix submatrix(const CMatrix& m, const std::vector<int>& indices);

}  // namespace ptframe::algebra
