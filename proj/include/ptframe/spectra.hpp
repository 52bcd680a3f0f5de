#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ptframe/types.hpp"

namespace ptframe::spectra {

// Parameter -> generator matrix, already expressed in the frame under study.
using ModelFn = std::function<CMatrix(double)>;

struct SweepOptions {
  // Eigenvalue guesses selecting which branches to follow from the first
  // grid point; empty follows the full spectrum.
  std::vector<Complex> targets;
  // Step-cost weight for the vector term; negative selects the adaptive
  // weight 0.5 * max(median spacing, 0.1 * spectral diameter).
  double weight = -1.0;
};

struct SweepResult {
  std::string parameter_name;
  std::vector<double> grid;
  CMatrix branches;              // one row per branch, one column per grid point
  std::vector<double> overlaps;  // worst vector overlap of the step into each point ([0] = 1)
  std::vector<char> ambiguous;   // the step into this point had near-tied assignments
  std::vector<CMatrix> vectors;  // per point: unit right eigenvectors of the branches
  Frame frame = Frame::initial;
};

struct TrackStep {
  std::vector<int> permutation;  // previous index -> next index
  bool ambiguous = false;
  double min_overlap = 1.0;
};

// Optimal continuation of eigenvalue branches between two parameter points:
// assignment minimizing sum |E_i - E'_perm(i)| + w (1 - |v_i^+ v'_perm(i)|).
// Negative weight selects the default 0.1 * median nearest-neighbour spacing
// of the previous values. Next may hold more pairs than prev (subset
// tracking); vectors are unit columns.
TrackStep track_step(const CVector& prev_values, const CMatrix& prev_vectors,
                     const CVector& next_values, const CMatrix& next_vectors,
                     double weight = -1.0);

// Diagonalize the model across a strictly monotone grid and continue the
// branches. Deterministic for a fixed input regardless of the worker count.
SweepResult sweep(const ModelFn& model, const std::string& parameter_name,
                  const std::vector<double>& grid, Frame frame,
                  const SweepOptions& options = {});

struct DetectOptions {
  double gap_tol = 1e-6;          // eigenvalue distance certifying a coalescence
  double coalescence_tol = 1e-3;  // vector non-overlap 1 - |v_i^+ v_j| certifying it
  double target_width = 1e-8;     // refinement bracket width to reach
  int max_evaluations = 120;      // model evaluations allowed per candidate
};

struct EPReport {
  double location = 0.0;
  std::vector<int> branch_ids;
  double eigenvalue_gap = 0.0;
  double vector_coalescence = 0.0;
  int order_estimate = 0;
  double refinement_width = 0.0;
  double metric = 0.0;     // refined pair-coalescence metric value
  CMatrix branch_vectors;  // group eigenvectors at the refined location
};

// Locate exceptional points along a sweep: bracket the minima of the
// pair-coalescence metric, refine by golden section against a fixed anchor
// trajectory point, certify pairwise gaps and vector overlaps at the refined
// location and its bracket edges, and group the coalescing branches.
std::vector<EPReport> detect_eps(const SweepResult& s, const ModelFn& model,
                                 const DetectOptions& options = {});

// Largest |Im E| over the branches, per grid point.
std::vector<double> reality_check(const SweepResult& s);

}  // namespace ptframe::spectra
