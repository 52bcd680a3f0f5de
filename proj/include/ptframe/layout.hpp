#pragma once

#include <cstddef>
#include <vector>

#include "ptframe/types.hpp"

namespace ptframe {

enum class SubsystemKind { qubit, boson };

struct Subsystem {
  SubsystemKind kind = SubsystemKind::boson;
  int cutoff = 0;  // bosons: largest occupation kept (local dimension cutoff+1); qubits: unused
};

// Ordered list of tensor factors. The composite basis index runs row-major
// over the local indices, so the *last* subsystem varies fastest.
struct SpaceLayout {
  std::vector<Subsystem> subsystems;

  int subsystem_dim(std::size_t k) const;
  int dim() const;
  bool is_boson(std::size_t k) const;

  // Local basis index of subsystem k encoded in composite index `idx`.
  int local_index(std::size_t k, int idx) const;
  // Sum of all bosonic occupations encoded in composite index `idx`.
  int total_occupation(int idx) const;

  static SpaceLayout single_qubit();
  static SpaceLayout bosonic_modes(int n_modes, int n_max);
};

// Composite basis indices with total bosonic occupation <= max_total, ascending.
std::vector<int> low_occupation_indices(const SpaceLayout& layout, int max_total);

}  // namespace ptframe
