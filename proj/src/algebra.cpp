#include "ptframe/algebra.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

#include "ptframe/detail/assignment.hpp"

#ifdef PTFRAME_HAVE_OPENBLAS
extern "C" void openblas_set_num_threads(int);
#endif

namespace ptframe {

int SpaceLayout::subsystem_dim(std::size_t k) const {
  const Subsystem& s = subsystems.at(k);
  return s.kind == SubsystemKind::qubit ? 2 : s.cutoff + 1;
}

int SpaceLayout::dim() const {
  int d = 1;
  for (std::size_t k = 0; k < subsystems.size(); ++k) d *= subsystem_dim(k);
  return d;
}

bool SpaceLayout::is_boson(std::size_t k) const {
  return subsystems.at(k).kind == SubsystemKind::boson;
}

int SpaceLayout::local_index(std::size_t k, int idx) const {
  // Row-major composite index, last subsystem fastest.
  int stride = 1;
  for (std::size_t j = subsystems.size(); j-- > k + 1;) stride *= subsystem_dim(j);
  return (idx / stride) % subsystem_dim(k);
}

int SpaceLayout::total_occupation(int idx) const {
  int total = 0;
  for (std::size_t k = 0; k < subsystems.size(); ++k) {
    if (is_boson(k)) total += local_index(k, idx);
  }
  return total;
}

SpaceLayout SpaceLayout::single_qubit() {
  return SpaceLayout{{Subsystem{SubsystemKind::qubit, 0}}};
}

SpaceLayout SpaceLayout::bosonic_modes(int n_modes, int n_max) {
  if (n_modes < 1) throw std::invalid_argument("bosonic_modes: need at least one mode");
  if (n_max < 1) throw std::invalid_argument("bosonic_modes: occupation cutoff must be >= 1");
  SpaceLayout layout;
  layout.subsystems.assign(static_cast<std::size_t>(n_modes),
                           Subsystem{SubsystemKind::boson, n_max});
  return layout;
}

std::vector<int> low_occupation_indices(const SpaceLayout& layout, int max_total) {
  if (max_total < 0) throw std::invalid_argument("low_occupation_indices: negative bound");
  std::vector<int> keep;
  const int d = layout.dim();
  for (int idx = 0; idx < d; ++idx) {
    if (layout.total_occupation(idx) <= max_total) keep.push_back(idx);
  }
  return keep;
}

}  // namespace ptframe

namespace ptframe::algebra {

namespace {

// Pin the BLAS backing Eigen's LAPACK kernels to one thread so numerical
// output is bit-identical regardless of the machine or worker schedule.
void pin_blas_single_thread() {
#ifdef PTFRAME_HAVE_OPENBLAS
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
#endif
}

void require_square(const CMatrix& m, const char* who) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  if (m.rows() == 0) throw std::invalid_argument(std::string(who) + ": matrix is empty");
}

void require_site(const SpaceLayout& layout, std::size_t site, const char* who) {
  if (site >= layout.subsystems.size())
    throw std::invalid_argument(std::string(who) + ": subsystem index out of range");
}

bool value_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

CMatrix identity(const SpaceLayout& layout) {
  const int d = layout.dim();
  return CMatrix::Identity(d, d);
}

CMatrix embed(const SpaceLayout& layout, std::size_t site, const CMatrix& local) {
  require_site(layout, site, "embed");
  const int d_local = layout.subsystem_dim(site);
  if (local.rows() != d_local || local.cols() != d_local)
    throw std::invalid_argument("embed: local operator does not match the subsystem dimension");
  CMatrix acc = CMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < layout.subsystems.size(); ++k) {
    if (k == site) {
      acc = Eigen::kroneckerProduct(acc, local).eval();
    } else {
      const int dk = layout.subsystem_dim(k);
      acc = Eigen::kroneckerProduct(acc, CMatrix::Identity(dk, dk)).eval();
    }
  }
  return acc;
}

CMatrix annihilation(const SpaceLayout& layout, std::size_t mode_index) {
  require_site(layout, mode_index, "annihilation");
  if (!layout.is_boson(mode_index))
    throw std::invalid_argument("annihilation: subsystem " + std::to_string(mode_index) +
                                " is not a bosonic mode");
  const int d = layout.subsystem_dim(mode_index);
  CMatrix a = CMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return embed(layout, mode_index, a);
}

CMatrix number(const SpaceLayout& layout, std::size_t mode_index) {
  require_site(layout, mode_index, "number");
  if (!layout.is_boson(mode_index))
    throw std::invalid_argument("number: subsystem " + std::to_string(mode_index) +
                                " is not a bosonic mode");
  const int d = layout.subsystem_dim(mode_index);
  CMatrix n = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return embed(layout, mode_index, n);
}

CMatrix total_number(const SpaceLayout& layout) {
  CMatrix total = CMatrix::Zero(layout.dim(), layout.dim());
  for (std::size_t k = 0; k < layout.subsystems.size(); ++k) {
    if (layout.is_boson(k)) total += number(layout, k);
  }
  return total;
}

CMatrix qubit_op(const SpaceLayout& layout, std::size_t site, QubitLevel bra, QubitLevel ket) {
  require_site(layout, site, "qubit_op");
  if (layout.is_boson(site))
    throw std::invalid_argument("qubit_op: subsystem " + std::to_string(site) +
                                " is not a qubit");
  CMatrix local = CMatrix::Zero(2, 2);
  local(static_cast<int>(bra), static_cast<int>(ket)) = 1.0;
  return embed(layout, site, local);
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw std::invalid_argument("commutator: operands must be square and of equal size");
  return a * b - b * a;
}

CMatrix expm(const CMatrix& m) {
  require_square(m, "expm");
  if (!m.allFinite()) throw std::invalid_argument("expm: matrix has non-finite entries");
  pin_blas_single_thread();
  return m.exp();
}

void eig_right(const CMatrix& m, CVector& values, CMatrix& vectors) {
  require_square(m, "eig");
  if (m.rows() > 2048)
    throw std::invalid_argument("eig: dimension " + std::to_string(m.rows()) +
                                " exceeds the dense-solver budget of 2048");
  if (!m.allFinite()) throw std::invalid_argument("eig: matrix has non-finite entries");
  pin_blas_single_thread();
  Eigen::ComplexEigenSolver<CMatrix> solver(m, true);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eig: QR iteration did not converge for dimension " +
                             std::to_string(m.rows()) + " (solver info " +
                             std::to_string(static_cast<int>(solver.info())) +
                             " after the internal sweep limit)");
  const int n = static_cast<int>(m.rows());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const CVector& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return value_less(raw(i), raw(j)); });
  values.resize(n);
  vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    values(i) = raw(order[static_cast<std::size_t>(i)]);
    vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]).normalized();
  }
}

EigResult eig(const CMatrix& m) {
  EigResult r;
  eig_right(m, r.eigenvalues, r.right_vectors);
  const int n = static_cast<int>(m.rows());

  r.residual_norms =
      (m * r.right_vectors - r.right_vectors * r.eigenvalues.asDiagonal()).colwise().norm();

  // Left pairs from the adjoint problem: H^+ w = mu w implies w^+ H = conj(mu) w^+,
  // so conj(mu_j) is matched to E_i by optimal assignment.
  CVector adj_values;
  CMatrix adj_vectors;
  eig_right(m.adjoint().eval(), adj_values, adj_vectors);
  RMatrix cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = std::abs(r.eigenvalues(i) - std::conj(adj_values(j)));
  const std::vector<int> pick = detail::min_cost_assignment(cost);

  r.left_vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    CVector w = adj_vectors.col(pick[static_cast<std::size_t>(i)]);
    const Complex overlap = w.dot(r.right_vectors.col(i));  // w^+ v
    // Rescale for w^+ v = 1; a vanishing overlap signals a (near-)defective
    // pair, which is reported through condition_estimate instead.
    if (std::abs(overlap) > 1e-12) w /= std::conj(overlap);
    r.left_vectors.col(i) = w;
  }

  Eigen::BDCSVD<CMatrix> svd(r.right_vectors);
  const double s_max = svd.singularValues()(0);
  const double s_min = svd.singularValues()(n - 1);
  r.condition_estimate =
      s_min > 0.0 ? s_max / s_min : std::numeric_limits<double>::infinity();
  return r;
}

CMatrix submatrix(const CMatrix& m, const std::vector<int>& indices) {
  require_square(m, "submatrix");
  for (int idx : indices) {
    if (idx < 0 || idx >= m.rows())
      throw std::invalid_argument("submatrix: basis index out of range");
  }
  const int k = static_cast<int>(indices.size());
  CMatrix out(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      out(i, j) = m(indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace ptframe::algebra
