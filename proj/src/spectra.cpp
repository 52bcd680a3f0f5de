#include "ptframe/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ptframe/algebra.hpp"
#include "ptframe/detail/assignment.hpp"
#include "ptframe/detail/parallel.hpp"

namespace ptframe::spectra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_nn_spacing(const CVector& values) {
  const int n = static_cast<int>(values.size());
  if (n < 2) return 0.0;
  std::vector<double> nn(static_cast<std::size_t>(n), kInf);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = std::abs(values(i) - values(j));
      nn[static_cast<std::size_t>(i)] = std::min(nn[static_cast<std::size_t>(i)], d);
      nn[static_cast<std::size_t>(j)] = std::min(nn[static_cast<std::size_t>(j)], d);
    }
  }
  std::sort(nn.begin(), nn.end());
  return n % 2 ? nn[static_cast<std::size_t>(n / 2)]
               : 0.5 * (nn[static_cast<std::size_t>(n / 2) - 1] + nn[static_cast<std::size_t>(n / 2)]);
}

double spectral_diameter(const CVector& values) {
  const int n = static_cast<int>(values.size());
  double diam = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) diam = std::max(diam, std::abs(values(i) - values(j)));
  return diam;
}

// Step weight strong enough that a faster-moving interloper of similar value
// cannot out-bid the tracked branch's own continuation near a degeneracy.
double adaptive_weight(const CVector& values) {
  return 0.5 * std::max(median_nn_spacing(values), 0.1 * spectral_diameter(values));
}

double overlap_of(const CMatrix& left, int i, const CMatrix& right, int j) {
  return std::min(1.0, std::abs(left.col(i).dot(right.col(j))));
}

std::string format_param(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Smallest combined eigenvalue distance + vector non-overlap over branch pairs.
double pair_metric(const CVector& values, const CMatrix& vectors) {
  const int n = static_cast<int>(values.size());
  double best = kInf;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double m =
          std::abs(values(i) - values(j)) + (1.0 - overlap_of(vectors, i, vectors, j));
      best = std::min(best, m);
    }
  }
  return best;
}

}  // namespace

TrackStep track_step(const CVector& prev_values, const CMatrix& prev_vectors,
                     const CVector& next_values, const CMatrix& next_vectors, double weight) {
  const int nr = static_cast<int>(prev_values.size());
  const int nc = static_cast<int>(next_values.size());
  if (nr == 0) throw std::invalid_argument("track_step: no branches to continue");
  if (nc < nr)
    throw std::invalid_argument("track_step: fewer candidate pairs than tracked branches");
  if (prev_vectors.cols() != nr || next_vectors.cols() != nc ||
      prev_vectors.rows() != next_vectors.rows())
    throw std::invalid_argument("track_step: vector shapes do not match the value lists");
  const double w = weight >= 0.0 ? weight : 0.1 * median_nn_spacing(prev_values);

  RMatrix cost(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      cost(i, j) = std::abs(prev_values(i) - next_values(j)) +
                   w * (1.0 - overlap_of(prev_vectors, i, next_vectors, j));

  TrackStep step;
  step.permutation = detail::min_cost_assignment(cost);
  for (int i = 0; i < nr; ++i) {
    double c1 = kInf, c2 = kInf;
    for (int j = 0; j < nc; ++j) {
      const double c = cost(i, j);
      if (c < c1) {
        c2 = c1;
        c1 = c;
      } else if (c < c2) {
        c2 = c;
      }
    }
    if (nc > 1 && (c2 - c1) < 0.1 * std::max(c1, 1e-300)) step.ambiguous = true;
    step.min_overlap = std::min(
        step.min_overlap, overlap_of(prev_vectors, i, next_vectors, step.permutation[static_cast<std::size_t>(i)]));
  }
  return step;
}

SweepResult sweep(const ModelFn& model, const std::string& parameter_name,
                  const std::vector<double>& grid, Frame frame, const SweepOptions& options) {
  if (!model) throw std::invalid_argument("sweep: model function is empty");
  const int n = static_cast<int>(grid.size());
  if (n < 2) throw std::invalid_argument("sweep: grid needs at least two points");
  const bool ascending = grid[1] > grid[0];
  for (int k = 0; k + 1 < n; ++k) {
    const bool up = grid[static_cast<std::size_t>(k) + 1] > grid[static_cast<std::size_t>(k)];
    if (grid[static_cast<std::size_t>(k) + 1] == grid[static_cast<std::size_t>(k)] ||
        up != ascending)
      throw std::invalid_argument("sweep: grid must be strictly monotone");
  }

  std::vector<CVector> all_values(static_cast<std::size_t>(n));
  std::vector<CMatrix> all_vectors(static_cast<std::size_t>(n));
  detail::parallel_for(n, [&](int k) {
    const double theta = grid[static_cast<std::size_t>(k)];
    try {
      const CMatrix m = model(theta);
      algebra::eig_right(m, all_values[static_cast<std::size_t>(k)],
                         all_vectors[static_cast<std::size_t>(k)]);
    } catch (const singular_error& e) {
      throw singular_error("sweep: " + parameter_name + " = " + format_param(theta) + ": " +
                           e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep: evaluation failed at " + parameter_name + " = " +
                               format_param(theta) + ": " + e.what());
    }
  });

  const int dim = static_cast<int>(all_values[0].size());
  for (int k = 1; k < n; ++k) {
    if (all_values[static_cast<std::size_t>(k)].size() != dim)
      throw std::runtime_error("sweep: model dimension changed across the grid at " +
                               parameter_name + " = " +
                               format_param(grid[static_cast<std::size_t>(k)]));
  }

  // Branch selection at the first grid point: every pair, or the pairs
  // closest to the supplied target values (greedy, without replacement).
  std::vector<int> selected;
  if (options.targets.empty()) {
    selected.resize(static_cast<std::size_t>(dim));
    std::iota(selected.begin(), selected.end(), 0);
  } else {
    if (static_cast<int>(options.targets.size()) > dim)
      throw std::invalid_argument("sweep: more target branches than eigenvalues");
    std::vector<char> used(static_cast<std::size_t>(dim), 0);
    for (const Complex& target : options.targets) {
      int best = -1;
      double best_d = kInf;
      for (int j = 0; j < dim; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double d = std::abs(all_values[0](j) - target);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      used[static_cast<std::size_t>(best)] = 1;
      selected.push_back(best);
    }
  }
  const int nb = static_cast<int>(selected.size());

  SweepResult out;
  out.parameter_name = parameter_name;
  out.grid = grid;
  out.frame = frame;
  out.branches.resize(nb, n);
  out.overlaps.assign(static_cast<std::size_t>(n), 1.0);
  out.ambiguous.assign(static_cast<std::size_t>(n), 0);
  out.vectors.assign(static_cast<std::size_t>(n), CMatrix());

  CVector ref_values(nb);
  CMatrix ref_vectors(dim, nb);
  for (int i = 0; i < nb; ++i) {
    ref_values(i) = all_values[0](selected[static_cast<std::size_t>(i)]);
    ref_vectors.col(i) = all_vectors[0].col(selected[static_cast<std::size_t>(i)]);
  }
  out.branches.col(0) = ref_values;
  out.vectors[0] = ref_vectors;

  for (int k = 1; k < n; ++k) {
    const double w = options.weight >= 0.0 ? options.weight : adaptive_weight(ref_values);
    const TrackStep step = track_step(ref_values, ref_vectors, all_values[static_cast<std::size_t>(k)],
                                      all_vectors[static_cast<std::size_t>(k)], w);
    for (int i = 0; i < nb; ++i) {
      const int j = step.permutation[static_cast<std::size_t>(i)];
      ref_values(i) = all_values[static_cast<std::size_t>(k)](j);
      ref_vectors.col(i) = all_vectors[static_cast<std::size_t>(k)].col(j);
    }
    out.branches.col(k) = ref_values;
    out.vectors[static_cast<std::size_t>(k)] = ref_vectors;
    out.overlaps[static_cast<std::size_t>(k)] = step.min_overlap;
    out.ambiguous[static_cast<std::size_t>(k)] = step.ambiguous ? 1 : 0;
  }
  return out;
}

namespace {

struct Eval {
  double theta = 0.0;
  CVector values;
  CMatrix vectors;
  double metric = 0.0;
};

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }

 private:
  std::vector<int> parent_;
};

}  // namespace

std::vector<EPReport> detect_eps(const SweepResult& s, const ModelFn& model,
                                 const DetectOptions& options) {
  const int n = static_cast<int>(s.grid.size());
  const int nb = static_cast<int>(s.branches.rows());
  if (n < 2 || s.branches.cols() != n)
    throw std::invalid_argument("detect_eps: malformed sweep result");
  if (static_cast<int>(s.vectors.size()) != n)
    throw std::invalid_argument("detect_eps: sweep result lacks stored eigenvectors");
  if (!model) throw std::invalid_argument("detect_eps: model function is empty");
  if (options.gap_tol <= 0 || options.coalescence_tol <= 0 || options.target_width <= 0 ||
      options.max_evaluations < 8)
    throw std::invalid_argument("detect_eps: invalid thresholds");
  if (nb < 2) return {};

  std::vector<double> metric(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const CVector col = s.branches.col(k);
    metric[static_cast<std::size_t>(k)] = pair_metric(col, s.vectors[static_cast<std::size_t>(k)]);
  }

  // Candidate brackets: interior local minima (ties allowed) plus both ends;
  // the metric right at a degeneracy is rounding-limited, so the trend into a
  // boundary is refined regardless.
  std::vector<int> candidates;
  for (int k = 1; k + 1 < n; ++k) {
    if (metric[static_cast<std::size_t>(k)] <= metric[static_cast<std::size_t>(k) - 1] &&
        metric[static_cast<std::size_t>(k)] <= metric[static_cast<std::size_t>(k) + 1])
      candidates.push_back(k);
  }
  candidates.push_back(0);
  candidates.push_back(n - 1);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // A pair can only meet inside the bracket if its gap at the candidate is
  // comparable to how far the branch values move across the bracket (the
  // square-root cusp at a degeneracy is covered by the factor 4). Metric
  // jitter on near-degenerate spectra otherwise floods the refinement with
  // minima whose gaps could never close.
  const auto worth_refining = [&](int kc) {
    const int ia = std::max(0, kc - 1);
    const int ib = std::min(n - 1, kc + 1);
    std::vector<double> osc(static_cast<std::size_t>(nb));
    for (int i = 0; i < nb; ++i)
      osc[static_cast<std::size_t>(i)] =
          std::max(std::abs(s.branches(i, kc) - s.branches(i, ia)),
                   std::abs(s.branches(i, ib) - s.branches(i, kc)));
    for (int i = 0; i < nb; ++i)
      for (int j = i + 1; j < nb; ++j)
        if (std::abs(s.branches(i, kc) - s.branches(j, kc)) <=
            options.gap_tol + 4.0 * (osc[static_cast<std::size_t>(i)] +
                                     osc[static_cast<std::size_t>(j)]))
          return true;
    return false;
  };
  candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                  [&](int kc) { return !worth_refining(kc); }),
                   candidates.end());

  const double grid_lo = std::min(s.grid.front(), s.grid.back());
  const double grid_hi = std::max(s.grid.front(), s.grid.back());

  std::vector<EPReport> reports;
  for (int kc : candidates) {
    const int ia = std::max(0, kc - 1);
    const int ib = std::min(n - 1, kc + 1);
    double a = std::min(s.grid[static_cast<std::size_t>(ia)], s.grid[static_cast<std::size_t>(ib)]);
    double b = std::max(s.grid[static_cast<std::size_t>(ia)], s.grid[static_cast<std::size_t>(ib)]);

    // All refinement evaluations are matched against one fixed anchor point
    // of the swept trajectory; chaining evaluation-to-evaluation would let a
    // rounding-scrambled evaluation at the degeneracy poison the rest.
    const int anchor = kc > 0 ? kc - 1 : kc + 1;
    const CVector anchor_values = s.branches.col(anchor);
    const CMatrix& anchor_vectors = s.vectors[static_cast<std::size_t>(anchor)];
    const double w = adaptive_weight(anchor_values);

    std::vector<Eval> cache;
    cache.reserve(static_cast<std::size_t>(options.max_evaluations) + 4);
    const auto evaluate = [&](double theta) -> int {
      CVector values;
      CMatrix vectors;
      algebra::eig_right(model(theta), values, vectors);
      const TrackStep step = track_step(anchor_values, anchor_vectors, values, vectors, w);
      Eval e;
      e.theta = theta;
      e.values.resize(nb);
      e.vectors.resize(vectors.rows(), nb);
      for (int i = 0; i < nb; ++i) {
        const int j = step.permutation[static_cast<std::size_t>(i)];
        e.values(i) = values(j);
        e.vectors.col(i) = vectors.col(j);
      }
      e.metric = pair_metric(e.values, e.vectors);
      cache.push_back(std::move(e));
      return static_cast<int>(cache.size()) - 1;
    };

    int budget = options.max_evaluations;
    constexpr double kGolden = 0.6180339887498949;
    evaluate(a);
    evaluate(b);
    budget -= 2;
    // Seed the cache with the candidate point itself: a degeneracy sitting
    // exactly on the grid beats any bracketed evaluation by the square-root
    // cusp of the gap, and the argmin below must be able to return it.
    const double center = s.grid[static_cast<std::size_t>(kc)];
    if (center != a && center != b) {
      evaluate(center);
      --budget;
    }
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = cache[static_cast<std::size_t>(evaluate(x1))].metric;
    double f2 = cache[static_cast<std::size_t>(evaluate(x2))].metric;
    budget -= 2;
    while ((b - a) > options.target_width && budget > 0) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kGolden * (b - a);
        f1 = cache[static_cast<std::size_t>(evaluate(x1))].metric;
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGolden * (b - a);
        f2 = cache[static_cast<std::size_t>(evaluate(x2))].metric;
      }
      --budget;
    }
    const double width = b - a;

    int best = 0;
    for (int i = 1; i < static_cast<int>(cache.size()); ++i) {
      const Eval& e = cache[static_cast<std::size_t>(i)];
      const Eval& eb = cache[static_cast<std::size_t>(best)];
      if (e.metric < eb.metric || (e.metric == eb.metric && e.theta < eb.theta)) best = i;
    }
    const double theta_star = cache[static_cast<std::size_t>(best)].theta;

    // The exact degeneracy computes with a rounding-limited cluster, so the
    // certification measurements also probe one bracket width to each side.
    const double step_out = std::max(width, options.target_width);
    const int probe_lo = evaluate(std::max(theta_star - step_out, grid_lo));
    const int probe_hi = evaluate(std::min(theta_star + step_out, grid_hi));
    const Eval& e_star = cache[static_cast<std::size_t>(best)];
    const std::vector<const Eval*> probes{&e_star, &cache[static_cast<std::size_t>(probe_lo)],
                                          &cache[static_cast<std::size_t>(probe_hi)]};

    RMatrix gap = RMatrix::Constant(nb, nb, kInf);
    RMatrix coal = RMatrix::Constant(nb, nb, kInf);
    for (int i = 0; i < nb; ++i) {
      for (int j = i + 1; j < nb; ++j) {
        for (const Eval* e : probes) {
          gap(i, j) = std::min(gap(i, j), std::abs(e->values(i) - e->values(j)));
          coal(i, j) = std::min(coal(i, j), 1.0 - overlap_of(e->vectors, i, e->vectors, j));
        }
      }
    }

    UnionFind components(nb);
    for (int i = 0; i < nb; ++i)
      for (int j = i + 1; j < nb; ++j)
        if (gap(i, j) < options.gap_tol && coal(i, j) < options.coalescence_tol)
          components.unite(i, j);

    std::map<int, std::vector<int>> by_root;
    for (int i = 0; i < nb; ++i) by_root[components.find(i)].push_back(i);
    std::vector<std::vector<int>> cores;
    for (auto& [root, members] : by_root) {
      if (members.size() >= 2) cores.push_back(members);
    }
    if (cores.empty()) continue;

    // Only certified cores may merge into a larger group by eigenvalue
    // proximity; gluing lone branches in by value alone would promote plain
    // spectrum crossings (orthogonal vectors) into fake degeneracies.
    UnionFind core_groups(static_cast<int>(cores.size()));
    for (int ci = 0; ci < static_cast<int>(cores.size()); ++ci) {
      for (int cj = ci + 1; cj < static_cast<int>(cores.size()); ++cj) {
        double cross = kInf;
        for (int i : cores[static_cast<std::size_t>(ci)])
          for (int j : cores[static_cast<std::size_t>(cj)])
            cross = std::min(cross, gap(std::min(i, j), std::max(i, j)));
        if (cross < options.gap_tol) core_groups.unite(ci, cj);
      }
    }
    std::map<int, std::vector<int>> merged;
    for (int ci = 0; ci < static_cast<int>(cores.size()); ++ci) {
      auto& group = merged[core_groups.find(ci)];
      group.insert(group.end(), cores[static_cast<std::size_t>(ci)].begin(),
                   cores[static_cast<std::size_t>(ci)].end());
    }

    for (auto& [root, ids] : merged) {
      std::sort(ids.begin(), ids.end());
      EPReport r;
      r.location = theta_star;
      r.branch_ids = ids;
      r.order_estimate = static_cast<int>(ids.size());
      r.refinement_width = width;
      r.metric = e_star.metric;
      r.eigenvalue_gap = 0.0;
      r.vector_coalescence = 0.0;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
          r.eigenvalue_gap = std::max(r.eigenvalue_gap, gap(ids[i], ids[j]));
          r.vector_coalescence = std::max(r.vector_coalescence, coal(ids[i], ids[j]));
        }
      }
      r.branch_vectors.resize(e_star.vectors.rows(), static_cast<int>(ids.size()));
      for (std::size_t i = 0; i < ids.size(); ++i)
        r.branch_vectors.col(static_cast<int>(i)) = e_star.vectors.col(ids[i]);
      reports.push_back(std::move(r));
    }
  }

  // Several candidates can refine to the same degeneracy: keep the sharpest
  // report per branch set.
  std::map<std::vector<int>, EPReport> best_by_ids;
  for (EPReport& r : reports) {
    auto it = best_by_ids.find(r.branch_ids);
    if (it == best_by_ids.end() || r.metric < it->second.metric ||
        (r.metric == it->second.metric && r.location < it->second.location)) {
      best_by_ids[r.branch_ids] = std::move(r);
    }
  }
  std::vector<EPReport> out;
  out.reserve(best_by_ids.size());
  for (auto& [ids, r] : best_by_ids) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(), [](const EPReport& a, const EPReport& b) {
    if (a.location != b.location) return a.location < b.location;
    return a.branch_ids < b.branch_ids;
  });
  return out;
}

std::vector<double> reality_check(const SweepResult& s) {
  const int n = static_cast<int>(s.grid.size());
  if (s.branches.cols() != n) throw std::invalid_argument("reality_check: malformed sweep result");
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] = s.branches.col(k).imag().cwiseAbs().maxCoeff();
  return out;
}

}  // namespace ptframe::spectra
