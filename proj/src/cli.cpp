#include "ptframe/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ptframe/algebra.hpp"
#include "ptframe/frames.hpp"
#include "ptframe/layout.hpp"
#include "ptframe/models.hpp"
#include "ptframe/spectra.hpp"
#include "ptframe/symmetry.hpp"
#include "ptframe/types.hpp"

namespace ptframe::cli {
namespace {

using nlohmann::ordered_json;

// 17 significant digits: enough to round-trip an IEEE double exactly.
std::string fmt17(double v) {
  std::array<char, 40> buf{};
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 16);
  return std::string(buf.data(), res.ptr);
}

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 2) throw std::invalid_argument("range: count must be at least 2");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    grid[static_cast<std::size_t>(k)] = start + (stop - start) * k / (count - 1);
  grid.back() = stop;
  return grid;
}

bool was_set(const RunConfig& cfg, const std::string& name) {
  return std::find(cfg.user_set.begin(), cfg.user_set.end(), name) != cfg.user_set.end();
}

std::string frame_key(Frame frame) { return frame == Frame::initial ? "if" : "ef"; }

std::vector<Frame> frames_of(const RunConfig& cfg) {
  if (cfg.frame == "if") return {Frame::initial};
  if (cfg.frame == "ef") return {Frame::equilibrium};
  if (cfg.frame == "both") return {Frame::initial, Frame::equilibrium};
  throw std::invalid_argument("--frame must be one of: if, ef, both");
}

std::string resolve_parameter(const RunConfig& cfg) {
  const auto pick = [&cfg](const char* fallback, std::initializer_list<const char*> allowed) {
    const std::string name = cfg.parameter.empty() ? fallback : cfg.parameter;
    for (const char* a : allowed)
      if (name == a) return name;
    std::string msg = "--param for model " + cfg.model + " must be one of:";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw std::invalid_argument(msg);
  };
  if (cfg.model == "h1") return pick("gamma_e", {"gamma_e", "omega"});
  if (cfg.model == "h2") return pick("kappa", {"kappa", "g"});
  if (cfg.model == "h3") return pick("kappa", {"kappa", "g", "epsilon"});
  throw std::invalid_argument("--model must be one of: h1, h2, h3");
}

// ---------------------------------------------------------------------------
// Model plumbing: closures mapping the swept parameter to a frame matrix.
// ---------------------------------------------------------------------------

struct FrameSetup {
  spectra::ModelFn fn;
  std::vector<Complex> targets;  // empty: follow the full spectrum
  std::string basis = "full";
  ordered_json branch_labels = ordered_json::array();
  RVector occupation_diag;  // empty when occupation has no meaning
};

FrameSetup make_setup(const RunConfig& cfg, const std::string& param, Frame frame, double theta0,
                      bool tracked) {
  FrameSetup setup;
  if (cfg.model == "h1") {
    const double omega = cfg.omega;
    const double gamma_e = cfg.gamma_e;
    setup.fn = [=](double theta) {
      models::H1Params p;
      p.omega = param == "omega" ? theta : omega;
      p.gamma_e = param == "gamma_e" ? theta : gamma_e;
      const models::ModelSystem sys = models::build_h1(p);
      return frame == Frame::initial ? sys.H : sys.H_pt;
    };
    setup.branch_labels.push_back(0);
    setup.branch_labels.push_back(1);
    return setup;
  }

  if (cfg.model != "h2" && cfg.model != "h3")
    throw std::invalid_argument("--model must be one of: h1, h2, h3");
  const bool driven = cfg.model == "h3";
  const double g0 = cfg.g;
  const double gamma0 = 0.5 * (cfg.gamma_a + cfg.gamma_b);
  const double kappa0 = 0.5 * (cfg.gamma_a - cfg.gamma_b);
  const double epsilon0 = cfg.epsilon;
  const int n_max = cfg.n_max;

  const auto h2_of = [=](double theta) {
    models::H2Params p;
    p.g = param == "g" ? theta : g0;
    const double kappa = param == "kappa" ? theta : kappa0;
    p.gamma_a = gamma0 + kappa;
    p.gamma_b = gamma0 - kappa;
    p.n_max = n_max;
    return p;
  };
  const auto h3_of = [=](double theta) {
    models::H3Params p;
    p.g = param == "g" ? theta : g0;
    const double kappa = param == "kappa" ? theta : kappa0;
    p.gamma_a = gamma0 + kappa;
    p.gamma_b = gamma0 - kappa;
    p.epsilon = param == "epsilon" ? theta : epsilon0;
    p.n_max = n_max;
    return p;
  };

  const SpaceLayout layout = SpaceLayout::bosonic_modes(2, n_max);
  if (!driven && frame == Frame::equilibrium) {
    // The equilibrium-frame generator commutes with total occupation and its
    // spectrum repeats identically across occupation sectors; tracking runs
    // on the complete low-occupation block where pairings stay well defined.
    const std::vector<int> block = low_occupation_indices(layout, 2);
    setup.fn = [=](double theta) {
      return algebra::submatrix(models::build_h2(h2_of(theta)).H_pt, block);
    };
    setup.basis = "total occupation <= 2 block";
    setup.occupation_diag.resize(static_cast<int>(block.size()));
    for (std::size_t i = 0; i < block.size(); ++i)
      setup.occupation_diag(static_cast<int>(i)) = layout.total_occupation(block[i]);
  } else {
    if (driven) {
      setup.fn = [=](double theta) {
        const models::ModelSystem sys = models::build_h3(h3_of(theta));
        return frame == Frame::initial ? sys.H : sys.H_pt;
      };
    } else {
      setup.fn = [=](double theta) { return models::build_h2(h2_of(theta)).H; };
    }
    setup.occupation_diag.resize(layout.dim());
    for (int i = 0; i < layout.dim(); ++i) setup.occupation_diag(i) = layout.total_occupation(i);
  }

  if (tracked) {
    setup.targets = driven ? models::analytic_eigs_h3(h3_of(theta0), frame)
                           : models::analytic_eigs_h2(h2_of(theta0), frame);
    for (const auto& [nc, nd] : models::tracked_pairs())
      setup.branch_labels.push_back(ordered_json::array({nc, nd}));
  }
  return setup;
}

ordered_json params_json(const RunConfig& cfg) {
  ordered_json p;
  if (cfg.model == "h1") {
    p["omega"] = cfg.omega;
    p["gamma_e"] = cfg.gamma_e;
    return p;
  }
  p["g"] = cfg.g;
  p["gamma_a"] = cfg.gamma_a;
  p["gamma_b"] = cfg.gamma_b;
  p["kappa"] = 0.5 * (cfg.gamma_a - cfg.gamma_b);
  p["gamma"] = 0.5 * (cfg.gamma_a + cfg.gamma_b);
  if (cfg.model == "h3") p["epsilon"] = cfg.epsilon;
  p["n_max"] = cfg.n_max;
  return p;
}

// ---------------------------------------------------------------------------
// Output plumbing.
// ---------------------------------------------------------------------------

void write_text(const std::string& out, const std::string& text) {
  if (out == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw std::invalid_argument("cannot open output file: " + out);
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("failed writing output file: " + out);
}

// CSV sidecars carry the run description that does not fit in a flat table.
void write_sidecar(const RunConfig& cfg, const ordered_json& meta) {
  if (cfg.out == "-" || cfg.format != "csv") return;
  write_text(cfg.out + ".meta.json", meta.dump(2) + "\n");
}

struct ValueBlock {
  std::string prefix;        // column prefix, e.g. "if"
  const CMatrix* values;     // branches x points
};

std::string csv_table(const std::string& param, const std::vector<double>& grid,
                      const std::vector<ValueBlock>& blocks) {
  std::ostringstream os;
  os << param;
  for (const ValueBlock& b : blocks)
    for (int i = 0; i < b.values->rows(); ++i)
      os << ',' << b.prefix << "_re_" << i << ',' << b.prefix << "_im_" << i;
  os << '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    os << fmt17(grid[k]);
    for (const ValueBlock& b : blocks) {
      for (int i = 0; i < b.values->rows(); ++i) {
        const Complex v = (*b.values)(i, static_cast<int>(k));
        os << ',' << fmt17(v.real()) << ',' << fmt17(v.imag());
      }
    }
    os << '\n';
  }
  return os.str();
}

ordered_json values_json(const CMatrix& values) {
  ordered_json re = ordered_json::array();
  ordered_json im = ordered_json::array();
  for (int i = 0; i < values.rows(); ++i) {
    ordered_json row_re = ordered_json::array();
    ordered_json row_im = ordered_json::array();
    for (int k = 0; k < values.cols(); ++k) {
      row_re.push_back(values(i, k).real());
      row_im.push_back(values(i, k).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  return ordered_json{{"re", std::move(re)}, {"im", std::move(im)}};
}

ordered_json report_json(const spectra::EPReport& r, const std::string& key,
                         const RVector& occupation_diag) {
  ordered_json j;
  j["frame"] = key;
  j["location"] = r.location;
  j["branch_ids"] = r.branch_ids;
  j["order_estimate"] = r.order_estimate;
  j["eigenvalue_gap"] = r.eigenvalue_gap;
  j["vector_coalescence"] = r.vector_coalescence;
  j["refinement_width"] = r.refinement_width;
  j["metric"] = r.metric;
  if (occupation_diag.size() == r.branch_vectors.rows() && r.branch_vectors.cols() > 0) {
    double mean = 0.0;
    for (int c = 0; c < r.branch_vectors.cols(); ++c)
      mean += (r.branch_vectors.col(c).cwiseAbs2().array() * occupation_diag.array()).sum();
    j["mean_occupation"] = mean / r.branch_vectors.cols();
  }
  return j;
}

spectra::DetectOptions detect_options(const RunConfig& cfg, double default_gap_tol) {
  spectra::DetectOptions opt;
  opt.gap_tol = cfg.gap_tol >= 0 ? cfg.gap_tol : default_gap_tol;
  if (cfg.coalescence_tol >= 0) opt.coalescence_tol = cfg.coalescence_tol;
  if (cfg.refine_width >= 0) opt.target_width = cfg.refine_width;
  return opt;
}

// ---------------------------------------------------------------------------
// sweep / ep-find
// ---------------------------------------------------------------------------

struct FrameSweep {
  Frame frame;
  FrameSetup setup;
  spectra::SweepResult result;
};

std::vector<FrameSweep> run_sweeps(const RunConfig& cfg, const std::string& param,
                                   const std::vector<double>& grid, bool tracked) {
  std::vector<FrameSweep> sweeps;
  for (Frame frame : frames_of(cfg)) {
    FrameSweep fs;
    fs.frame = frame;
    fs.setup = make_setup(cfg, param, frame, grid.front(), tracked);
    spectra::SweepOptions opt;
    opt.targets = fs.setup.targets;
    fs.result = spectra::sweep(fs.setup.fn, param, grid, frame, opt);
    sweeps.push_back(std::move(fs));
  }
  return sweeps;
}

ordered_json sweep_meta(const RunConfig& cfg, const std::string& param,
                        const std::vector<double>& grid, const std::vector<FrameSweep>& sweeps) {
  ordered_json meta;
  meta["command"] = cfg.command;
  meta["model"] = cfg.model;
  meta["parameter"] = param;
  meta["range"] = {{"start", grid.front()}, {"stop", grid.back()},
                   {"count", static_cast<int>(grid.size())}};
  meta["params"] = params_json(cfg);
  ordered_json frames;
  for (const FrameSweep& fs : sweeps) {
    ordered_json f;
    f["basis"] = fs.setup.basis;
    f["dim"] = fs.result.vectors.empty() ? 0 : static_cast<int>(fs.result.vectors[0].rows());
    f["branch_count"] = static_cast<int>(fs.result.branches.rows());
    if (!fs.setup.branch_labels.empty()) f["branch_labels"] = fs.setup.branch_labels;
    if (!fs.setup.targets.empty()) {
      ordered_json t = ordered_json::array();
      for (const Complex& z : fs.setup.targets) t.push_back(ordered_json::array({z.real(), z.imag()}));
      f["targets_at_start"] = std::move(t);
    }
    int ambiguous_points = 0;
    double min_overlap = 1.0;
    for (char a : fs.result.ambiguous) ambiguous_points += a ? 1 : 0;
    for (double o : fs.result.overlaps) min_overlap = std::min(min_overlap, o);
    f["ambiguous_points"] = ambiguous_points;
    f["min_step_overlap"] = min_overlap;
    frames[frame_key(fs.frame)] = std::move(f);
  }
  meta["frames"] = std::move(frames);
  return meta;
}

int cmd_sweep(const RunConfig& cfg) {
  const std::string param = resolve_parameter(cfg);
  const std::vector<double> grid = linspace(cfg.range.start, cfg.range.stop, cfg.range.count);
  const std::vector<FrameSweep> sweeps = run_sweeps(cfg, param, grid, false);
  ordered_json meta = sweep_meta(cfg, param, grid, sweeps);
  if (cfg.format == "json") {
    meta["grid"] = grid;
    for (const FrameSweep& fs : sweeps)
      meta["frames"][frame_key(fs.frame)]["values"] = values_json(fs.result.branches);
    write_text(cfg.out, meta.dump(2) + "\n");
    return 0;
  }
  if (cfg.format != "csv") throw std::invalid_argument("--format must be csv or json");
  std::vector<ValueBlock> blocks;
  for (const FrameSweep& fs : sweeps) blocks.push_back({frame_key(fs.frame), &fs.result.branches});
  write_text(cfg.out, csv_table(param, grid, blocks));
  write_sidecar(cfg, meta);
  return 0;
}

int cmd_ep_find(const RunConfig& cfg) {
  const std::string param = resolve_parameter(cfg);
  const std::vector<double> grid = linspace(cfg.range.start, cfg.range.stop, cfg.range.count);
  const std::vector<FrameSweep> sweeps = run_sweeps(cfg, param, grid, true);
  const spectra::DetectOptions opt = detect_options(cfg, spectra::DetectOptions{}.gap_tol);

  ordered_json meta = sweep_meta(cfg, param, grid, sweeps);
  meta["thresholds"] = {{"gap_tol", opt.gap_tol},
                        {"coalescence_tol", opt.coalescence_tol},
                        {"refine_width", opt.target_width}};
  ordered_json reports = ordered_json::array();
  std::ostringstream csv;
  csv << "frame,location,branch_ids,eigenvalue_gap,vector_coalescence,order_estimate,"
         "refinement_width,metric\n";
  for (const FrameSweep& fs : sweeps) {
    const std::vector<spectra::EPReport> found =
        spectra::detect_eps(fs.result, fs.setup.fn, opt);
    for (const spectra::EPReport& r : found) {
      reports.push_back(report_json(r, frame_key(fs.frame), fs.setup.occupation_diag));
      csv << frame_key(fs.frame) << ',' << fmt17(r.location) << ',';
      for (std::size_t i = 0; i < r.branch_ids.size(); ++i)
        csv << (i ? "|" : "") << r.branch_ids[i];
      csv << ',' << fmt17(r.eigenvalue_gap) << ',' << fmt17(r.vector_coalescence) << ','
          << r.order_estimate << ',' << fmt17(r.refinement_width) << ',' << fmt17(r.metric)
          << '\n';
    }
  }
  meta["reports"] = std::move(reports);
  if (cfg.format == "json") {
    write_text(cfg.out, meta.dump(2) + "\n");
    return 0;
  }
  if (cfg.format != "csv") throw std::invalid_argument("--format must be csv or json");
  write_text(cfg.out, csv.str());
  write_sidecar(cfg, meta);
  return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

std::vector<CVector> seeded_states(int dim, int count, const std::vector<int>& support) {
  std::mt19937_64 rng(0x746f6f6c6b6974ULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<CVector> states;
  states.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    CVector v = CVector::Zero(dim);
    if (support.empty()) {
      for (int i = 0; i < dim; ++i) v(i) = Complex(nd(rng), nd(rng));
    } else {
      for (int i : support) v(i) = Complex(nd(rng), nd(rng));
    }
    v /= v.norm();
    states.push_back(std::move(v));
  }
  return states;
}

int cmd_check(const RunConfig& cfg) {
  RunConfig eff = cfg;
  // The driven model needs headroom above the measured block: a deeper
  // default cutoff unless the user pinned one.
  if (cfg.model == "h3" && !was_set(cfg, "n-max")) eff.n_max = 12;

  models::ModelSystem sys;
  if (eff.model == "h1") {
    sys = models::build_h1({eff.omega, eff.gamma_e});
  } else if (eff.model == "h2") {
    models::H2Params p;
    p.g = eff.g;
    p.gamma_a = eff.gamma_a;
    p.gamma_b = eff.gamma_b;
    p.n_max = eff.n_max;
    sys = models::build_h2(p);
  } else if (eff.model == "h3") {
    models::H3Params p;
    p.g = eff.g;
    p.gamma_a = eff.gamma_a;
    p.gamma_b = eff.gamma_b;
    p.epsilon = eff.epsilon;
    p.n_max = eff.n_max;
    sys = models::build_h3(p);
  } else {
    throw std::invalid_argument("--model must be one of: h1, h2, h3");
  }

  CMatrix h_pt;
  CMatrix h0;
  if (eff.h0 == "hidden") {
    h_pt = sys.H_pt;
    h0 = sys.H0;
  } else if (eff.h0 == "mode-a") {
    // Naive split: drift = bare loss of the decaying subsystem alone.
    if (eff.model == "h1") {
      h0 = -kI * eff.gamma_e *
           algebra::qubit_op(sys.layout, 0, algebra::QubitLevel::e, algebra::QubitLevel::e);
    } else {
      h0 = -kI * eff.gamma_a * algebra::number(sys.layout, 0);
    }
    h_pt = sys.H - h0;
  } else {
    throw std::invalid_argument("--h0 must be hidden or mode-a");
  }

  // For the driven model the split identities hold exactly only away from
  // the truncation boundary: commutator defects are confined to products of
  // two ladder operators (margin 2), while the frame map spreads them
  // further inward (margin 6).
  std::vector<int> commutator_interior;
  std::vector<int> drift_interior;
  if (eff.model == "h3") {
    const int commutator_margin = std::max(0, std::min(2, eff.n_max - 2));
    const int drift_margin = std::max(0, std::min(6, eff.n_max - 2));
    commutator_interior = low_occupation_indices(sys.layout, eff.n_max - commutator_margin);
    drift_interior = low_occupation_indices(sys.layout, eff.n_max - drift_margin);
  }
  const frames::Decomposition d =
      frames::check_decomposition(sys.H, h_pt, h0, sys.parity, commutator_interior);
  const bool cert = frames::certified(d);
  const algebra::EigResult full = algebra::eig(sys.H);

  ordered_json out;
  out["command"] = "check";
  out["model"] = eff.model;
  out["h0"] = eff.h0;
  {
    RunConfig stamped = eff;
    out["params"] = params_json(stamped);
  }
  out["pt_residual"] = d.pt_residual;
  out["pt_residual_generator"] = symmetry::pt_residual(sys.H, sys.parity).residual;
  out["sum_residual"] = d.sum_residual;
  out["commutator_residual"] = d.commutator_residual;
  out["hidden_pt_certified"] = cert;
  out["condition_estimate"] = full.condition_estimate;

  std::vector<int> support;
  if (eff.model == "h3") {
    support = low_occupation_indices(sys.layout, 2);
    out["interior_margins"] = ordered_json{{"commutator", 2}, {"drift", 6}};
  }
  const std::vector<CVector> states =
      seeded_states(static_cast<int>(sys.H.rows()), 20, support);

  ordered_json checks = ordered_json::array();
  for (double t : eff.times) {
    ordered_json c;
    c["time"] = t;
    try {
      const frames::FrameCheck fc = frames::ef_drift(d, t, states, drift_interior);
      c["drift"] = fc.drift;
      c["evolution_gap"] = fc.evolution_gap;
    } catch (const std::exception& e) {
      c["error"] = e.what();
    }
    checks.push_back(std::move(c));
  }
  out["frame_checks"] = std::move(checks);

  try {
    const std::vector<frames::SumCheckEntry> entries = frames::eigenvalue_sum_check(d);
    double max_gap = 0.0;
    for (const auto& e : entries) max_gap = std::max(max_gap, e.gap);
    ordered_json sc;
    sc["pairs"] = static_cast<int>(entries.size());
    sc["max_gap"] = max_gap;
    if (eff.model == "h3") {
      // Pairs anchored on the truncation boundary straddle the cutoff and
      // carry artefacts; measure the interior separately.
      std::vector<char> boundary(static_cast<std::size_t>(sys.layout.dim()), 0);
      for (int i = 0; i < sys.layout.dim(); ++i)
        if (sys.layout.local_index(0, i) >= eff.n_max - 1 ||
            sys.layout.local_index(1, i) >= eff.n_max - 1)
          boundary[static_cast<std::size_t>(i)] = 1;
      double max_gap_interior = 0.0;
      int interior_pairs = 0;
      for (std::size_t c = 0; c < entries.size(); ++c) {
        double weight = 0.0;
        for (int i = 0; i < sys.layout.dim(); ++i)
          if (boundary[static_cast<std::size_t>(i)])
            weight += std::norm(full.right_vectors(i, static_cast<int>(c)));
        if (weight <= 1e-6) {
          ++interior_pairs;
          max_gap_interior = std::max(max_gap_interior, entries[c].gap);
        }
      }
      sc["interior_pairs"] = interior_pairs;
      sc["max_gap_interior"] = max_gap_interior;
    }
    out["eigenvalue_sum"] = std::move(sc);
  } catch (const std::exception& e) {
    out["eigenvalue_sum"] = ordered_json{{"error", e.what()}};
  }

  write_text(cfg.out, out.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// figure
// ---------------------------------------------------------------------------

struct FigurePass {
  std::string name;
  std::vector<double> grid;
  std::vector<FrameSweep> sweeps;
  std::vector<std::pair<std::string, spectra::EPReport>> reports;  // frame key, report
};

FigurePass run_figure_pass(const RunConfig& cfg, const std::string& name,
                           const std::vector<double>& grid, bool tracked,
                           const spectra::DetectOptions& opt) {
  FigurePass pass;
  pass.name = name;
  pass.grid = grid;
  pass.sweeps = run_sweeps(cfg, resolve_parameter(cfg), grid, tracked);
  for (const FrameSweep& fs : pass.sweeps) {
    for (spectra::EPReport& r : spectra::detect_eps(fs.result, fs.setup.fn, opt))
      pass.reports.emplace_back(frame_key(fs.frame), std::move(r));
  }
  return pass;
}

ordered_json figure_meta(const RunConfig& cfg, int figure, const std::vector<FigurePass>& passes,
                         const spectra::DetectOptions& opt) {
  ordered_json meta;
  meta["command"] = "figure";
  meta["figure"] = figure;
  meta["model"] = cfg.model;
  meta["parameter"] = resolve_parameter(cfg);
  meta["params"] = params_json(cfg);
  meta["thresholds"] = {{"gap_tol", opt.gap_tol},
                        {"coalescence_tol", opt.coalescence_tol},
                        {"refine_width", opt.target_width}};
  ordered_json passes_json = ordered_json::array();
  ordered_json reports = ordered_json::array();
  for (const FigurePass& pass : passes) {
    ordered_json pj;
    pj["name"] = pass.name;
    pj["start"] = pass.grid.front();
    pj["stop"] = pass.grid.back();
    pj["count"] = static_cast<int>(pass.grid.size());
    ordered_json frames;
    for (const FrameSweep& fs : pass.sweeps) {
      ordered_json f;
      f["basis"] = fs.setup.basis;
      f["branch_count"] = static_cast<int>(fs.result.branches.rows());
      if (!fs.setup.branch_labels.empty()) f["branch_labels"] = fs.setup.branch_labels;
      frames[frame_key(fs.frame)] = std::move(f);
    }
    pj["frames"] = std::move(frames);
    passes_json.push_back(std::move(pj));
    for (const auto& [key, r] : pass.reports) {
      const FrameSweep* fs = nullptr;
      for (const FrameSweep& cand : pass.sweeps)
        if (frame_key(cand.frame) == key) fs = &cand;
      ordered_json rj = report_json(r, key, fs ? fs->setup.occupation_diag : RVector());
      rj["pass"] = pass.name;
      reports.push_back(std::move(rj));
    }
  }
  meta["passes"] = std::move(passes_json);
  meta["reports"] = std::move(reports);
  return meta;
}

// Writes one CSV row block per stitched grid, with frame-prefixed columns.
void write_figure_output(const RunConfig& cfg, const std::string& param,
                         const std::vector<double>& grid,
                         const std::vector<std::pair<std::string, CMatrix>>& blocks,
                         ordered_json meta) {
  if (cfg.format == "json") {
    meta["grid"] = grid;
    for (const auto& [key, values] : blocks) meta["values"][key] = values_json(values);
    write_text(cfg.out, meta.dump(2) + "\n");
    return;
  }
  if (cfg.format != "csv") throw std::invalid_argument("--format must be csv or json");
  std::vector<ValueBlock> view;
  for (const auto& [key, values] : blocks) view.push_back({key, &values});
  write_text(cfg.out, csv_table(param, grid, view));
  write_sidecar(cfg, meta);
}

int cmd_figure(const RunConfig& cfg) {
  if (cfg.figure == 1) {
    RunConfig eff = cfg;
    eff.model = "h1";
    eff.parameter = "gamma_e";
    const spectra::DetectOptions opt = detect_options(eff, spectra::DetectOptions{}.gap_tol);
    std::vector<FigurePass> passes;
    passes.push_back(run_figure_pass(eff, "main", linspace(0.0, 4.0, 401), false, opt));
    std::vector<std::pair<std::string, CMatrix>> blocks;
    for (const FrameSweep& fs : passes[0].sweeps)
      blocks.emplace_back(frame_key(fs.frame), fs.result.branches);
    write_figure_output(eff, "gamma_e", passes[0].grid, blocks,
                        figure_meta(eff, 1, passes, opt));
    return 0;
  }

  if (cfg.figure == 2 || cfg.figure == 3) {
    RunConfig eff = cfg;
    eff.model = cfg.figure == 2 ? "h2" : "h3";
    eff.parameter = "kappa";
    const bool rates_set = was_set(cfg, "gamma-a") || was_set(cfg, "gamma-b");
    const double gamma_default = cfg.figure == 2 ? 0.3 : 0.1;
    if (!rates_set) {
      eff.gamma_a = gamma_default;
      eff.gamma_b = gamma_default;
    }
    if (!was_set(cfg, "n-max")) eff.n_max = cfg.figure == 2 ? 6 : 12;
    if (cfg.figure == 3 && !was_set(cfg, "epsilon")) eff.epsilon = 0.1;
    // Degeneracies here sit on rounding-limited Jordan clusters; the spacing
    // threshold is opened up accordingly (still far below branch spacing).
    const spectra::DetectOptions opt = detect_options(eff, 1e-3);

    std::vector<FigurePass> passes;
    if (cfg.figure == 2) {
      // Two passes meeting at the degeneracy: tracking through it would
      // re-pair branches arbitrarily inside the rounding cluster.
      passes.push_back(run_figure_pass(eff, "left", linspace(0.0, 1.0 * eff.g, 201), true, opt));
      passes.push_back(
          run_figure_pass(eff, "right", linspace(2.0 * eff.g, 1.005 * eff.g, 200), true, opt));
    } else {
      // The supermode map turns singular at |kappa| = g, and well before
      // that the displaced-mode amplitude epsilon/lambda outgrows any fixed
      // occupation cutoff; stop where the default cutoff is still converged.
      passes.push_back(
          run_figure_pass(eff, "main", linspace(0.0, 0.9 * eff.g, 181), true, opt));
    }

    // Stitch passes into one ascending table.
    std::vector<double> grid;
    for (double x : passes[0].grid) grid.push_back(x);
    if (passes.size() > 1)
      for (auto it = passes[1].grid.rbegin(); it != passes[1].grid.rend(); ++it)
        grid.push_back(*it);
    std::vector<std::pair<std::string, CMatrix>> blocks;
    for (std::size_t s = 0; s < passes[0].sweeps.size(); ++s) {
      const CMatrix& left = passes[0].sweeps[s].result.branches;
      CMatrix stitched(left.rows(), static_cast<int>(grid.size()));
      stitched.leftCols(left.cols()) = left;
      if (passes.size() > 1) {
        const CMatrix& right = passes[1].sweeps[s].result.branches;
        stitched.rightCols(right.cols()) = right.rowwise().reverse();
      }
      blocks.emplace_back(frame_key(passes[0].sweeps[s].frame), std::move(stitched));
    }
    ordered_json meta = figure_meta(eff, cfg.figure, passes, opt);
    if (cfg.figure == 3)
      meta["note"] =
          "kappa range stops at 0.9 g: the displaced-mode amplitude epsilon/lambda "
          "diverges toward the spectral singularity at |kappa| = g and the occupation "
          "cutoff no longer converges there";
    write_figure_output(eff, "kappa", grid, blocks, std::move(meta));
    return 0;
  }
  throw std::invalid_argument("figure number must be 1, 2, or 3");
}

// ---------------------------------------------------------------------------
// Argument and config-file handling.
// ---------------------------------------------------------------------------

Range parse_range(const std::string& text) {
  const auto bad = [&text]() {
    return std::invalid_argument("--range must be start:stop:count, got '" + text + "'");
  };
  const std::size_t c1 = text.find(':');
  const std::size_t c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw bad();
  Range r;
  try {
    std::size_t used = 0;
    const std::string s0 = text.substr(0, c1);
    const std::string s1 = text.substr(c1 + 1, c2 - c1 - 1);
    const std::string s2 = text.substr(c2 + 1);
    r.start = std::stod(s0, &used);
    if (used != s0.size()) throw bad();
    r.stop = std::stod(s1, &used);
    if (used != s1.size()) throw bad();
    r.count = std::stoi(s2, &used);
    if (used != s2.size()) throw bad();
  } catch (const std::invalid_argument&) {
    throw bad();
  } catch (const std::out_of_range&) {
    throw bad();
  }
  return r;
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  ordered_json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "model") cfg.model = value.get<std::string>();
      else if (key == "frame") cfg.frame = value.get<std::string>();
      else if (key == "param" || key == "parameter") cfg.parameter = value.get<std::string>();
      else if (key == "range") {
        if (value.is_string()) {
          cfg.range = parse_range(value.get<std::string>());
        } else if (value.is_array() && value.size() == 3) {
          cfg.range = {value[0].get<double>(), value[1].get<double>(), value[2].get<int>()};
        } else {
          cfg.range = {value.at("start").get<double>(), value.at("stop").get<double>(),
                       value.at("count").get<int>()};
        }
      } else if (key == "omega") cfg.omega = value.get<double>();
      else if (key == "gamma-e") cfg.gamma_e = value.get<double>();
      else if (key == "g") cfg.g = value.get<double>();
      else if (key == "gamma-a") cfg.gamma_a = value.get<double>();
      else if (key == "gamma-b") cfg.gamma_b = value.get<double>();
      else if (key == "epsilon") cfg.epsilon = value.get<double>();
      else if (key == "n-max") cfg.n_max = value.get<int>();
      else if (key == "figure") cfg.figure = value.get<int>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "format") cfg.format = value.get<std::string>();
      else if (key == "h0") cfg.h0 = value.get<std::string>();
      else if (key == "times") cfg.times = value.get<std::vector<double>>();
      else if (key == "gap-tol") cfg.gap_tol = value.get<double>();
      else if (key == "coal-tol") cfg.coalescence_tol = value.get<double>();
      else if (key == "refine-width") cfg.refine_width = value.get<double>();
      else throw std::invalid_argument("config file " + path + ": unknown key '" + key + "'");
      cfg.user_set.push_back(key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

void preload_config(const std::vector<std::string>& args, RunConfig& cfg) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (!path.empty()) apply_config_file(path, cfg);
}

}  // namespace

int run(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Toolkit for hidden parity-time symmetry of lossy few-mode systems"};
  app.name("ptframe");
  try {
    preload_config(args, cfg);

    std::string config_sink;
    std::string range_text;
    const auto add_common = [&](CLI::App* cmd, bool with_model) {
      if (with_model) cmd->add_option("--model,-m", cfg.model, "Model: h1 | h2 | h3");
      cmd->add_option("--omega", cfg.omega, "Qubit drive amplitude (h1)");
      cmd->add_option("--gamma-e", cfg.gamma_e, "Qubit decay rate (h1)");
      cmd->add_option("--g", cfg.g, "Inter-mode coupling (h2, h3)");
      cmd->add_option("--gamma-a", cfg.gamma_a, "Mode-a loss rate (h2, h3)");
      cmd->add_option("--gamma-b", cfg.gamma_b, "Mode-b loss rate (h2, h3)");
      cmd->add_option("--epsilon", cfg.epsilon, "Coherent drive amplitude (h3)");
      cmd->add_option("--n-max", cfg.n_max, "Per-mode occupation cutoff");
      cmd->add_option("--out,-o", cfg.out, "Output path, '-' for stdout");
      cmd->add_option("--format", cfg.format, "Output format: csv | json");
      cmd->add_option("--config", config_sink, "JSON file with option defaults");
    };
    const auto add_thresholds = [&](CLI::App* cmd) {
      cmd->add_option("--gap-tol", cfg.gap_tol, "Eigenvalue gap threshold for degeneracy");
      cmd->add_option("--coal-tol", cfg.coalescence_tol, "Eigenvector coalescence threshold");
      cmd->add_option("--refine-width", cfg.refine_width, "Target bracket width for refinement");
    };

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Track eigenvalue branches over a parameter range");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--frame", cfg.frame, "Frame: if | ef | both");
    sweep_cmd->add_option("--param", cfg.parameter, "Swept parameter name");
    sweep_cmd->add_option("--range", range_text, "Sweep range start:stop:count");

    CLI::App* ep_cmd = app.add_subcommand("ep-find", "Locate and certify spectral degeneracies");
    add_common(ep_cmd, true);
    ep_cmd->add_option("--frame", cfg.frame, "Frame: if | ef | both");
    ep_cmd->add_option("--param", cfg.parameter, "Swept parameter name");
    ep_cmd->add_option("--range", range_text, "Sweep range start:stop:count");
    add_thresholds(ep_cmd);

    CLI::App* check_cmd =
        app.add_subcommand("check", "Verify the symmetric/drift split and frame identities");
    add_common(check_cmd, true);
    check_cmd->add_option("--h0", cfg.h0, "Drift choice: hidden | mode-a");
    check_cmd->add_option("--times", cfg.times, "Frame check times")->delimiter(',');

    CLI::App* figure_cmd =
        app.add_subcommand("figure", "Render one of the reference spectra datasets");
    figure_cmd->add_option("n", cfg.figure, "Figure number")->required()->check(CLI::Range(1, 3));
    add_common(figure_cmd, false);
    figure_cmd->add_option("--frame", cfg.frame, "Frame: if | ef | both");
    add_thresholds(figure_cmd);

    app.require_subcommand(1);

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("ptframe");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());

    CLI::App* chosen = app.get_subcommands().front();
    for (const CLI::Option* opt : chosen->get_options()) {
      if (opt->count() == 0) continue;
      std::string name = opt->get_name();
      while (!name.empty() && name.front() == '-') name.erase(name.begin());
      cfg.user_set.push_back(name);
    }
    if (!range_text.empty()) cfg.range = parse_range(range_text);
    // Required, but satisfiable from the config file as well as the flag.
    if ((chosen == sweep_cmd || chosen == ep_cmd) && range_text.empty() &&
        std::find(cfg.user_set.begin(), cfg.user_set.end(), "range") == cfg.user_set.end())
      throw std::invalid_argument("--range is required (set the flag or a config file key)");

    if (chosen == sweep_cmd) {
      cfg.command = "sweep";
      return cmd_sweep(cfg);
    }
    if (chosen == ep_cmd) {
      cfg.command = "ep-find";
      return cmd_ep_find(cfg);
    }
    if (chosen == check_cmd) {
      cfg.command = "check";
      return cmd_check(cfg);
    }
    cfg.command = "figure";
    return cmd_figure(cfg);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const singular_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace ptframe::cli
