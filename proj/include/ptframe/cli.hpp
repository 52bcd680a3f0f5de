#pragma once

#include <string>
#include <vector>

namespace ptframe::cli {

// Inclusive parameter interval expanded into `count` evenly spaced points.
struct Range {
  double start = 0.0;
  double stop = 1.0;
  int count = 2;
};

// One fully resolved command invocation. Values may come from built-in
// defaults, a JSON config file, or command-line flags (highest wins).
struct RunConfig {
  std::string command;
  std::string model = "h2";
  std::string frame = "both";  // if | ef | both
  std::string parameter;       // empty: model default (gamma_e or kappa)
  Range range;

  double omega = 1.0;
  double gamma_e = 1.0;
  double g = 1.0;
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double epsilon = 0.1;
  int n_max = 6;

  int figure = 1;
  std::string out = "-";
  std::string format = "csv";  // csv | json
  std::string h0 = "hidden";   // hidden | mode-a
  std::vector<double> times{0.5, 1.0, 2.0};

  // Negative values mean "use the detector defaults".
  double gap_tol = -1.0;
  double coalescence_tol = -1.0;
  double refine_width = -1.0;

  // Names of flags the user supplied explicitly (without leading dashes).
  std::vector<std::string> user_set;
};

// Runs one command given argv-style arguments (program name excluded).
// Exit codes: 0 success; 2 invalid arguments or configuration; 3 singular
// parameter point (supermode map breakdown); 4 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace ptframe::cli
