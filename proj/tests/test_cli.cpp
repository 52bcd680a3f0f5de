#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptframe/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Unique scratch file that cleans up after the test.
class TempPath {
 public:
  explicit TempPath(const std::string& stem) {
    path_ = (fs::temp_directory_path() / ("ptframe_test_" + stem)).string();
    std::remove(path_.c_str());
    std::remove((path_ + ".meta.json").c_str());
  }
  ~TempPath() {
    std::remove(path_.c_str());
    std::remove((path_ + ".meta.json").c_str());
  }
  const std::string& str() const { return path_; }

 private:
  std::string path_;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string item;
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST_CASE("process exit codes") {
  CHECK(ptframe::cli::run({"--help"}) == 0);
  CHECK(ptframe::cli::run({}) == 2);                          // a subcommand is required
  CHECK(ptframe::cli::run({"sweep", "--bogus"}) == 2);        // unknown flag
  CHECK(ptframe::cli::run({"figure", "4"}) == 2);             // out of range
  CHECK(ptframe::cli::run({"sweep", "--model", "h1", "--param", "gamma_e",
                           "--range", "0:1:0"}) == 2);        // empty grid
  CHECK(ptframe::cli::run({"sweep", "--model", "h2", "--param", "nonsense",
                           "--range", "0:1:4"}) == 2);
  // Sweeping the driven model across its singular imbalance is a distinct failure.
  CHECK(ptframe::cli::run({"sweep", "--model", "h3", "--param", "kappa",
                           "--range", "0:1.2:4", "--n-max", "2"}) == 3);
}

TEST_CASE("sweep writes a parseable table that round-trips the values") {
  TempPath out("sweep.csv");
  const int code =
      ptframe::cli::run({"sweep", "--model", "h1", "--param", "gamma_e",
                         "--range", "0:1:5", "--out", out.str()});
  REQUIRE(code == 0);

  std::istringstream table(slurp(out.str()));
  std::string line;
  REQUIRE(std::getline(table, line));
  const std::vector<std::string> header = split(line, ',');
  REQUIRE(header.size() == 9);  // parameter + 2 branches x (re, im) x 2 frames
  CHECK(header[0] == "gamma_e");
  CHECK(header[1] == "if_re_0");
  CHECK(header[2] == "if_im_0");
  CHECK(header[5] == "ef_re_0");

  int rows = 0;
  while (std::getline(table, line)) {
    const std::vector<std::string> cells = split(line, ',');
    REQUIRE(cells.size() == 9);
    const double gamma = std::stod(cells[0]);
    // Bare-generator closed form: E = -i gamma/2 -+ sqrt(1 - gamma^2/4).
    const double root = std::sqrt(1.0 - 0.25 * gamma * gamma);
    const double re0 = std::stod(cells[1]);
    const double im0 = std::stod(cells[2]);
    CHECK(std::abs(std::abs(re0) - root) <= 1e-12);
    CHECK(std::abs(im0 + 0.5 * gamma) <= 1e-12);
    // Balanced-generator closed form: E = -+ sqrt(1 - gamma^2/4), exactly real.
    CHECK(std::abs(std::stod(cells[6])) <= 1e-12);
    ++rows;
  }
  CHECK(rows == 5);

  const json meta = slurp_json(out.str() + ".meta.json");
  CHECK(meta["command"] == "sweep");
  CHECK(meta["model"] == "h1");
  CHECK(meta["range"]["count"] == 5);
  CHECK(meta["frames"].contains("if"));
  CHECK(meta["frames"].contains("ef"));
}

TEST_CASE("decomposition check reports a certified hidden split") {
  TempPath out("check.json");
  const int code = ptframe::cli::run({"check", "--model", "h2", "--g", "1",
                                      "--gamma-a", "1.1", "--gamma-b", "0.1",
                                      "--n-max", "4", "--out", out.str()});
  REQUIRE(code == 0);
  const json r = slurp_json(out.str());
  CHECK(r["command"] == "check");
  CHECK(r["model"] == "h2");
  CHECK(r["h0"] == "hidden");
  CHECK(r["hidden_pt_certified"] == true);
  CHECK(r["pt_residual"].get<double>() <= 1e-13);
  CHECK(r["sum_residual"].get<double>() <= 1e-13);
  CHECK(r["commutator_residual"].get<double>() <= 1e-13);
  CHECK(r["pt_residual_generator"].get<double>() >= 1e-2);
  CHECK(r["params"]["kappa"].get<double>() == doctest::Approx(0.5));

  REQUIRE(r["frame_checks"].size() == 3);  // default times 0.5, 1, 2
  for (const json& c : r["frame_checks"]) {
    CHECK(c["drift"].get<double>() <= 1e-9);
    CHECK(c["evolution_gap"].get<double>() <= 1e-8);
  }
  CHECK(r["eigenvalue_sum"]["pairs"] == 25);
  CHECK(r["eigenvalue_sum"]["max_gap"].get<double>() <= 1e-8);
}

TEST_CASE("single-mode drift choice fails certification") {
  TempPath out("check_bad.json");
  const int code = ptframe::cli::run({"check", "--model", "h2", "--g", "1",
                                      "--gamma-a", "1.1", "--gamma-b", "0.1",
                                      "--n-max", "4", "--h0", "mode-a",
                                      "--out", out.str()});
  REQUIRE(code == 0);
  const json r = slurp_json(out.str());
  CHECK(r["h0"] == "mode-a");
  CHECK(r["hidden_pt_certified"] == false);
  CHECK(r["commutator_residual"].get<double>() >= 1e-2);
  // The per-eigenvalue additivity check refuses an uncertified split.
  CHECK(r["eigenvalue_sum"].contains("error"));

  CHECK(ptframe::cli::run({"check", "--model", "h2", "--h0", "nonsense",
                           "--out", out.str()}) == 2);
}

TEST_CASE("degeneracy search pins the lossy-qubit critical point") {
  TempPath out("ep.json");
  const int code = ptframe::cli::run({"ep-find", "--model", "h1", "--param",
                                      "gamma_e", "--range", "0:4:401", "--format",
                                      "json", "--out", out.str()});
  REQUIRE(code == 0);
  const json r = slurp_json(out.str());
  REQUIRE(r["reports"].size() == 2);  // one per frame
  for (const json& rep : r["reports"]) {
    CHECK(std::abs(rep["location"].get<double>() - 2.0) <= 1e-6);
    CHECK(rep["order_estimate"] == 2);
    CHECK(rep["eigenvalue_gap"].get<double>() <= 1e-6);
  }
  CHECK(r["thresholds"]["gap_tol"].get<double>() == 1e-6);
}

TEST_CASE("config file presets are applied and overridden by flags") {
  TempPath cfg("preset.json");
  TempPath out("preset_sweep.csv");
  {
    std::ofstream f(cfg.str());
    f << R"({"model": "h1", "param": "gamma_e", "range": "0:1:3", "out": "-"})";
  }
  const int code = ptframe::cli::run(
      {"sweep", "--config", cfg.str(), "--out", out.str()});
  REQUIRE(code == 0);
  std::istringstream table(slurp(out.str()));
  std::string line;
  int lines = 0;
  while (std::getline(table, line)) ++lines;
  CHECK(lines == 4);  // header + three points from the preset range

  TempPath bad("bad.json");
  {
    std::ofstream f(bad.str());
    f << R"({"model": "h1", "mystery": 1})";
  }
  CHECK(ptframe::cli::run({"sweep", "--config", bad.str(), "--param", "gamma_e",
                           "--range", "0:1:3"}) == 2);
  CHECK(ptframe::cli::run({"sweep", "--config", "/nonexistent.json", "--param",
                           "gamma_e", "--range", "0:1:3"}) == 2);
}

TEST_CASE("unwritable output path is reported as invalid input") {
  CHECK(ptframe::cli::run({"sweep", "--model", "h1", "--param", "gamma_e",
                           "--range", "0:1:3", "--out",
                           "/nonexistent_dir/out.csv"}) == 2);
}

TEST_CASE("figure command bundles sweep and degeneracy search") {
  TempPath out("fig1.csv");
  const int code = ptframe::cli::run({"figure", "1", "--out", out.str()});
  REQUIRE(code == 0);

  std::istringstream table(slurp(out.str()));
  std::string line;
  REQUIRE(std::getline(table, line));
  CHECK(split(line, ',')[0] == "gamma_e");
  int rows = 0;
  while (std::getline(table, line)) ++rows;
  CHECK(rows == 401);

  const json meta = slurp_json(out.str() + ".meta.json");
  CHECK(meta["figure"] == 1);
  REQUIRE(meta["reports"].size() == 2);
  for (const json& rep : meta["reports"])
    CHECK(std::abs(rep["location"].get<double>() - 2.0) <= 1e-6);
}
