#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "feslkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

using namespace feslkit;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

bool bits_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("ground motion record ingestion") {
  const TimeGrid grid{0.01, 1000, 0, 1000};
  TempFile f("feslkit_gm.csv");
  std::ostringstream os;
  os << "time,accel\n";
  for (int k = 0; k <= 1000; ++k)
    os << 0.01 * k << "," << std::sin(2.0 * std::numbers::pi * 0.01 * k) << "\n";
  write_text(f.path, os.str());

  bool implausible = true;
  const Eigen::VectorXd rec = load_ground_motion(f.path, grid, &implausible);
  REQUIRE(rec.size() == 1001);
  CHECK_FALSE(implausible);
  CHECK(rec[0] == doctest::Approx(0.0));
  CHECK(rec[25] ==
        doctest::Approx(std::sin(2.0 * std::numbers::pi * 0.25)).epsilon(1e-9));
}

TEST_CASE("record longer than the grid is truncated") {
  const TimeGrid grid{0.01, 10, 0, 10};
  TempFile f("feslkit_gm_long.csv");
  std::ostringstream os;
  for (int k = 0; k <= 200; ++k) os << 0.01 * k << "," << 1.0 + k << "\n";
  write_text(f.path, os.str());
  const Eigen::VectorXd rec = load_ground_motion(f.path, grid);
  REQUIRE(rec.size() == 11);
  CHECK(rec[10] == doctest::Approx(11.0));
}

TEST_CASE("sampling-rate mismatch is an error, not a resample") {
  const TimeGrid grid{0.02, 100, 0, 100};
  TempFile f("feslkit_gm_dt.csv");
  std::ostringstream os;
  for (int k = 0; k <= 500; ++k) os << 0.01 * k << "," << 0.5 << "\n";
  write_text(f.path, os.str());
  CHECK_THROWS_WITH_AS(load_ground_motion(f.path, grid),
                       doctest::Contains("feslkit_gm_dt.csv"),
                       std::runtime_error);
}

TEST_CASE("empty and short records are rejected with the file name") {
  const TimeGrid grid{0.01, 100, 0, 100};
  TempFile empty("feslkit_gm_empty.csv");
  write_text(empty.path, "");
  CHECK_THROWS_WITH_AS(load_ground_motion(empty.path, grid),
                       doctest::Contains("feslkit_gm_empty.csv"),
                       std::runtime_error);

  TempFile shortf("feslkit_gm_short.csv");
  std::ostringstream os;
  for (int k = 0; k <= 20; ++k) os << 0.01 * k << ",0.1\n";
  write_text(shortf.path, os.str());
  CHECK_THROWS_WITH_AS(load_ground_motion(shortf.path, grid),
                       doctest::Contains("feslkit_gm_short.csv"),
                       std::runtime_error);
}

TEST_CASE("implausibly large samples are flagged") {
  const TimeGrid grid{0.01, 10, 0, 10};
  TempFile f("feslkit_gm_units.csv");
  std::ostringstream os;
  for (int k = 0; k <= 10; ++k) os << 0.01 * k << "," << 981.0 << "\n";
  write_text(f.path, os.str());
  bool implausible = false;
  load_ground_motion(f.path, grid, &implausible);
  CHECK(implausible);
}

TEST_CASE("run report JSON round trip is bit-exact") {
  RunReport r;
  r.problem = "p1";
  r.method = "fesl";
  r.x_final = Eigen::Vector2d(0.1 + 0.2, 1.0 / 3.0);
  r.objective = std::numbers::pi;
  r.max_constraint = -1.0e-17;
  r.n_transient_solves = 3;
  r.outer_iterations = 3;
  r.converged = true;
  r.solver_status = SolveStatus::Converged;
  r.kkt.stationarity_norm = 2.2250738585072014e-308;  // smallest normal
  r.kkt.max_violation = 0.1 + 0.7;
  r.kkt.min_multiplier = 0.4999999999999999;
  r.kkt.complementarity_norm = 1.0e17 + 1.0;
  r.wall_time_s = 1.2345678901234567;
  r.synthetic_record = false;
  OuterIterationRecord h;
  h.x = Eigen::Vector2d(0.2, 0.2);
  h.objective = 0.30000000000000004;
  h.max_violation = 0.0;
  h.step_norm = 1e-300;
  h.inner_status = SolveStatus::Converged;
  h.inner_iterations = 7;
  r.history = {h, h};

  // Serialize to text and back, as the CLI does when writing report.json.
  const std::string text = to_json(r).dump(2);
  const RunReport q = run_report_from_json(nlohmann::json::parse(text));

  CHECK(q.problem == r.problem);
  CHECK(q.method == r.method);
  REQUIRE(q.x_final.size() == 2);
  for (int i = 0; i < 2; ++i) CHECK(bits_equal(q.x_final[i], r.x_final[i]));
  CHECK(bits_equal(q.objective, r.objective));
  CHECK(bits_equal(q.max_constraint, r.max_constraint));
  CHECK(q.n_transient_solves == 3);
  CHECK(q.outer_iterations == 3);
  CHECK(q.converged);
  CHECK(q.solver_status == SolveStatus::Converged);
  CHECK(bits_equal(q.kkt.stationarity_norm, r.kkt.stationarity_norm));
  CHECK(bits_equal(q.kkt.max_violation, r.kkt.max_violation));
  CHECK(bits_equal(q.kkt.min_multiplier, r.kkt.min_multiplier));
  CHECK(bits_equal(q.kkt.complementarity_norm, r.kkt.complementarity_norm));
  CHECK(bits_equal(q.wall_time_s, r.wall_time_s));
  CHECK(q.synthetic_record == r.synthetic_record);
  REQUIRE(q.history.size() == 2);
  CHECK(bits_equal(q.history[1].objective, h.objective));
  CHECK(bits_equal(q.history[1].step_norm, h.step_norm));
  CHECK(q.history[1].inner_iterations == 7);
}

TEST_CASE("CSV writer emits a header and one row per sample") {
  TempFile f("feslkit_out.csv");
  Eigen::MatrixXd cols(3, 2);
  cols << 0.0, 1.5, 0.1, -2.5, 0.2, 3.25;
  write_csv(f.path, {"t", "value"}, cols);
  std::ifstream is(f.path);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "t,value");
  int rows = 0;
  while (std::getline(is, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("iteration history CSV") {
  TempFile f("feslkit_hist.csv");
  OuterIterationRecord h;
  h.x = Eigen::Vector2d(0.25, 0.5);
  h.objective = 1.25;
  h.max_violation = 0.0;
  h.step_norm = 0.1;
  h.inner_status = SolveStatus::Converged;
  h.inner_iterations = 4;
  write_history_csv(f.path, {h});
  std::ifstream is(f.path);
  std::string header, row;
  REQUIRE(std::getline(is, header));
  REQUIRE(std::getline(is, row));
  CHECK(header.find("objective") != std::string::npos);
  CHECK(row.find("1.25") != std::string::npos);
}
