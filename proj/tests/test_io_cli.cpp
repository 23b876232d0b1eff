#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrmc/chain.hpp"
#include "lrmc/io.hpp"
#include "lrmc/rng.hpp"

using namespace lrmc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = fs::temp_directory_path() /
           ("lrmc_test_" + std::to_string(Rng(static_cast<std::uint64_t>(stamp)).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LRMC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("matrix csv round trip") {
  Rng rng(100);
  Matrix m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rng.normal() * std::pow(10.0, rng.uniform_int(7) - 3);
  std::ostringstream out;
  write_matrix_csv(out, m);
  std::istringstream in(out.str());
  const Matrix back = read_matrix_csv(in);
  CHECK((m - back).cwiseAbs().maxCoeff() == 0.0);  // 17 digits round-trip exactly
}

TEST_CASE("counts csv round trip") {
  CountMatrix c(3, 3);
  c << 0, 5, 2, 1, 0, 0, 7, 3, 9;
  std::ostringstream out;
  write_counts_csv(out, TransitionCounts::from_counts(c));
  std::istringstream in(out.str());
  const TransitionCounts back = read_counts_csv(in);
  CHECK((back.counts - c).cwiseAbs().maxCoeff() == 0);
  CHECK(back.total == 27);
}

TEST_CASE("trajectory file round trip and validation") {
  Trajectory t;
  t.p = 5;
  t.states = {0, 3, 4, 4, 1, 2};
  std::ostringstream out;
  write_trajectory(out, t);
  CHECK(out.str().substr(0, 6) == "# p=5\n");
  std::istringstream in(out.str());
  const Trajectory back = read_trajectory(in);
  CHECK(back.p == 5);
  CHECK(back.states == t.states);

  std::istringstream no_header("0\n1\n");
  CHECK_THROWS_AS(read_trajectory(no_header), ParseError);
  std::istringstream bad_state("# p=2\n0\n7\n");
  CHECK_THROWS_AS(read_trajectory(bad_state), InvalidInputError);
}

TEST_CASE("cli simulate is deterministic and validates input") {
  TempDir tmp;
  const std::string out1 = (tmp.path / "a").string();
  const std::string out2 = (tmp.path / "b").string();
  const std::string base = "--set p=6 --set r=2 --set n=200 --seed 5 simulate";
  CHECK(run_cli("--out " + out1 + " " + base) == 0);
  CHECK(run_cli("--out " + out2 + " " + base) == 0);
  CHECK(slurp(out1 + "/matrix.csv") == slurp(out2 + "/matrix.csv"));
  CHECK(slurp(out1 + "/trajectory.txt") == slurp(out2 + "/trajectory.txt"));
  CHECK(slurp(out1 + "/meta.json") == slurp(out2 + "/meta.json"));

  // usage errors exit 2
  CHECK(run_cli("--out " + out1 + " --set p=6 --set r=2 --set n=0 simulate") == 2);
  CHECK(run_cli("--out " + out1 + " --set p=2 --set r=5 --set n=10 simulate") == 2);
  CHECK(run_cli("--out " + out1 + " --set p=6 --set r=2 --set n=10 --set bogus=1 simulate") ==
        2);
}

TEST_CASE("cli estimate empirical matches the library") {
  TempDir tmp;
  const std::string sim = (tmp.path / "sim").string();
  CHECK(run_cli("--out " + sim + " --set p=5 --set r=2 --set n=500 --seed 9 simulate") == 0);
  const std::string est = (tmp.path / "est").string();
  CHECK(run_cli("--out " + est + " --set estimator=empirical --set trajectory=" + sim +
                "/trajectory.txt estimate") == 0);

  const Trajectory traj = load_trajectory(sim + "/trajectory.txt");
  const TransitionMatrix expect = empirical_estimator(count_transitions(traj));
  const Matrix got = load_matrix_csv(est + "/estimate.csv");
  CHECK((got - expect.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cli estimate rank reports a rank within the target") {
  TempDir tmp;
  const std::string sim = (tmp.path / "sim").string();
  CHECK(run_cli("--out " + sim + " --set p=8 --set r=2 --set n=3000 --seed 11 simulate") == 0);
  const std::string est = (tmp.path / "est").string();
  CHECK(run_cli("--out " + est + " --set estimator=rank --set r=2 --set trajectory=" + sim +
                "/trajectory.txt estimate") == 0);
  const std::string report = slurp(est + "/report.txt");
  const auto pos = report.find("rank_est: ");
  REQUIRE(pos != std::string::npos);
  const int rank = std::stoi(report.substr(pos + 10));
  CHECK(rank <= 2);
  CHECK(slurp(est + "/trace.csv").find("outer_iter,objective") == 0);
}

TEST_CASE("cli estimate on a missing file exits 4 with no outputs") {
  TempDir tmp;
  const std::string est = (tmp.path / "est").string();
  CHECK(run_cli("--out " + est + " --set estimator=empirical --set trajectory=" +
                (tmp.path / "nope.txt").string() + " estimate") == 4);
  CHECK(!fs::exists(est + "/estimate.csv"));
}

TEST_CASE("cli benchmark emits deterministic csvs with the pinned header") {
  TempDir tmp;
  write_file(tmp.path / "bench.cfg",
             "p = 10\nr = 2\nk_grid = 3,6\nrolls = 2\nseed = 3\n"
             "estimators = empirical,spectral\n");
  const std::string out1 = (tmp.path / "o1").string();
  const std::string out2 = (tmp.path / "o2").string();
  const std::string cfg = (tmp.path / "bench.cfg").string();
  CHECK(run_cli("--config " + cfg + " --out " + out1 + " benchmark") == 0);
  CHECK(run_cli("--config " + cfg + " --out " + out2 + " --threads 3 benchmark") == 0);
  CHECK(slurp(out1 + "/benchmark.csv") == slurp(out2 + "/benchmark.csv"));
  CHECK(slurp(out1 + "/summary.csv") == slurp(out2 + "/summary.csv"));
  CHECK(slurp(out1 + "/plot_data.csv") == slurp(out2 + "/plot_data.csv"));

  std::istringstream csv(slurp(out1 + "/benchmark.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "k,n,roll,estimator,eta_F,eta_KL,eta_UV,wall_time_ms,failed");
  int data_rows = 0;
  std::string line;
  while (std::getline(csv, line))
    if (!line.empty()) ++data_rows;
  CHECK(data_rows == 2 * 2 * 2);

  // summary: one row per (k, estimator)
  std::istringstream sum(slurp(out1 + "/summary.csv"));
  std::getline(sum, header);
  int sum_rows = 0;
  while (std::getline(sum, line))
    if (!line.empty()) ++sum_rows;
  CHECK(sum_rows == 2 * 2);
}

TEST_CASE("cli aggregate clusters a two-block record stream") {
  TempDir tmp;
  // derive records from a simulated two-block chain
  Matrix m(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const bool same = (i < 4) == (j < 4);
      m(i, j) = same ? 0.98 / 4 : 0.02 / 4;
    }
  const TransitionMatrix chain = TransitionMatrix::from_matrix(m);
  const Trajectory traj = simulate(chain, 4000, 19);
  std::ostringstream records;
  records << "from_id,to_id\n";
  for (std::size_t t = 1; t < traj.states.size(); ++t)
    records << "s" << traj.states[t - 1] << ",s" << traj.states[t] << "\n";
  write_file(tmp.path / "records.csv", records.str());

  const std::string out = (tmp.path / "agg").string();
  CHECK(run_cli("--out " + out + " --set records=" + (tmp.path / "records.csv").string() +
                " --set r=2 --set k=2 --set min_visits=1 aggregate") == 0);

  // parse labels and check the two blocks separate
  std::istringstream labels(slurp(out + "/clusters.csv"));
  std::string line;
  std::getline(labels, line);  // header
  std::vector<int> lbl(8, -1);
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const int state = std::stoi(line.substr(1, comma - 1));
    lbl[state] = std::stoi(line.substr(comma + 1));
  }
  for (int i = 1; i < 4; ++i) CHECK(lbl[i] == lbl[0]);
  for (int i = 5; i < 8; ++i) CHECK(lbl[i] == lbl[4]);
  CHECK(lbl[0] != lbl[4]);

  // destination rows sum to one
  std::istringstream dest(slurp(out + "/destinations.csv"));
  std::getline(dest, line);  // header
  while (std::getline(dest, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // label
    double sum = 0.0;
    while (std::getline(row, cell, ',')) sum += std::stod(cell);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}
