#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rlab/sweep.hpp"

namespace fs = std::filesystem;
using Catch::Approx;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell with stdout captured to a file.
Run cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = env + " '" RLAB_CLI_PATH "' " + args + " > '" + out.string() + "' 2> '" +
                          (dir / "stderr.txt").string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rlab-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("usage errors exit with 2", "[cli]") {
  const auto dir = scratch("usage");
  CHECK(cli("", dir).code == 2);
  CHECK(cli("frobnicate", dir).code == 2);
  CHECK(cli("sweep", dir).code == 2);  // --config is required
  CHECK(cli("sweep --config /nonexistent.yaml", dir).code == 2);
  CHECK(cli("verify --estimate 9.9", dir).code == 2);
  CHECK(cli("norms --kind torus --K 3 --G 5", dir).code == 2);  // grid too small
  CHECK(cli("--help", dir).code == 0);
  fs::remove_all(dir);
}

TEST_CASE("norms prints one JSON line", "[cli]") {
  const auto dir = scratch("norms");
  const Run r = cli("norms --kind sphere --L 8 --q inf --lambda 4", dir);
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("q") == "inf");
  // The window [4, 5] holds degree 4 only.
  CHECK(j.at("lower").get<double>() == Approx(std::sqrt(9.0 / (4.0 * M_PI))).epsilon(1e-10));
  fs::remove_all(dir);
}

TEST_CASE("verify exits 0 when every check passes", "[cli]") {
  const auto dir = scratch("verify");
  const Run r = cli("verify --estimate L3.1 --models 2 --max-dim 14", dir);
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    CHECK(nlohmann::json::parse(line).at("pass") == true);
    ++count;
  }
  CHECK(count > 0);
  fs::remove_all(dir);
}

TEST_CASE("model cache honours the cache directory variable", "[cli]") {
  const auto dir = scratch("cache");
  const std::string env = "RLAB_CACHE_DIR='" + (dir / "cache").string() + "'";
  const Run first = cli("model cache --kind random --dim 6 --seed 3", dir, env);
  REQUIRE(first.code == 0);
  const fs::path file = first.out.substr(0, first.out.find('\n'));
  CHECK(file.parent_path() == dir / "cache");
  REQUIRE(fs::exists(file));
  const auto stamp = fs::last_write_time(file);
  const Run second = cli("model cache --kind random --dim 6 --seed 3", dir, env);
  CHECK(second.out == first.out);
  CHECK(fs::last_write_time(file) == stamp);

  // A cached operator loads back as a file model.
  const Run built = cli("model build --kind file --path '" + file.string() + "' -o '" + (dir / "copy.json").string() + "'", dir);
  CHECK(built.code == 0);
  CHECK(fs::file_size(dir / "copy.json") > 0);
  fs::remove_all(dir);
}

TEST_CASE("sweep then report", "[cli]") {
  const auto dir = scratch("sweep");
  write(dir / "sweep.yaml", R"(
model: {kind: random, dim: 12, tau_max: 10, seed: 2}
q: [4]
lambda: [1, 2, 3, 4]
quantity: resolvent-q'q
)");
  const Run s = cli("sweep --config '" + (dir / "sweep.yaml").string() + "' -o '" + (dir / "r.json").string() + "'", dir);
  REQUIRE(s.code == 0);
  CHECK(s.out.find("slope=") != std::string::npos);
  const rlab::Report rep = rlab::load_report((dir / "r.json").string());
  CHECK(rep.records.size() == 4);
  CHECK(rep.fits.size() == 1);

  const Run csv = cli("report --in '" + (dir / "r.json").string() + "' --format csv", dir);
  REQUIRE(csv.code == 0);
  CHECK(csv.out == rlab::records_csv(rep.records));

  const Run plot = cli("report --in '" + (dir / "r.json").string() + "' --format plotdata -o '" +
                           (dir / "plots").string() + "'",
                       dir);
  CHECK(plot.code == 0);
  CHECK(std::distance(fs::directory_iterator(dir / "plots"), fs::directory_iterator{}) == 1);
  CHECK(cli("report --in '" + (dir / "r.json").string() + "' --format plotdata", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("perturb exit code follows the verdict", "[cli]") {
  const auto dir = scratch("perturb");
  write(dir / "small.yaml", R"(
model: {kind: torus, n: 2, K: 4}
q: 6
potential: {kind: single-bump, height: 0.05, radius: 0.9}
lambda: [1]
neumann_terms: 4
restarts: 2
)");
  const Run ok = cli("perturb --config '" + (dir / "small.yaml").string() + "'", dir);
  CHECK(ok.code == 0);
  CHECK(nlohmann::json::parse(ok.out).contains("neumann"));

  write(dir / "large.yaml", R"(
model: {kind: torus, n: 2, K: 4}
q: 6
potential: {kind: single-bump, height: 40, radius: 0.9}
lambda: [1]
neumann_terms: 2
restarts: 2
)");
  CHECK(cli("perturb --config '" + (dir / "large.yaml").string() + "'", dir).code == 1);
  fs::remove_all(dir);
}
