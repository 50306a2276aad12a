#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli_binary() { return std::getenv("FRACLANGE_BIN"); }
const char* test_data() { return std::getenv("FRACLANGE_TESTDATA"); }

int run(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("fraclange_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

const char* kScalarConstant = R"({
  "alpha": 0.5, "beta": 0.5, "T": 1.0,
  "lambda": 1.0, "phi": 1.0, "psi": 0.0,
  "grid": {"n_time": 64, "grading": 1.0}
})";

const char* kSmallSpectral = R"({
  "alpha": 0.6, "beta": 0.4, "T": 1.0,
  "operator": {"kind": "dirichlet_laplacian_1d", "L": 3.141592653589793},
  "epsilon": 0.25,
  "modes": [
    {"k": 1, "phi": 0.5, "psi": 1.0, "forcing": [{"c": 1.0, "p": 1.0}]},
    {"k": 2, "phi": 0.25, "psi": 0.25, "forcing": [{"c": 0.25, "p": 1.0}]}
  ],
  "grid": {"n_time": 256, "grading": 3.0, "n_space": 16},
  "tolerance": 0.01
})";

std::string growing_config() {
  std::ostringstream os;
  os << R"({"alpha": 0.6, "beta": 0.4, "T": 1.0,)"
     << R"("operator": {"kind": "dirichlet_laplacian_1d", "L": 3.141592653589793},)"
     << R"("grid": {"n_time": 128, "grading": 3.0, "n_space": 8}, "modes": [)";
  for (int k = 1; k <= 64; ++k) {
    if (k > 1) os << ',';
    os << R"({"k": )" << k << R"(, "phi": )" << 1.0 / k << R"(, "psi": 0.0})";
  }
  os << "]}";
  return os.str();
}

}  // namespace

TEST_CASE("cli: ml single evaluation and sweep") {
  const char* bin = cli_binary();
  if (!bin) SKIP("FRACLANGE_BIN not set");
  auto dir = fresh_dir("ml");

  REQUIRE(run(std::string(bin) + " ml --alpha 1 --mu 1 --z -2 > " + (dir / "one.csv").string()) == 0);
  std::string one = slurp(dir / "one.csv");
  CHECK(one.rfind("alpha,mu,z,value,regime,est_err\n", 0) == 0);
  CHECK(one.find("0.1353352832366127") != std::string::npos);

  REQUIRE(run(std::string(bin) + " ml --alpha 0.5 --mu 1 --z 0 > " + (dir / "zero.csv").string()) == 0);
  CHECK(slurp(dir / "zero.csv").find(",1,series,") != std::string::npos);

  REQUIRE(run(std::string(bin) + " ml --alpha 0.5 --mu 1 --z-from -10 --z-to 0 --steps 11 > " +
              (dir / "sweep.csv").string()) == 0);
  std::istringstream sweep(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(sweep, line);  // header
  int rows = 0;
  double expect = -10.0;
  while (std::getline(sweep, line)) {
    auto first = line.find(',');
    auto second = line.find(',', first + 1);
    auto third = line.find(',', second + 1);
    double z = std::stod(line.substr(second + 1, third - second - 1));
    CHECK_THAT(z, Catch::Matchers::WithinAbs(expect, 1e-12));
    expect += 1.0;
    ++rows;
  }
  CHECK(rows == 11);

  CHECK(run(std::string(bin) + " ml --alpha 0.5 --mu 1 --z 2 2>/dev/null") == 2);
  CHECK(run(std::string(bin) + " ml --alpha 1.5 --mu 1 --z -2 2>/dev/null") == 2);
}

TEST_CASE("cli: constant scalar run matches the golden file") {
  const char* bin = cli_binary();
  const char* data = test_data();
  if (!bin || !data) SKIP("FRACLANGE_BIN / FRACLANGE_TESTDATA not set");
  auto dir = fresh_dir("golden");
  write(dir / "cfg.json", kScalarConstant);
  REQUIRE(run(std::string(bin) + " solve-scalar --config " + (dir / "cfg.json").string() +
              " --out " + (dir / "out").string() + " 2>/dev/null") == 0);
  CHECK(slurp(dir / "out" / "solution.csv") == slurp(fs::path(data) / "golden_scalar_constant.csv"));
}

TEST_CASE("cli: solve output is byte-deterministic and schema-stable") {
  const char* bin = cli_binary();
  if (!bin) SKIP("FRACLANGE_BIN not set");
  auto dir = fresh_dir("determinism");
  write(dir / "cfg.json", kSmallSpectral);
  for (const char* out : {"a", "b"}) {
    REQUIRE(run(std::string(bin) + " solve --config " + (dir / "cfg.json").string() + " --out " +
                (dir / out).string() + " 2>/dev/null") == 0);
  }
  std::string field = slurp(dir / "a" / "field.csv");
  CHECK(field == slurp(dir / "b" / "field.csv"));
  CHECK(slurp(dir / "a" / "modes.csv") == slurp(dir / "b" / "modes.csv"));
  CHECK(slurp(dir / "a" / "report.txt") == slurp(dir / "b" / "report.txt"));
  CHECK(field.rfind("t,x,u\n", 0) == 0);
  CHECK(slurp(dir / "a" / "modes.csv").rfind("t,k,T_k\n", 0) == 0);
}

TEST_CASE("cli: regularity gate returns exit 4 unless forced") {
  const char* bin = cli_binary();
  if (!bin) SKIP("FRACLANGE_BIN not set");
  auto dir = fresh_dir("growing");
  write(dir / "cfg.json", growing_config());
  CHECK(run(std::string(bin) + " solve --config " + (dir / "cfg.json").string() + " --out " +
            (dir / "out").string() + " 2>" + (dir / "err.txt").string()) == 4);
  CHECK(slurp(dir / "err.txt").find("growing") != std::string::npos);
  CHECK(run(std::string(bin) + " solve --config " + (dir / "cfg.json").string() + " --force --out " +
            (dir / "out").string() + " 2>/dev/null") == 0);
}

TEST_CASE("cli: invalid configs exit with code 2") {
  const char* bin = cli_binary();
  if (!bin) SKIP("FRACLANGE_BIN not set");
  auto dir = fresh_dir("badcfg");
  write(dir / "typo.json", R"({"alpha": 0.5, "beta": 0.5, "T": 1.0,
    "lambda": 1.0, "phi": 1.0, "psi": 0.0, "grading": 2})");
  CHECK(run(std::string(bin) + " solve-scalar --config " + (dir / "typo.json").string() +
            " 2>/dev/null") == 2);
  write(dir / "badnum.json", R"({"alpha": 1.5, "beta": 0.5, "T": 1.0,
    "lambda": 1.0, "phi": 1.0, "psi": 0.0})");
  CHECK(run(std::string(bin) + " solve-scalar --config " + (dir / "badnum.json").string() +
            " 2>/dev/null") == 2);
  CHECK(run(std::string(bin) + " solve --config " + (dir / "missing.json").string() +
            " 2>/dev/null") == 2);
}

TEST_CASE("cli: verify passes at the default tolerance and fails at zero") {
  const char* bin = cli_binary();
  if (!bin) SKIP("FRACLANGE_BIN not set");
  auto dir = fresh_dir("verify");
  write(dir / "cfg.json", kSmallSpectral);
  auto out = (dir / "verify.txt").string();
  REQUIRE(run(std::string(bin) + " verify --config " + (dir / "cfg.json").string() + " > " + out) == 0);
  std::string report = slurp(out);
  CHECK(report.find("lemma1_decay_bound: PASS") != std::string::npos);
  CHECK(report.find("lemma3_eigen_derivative: PASS") != std::string::npos);
  CHECK(report.find("lemma4_derivative_shift: PASS") != std::string::npos);
  CHECK(report.find("lemma6_forcing_estimate: PASS") != std::string::npos);
  CHECK(report.find("mode_1_picard: PASS") != std::string::npos);
  // degenerate tolerance: measured checks cannot pass
  CHECK(run(std::string(bin) + " verify --config " + (dir / "cfg.json").string() +
            " --tol 0 >/dev/null") == 3);
}

TEST_CASE("cli: thread cap does not change results") {
  const char* bin = cli_binary();
  if (!bin) SKIP("FRACLANGE_BIN not set");
  auto dir = fresh_dir("threads");
  write(dir / "cfg.json", kSmallSpectral);
  REQUIRE(run(std::string(bin) + " solve --config " + (dir / "cfg.json").string() + " --out " +
              (dir / "a").string() + " 2>/dev/null") == 0);
  REQUIRE(run("FRACLANGE_THREADS=1 " + std::string(bin) + " solve --config " +
              (dir / "cfg.json").string() + " --out " + (dir / "b").string() + " 2>/dev/null") == 0);
  CHECK(slurp(dir / "a" / "field.csv") == slurp(dir / "b" / "field.csv"));
}
