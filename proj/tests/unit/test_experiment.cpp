#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "nlab/errors.hpp"
#include "nlab/experiment.hpp"
#include "nlab/verify.hpp"

using namespace nlab;
namespace ex = nlab::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / ("nlab_exp_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const char* bin = std::getenv("NLAB_CLI");
  REQUIRE(bin != nullptr);
  const int status = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(ex::hex64(ex::fnv1a("")) == "cbf29ce484222325");
  CHECK(ex::hex64(ex::fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("thresholds experiment reports 3.5 for the even necklace in d = 4") {
  const fs::path dir = scratch();
  const auto spec = ex::parse_spec(R"({"kind": "thresholds", "params": {"d": 4, "variant": "even_necklace"}})", "");
  const auto res = ex::run(spec, (dir / "th").string());
  const auto j = io::Json::parse(res.artifacts.at(0).bytes);
  CHECK(j["threshold"] == 3.5);
  CHECK(j["rational"] == "7/2");
  CHECK(fs::exists(dir / "th" / "manifest.json"));
  const auto m = io::Json::parse(io::read_file((dir / "th" / "manifest.json").string()));
  CHECK(m["spec_hash"] == ex::hex64(ex::fnv1a(spec.source)));
  CHECK(m["output_hash"] == res.output_hash);
  CHECK(m.contains("wall_time_s"));
  CHECK(m["version"] == NLAB_VERSION);
  fs::remove_all(dir);
}

TEST_CASE("scan past the diameter gives a curve of zeros") {
  const fs::path dir = scratch();
  const auto spec = ex::parse_spec(R"({
    "kind": "scan",
    "params": {"measure": {"preset": "cantor_dust", "d": 2, "n": 64, "L": 4, "depth": 3},
               "t_min": 1.6, "t_max": 1.8, "t_steps": 3, "eps_list": [0.125, 0.15], "k": 1}
  })", "");
  const auto res = ex::run(spec, (dir / "scan").string());
  const std::string csv = res.artifacts.at(0).bytes;
  CHECK(csv.find("t,eps,mass,spread,flag\n") == 0);
  std::size_t lines = 0, pos = 0;
  while ((pos = csv.find('\n', pos)) != std::string::npos) {
    ++lines;
    ++pos;
  }
  CHECK(lines == 4);
  CHECK(csv.find(",0,0,0\n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("schema violations name the line") {
  const std::string text = "{\n  \"kind\": \"scan\",\n  \"params\": {\n    \"t_min\": \"oops\"\n  }\n}\n";
  const auto spec = ex::parse_spec(text, "");
  try {
    ex::run(spec, (scratch() / "bad").string());
    FAIL("expected a throw");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const std::string typed =
      "{\n  \"kind\": \"scan\",\n  \"params\": {\n    \"measure\": {\"preset\": \"full_cube\", \"d\": 2, \"n\": 16, \"L\": 2, \"depth\": 1},\n"
      "    \"t_min\": \"oops\"\n  }\n}\n";
  try {
    ex::run(ex::parse_spec(typed, ""), (scratch() / "bad").string());
    FAIL("expected a throw");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
  try {
    ex::parse_spec("{\n\"kind\": \"scan\",\n  oops\n}", "");
    FAIL("expected a throw");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(ex::parse_spec(R"({"kind": "nonsense"})", ""), ValidationError);
  CHECK_THROWS_AS(ex::parse_spec(R"({"kind": "search", "inputs": {"cloud": "/no/such/file.csv"}})", ""),
                  ValidationError);
}

TEST_CASE("failed runs leave no outputs behind") {
  const fs::path dir = scratch() / "fail";
  const auto spec = ex::parse_spec(R"({"kind": "chain", "params": {
      "measure": {"preset": "cantor_dust", "d": 2, "n": 16, "L": 2, "depth": 2},
      "kernel": {"type": "sphere", "t": 0.9, "eps": 0.25}, "k": 1}})", "");
  CHECK_THROWS(ex::run(spec, dir.string()));
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("identical spec and seed give identical artifacts") {
  const auto spec = ex::parse_spec(R"({"kind": "search", "seed": 9, "params": {
      "cloud": {"preset": "cantor_dust", "d": 2, "count": 60, "depth": 6},
      "query": {"type": "necklace", "m": 4, "t": 0.3333333333, "tol": 0.03, "sep_min": 0.02}}})", "");
  const fs::path dir = scratch();
  const auto a = ex::run(spec, (dir / "a").string());
  const auto b = ex::run(spec, (dir / "b").string());
  CHECK(a.output_hash == b.output_hash);
  fs::remove_all(dir);
}

TEST_CASE("verify rejects unknown suites and runs the known ones") {
  CHECK_THROWS_AS(verify::run_suite("nonsense"), ValidationError);
  const auto rep = verify::run_suite("search");
  for (const auto& r : rep.results) CHECK_MESSAGE(r.pass, r.id << ": " << r.detail);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch();
  CHECK(cli("--help") == 0);
  CHECK(cli("verify nonsense") == 2);
  CHECK(cli("no-such-command") == 2);
  CHECK(cli("thresholds --d 4 --variant even_necklace --out " + (dir / "t").string()) == 0);
  CHECK(cli("thresholds --d 3 --variant even_necklace --out " + (dir / "t2").string()) == 2);
  CHECK(cli("gen-measure --preset cantor_dust --n 12 --out " + (dir / "m").string()) == 2);
  CHECK(cli("--threads 1 gen-measure --preset menger --n 32 --L 2 --depth 2 --out " + (dir / "m").string()) == 0);
  CHECK(fs::exists(dir / "m" / "measure.gmsr"));
  CHECK(cli("chain --measure " + (dir / "m" / "measure.gmsr").string() + " --t 0.5 --eps 0.125 --k 1,2 --out " +
            (dir / "c").string()) == 0);
  // A sign-changing kernel drives the chain negative: numeric failure.
  CHECK(cli("gen-kernel --type alpha --alpha -1 --d 2 --n 32 --L 2 --t 0.5 --eps 0.125 --out " + (dir / "k").string()) ==
        0);
  CHECK(cli("chain --measure " + (dir / "m" / "measure.gmsr").string() + " --kernel " +
            (dir / "k" / "kernel.gmsr").string() + " --k 1 --out " + (dir / "c2").string()) == 3);
  CHECK(setenv("NECKLACE_LAB_THREADS", "zero", 1) == 0);
  CHECK(cli("thresholds --d 4 --out " + (dir / "t3").string()) == 2);
  unsetenv("NECKLACE_LAB_THREADS");
  fs::remove_all(dir);
}
