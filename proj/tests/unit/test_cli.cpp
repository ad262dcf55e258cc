#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "generators.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string err;
};

Result run(const gen::TempDir& dir, const std::string& args) {
  const auto err = dir.path() / "stderr.txt";
  const std::string cmd = std::string("\"") + IMST_CLI_PATH + "\" " + args + " > \"" +
                          (dir.path() / "stdout.txt").string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = gen::read_file(err);
  return r;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("synth then every stage in order") {
  gen::TempDir dir("cli_stages");
  const auto data = dir.path() / "data";
  REQUIRE(run(dir, "synth --rows 200 --seed 2 --out " + quoted(data)).code == 0);
  const auto cfg = "--config " + quoted(data / "config.json") + " ";
  CHECK(run(dir, cfg + "stats").code == 0);
  CHECK(run(dir, cfg + "factorize").code == 0);
  CHECK(run(dir, cfg + "select").code == 0);
  CHECK(run(dir, cfg + "train --mode imst").code == 0);
  CHECK(run(dir, cfg + "train --mode baseline --criterion gini").code == 0);
  CHECK(run(dir, cfg + "evaluate").code == 0);
  CHECK(fs::exists(data / "out" / "eval_imst.json"));
  CHECK(fs::exists(data / "out" / "eval_baseline.json"));
}

TEST_CASE("exit codes") {
  gen::TempDir dir("cli_codes");
  const auto data = dir.path() / "data";
  REQUIRE(run(dir, "synth --rows 120 --out " + quoted(data)).code == 0);
  const auto cfg = "--config " + quoted(data / "config.json") + " ";

  SUBCASE("missing prerequisite") {
    REQUIRE(run(dir, cfg + "factorize").code == 0);
    const auto r = run(dir, cfg + "train");
    CHECK(r.code == 4);
    CHECK(r.err.find("selected.json") != std::string::npos);
  }
  SUBCASE("config errors") {
    CHECK(run(dir, cfg + "--set eval.test_fraction=0 pipeline").code == 2);
    CHECK(run(dir, cfg + "--set tree.nonsense=1 factorize").code == 2);
    CHECK(run(dir, "--config " + quoted(dir.path() / "absent.json") + " factorize").code == 2);
    CHECK(run(dir, "factorize").code == 2);
  }
  SUBCASE("data errors") {
    gen::write_file(data / "data.csv", gen::read_file(data / "data.csv") + "extra,1,2,3,4,5,0,1,7\n");
    CHECK(run(dir, cfg + "stats").code == 3);
  }
  SUBCASE("seed flag changes the config hash") {
    REQUIRE(run(dir, cfg + "--seed 5 factorize").code == 0);
    const auto a = gen::read_file(data / "out" / "factors.json");
    REQUIRE(run(dir, cfg + "--seed 6 factorize").code == 0);
    CHECK(a != gen::read_file(data / "out" / "factors.json"));
  }
}

TEST_CASE("pipeline prints both models") {
  gen::TempDir dir("cli_pipeline");
  const auto data = dir.path() / "data";
  REQUIRE(run(dir, "synth --rows 300 --out " + quoted(data)).code == 0);
  REQUIRE(run(dir, "--config " + quoted(data / "config.json") + " pipeline").code == 0);
  const auto out = gen::read_file(dir.path() / "stdout.txt");
  CHECK(out.find("IMST") != std::string::npos);
  CHECK(out.find("baseline") != std::string::npos);
}
