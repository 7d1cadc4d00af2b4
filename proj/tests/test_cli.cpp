#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rlx/lz2rlbwt.hpp"
#include "rlx/suffix.hpp"
#include "rlx/text.hpp"

namespace {

using namespace rlx;
using namespace oracles;

struct RunResult {
  int exit_code;
  std::string output;
};

// Runs the built binary through the shell, merging stderr into the captured output.
RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(RLX_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

// Environment assignments need the shell prefix form, so they ride in front of the path.
RunResult run_cli_env(const std::string& env, const std::string& args) {
  std::string cmd = env + " " + std::string(RLX_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("rlx_cli_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST_CASE("measure prints one row per file with the known statistics", "[cli]") {
  TempDir dir;
  write_file(dir.file("ex.txt"), fixtures::kExampleRaw);
  RunResult res = run_cli("measure " + dir.file("ex.txt"));
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("n=20") != std::string::npos);
  REQUIRE(res.output.find("r=8") != std::string::npos);
  REQUIRE(res.output.find("z=8") != std::string::npos);
  REQUIRE(res.output.find("bounds=ok") != std::string::npos);

  SECTION("csv format carries the header and one line per bound") {
    RunResult csv = run_cli("measure --format csv " + dir.file("ex.txt"));
    REQUIRE(csv.exit_code == 0);
    REQUIRE(csv.output.rfind("label,n,r,r_rev,z,delta,bound_name", 0) == 0);
  }

  SECTION("a directory expands to rows for every file inside") {
    write_file(dir.file("ex2.txt"), "abcabcabc");
    RunResult res2 = run_cli("measure " + dir.path.string());
    REQUIRE(res2.exit_code == 0);
    REQUIRE(res2.output.find("ex.txt") != std::string::npos);
    REQUIRE(res2.output.find("ex2.txt") != std::string::npos);
  }

  SECTION("an empty file is an input error") {
    write_file(dir.file("none.txt"), "");
    RunResult res3 = run_cli("measure " + dir.file("none.txt"));
    REQUIRE(res3.exit_code == 4);
    REQUIRE(res3.output.find("empty input") != std::string::npos);
  }
}

TEST_CASE("gen writes loadable family files of the documented size", "[cli]") {
  TempDir dir;
  RunResult res = run_cli("gen --family small --delta 4 --n 16 --out " + dir.file("s.txt"));
  REQUIRE(res.exit_code == 0);
  REQUIRE(std::filesystem::file_size(dir.file("s.txt")) == 41);
  Text t = Text::from_file(dir.file("s.txt"));
  REQUIRE(t.size() == 41);

  RunResult db = run_cli("gen --family debruijn --sigma 2 --order 4 --out " + dir.file("d.txt"));
  REQUIRE(db.exit_code == 0);
  REQUIRE(Text::from_file(dir.file("d.txt")).size() == 17);

  RunResult bad = run_cli("gen --family nope --out " + dir.file("x.txt"));
  REQUIRE(bad.exit_code == 3);
}

TEST_CASE("conversion round-trips and verification rejects corrupted output", "[cli]") {
  TempDir dir;
  write_file(dir.file("ex.txt"), fixtures::kExampleRaw);
  REQUIRE(run_cli("parse --text " + dir.file("ex.txt") + " --out " + dir.file("ex.lz77"))
              .exit_code == 0);
  RunResult conv = run_cli("convert --parse " + dir.file("ex.lz77") + " --out " +
                           dir.file("ex.rlbwt") + " --verify");
  REQUIRE(conv.exit_code == 0);
  REQUIRE(conv.output.find("verified") != std::string::npos);

  Text t = Text::from_bytes(fixtures::kExampleRaw);
  REQUIRE(read_file(dir.file("ex.rlbwt")) == bwt_runs_to_lines(build_bwt_runs(t)));

  SECTION("a clean file passes the standalone check") {
    RunResult chk =
        run_cli("convert --parse " + dir.file("ex.lz77") + " --check " + dir.file("ex.rlbwt"));
    REQUIRE(chk.exit_code == 0);
  }

  SECTION("corrupting one run is caught with the verification exit code") {
    std::string lines = read_file(dir.file("ex.rlbwt"));
    std::size_t at = lines.find("6 b");
    REQUIRE(at != std::string::npos);
    lines[at] = '5';
    write_file(dir.file("bad.rlbwt"), lines);
    RunResult chk =
        run_cli("convert --parse " + dir.file("ex.lz77") + " --check " + dir.file("bad.rlbwt"));
    REQUIRE(chk.exit_code == 2);
  }

  SECTION("conversion straight from a text file matches the parse route") {
    RunResult direct = run_cli("convert --text " + dir.file("ex.txt") + " --out " +
                               dir.file("ex2.rlbwt"));
    REQUIRE(direct.exit_code == 0);
    REQUIRE(read_file(dir.file("ex2.rlbwt")) == read_file(dir.file("ex.rlbwt")));
  }
}

TEST_CASE("identical seeds give identical conversion output", "[cli]") {
  TempDir dir;
  Rng rng(20260816);
  Text t = random_text(rng, 200, 4);
  write_file(dir.file("r.txt"), t.bytes());
  for (int rep = 0; rep < 2; ++rep) {
    RunResult res = run_cli("convert --seed 7 --text " + dir.file("r.txt") + " --out " +
                            dir.file("o" + std::to_string(rep) + ".rlbwt"));
    REQUIRE(res.exit_code == 0);
  }
  REQUIRE(read_file(dir.file("o0.rlbwt")) == read_file(dir.file("o1.rlbwt")));

  RunResult other =
      run_cli("convert --seed 8 --text " + dir.file("r.txt") + " --out " + dir.file("o2.rlbwt"));
  REQUIRE(other.exit_code == 0);
  REQUIRE(read_file(dir.file("o2.rlbwt")) == read_file(dir.file("o0.rlbwt")));
}

TEST_CASE("index queries answer in one-based text positions", "[cli]") {
  TempDir dir;
  write_file(dir.file("ex.txt"), fixtures::kExampleRaw);
  REQUIRE(run_cli("index build --text " + dir.file("ex.txt") + " --out " + dir.file("ex.g"))
              .exit_code == 0);

  RunResult whole = run_cli("index query --grammar " + dir.file("ex.g") +
                            " --op count --pat-start 1 --pat-len 20");
  REQUIRE(whole.exit_code == 0);
  REQUIRE(whole.output.find("\"result\":1") != std::string::npos);

  // Pattern T[3..5] = "aba"; occurrences are checked against direct scanning.
  Text t = Text::from_bytes(fixtures::kExampleRaw);
  std::vector<std::int64_t> expected = naive_occurrences(t.view(), t.view().substr(2, 3));
  std::string want = "[";
  for (std::size_t i = 0; i < expected.size(); ++i)
    want += (i ? "," : "") + std::to_string(expected[i] + 1);
  want += "]";
  RunResult rep = run_cli("index query --grammar " + dir.file("ex.g") +
                          " --op report --pat-start 3 --pat-len 3");
  REQUIRE(rep.exit_code == 0);
  REQUIRE(rep.output.find(want) != std::string::npos);

  RunResult lm = run_cli("index query --grammar " + dir.file("ex.g") +
                         " --op leftmost --pat-start 3 --pat-len 3");
  REQUIRE(lm.output.find("\"result\":" + std::to_string(expected.front() + 1)) !=
          std::string::npos);
  RunResult rm = run_cli("index query --grammar " + dir.file("ex.g") +
                         " --op rightmost --pat-start 3 --pat-len 3");
  REQUIRE(rm.output.find("\"result\":" + std::to_string(expected.back() + 1)) !=
          std::string::npos);

  SECTION("a window outside the text is a usage error") {
    RunResult bad = run_cli("index query --grammar " + dir.file("ex.g") +
                            " --op count --pat-start 19 --pat-len 5");
    REQUIRE(bad.exit_code == 3);
  }
}

TEST_CASE("exit codes separate usage, verification, and input failures", "[cli]") {
  REQUIRE(run_cli("frobnicate").exit_code == 3);
  REQUIRE(run_cli("convert").exit_code == 3);
  REQUIRE(run_cli("measure /definitely/not/here.txt").exit_code == 4);
  REQUIRE(run_cli("--help").exit_code == 0);
}

TEST_CASE("environment variables supply defaults that flags override", "[cli]") {
  TempDir dir;
  write_file(dir.file("ex.txt"), fixtures::kExampleRaw);
  RunResult env = run_cli_env("RLX_FORMAT=csv", "measure " + dir.file("ex.txt"));
  REQUIRE(env.exit_code == 0);
  REQUIRE(env.output.rfind("label,", 0) == 0);

  RunResult flag = run_cli_env("RLX_FORMAT=csv", "measure --format text " + dir.file("ex.txt"));
  REQUIRE(flag.exit_code == 0);
  REQUIRE(flag.output.find("bounds=ok") != std::string::npos);
  REQUIRE(flag.output.rfind("label,", 0) != 0);
}

TEST_CASE("bench emits one timing row per input", "[cli]") {
  TempDir dir;
  write_file(dir.file("ex.txt"), fixtures::kExampleRaw);
  RunResult res = run_cli("bench --format csv " + dir.file("ex.txt"));
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.rfind("label,n,z,r,", 0) == 0);
  REQUIRE(res.output.find("ex.txt,20,8,8,") != std::string::npos);
}

}  // namespace
