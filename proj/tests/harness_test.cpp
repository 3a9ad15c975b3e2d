#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kmm/ham.hpp"
#include "kmm/harness.hpp"
#include "kmm/periodic.hpp"
#include "testutil.hpp"

using namespace kmm;
using kmmtest::Rng;

namespace {

SymString str(const char* s) { return from_bytes(s); }

std::string reports_of(const std::vector<MatchReport>& rs) {
  return format_reports(rs);
}

// Runs the engine selected for (P,k,s) over T and formats the reports.
std::string run_auto(const SymString& P, const SymString& T, Index k, Index s,
                     std::uint64_t seed, WorkCounters* wc = nullptr) {
  auto eng = engine_select(P, k, s, seed, wc);
  VectorSink sink;
  run_stream(*eng, T, sink, wc);
  return reports_of(sink.reports());
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = "/tmp/kmm_test_" + std::to_string(getpid()) + "_" +
           std::to_string(counter++);
    std::ofstream f(path, std::ios::binary);
    f << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string cli_path() {
  const char* p = std::getenv("KMM_CLI");
  return p ? p : "./build/kmismatch";
}

int run_cli_cmd(const std::string& args, std::string& out) {
  TempFile out_file("");
  std::string cmd = cli_path() + " " + args + " > " + out_file.path + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  std::ifstream f(out_file.path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  out = ss.str();
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("engine selection follows the approximate period") {
  CHECK(smallest_dperiod(str("abababab"), 12) <= 2);
  auto periodic = engine_select(str("abababab"), 2, 4, 1);
  CHECK(dynamic_cast<SplitDriver*>(periodic.get()) != nullptr);

  Rng rng(3);
  SymString P = gen_aperiodic_pattern(rng, 64, 1, 26);
  auto aperiodic = engine_select(P, 1, 32, 1);
  CHECK(dynamic_cast<SplitDriver*>(aperiodic.get()) == nullptr);

  auto single = engine_select(str("z"), 1, 1, 1);
  CHECK(dynamic_cast<SplitDriver*>(single.get()) != nullptr);

  CHECK_THROWS_AS(engine_select(str("abc"), 2, 1, 1), ConfigError);
  CHECK_THROWS_AS(engine_select(str("abc"), 1, 9, 1), ConfigError);
}

TEST_CASE("oracle basics") {
  auto r1 = oracle_kmismatch(str("ab"), str("abab"), 0);
  REQUIRE(r1.size() == 3);
  CHECK(r1[0].pos == 1);
  CHECK(r1[0].value == 0);
  CHECK(r1[1].value == kExceedsK);
  CHECK(r1[2].value == 0);

  auto r2 = oracle_kmismatch(str("ab"), str("bbbb"), 1);
  for (const auto& r : r2) CHECK(r.value == 1);

  // Threshold at or above m is vacuous: every window reports its distance.
  auto r3 = oracle_kmismatch(str("abc"), str("xyzabc"), 3);
  for (const auto& r : r3) CHECK(r.value >= 0);
}

TEST_CASE("auto mode matches the oracle across both pipelines") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Index k = kmmtest::rand_int(rng, 1, 6);
    const Index m = kmmtest::rand_int(rng, std::max<Index>(4, 2 * k), 96);
    const Index s = kmmtest::rand_int(rng, k, m);
    const Symbol sigma = Symbol(kmmtest::rand_int(rng, 2, 26));
    SymString P = trial % 2 == 0 ? gen_periodic_pattern(rng, m, k, sigma)
                                 : kmmtest::random_string(rng, m, sigma);
    SymString T =
        gen_text_with_plants(rng, P, kmmtest::rand_int(rng, 0, 600), k, sigma);
    std::string want = reports_of(oracle_kmismatch(P, T, k));
    std::string got = run_auto(P, T, k, s, 100 + trial);
    if (got != want) {
      // Aperiodic runs are randomized; a fresh seed must clear it.
      CHECK(run_auto(P, T, k, s, 7700 + trial) == want);
    }
  }
}

TEST_CASE("cli: oracle and auto modes produce identical bytes") {
  Rng rng(17);
  SymString P = gen_periodic_pattern(rng, 24, 3, 4);
  SymString T = gen_text_with_plants(rng, P, 400, 3, 4);
  std::string pat(P.begin(), P.end()), text(T.begin(), T.end());
  for (auto& c : pat) c = char('a' + (c % 4));
  for (auto& c : text) c = char('a' + (c % 4));
  TempFile pf(pat), tf(text);
  std::string auto_out, oracle_out;
  int rc1 = run_cli_cmd("--pattern " + pf.path + " --text " + tf.path +
                            " --k 3 --s 8 --mode auto",
                        auto_out);
  int rc2 = run_cli_cmd("--pattern " + pf.path + " --text " + tf.path +
                            " --k 3 --s 8 --mode oracle",
                        oracle_out);
  CHECK(rc1 == 0);
  CHECK(rc2 == 0);
  CHECK(auto_out == oracle_out);
  CHECK(!auto_out.empty());
}

TEST_CASE("cli: empty text succeeds with no reports") {
  TempFile pf("abab"), tf("");
  std::string out;
  int rc = run_cli_cmd(
      "--pattern " + pf.path + " --text " + tf.path + " --k 1 --s 2", out);
  CHECK(rc == 0);
  CHECK(out.empty());
}

TEST_CASE("cli: config violations exit with code 2") {
  TempFile pf("abab"), tf("abab");
  std::string out;
  CHECK(run_cli_cmd("--pattern " + pf.path + " --text " + tf.path +
                        " --k 3 --s 2",
                    out) == 2);
  CHECK(run_cli_cmd("--pattern " + pf.path + " --text " + tf.path +
                        " --k 1 --s 9",
                    out) == 2);
  // Periodic mode on a pattern with no short approximate period.
  Rng rng(23);
  SymString P = gen_aperiodic_pattern(rng, 64, 1, 26);
  std::string pat;
  for (Symbol c : P) pat += char('a' + (c % 26));
  TempFile pf2(pat);
  CHECK(run_cli_cmd("--pattern " + pf2.path + " --text " + tf.path +
                        " --k 1 --s 8 --mode periodic",
                    out) == 2);
}

TEST_CASE("cli: missing files exit with code 3") {
  TempFile pf("abab");
  std::string out;
  CHECK(run_cli_cmd("--pattern " + pf.path +
                        " --text /nonexistent/file --k 1 --s 2",
                    out) == 3);
}

TEST_CASE("cli: u32 symbol mode exercises a large alphabet") {
  // Pattern and text as whitespace-separated 32-bit symbols.
  TempFile pf("70000 70001 70000 70001"), tf("70000 70001 70000 70001 70000 70001");
  std::string out;
  int rc = run_cli_cmd("--pattern " + pf.path + " --text " + tf.path +
                           " --k 1 --s 2 --symbols u32",
                       out);
  CHECK(rc == 0);
  CHECK(out == "3\t0\n4\t-1\n5\t0\n");
}

TEST_CASE("cli: metrics file carries the counter record") {
  Rng rng(29);
  SymString P = gen_periodic_pattern(rng, 16, 2, 2);
  std::string pat, text;
  for (Symbol c : P) pat += char('a' + (c % 2));
  SymString T = gen_text_with_plants(rng, P, 200, 2, 2);
  for (Symbol c : T) text += char('a' + (c % 2));
  TempFile pf(pat), tf(text), mf("");
  std::string out;
  int rc = run_cli_cmd("--pattern " + pf.path + " --text " + tf.path +
                           " --k 2 --s 4 --metrics " + mf.path,
                       out);
  CHECK(rc == 0);
  std::ifstream f(mf.path);
  std::string line;
  std::getline(f, line);
  CHECK(line.find("\"chars\":200") != std::string::npos);
  CHECK(line.find("pair_mults") != std::string::npos);
  CHECK(line.find("live_cells_max") != std::string::npos);
  CHECK(line.find("max_delay_observed") != std::string::npos);
  CHECK(line.find("candidates_admitted") != std::string::npos);
  CHECK(line.find("transform_calls") != std::string::npos);
}

TEST_CASE("report stream invariant: one report per position in order") {
  Rng rng(31);
  SymString P = gen_periodic_pattern(rng, 12, 2, 2);
  SymString T = gen_text_with_plants(rng, P, 300, 2, 2);
  auto eng = engine_select(P, 2, 6, 1);
  VectorSink sink;
  run_stream(*eng, T, sink);
  const Index m = P.size(), n = T.size();
  REQUIRE(Index(sink.reports().size()) == n - m + 1);
  for (Index i = 0; i < n - m + 1; ++i)
    CHECK(sink.reports()[i].pos == m - 1 + i);
}
