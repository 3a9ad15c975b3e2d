#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "kmm/ham.hpp"
#include "kmm/harness.hpp"
#include "kmm/periodic.hpp"
#include "testutil.hpp"

using namespace kmm;
using kmmtest::Rng;

namespace {

SymString str(const char* s) { return from_bytes(s); }

// Feeds T through a CombinedEngine and returns the exact distances for all
// full alignments.
std::vector<Value> run_combined(const SymString& P, const SymString& T,
                                Index rho, Index k, Index s,
                                WorkCounters* wc = nullptr) {
  CombinedEngine eng(P, rho, k, s, std::max<Index>(T.size(), P.size()) + 1,
                     wc);
  std::vector<Value> out;
  for (Symbol c : T) {
    auto v = eng.push(c);
    if (v) out.push_back(*v);
  }
  return out;
}

std::vector<Value> oracle_dists(const SymString& P, const SymString& T) {
  std::vector<Value> out;
  const Index m = P.size(), n = T.size();
  for (Index i = m - 1; i < n; ++i)
    out.push_back(kmmtest::naive_ham(T, i - m + 1, P, 0, m));
  return out;
}

SymString periodic_text(Rng& rng, Index n, Index rho, Symbol sigma,
                        Index edits) {
  SymString base = kmmtest::random_string(rng, rho, sigma);
  SymString T(n);
  for (Index i = 0; i < n; ++i) T[i] = base[i % rho];
  std::uniform_int_distribution<Index> pos(0, n - 1);
  std::uniform_int_distribution<Symbol> sym(0, sigma - 1);
  for (Index e = 0; e < edits; ++e) T[pos(rng)] = sym(rng);
  return T;
}

}  // namespace

TEST_CASE("combined engine on an exactly periodic stream") {
  SymString P = str("abab");
  SymString T = str("ababab");
  auto got = run_combined(P, T, 2, 1, 2);
  // In-phase alignments (ends 3 and 5) match exactly; the off-phase window
  // "baba" misses every position.
  CHECK(got == std::vector<Value>{0, 4, 0});
}

TEST_CASE("head distances are final before they are needed") {
  Rng rng(3);
  SymString P = periodic_text(rng, 12, 2, 2, 1);
  SymString T = periodic_text(rng, 40, 2, 2, 3);
  WorkCounters wc;
  auto got = run_combined(P, T, 2, 2, 2, &wc);
  CHECK(got == oracle_dists(P, T));
  CHECK(wc.max_delay_head <= 2 * 2);
  CHECK(wc.deadline_misses == 0);
}

TEST_CASE("single letter pattern and text") {
  SymString P = str("aaaa");
  SymString T = str("aaaaaaaa");
  auto got = run_combined(P, T, 1, 1, 1);
  CHECK(got == std::vector<Value>(5, 0));
}

TEST_CASE("one injected mismatch is charged to the covering windows") {
  SymString P = str("abababab");
  SymString T = str("abababababababab");
  T[9] = 'c';
  auto got = run_combined(P, T, 2, 2, 2);
  auto want = oracle_dists(P, T);
  CHECK(got == want);
  // In-phase windows covering position 9 count exactly that one edit.
  for (Index end = 9; end <= 15; end += 2) CHECK(got[end - 7] == 1);
  CHECK(got[7 - 7] == 0);
}

TEST_CASE("combined distances match the oracle on noisy periodic streams") {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const Index rho = kmmtest::rand_int(rng, 1, 4);
    const Index k = kmmtest::rand_int(rng, rho, 6);
    const Index m = kmmtest::rand_int(rng, std::max<Index>(2 * k, 4), 40);
    const Index s = kmmtest::rand_int(rng, k, m);
    const Symbol sigma = Symbol(kmmtest::rand_int(rng, 2, 4));
    SymString P =
        periodic_text(rng, m, rho, sigma, kmmtest::rand_int(rng, 0, 3));
    SymString T = periodic_text(rng, kmmtest::rand_int(rng, m, 120), rho,
                                sigma, kmmtest::rand_int(rng, 0, 8));
    WorkCounters wc;
    auto got = run_combined(P, T, rho, k, s, &wc);
    CHECK(got == oracle_dists(P, T));
    CHECK(wc.max_delay_head <= 2 * s);
  }
}

TEST_CASE("fragment engine equals combined when the text is fully periodic") {
  Rng rng(23);
  const Index rho = 2, k = 2, s = 3, m = 12;
  SymString P = periodic_text(rng, m, rho, 2, 2);
  SymString T = periodic_text(rng, m + m / 2, rho, 2, 0);
  FragmentEngine frag(P, rho, 6 * k, k, s, m + std::max<Index>(1, m / 2));
  std::vector<Value> got;
  for (Symbol c : T) {
    auto v = frag.push(c);
    if (v) got.push_back(*v);
  }
  auto want = oracle_dists(P, T);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i] == kExceedsK)
      CHECK(want[i] > k);
    else
      CHECK(got[i] == want[i]);
  }
}

TEST_CASE("fragment engine: junk prefix then a periodic region") {
  Rng rng(29);
  const Index rho = 2, k = 3, s = 3;
  SymString P = periodic_text(rng, 16, rho, 2, 2);
  const Index cap = 16 + 8;
  SymString T = periodic_text(rng, cap, rho, 2, 0);
  for (Index i = 0; i < 6; ++i) T[i] = Symbol(kmmtest::rand_int(rng, 5, 9));
  std::copy(P.begin(), P.end(), T.begin() + 7);
  FragmentEngine frag(P, rho, 6 * k, k, s, cap);
  std::vector<std::pair<Index, Value>> got;
  for (Index i = 0; i < Index(T.size()); ++i) {
    auto v = frag.push(T[i]);
    if (v) got.push_back({i, *v});
  }
  auto want = oracle_dists(P, T);
  for (auto [pos, v] : got) {
    Value w = want[pos - 15];
    if (v == kExceedsK)
      CHECK(w > k);
    else
      CHECK(v == w);
  }
  bool found = false;
  for (auto [pos, v] : got)
    if (pos == 22) {
      CHECK(v == 0);
      found = true;
    }
  CHECK(found);
}

TEST_CASE("fragment engine halts after the periodic core ends") {
  Rng rng(31);
  const Index rho = 1, k = 1, s = 1, m = 16;
  SymString P(m, 'a');
  const Index cap = m + m / 2;
  SymString T(cap, 'a');
  for (Index i = m / 2; i < cap; ++i) T[i] = Symbol('b' + (i % 3));
  FragmentEngine frag(P, rho, 6 * k, k, s, cap);
  std::vector<Value> got;
  for (Symbol c : T) {
    auto v = frag.push(c);
    if (v) got.push_back(*v);
  }
  CHECK(frag.stopped());
  auto want = oracle_dists(P, T);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i] == kExceedsK)
      CHECK(want[i] > k);
    else
      CHECK(got[i] == want[i]);
  }
}

TEST_CASE("periodic core bounds cover every low-distance occurrence") {
  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const Index rho = kmmtest::rand_int(rng, 1, 3);
    const Index k = kmmtest::rand_int(rng, rho, 4);
    const Index m = kmmtest::rand_int(rng, std::max<Index>(2 * k, 4), 24);
    const Index s = k;
    const Index cap = m + std::max<Index>(1, m / 2);
    SymString P = periodic_text(rng, m, rho, 2, kmmtest::rand_int(rng, 0, 2));
    SymString T = kmmtest::random_string(rng, cap, 2);
    if (kmmtest::rand_int(rng, 0, 1)) {
      SymString mid = periodic_text(rng, m, rho, 2, 1);
      std::copy(mid.begin(), mid.end(), T.begin() + (cap - m) / 2);
    }
    FragmentEngine frag(P, rho, 6 * k, k, s, cap);
    for (Symbol c : T) frag.push(c);
    const Index lo = frag.tstar_lo(), hi = frag.tstar_hi();
    auto want = oracle_dists(P, T);
    for (std::size_t i = 0; i < want.size(); ++i)
      if (want[i] <= k) {
        const Index end = Index(i) + m - 1;
        CHECK(end - m + 1 >= lo);
        CHECK(end < hi);
      }
    if (lo >= 0 && hi > lo) {
      // The core tolerates at most 2d + 4k + rho mismatches at its shift.
      Index mis = 0;
      for (Index x = lo; x + rho < hi; ++x)
        if (T[x] != T[x + rho]) ++mis;
      CHECK(mis <= 2 * (6 * k) + 4 * k + rho);
    }
  }
}

TEST_CASE("split driver covers every position exactly once") {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const Index rho = kmmtest::rand_int(rng, 1, 3);
    const Index k = kmmtest::rand_int(rng, rho, 5);
    const Index m = kmmtest::rand_int(rng, std::max<Index>(2 * k, 4), 32);
    const Index s = kmmtest::rand_int(rng, k, m);
    const Index n = kmmtest::rand_int(rng, 1, 4 * m);
    SymString P = periodic_text(rng, m, rho, 2, kmmtest::rand_int(rng, 0, 2));
    SymString T = kmmtest::random_string(rng, n, 2);
    if (n >= m)
      for (Index plant = kmmtest::rand_int(rng, 0, 2); plant > 0; --plant) {
        Index at = kmmtest::rand_int(rng, 0, n - m);
        std::copy(P.begin(), P.end(), T.begin() + at);
      }
    WorkCounters wc;
    SplitDriver driver(P, k, s, rho, &wc);
    VectorSink sink;
    run_stream(driver, T, sink, &wc);
    auto want = oracle_kmismatch(P, T, k);
    REQUIRE(sink.reports().size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(sink.reports()[i].pos == want[i].pos);
      CHECK(sink.reports()[i].value == want[i].value);
    }
    CHECK(wc.max_delay_output == 0);
    CHECK(wc.max_delay_head <= 2 * s);
  }
}

TEST_CASE("split driver with a short text emits nothing") {
  SymString P = str("abababab");
  SymString T = str("abab");
  SplitDriver driver(P, 2, 4, 2);
  VectorSink sink;
  run_stream(driver, T, sink);
  CHECK(sink.reports().empty());
}

TEST_CASE("distance k+1 becomes the marker through the driver") {
  SymString P = str("aaaaaaaa");
  SymString T = str("aaaaaabbaaaaaa");
  const Index k = 1;
  SplitDriver driver(P, k, 4, 1);
  VectorSink sink;
  run_stream(driver, T, sink);
  auto want = oracle_kmismatch(P, T, k);
  REQUIRE(sink.reports().size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(sink.reports()[i].value == want[i].value);
  bool has_marker = false;
  for (const auto& r : sink.reports()) has_marker |= r.value == kExceedsK;
  CHECK(has_marker);
}
