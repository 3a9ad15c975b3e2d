#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <limits>

#include "doctest.h"
#include "kmm/conv.hpp"
#include "kmm/sparse.hpp"
#include "testutil.hpp"

using namespace kmm;
using kmmtest::Rng;

TEST_CASE("restricted keeps the half-open interval") {
  SparseFunc f{{0, 1}, {5, 2}};
  CHECK(f.restricted(0, 5) == SparseFunc{{0, 1}});
  CHECK(SparseFunc{}.restricted(0, 10) == SparseFunc{});
  SparseFunc g{{3, -4}};
  CHECK(g.restricted(3, 4) == g);
}

TEST_CASE("restriction over a partition reassembles the function") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    SparseFunc f = kmmtest::random_func(rng, 12, -20, 20);
    // Random cut points spanning the support.
    std::vector<Index> cuts{-25};
    while (cuts.back() < 25)
      cuts.push_back(cuts.back() + kmmtest::rand_int(rng, 1, 9));
    SparseFunc sum;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      SparseFunc part = f.restricted(cuts[i], cuts[i + 1]);
      for (const auto& [k, v] : part.entries()) sum.add(k, v);
    }
    CHECK(sum == f);
  }
}

TEST_CASE("convolve_pair delta and two-term expansion") {
  SparseFunc delta{{0, 1}};
  CHECK(convolve_pair(delta, delta, 64) == SparseFunc{{0, 1}});
  SparseFunc f{{0, 1}, {2, 3}};
  SparseFunc g{{1, 2}};
  SparseFunc want{{1, 2}, {3, 6}};
  CHECK(convolve_pair(f, g, 64) == want);
  CHECK(convolve_pair(f, g, 1) == want);  // dense path agrees
}

TEST_CASE("convolve_pair matches the naive oracle on both paths") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    SparseFunc f = kmmtest::random_func(rng, 8, -10, 10);
    SparseFunc g = kmmtest::random_func(rng, 8, -10, 10);
    auto want = kmmtest::naive_convolve(f, g);
    CHECK(kmmtest::to_map(convolve_pair(f, g, 1)) == want);
    CHECK(kmmtest::to_map(convolve_pair(f, g, 1000000)) == want);
  }
}

TEST_CASE("convolve_pair exhaustive small supports") {
  // All support layouts up to 3 entries in [0..3], values in [-3..3].
  std::vector<SparseFunc> funcs;
  for (int mask = 0; mask < 16; ++mask) {
    SparseFunc base;
    std::vector<Index> idx;
    for (Index i = 0; i < 4; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    if (idx.size() > 2) continue;
    std::vector<Value> vals(idx.size(), -3);
    while (true) {
      SparseFunc f;
      for (std::size_t i = 0; i < idx.size(); ++i) f.set(idx[i], vals[i]);
      funcs.push_back(f);
      std::size_t p = 0;
      while (p < vals.size() && vals[p] == 3) vals[p++] = -3;
      if (p == vals.size()) break;
      ++vals[p];
      if (vals[p] == 0) ++vals[p];
    }
    if (idx.empty()) funcs.push_back(SparseFunc{});
  }
  for (const auto& f : funcs)
    for (const auto& g : funcs) {
      auto want = kmmtest::naive_convolve(f, g);
      CHECK(kmmtest::to_map(convolve_pair(f, g, 1)) == want);
      CHECK(kmmtest::to_map(convolve_pair(f, g, 1 << 20)) == want);
    }
}

TEST_CASE("convolve_pair rejects nonpositive thresholds") {
  SparseFunc f{{0, 1}};
  CHECK_THROWS_AS(convolve_pair(f, f, 0), DomainError);
}

TEST_CASE("value overflow raises an arithmetic capacity error") {
  const Value big = std::numeric_limits<Value>::max() / 2;
  SparseFunc f{{0, big}};
  SparseFunc g{{0, 4}};
  CHECK_THROWS_AS(convolve_pair(f, g, 64), ArithmeticCapacityError);
  // Same inputs routed at the dense threshold: certificate fails, falls back
  // to checked pairs, still throws.
  SparseFunc f2{{0, big}, {1, big}};
  SparseFunc g2{{0, 4}, {1, 4}};
  CHECK_THROWS_AS(convolve_pair(f2, g2, 1), ArithmeticCapacityError);
}

TEST_CASE("conv_summation basic examples") {
  FuncSeq F, G;
  F.set_slot(1, SparseFunc{{0, 1}});
  F.set_slot(2, SparseFunc{{1, 1}});
  G.set_slot(1, SparseFunc{{0, 1}});
  G.set_slot(2, SparseFunc{{0, 1}});
  SparseFunc want{{0, 1}, {1, 1}};
  CHECK(conv_summation(F, G, 8) == want);

  FuncSeq empty;
  CHECK(conv_summation(empty, G, 8) == SparseFunc{});
}

TEST_CASE("conv_summation equals the naive per-slot oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    FuncSeq F, G;
    for (Index j = 1; j <= 5; ++j) {
      F.set_slot(j, kmmtest::random_func(rng, 6, 0, 64));
      G.set_slot(j, kmmtest::random_func(rng, 6, 0, 64));
    }
    auto want = kmmtest::naive_summation(F, G);
    CHECK(kmmtest::to_map(conv_summation(F, G, 64)) == want);
  }
}

TEST_CASE("conv_summation shape check") {
  FuncSeq F(3), G(4);
  F.set_slot(1, SparseFunc{{0, 1}});
  G.set_slot(1, SparseFunc{{0, 1}});
  CHECK_THROWS_AS(conv_summation(F, G, 8), ShapeError);
}

TEST_CASE("conv_summation is linear under disjoint slot concatenation") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    FuncSeq F1, F2, G, Gboth, Fboth;
    for (Index j = 1; j <= 3; ++j) {
      SparseFunc f1 = kmmtest::random_func(rng, 5, 0, 32);
      SparseFunc f2 = kmmtest::random_func(rng, 5, 0, 32);
      SparseFunc g = kmmtest::random_func(rng, 5, 0, 32);
      F1.set_slot(j, f1);
      F2.set_slot(j + 10, f2);
      G.set_slot(j, g);
      Fboth.set_slot(j, f1);
      Fboth.set_slot(j + 10, f2);
      Gboth.set_slot(j, g);
      Gboth.set_slot(j + 10, g);
    }
    FuncSeq G2;
    for (const auto& [j, g] : G.slots()) G2.set_slot(j + 10, g);
    SparseFunc a = conv_summation(F1, G, 32);
    SparseFunc b = conv_summation(F2, G2, 32);
    for (const auto& [i, v] : b.entries()) a.add(i, v);
    CHECK(a == conv_summation(Fboth, Gboth, 32));
  }
}

TEST_CASE("pair multiplication counters respect the hybrid bound") {
  Rng rng(41);
  const Index n = 64;
  for (int trial = 0; trial < 20; ++trial) {
    FuncSeq F, G;
    for (Index j = 1; j <= 4; ++j) {
      F.set_slot(j, kmmtest::random_func(rng, 16, 0, n));
      G.set_slot(j, kmmtest::random_func(rng, 16, 0, n));
    }
    WorkCounters wc;
    conv_summation(F, G, n, &wc);
    std::uint64_t bound = 0;
    for (const auto& [j, f] : F.slots()) {
      const SparseFunc* g = G.slot(j);
      if (!g) continue;
      bound += std::min<std::uint64_t>(
          std::uint64_t(f.size()) * g->size(),
          8 * kmm::detail::transform_units(n));
    }
    CHECK(wc.pair_mults <= bound);
  }
}

TEST_CASE("ConvJob advances in budgeted slot steps") {
  Rng rng(53);
  FuncSeq F, G;
  for (Index j = 1; j <= 6; ++j) {
    F.set_slot(j, kmmtest::random_func(rng, 8, 0, 40));
    G.set_slot(j, kmmtest::random_func(rng, 8, 0, 40));
  }
  std::vector<ConvJob::Task> tasks;
  for (const auto& [j, f] : F.slots()) {
    const SparseFunc* g = G.slot(j);
    if (g) tasks.push_back({&f, g});
  }
  ConvJob job(std::move(tasks), 40, std::numeric_limits<Index>::min(),
              std::numeric_limits<Index>::max(), nullptr);
  const std::uint64_t est = job.total_estimate();
  std::uint64_t calls = 0;
  while (!job.advance(8)) ++calls;
  CHECK(calls <= est / 8 + 1);
  CHECK(kmmtest::to_map(job.result()) == kmmtest::naive_summation(F, G));
}

TEST_CASE("ConvJob output restriction") {
  SparseFunc f{{0, 1}, {1, 1}, {2, 1}};
  SparseFunc g{{0, 1}, {3, 1}};
  std::vector<ConvJob::Task> tasks{{&f, &g}};
  ConvJob job(std::move(tasks), 100, 2, 4, nullptr);
  job.advance(std::numeric_limits<std::uint64_t>::max());
  auto full = kmmtest::naive_convolve(f, g);
  std::map<Index, Value> want;
  for (const auto& [i, v] : full)
    if (i >= 2 && i < 4) want[i] = v;
  CHECK(kmmtest::to_map(job.result()) == want);
}
