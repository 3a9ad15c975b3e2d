#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "kmm/base.hpp"
#include "kmm/conv.hpp"
#include "kmm/counters.hpp"
#include "kmm/sparse.hpp"

namespace kmm {

// Online convolution summation with zero delay. G is split into dyadic
// level restrictions; the F stream is consumed index by index, and each
// level runs at most one background convolution over a trailing window,
// paced so it finishes before its results are first needed. The value
// [F (x) G](i) returned by push_index is final at return.
class OnlineConv {
 public:
  // supp(G) must lie in [0..m-1]; indices pushed must lie in [0..n-1].
  OnlineConv(const FuncSeq& G, Index m, Index n, WorkCounters* wc = nullptr,
             Index fft_threshold = 0);

  using Slice = std::vector<std::pair<Index, Value>>;  // (slot j, f_j(i))

  // Feeds all nonzero entries at index i (the next index) and returns the
  // finished summation value at i.
  Value push_index(const Slice& slice, Index i);

  Index levels() const { return M_; }
  // Closed interval covered by level a, for inspection.
  static std::pair<Index, Index> level_range(Index a) {
    return {(Index(1) << a) - 2, (Index(1) << (a + 1)) - 3};
  }
  // Closed trailing window of level a, block b.
  static std::pair<Index, Index> block_range(Index a, Index b) {
    const Index w = Index(1) << (a - 1);
    return {(b - 4) * w + 2, (b - 1) * w + 1};
  }

  std::uint64_t cells() const;

 private:
  struct LevelJob {
    Index b = -1;
    Index ingest_next = 0;  // next stream index to fold into the window
    Index ingest_hi = -1;   // inclusive end of the window
    bool ingesting = true;
    FuncSeq window;
    std::optional<ConvJob> conv;
    Index deadline = -1;            // push index by which the job must finish
    std::uint64_t conv_bound = 1;  // a priori convolution cost bound
  };

  struct Level {
    FuncSeq g;
    std::optional<LevelJob> job;
    SparseFunc ready;
    Index ready_b = -1;
  };

  void start_job(Index a, Index b);
  void advance_job(Index a, Index now);
  void finish_job(Index a);
  Index level_threshold(Index a) const;
  std::uint64_t entries_between(Index lo, Index hi) const;  // inclusive

  Index m_, n_, M_;
  Index threshold_override_;
  WorkCounters* wc_;
  Index next_i_ = 0;
  std::vector<Level> levels_;  // index a-1

  // Trailing slices of F with absolute cumulative entry counts.
  std::deque<Slice> slices_;
  std::deque<std::uint64_t> cum_;  // entries through each stored slice
  Index ring_base_ = 0;
  std::uint64_t ring_entries_ = 0;
  Index retention_ = 0;
};

}  // namespace kmm
