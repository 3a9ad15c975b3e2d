#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>

#include "kmm/base.hpp"
#include "kmm/conv.hpp"
#include "kmm/counters.hpp"
#include "kmm/sparse.hpp"

namespace kmm {

// Incremental batched convolution summation. G is preprocessed into
// overlapping double-width restrictions; F arrives in batches of support
// width s (batch i covers [s*(i-1) .. s*i)), and each batch yields the
// summation restricted to the same window. Diameters stay O(s), so every
// sub-convolution is cheap regardless of how far the stream has advanced.
class BatchedState {
 public:
  // block_len = s, domain_bound = n with supp(G) (and all batches) in
  // [0 .. n-1]. fft_threshold overrides the per-slot method cutoff
  // (default 2s, the restricted diameter bound).
  BatchedState(const FuncSeq& G, Index block_len, Index domain_bound,
               WorkCounters* wc = nullptr, Index fft_threshold = 0);

  // One-shot: validates, runs the whole batch, returns the restricted sum.
  SparseFunc ingest_batch(const FuncSeq& batch);

  // Resumable variant for de-amortizing callers: begin_batch enqueues the
  // work, advance spends budget, take_output returns the finished window.
  void begin_batch(FuncSeq batch);
  bool advance(std::uint64_t budget);
  bool has_job() const { return job_.has_value(); }
  bool job_done() const { return job_.has_value() && job_->done(); }
  // Outstanding execution plus undrained counter charges.
  std::uint64_t pending_estimate() const {
    return job_ ? job_->remaining_estimate() : 0;
  }
  std::uint64_t job_estimate() const { return job_ ? job_->total_estimate() : 0; }
  SparseFunc take_output();

  Index block_len() const { return s_; }
  Index domain_bound() const { return n_; }
  Index block_count() const { return q_; }
  Index next_ordinal() const { return next_ordinal_; }

  // For inspection: the stored restriction of slot j to the a-th window,
  // or nullptr.
  const SparseFunc* g_window(Index a, Index j) const;
  std::uint64_t g_star_norm() const;
  std::uint64_t f_star_norm() const;

  std::uint64_t cells() const;

 private:
  Index s_, n_, q_;
  Index threshold_;
  Index next_ordinal_ = 1;
  Index job_ordinal_ = 0;
  WorkCounters* wc_;
  std::map<Index, FuncSeq> g_star_;              // window a -> G restricted
  std::deque<std::pair<Index, FuncSeq>> ring_;   // (ordinal, batch), newest last
  std::uint64_t f_norm_seen_ = 0;
  std::optional<ConvJob> job_;
};

}  // namespace kmm
