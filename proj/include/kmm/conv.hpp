#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "kmm/base.hpp"
#include "kmm/counters.hpp"
#include "kmm/sparse.hpp"

namespace kmm {

// Hybrid convolution of a single pair: entry-pair enumeration when
// |f|*|g| <= threshold, otherwise an exact integer transform over the
// support span. Results are exact int64; values that cannot be certified
// exact raise ArithmeticCapacityError.
SparseFunc convolve_pair(const SparseFunc& f, const SparseFunc& g,
                         Index threshold, WorkCounters* wc = nullptr);

// Convolution summation sum_j f_j * g_j over paired slots, accumulated
// into a dictionary of nonzero sums. Per-slot method chosen by comparing
// |f_j|*|g_j| to n (or threshold_override when positive). Slots present on
// only one side contribute nothing and cost nothing.
SparseFunc conv_summation(const FuncSeq& F, const FuncSeq& G, Index n,
                          WorkCounters* wc = nullptr,
                          Index threshold_override = 0);

// A resumable convolution summation over explicit slot pairs, advanced in
// work-unit budgets at slot granularity. Pointed-to functions must stay
// alive and unchanged until the job is done.
class ConvJob {
 public:
  struct Task {
    const SparseFunc* f;
    const SparseFunc* g;
  };

  ConvJob(std::vector<Task> tasks, Index dense_threshold, Index out_lo,
          Index out_hi, WorkCounters* wc);

  static std::uint64_t task_cost(const SparseFunc& f, const SparseFunc& g,
                                 Index dense_threshold);

  // Runs whole tasks until at least `budget` units are spent or nothing is
  // left. Returns true when the job is complete.
  bool advance(std::uint64_t budget);

  bool done() const { return next_ == tasks_.size(); }
  std::uint64_t total_estimate() const { return total_cost_; }
  // Outstanding liability: unexecuted work plus executed-but-uncharged work.
  std::uint64_t remaining_estimate() const {
    return remaining_cost_ + pending_units_;
  }

  const SparseFunc& result() const { return acc_; }
  SparseFunc take_result();

  std::uint64_t cells() const { return acc_.size(); }

 private:
  enum ChargeKind { kPairs, kTransform, kMisc };
  struct PendingCharge {
    ChargeKind kind;
    std::uint64_t units;
  };

  std::vector<Task> tasks_;
  std::vector<std::uint64_t> costs_;
  std::size_t next_ = 0;
  Index threshold_;
  Index out_lo_, out_hi_;
  std::uint64_t total_cost_ = 0;
  std::uint64_t remaining_cost_ = 0;
  WorkCounters* wc_;
  SparseFunc acc_;
  std::deque<PendingCharge> pending_;
  std::uint64_t pending_units_ = 0;
};

namespace detail {
// Unit charge for a dense transform over an output span of `len` cells.
std::uint64_t transform_units(Index len);
// Largest |result value| the two-prime transform reconstructs exactly.
Value transform_capacity();
}  // namespace detail

}  // namespace kmm
