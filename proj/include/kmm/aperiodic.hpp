#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "kmm/base.hpp"
#include "kmm/counters.hpp"
#include "kmm/engine.hpp"

namespace kmm {

// Filter primes: ceil(log2 m) distinct primes sampled uniformly from
// [k*L, 34*k*L] with L = ceil(log2 m)^2, intersected with [2..m]. When that
// range holds too few primes (tiny m), falls back to the smallest
// ceil(log2 m) primes above k.
std::vector<Index> sample_filter_primes(Index k, Index m, std::mt19937_64& rng);

// Localization primes: greedily the smallest primes in
// [max(2, ln m), 5 ln m] until their product exceeds m.
std::vector<Index> localization_primes(Index m);

// Unique x in [0, prod moduli) with x = r (mod q) for every pair, or
// nullopt when x >= bound (no admissible solution).
std::optional<Index> crt_combine(
    const std::vector<std::pair<Index, Index>>& residue_mod, Index bound);

// Column view of a pattern modulo p: column r is the subsequence
// P[r], P[r+p], P[r+2p], ...; equal columns share one id.
struct OffsetDecomposition {
  Index p = 0;
  Index m = 0;
  Index long_len = 0;   // ceil(m/p)
  Index short_len = 0;  // floor(m/p)
  Index num_long = 0;   // columns 0..num_long-1 have long_len
  Index id_count = 0;
  std::vector<Index> ids;  // column -> dense id
  Index len(Index r) const { return (m - r + p - 1) / p; }
};

OffsetDecomposition build_decomposition(const SymString& P, Index p);

// Outcome of probing one mismatched column: the offset strings are equal,
// differ in exactly one position (recovered), or differ in several.
struct RecoverResult {
  enum Kind { kZero, kOne, kMany } kind;
  Index local_index = -1;  // for kOne: mismatch index within the column
};

// Streaming matcher for patterns with no short approximate period. A bank
// of prime-strided offset filters admits candidate end positions; admitted
// candidates get their head distance from isolated-mismatch recovery and
// their 2k tail from direct comparison, reported with zero delay.
class AperiodicEngine final : public StreamEngine {
 public:
  AperiodicEngine(SymString P, Index k, std::uint64_t seed,
                  WorkCounters* wc = nullptr, EngineOptions opt = {});

  void push(Symbol c, ReportSink& out) override;
  std::uint64_t cells() const override;

  // Test hooks.
  bool last_filter_pass() const { return last_pass_; }
  const std::vector<Index>& filter_primes() const { return primes_; }
  const std::vector<Index>& second_primes() const { return qprimes_; }
  const std::vector<Index>& candidate_log() const { return candidate_log_; }
  Index column_distance(std::size_t prime_idx) const;
  // Probes one column of one prime against the window ending at the last
  // pushed position (which must be the candidate end).
  RecoverResult recover_column(std::size_t prime_idx, Index column,
                               Index end_pos) const;

 private:
  struct PrimeState {
    OffsetDecomposition decomp;
    std::uint64_t pow_long = 1, pow_short = 1;  // base^(len-1)
    std::unordered_map<std::uint64_t, Index> table_long, table_short;
    std::unordered_map<Index, std::vector<Index>> cols_long, cols_short;
    std::vector<std::uint64_t> fp_long, fp_short;  // per stream residue
    std::vector<Index> ring_long, ring_short;      // id per recent position
    std::vector<std::uint32_t> bucket;             // pending match counts
    Index nonempty_cols = 0;
    Index col_dist = -1;  // distance at the last pushed position
  };

  struct Candidate {
    Index j;           // head end position
    Index deadline;    // j + k
    bool naive = false;
    bool done = false;
    Value head_dist = 0;
    Value tail_mis = 0;
    // pending classification work: flat list of (prime_idx, column)
    std::vector<std::pair<std::size_t, Index>> columns;
    std::size_t next_column = 0;
    std::vector<Index> found;  // pattern positions of isolated mismatches
    std::uint64_t total_est = 1;
  };

  void build_prime_state();
  Symbol ring_at(Index pos) const { return ring_[pos % ring_.size()]; }
  std::uint64_t hash_pattern_column(Index p, Index r, Index qq, Index u,
                                    Index len) const;
  std::uint64_t hash_text_column(Index start, Index p, Index qq, Index u,
                                 Index len) const;
  RecoverResult recover_column_at(const PrimeState& ps, Index column,
                                  Index end_pos) const;
  void admit(Index j);
  void advance_candidate(Candidate& cand, Index now);
  void finish_candidate(Candidate& cand, Index now);

  SymString pattern_;
  Index m_, k_, m_head_;
  WorkCounters* wc_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::uint64_t fp_base_;
  std::vector<Index> primes_;
  std::vector<Index> qprimes_;
  std::vector<PrimeState> states_;
  std::vector<Symbol> ring_;
  Index i_ = 0;
  bool last_pass_ = false;
  std::deque<Candidate> live_;
  std::vector<Index> candidate_log_;

  static constexpr Index kMaxLiveCandidates = 8;
};

}  // namespace kmm
