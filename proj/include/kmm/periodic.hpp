#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "kmm/base.hpp"
#include "kmm/batched.hpp"
#include "kmm/counters.hpp"
#include "kmm/engine.hpp"
#include "kmm/ham.hpp"
#include "kmm/online.hpp"

namespace kmm {

// Exact sliding Hamming distances against a pattern with approximate period
// rho, for a text stream that is itself close to rho-periodic. The pattern
// is split at 2s characters from the end: the head runs through the batched
// convolution with bounded delay, the tail through the zero-delay online
// convolution, and each push returns the finished sum for the window ending
// at the pushed character.
class CombinedEngine {
 public:
  CombinedEngine(const SymString& P, Index rho, Index k, Index s,
                 Index domain_bound, WorkCounters* wc = nullptr,
                 EngineOptions opt = {});

  // Exact HAM(P, last m characters) once at least m characters arrived.
  std::optional<Value> push(Symbol c);

  Index pushed() const { return i_; }
  Index tail_len() const { return tail_len_; }
  std::uint64_t cells() const;

 private:
  struct Head {
    Head(const FuncSeq& G, Index s, Index domain_bound, Index rho,
         WorkCounters* wc, Index fft_threshold)
        : batched(G, s, domain_bound, wc, fft_threshold), corr(rho) {}
    BatchedState batched;
    CorrBuffer corr;
    FuncSeq cur_batch;
    std::uint64_t budget = 0;
    std::deque<std::pair<Index, Value>> out;  // (position, head distance)
  };
  struct Tail {
    Tail(const FuncSeq& G, Index m, Index n, Index rho, WorkCounters* wc,
         Index fft_threshold)
        : online(G, m, n, wc, fft_threshold), corr(rho) {}
    OnlineConv online;
    CorrBuffer corr;
  };

  Index m_, rho_, k_, s_, tail_len_, head_len_, n_dom_;
  WorkCounters* wc_;
  Index i_ = 0;
  std::vector<Symbol> ring_;  // last rho characters
  std::unique_ptr<Head> head_;
  std::unique_ptr<Tail> tail_;
};

// Drives one 3m/2-scale fragment of arbitrary text: the first half-window
// maintains the longest nearly periodic suffix, the second phase feeds the
// periodic core (with a catch-up of two characters per arrival) and halts
// once the right side stops being nearly periodic. Returns, per position at
// or past m-1: the exact distance when the window lies inside the periodic
// core, kExceedsK otherwise.
class FragmentEngine {
 public:
  FragmentEngine(const SymString& P, Index rho, Index d, Index k, Index s,
                 Index frag_capacity, WorkCounters* wc = nullptr,
                 EngineOptions opt = {});

  std::optional<Value> push(Symbol c);

  Index pushed() const { return i_; }
  // Bounds of the periodic core selected so far, local to the fragment.
  Index tstar_lo() const { return l0_; }
  Index tstar_hi() const { return stopped_ ? stop_pos_ : i_; }
  bool stopped() const { return stopped_; }
  std::uint64_t cells() const;

 private:
  void feed(Symbol c);

  SymString pattern_;
  Index m_, rho_, d_, k_, s_, half_, cap_;
  WorkCounters* wc_;
  EngineOptions opt_;
  Index i_ = 0;
  std::vector<Symbol> ring_;
  PeriodicRep rep_;
  std::unique_ptr<CombinedEngine> eng_;
  Index l0_ = -1;
  Index fed_ = 0;
  bool caught_up_ = false;
  bool stopped_ = false;
  Index stop_pos_ = -1;
  Index right_mis_ = 0;
  std::optional<MatchReport> emitted_;  // engine output surfaced this push
};

// Splits an unbounded text into overlapping fragments of length m + h
// (h = max(1, floor(m/2))) starting every h positions; each end position is
// reported by exactly one fragment.
class SplitDriver final : public StreamEngine {
 public:
  SplitDriver(SymString P, Index k, Index s, Index rho,
              WorkCounters* wc = nullptr, EngineOptions opt = {});

  void push(Symbol c, ReportSink& out) override;
  std::uint64_t cells() const override;

  Index stride() const { return h_; }

 private:
  struct Frag {
    Index start;
    std::unique_ptr<FragmentEngine> eng;
  };

  SymString pattern_;
  Index m_, k_, s_, rho_, d_, h_, cap_;
  WorkCounters* wc_;
  EngineOptions opt_;
  Index x_ = 0;
  std::deque<Frag> frags_;
};

}  // namespace kmm
