#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "kmm/base.hpp"
#include "kmm/sparse.hpp"

namespace kmm {

// Per-character backward differences of the characteristic functions of X
// due to shift rho: one slot per character c (keyed by symbol value) holding
// X_c(i) - X_c(i - rho), entries in {-1, +1}. With reversed set, the
// functions are built for X reversed, i.e. slot c has an entry wherever
// X[len-1-i] == c differs from X[len-1-(i-rho)] == c.
FuncSeq backward_diff_seq(const SymString& X, Index rho, bool reversed);

// Ring of the last 2*rho cross-correlation values, driving the recurrence
//   C(i) = conv(i) - C(i - 2*rho) + 2*C(i - rho),
// with C read as 0 below index 0.
class CorrBuffer {
 public:
  explicit CorrBuffer(Index rho);
  Value step(Value conv_val, Index i);
  Index next_index() const { return next_; }
  std::uint64_t cells() const { return ring_.size(); }

 private:
  Index rho_;
  Index next_ = 0;
  std::vector<Value> ring_;  // value at index j lives in ring_[j mod 2*rho]
};

// Converts a cross-correlation value into a Hamming distance for a full
// alignment of a length-m pattern.
Value ham_from_corr(Value corr, Index m);

// Least rho >= 1 such that P disagrees with its rho-shift in at most d
// positions; |P| when no smaller shift qualifies.
Index smallest_dperiod(const SymString& P, Index d);

// Window representation of a nearly periodic string: a length-rho base plus
// the list of positions disagreeing with their rho-predecessor. All three
// operations are O(1); space is O(mismatches + rho).
class PeriodicRep {
 public:
  PeriodicRep(Index rho, Index start);

  // Appends the next character; prev_rho must be the character rho positions
  // back (ignored while the window is still shorter than rho).
  void grow(Symbol next, Symbol prev_rho);

  // Removes and returns the first character of the window.
  Symbol shrink();

  // Advances the left end to new_lo. Requires the dropped prefix to be
  // exactly periodic: no recorded mismatch at any index < new_lo + rho.
  void crop(Index new_lo);

  Index lo() const { return lo_; }
  Index hi() const { return hi_; }  // exclusive
  Index size() const { return hi_ - lo_; }
  bool empty() const { return hi_ == lo_; }
  Index mismatches() const { return static_cast<Index>(list_.size()); }
  // Index of the earliest recorded mismatch; only valid when mismatches()>0.
  Index front_mismatch_index() const { return list_.front().first; }

  // Reconstructs the full window (linear; for checks and tests).
  SymString snapshot() const;

  std::uint64_t cells() const { return base_.size() + list_.size(); }

 private:
  Index rho_;
  Index lo_, hi_;
  std::vector<Symbol> base_;
  std::deque<std::pair<Index, Symbol>> list_;
};

}  // namespace kmm
