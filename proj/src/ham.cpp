#include "kmm/ham.hpp"

namespace kmm {

FuncSeq backward_diff_seq(const SymString& X, Index rho, bool reversed) {
  if (rho < 1) throw DomainError("backward_diff_seq: rho must be >= 1");
  const Index len = static_cast<Index>(X.size());
  auto at = [&](Index i) { return reversed ? X[len - 1 - i] : X[i]; };
  FuncSeq out;
  for (Index i = 0; i < len + rho; ++i) {
    const bool has_cur = i < len;
    const bool has_prev = i - rho >= 0 && i - rho < len;
    const Symbol cur = has_cur ? at(i) : 0;
    const Symbol prev = has_prev ? at(i - rho) : 0;
    if (has_cur && has_prev && cur == prev) continue;
    if (has_cur) out.add_entry(static_cast<Index>(cur), i, +1);
    if (has_prev) out.add_entry(static_cast<Index>(prev), i, -1);
  }
  return out;
}

CorrBuffer::CorrBuffer(Index rho) : rho_(rho) {
  if (rho < 1) throw DomainError("CorrBuffer: rho must be >= 1");
  ring_.assign(2 * rho, 0);
}

Value CorrBuffer::step(Value conv_val, Index i) {
  if (i != next_) throw OrderingError("CorrBuffer: indices must be consecutive");
  const Value back2 = i - 2 * rho_ >= 0 ? ring_[i % (2 * rho_)] : 0;
  const Value back1 = i - rho_ >= 0 ? ring_[(i - rho_) % (2 * rho_)] : 0;
  const Value cur = conv_val - back2 + 2 * back1;
  ring_[i % (2 * rho_)] = cur;
  ++next_;
  return cur;
}

Value ham_from_corr(Value corr, Index m) {
  if (m < 1) throw DomainError("ham_from_corr: m must be >= 1");
  if (corr < 0 || corr > m)
    throw PipelineError("ham_from_corr: correlation value out of range");
  return m - corr;
}

Index smallest_dperiod(const SymString& P, Index d) {
  if (d < 0) throw DomainError("smallest_dperiod: d must be >= 0");
  const Index m = static_cast<Index>(P.size());
  for (Index rho = 1; rho < m; ++rho) {
    Index mis = 0;
    for (Index i = 0; i + rho < m; ++i) {
      if (P[i] != P[i + rho] && ++mis > d) break;
    }
    if (mis <= d) return rho;
  }
  return m;
}

PeriodicRep::PeriodicRep(Index rho, Index start)
    : rho_(rho), lo_(start), hi_(start) {
  if (rho < 1) throw DomainError("PeriodicRep: rho must be >= 1");
  base_.assign(rho, 0);
}

void PeriodicRep::grow(Symbol next, Symbol prev_rho) {
  const Index pos = hi_++;
  if (pos < lo_ + rho_) {
    base_[pos % rho_] = next;
    return;
  }
  if (next != prev_rho) list_.emplace_back(pos, next);
}

Symbol PeriodicRep::shrink() {
  if (empty()) throw OrderingError("PeriodicRep: shrink on an empty window");
  const Symbol out = base_[lo_ % rho_];
  if (!list_.empty() && list_.front().first == lo_ + rho_) {
    base_[lo_ % rho_] = list_.front().second;
    list_.pop_front();
  }
  ++lo_;
  return out;
}

void PeriodicRep::crop(Index new_lo) {
  if (new_lo < lo_ || new_lo > hi_)
    throw DomainError("PeriodicRep: crop outside the window");
  if (!list_.empty() && list_.front().first < new_lo + rho_)
    throw DomainError("PeriodicRep: dropped prefix is not periodic");
  lo_ = new_lo;
}

SymString PeriodicRep::snapshot() const {
  SymString out;
  out.reserve(size());
  auto next_mis = list_.begin();
  for (Index i = lo_; i < hi_; ++i) {
    if (i < lo_ + rho_) {
      out.push_back(base_[i % rho_]);
      continue;
    }
    if (next_mis != list_.end() && next_mis->first == i) {
      out.push_back(next_mis->second);
      ++next_mis;
    } else {
      out.push_back(out[i - rho_ - lo_]);
    }
  }
  return out;
}

}  // namespace kmm
