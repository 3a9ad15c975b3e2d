#include "kmm/conv.hpp"

#include <algorithm>
#include <cassert>

namespace kmm {
namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// Two word-size primes with large power-of-two roots of unity; the CRT of
// both residues reconstructs any signed value below half their product.
constexpr u64 kP1 = 998244353;   // 119 * 2^23 + 1, generator 3
constexpr u64 kP2 = 1004535809;  // 479 * 2^21 + 1, generator 3

u64 mulmod(u64 a, u64 b, u64 p) { return static_cast<u64>(u128(a) * b % p); }

u64 powmod(u64 b, u64 e, u64 p) {
  u64 r = 1;
  b %= p;
  while (e) {
    if (e & 1) r = mulmod(r, b, p);
    b = mulmod(b, b, p);
    e >>= 1;
  }
  return r;
}

void ntt(std::vector<u64>& a, u64 p, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    u64 w = powmod(3, (p - 1) / len, p);
    if (invert) w = powmod(w, p - 2, p);
    for (std::size_t i = 0; i < n; i += len) {
      u64 wn = 1;
      for (std::size_t j = 0; j < len / 2; ++j) {
        u64 u = a[i + j];
        u64 v = mulmod(a[i + j + len / 2], wn, p);
        a[i + j] = u + v < p ? u + v : u + v - p;
        a[i + j + len / 2] = u >= v ? u - v : u + p - v;
        wn = mulmod(wn, w, p);
      }
    }
  }
  if (invert) {
    u64 inv_n = powmod(n, p - 2, p);
    for (auto& x : a) x = mulmod(x, inv_n, p);
  }
}

std::vector<u64> conv_mod(const std::vector<Value>& a,
                          const std::vector<Value>& b, std::size_t size,
                          u64 p) {
  std::vector<u64> fa(size, 0), fb(size, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    Value v = a[i] % static_cast<Value>(p);
    fa[i] = v < 0 ? v + p : v;
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    Value v = b[i] % static_cast<Value>(p);
    fb[i] = v < 0 ? v + p : v;
  }
  ntt(fa, p, false);
  ntt(fb, p, false);
  for (std::size_t i = 0; i < size; ++i) fa[i] = mulmod(fa[i], fb[i], p);
  ntt(fa, p, true);
  return fa;
}

Value crt_signed(u64 r1, u64 r2) {
  static const u64 inv_p1 = powmod(kP1 % kP2, kP2 - 2, kP2);
  u64 t = mulmod((r2 + kP2 - r1 % kP2) % kP2, inv_p1, kP2);
  i128 x = i128(r1) + i128(kP1) * t;  // in [0, p1*p2)
  constexpr i128 P = i128(kP1) * kP2;
  if (x > P / 2) x -= P;
  return static_cast<Value>(x);
}

Value checked_mul(Value a, Value b) {
  Value r;
  if (__builtin_mul_overflow(a, b, &r))
    throw ArithmeticCapacityError("convolution value overflows 64-bit range");
  return r;
}

Value checked_add(Value a, Value b) {
  Value r;
  if (__builtin_add_overflow(a, b, &r))
    throw ArithmeticCapacityError("convolution value overflows 64-bit range");
  return r;
}

std::size_t ceil_pow2(std::uint64_t n) {
  std::size_t s = 1;
  while (s < n) s <<= 1;
  return s;
}

// What one convolve call actually did, for attribution to counters.
struct ConvWork {
  std::uint64_t pairs = 0;
  std::uint64_t transform_units = 0;
  std::uint32_t transform_calls = 0;
};

void pair_convolve_into(const SparseFunc& f, const SparseFunc& g,
                        SparseFunc& acc, Index out_lo, Index out_hi,
                        ConvWork& work) {
  work.pairs += std::uint64_t(f.size()) * g.size();
  for (const auto& [i, fv] : f.entries())
    for (const auto& [j, gv] : g.entries()) {
      Index idx = i + j;
      if (idx < out_lo || idx >= out_hi) continue;
      Value cur = acc.at(idx);
      acc.set(idx, checked_add(cur, checked_mul(fv, gv)));
    }
}

void dense_convolve_into(const SparseFunc& f, const SparseFunc& g,
                         SparseFunc& acc, Index out_lo, Index out_hi,
                         ConvWork& work) {
  const Index f_lo = f.min_index(), f_hi = f.max_index();
  const Index g_lo = g.min_index(), g_hi = g.max_index();
  const std::uint64_t len_f = f_hi - f_lo + 1, len_g = g_hi - g_lo + 1;
  const std::uint64_t out_len = len_f + len_g - 1;

  // Exactness certificate: every true output value must fit within the
  // symmetric CRT range. Otherwise fall back to checked pair enumeration,
  // which is exact or throws.
  Value max_f = 0, max_g = 0;
  for (const auto& [i, v] : f.entries()) max_f = std::max(max_f, std::abs(v));
  for (const auto& [i, v] : g.entries()) max_g = std::max(max_g, std::abs(v));
  i128 bound = i128(max_f) * max_g * std::min(f.size(), g.size());
  if (bound > detail::transform_capacity()) {
    pair_convolve_into(f, g, acc, out_lo, out_hi, work);
    return;
  }

  std::vector<Value> a(len_f, 0), b(len_g, 0);
  for (const auto& [i, v] : f.entries()) a[i - f_lo] = v;
  for (const auto& [i, v] : g.entries()) b[i - g_lo] = v;
  const std::size_t size = ceil_pow2(out_len);
  auto r1 = conv_mod(a, b, size, kP1);
  auto r2 = conv_mod(a, b, size, kP2);
  work.transform_units += detail::transform_units(out_len);
  work.transform_calls += 1;

  const Index base = f_lo + g_lo;
  for (std::uint64_t i = 0; i < out_len; ++i) {
    Value v = crt_signed(r1[i], r2[i]);
    if (v == 0) continue;
    Index idx = base + static_cast<Index>(i);
    if (idx < out_lo || idx >= out_hi) continue;
    acc.set(idx, checked_add(acc.at(idx), v));
  }
}

void convolve_into(const SparseFunc& f, const SparseFunc& g, Index threshold,
                   SparseFunc& acc, Index out_lo, Index out_hi,
                   ConvWork& work) {
  if (f.empty() || g.empty()) return;
  const std::uint64_t pairs = std::uint64_t(f.size()) * g.size();
  if (pairs <= static_cast<std::uint64_t>(threshold))
    pair_convolve_into(f, g, acc, out_lo, out_hi, work);
  else
    dense_convolve_into(f, g, acc, out_lo, out_hi, work);
}

void charge(WorkCounters* wc, const ConvWork& work) {
  if (!wc) return;
  if (work.pairs) wc->charge_pairs(work.pairs);
  if (work.transform_calls) {
    wc->transform_calls += work.transform_calls;
    wc->transform_units += work.transform_units;
    wc->work_units += work.transform_units;
  }
}

}  // namespace

namespace detail {

std::uint64_t transform_units(Index len) {
  std::uint64_t size =
      ceil_pow2(static_cast<std::uint64_t>(std::max<Index>(len, 1)));
  std::uint64_t lg = 0;
  while ((std::uint64_t(1) << lg) < size) ++lg;
  return size * (lg + 1);
}

Value transform_capacity() {
  constexpr i128 P = i128(kP1) * kP2;
  return static_cast<Value>(P / 2);
}

}  // namespace detail

SparseFunc convolve_pair(const SparseFunc& f, const SparseFunc& g,
                         Index threshold, WorkCounters* wc) {
  if (threshold <= 0)
    throw DomainError("convolve_pair: threshold must be positive");
  SparseFunc acc;
  ConvWork work;
  convolve_into(f, g, threshold, acc, std::numeric_limits<Index>::min(),
                std::numeric_limits<Index>::max(), work);
  charge(wc, work);
  return acc;
}

SparseFunc conv_summation(const FuncSeq& F, const FuncSeq& G, Index n,
                          WorkCounters* wc, Index threshold_override) {
  if (F.slot_count != 0 && G.slot_count != 0 && F.slot_count != G.slot_count)
    throw ShapeError("conv_summation: sequences declare different slot counts");
  const Index threshold = threshold_override > 0 ? threshold_override : n;
  if (threshold <= 0) throw DomainError("conv_summation: n must be positive");

  std::vector<ConvJob::Task> tasks;
  auto fi = F.slots().begin();
  auto gi = G.slots().begin();
  while (fi != F.slots().end() && gi != G.slots().end()) {
    if (fi->first < gi->first)
      ++fi;
    else if (gi->first < fi->first)
      ++gi;
    else {
      tasks.push_back({&fi->second, &gi->second});
      ++fi;
      ++gi;
    }
  }
  ConvJob job(std::move(tasks), threshold, std::numeric_limits<Index>::min(),
              std::numeric_limits<Index>::max(), wc);
  job.advance(std::numeric_limits<std::uint64_t>::max());
  if (wc && job.result().size() > 4 * static_cast<std::uint64_t>(n) + 16)
    ++wc->accumulator_warnings;
  return job.take_result();
}

ConvJob::ConvJob(std::vector<Task> tasks, Index dense_threshold, Index out_lo,
                 Index out_hi, WorkCounters* wc)
    : tasks_(std::move(tasks)),
      threshold_(dense_threshold),
      out_lo_(out_lo),
      out_hi_(out_hi),
      wc_(wc) {
  if (threshold_ <= 0) throw DomainError("ConvJob: threshold must be positive");
  costs_.reserve(tasks_.size());
  for (const auto& t : tasks_) {
    costs_.push_back(task_cost(*t.f, *t.g, threshold_));
    total_cost_ += costs_.back();
  }
  remaining_cost_ = total_cost_;
}

std::uint64_t ConvJob::task_cost(const SparseFunc& f, const SparseFunc& g,
                                 Index dense_threshold) {
  if (f.empty() || g.empty()) return 1;
  const std::uint64_t pairs = std::uint64_t(f.size()) * g.size();
  if (pairs <= static_cast<std::uint64_t>(dense_threshold)) return 1 + pairs;
  return 1 + detail::transform_units(f.diam() + g.diam() - 1);
}

bool ConvJob::advance(std::uint64_t budget) {
  // Execution runs whole tasks (a transform is atomic); the counter charges
  // drain at twice the budget rate instead, so per-call accounting follows
  // the pacing the caller planned rather than the instant a transform
  // happened to run. Draining at 2x guarantees the charge debt is gone by
  // the time the paced schedule ends.
  std::uint64_t spent = 0;
  while (next_ < tasks_.size() && spent < budget) {
    const Task& t = tasks_[next_];
    ConvWork work;
    convolve_into(*t.f, *t.g, threshold_, acc_, out_lo_, out_hi_, work);
    if (wc_) {
      if (work.pairs) pending_.push_back({kPairs, work.pairs});
      if (work.transform_calls) {
        wc_->transform_calls += work.transform_calls;  // count at execution
        pending_.push_back({kTransform, work.transform_units});
      }
      pending_.push_back({kMisc, 1});
      pending_units_ += work.pairs + work.transform_units + 1;
    }
    spent += costs_[next_];
    remaining_cost_ -= costs_[next_];
    ++next_;
  }
  if (wc_) {
    std::uint64_t to_charge =
        budget > std::numeric_limits<std::uint64_t>::max() / 2 ? budget
                                                               : 2 * budget;
    while (to_charge > 0 && !pending_.empty()) {
      PendingCharge& front = pending_.front();
      const std::uint64_t take = std::min(front.units, to_charge);
      switch (front.kind) {
        case kPairs:
          wc_->pair_mults += take;
          break;
        case kTransform:
          wc_->transform_units += take;
          break;
        case kMisc:
          break;
      }
      wc_->work_units += take;
      front.units -= take;
      pending_units_ -= take;
      to_charge -= take;
      if (front.units == 0) pending_.pop_front();
    }
  }
  return done();
}

SparseFunc ConvJob::take_result() {
  if (wc_ && !pending_.empty()) {  // flush any residue
    for (const auto& p : pending_) {
      if (p.kind == kPairs) wc_->pair_mults += p.units;
      if (p.kind == kTransform) wc_->transform_units += p.units;
      wc_->work_units += p.units;
    }
    pending_.clear();
    pending_units_ = 0;
  }
  return std::move(acc_);
}

}  // namespace kmm
