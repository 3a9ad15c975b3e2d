#include "kmm/batched.hpp"

#include <limits>

namespace kmm {

BatchedState::BatchedState(const FuncSeq& G, Index block_len,
                           Index domain_bound, WorkCounters* wc,
                           Index fft_threshold)
    : s_(block_len),
      n_(domain_bound),
      // By default a slot goes dense only when enumerating its entry pairs
      // costs more than the transform over the widest restricted span.
      threshold_(fft_threshold > 0
                     ? fft_threshold
                     : static_cast<Index>(detail::transform_units(3 * block_len))),
      wc_(wc) {
  if (s_ < 1) throw DomainError("BatchedState: block length must be >= 1");
  if (n_ < 1) throw DomainError("BatchedState: domain bound must be >= 1");
  q_ = (n_ + 1 + s_ - 1) / s_;  // ceil((n+1)/s)

  if (!G.empty()) {
    auto [lo, hi] = G.support_range();
    if (lo < 0 || hi > n_ - 1)
      throw DomainError("BatchedState: G support outside [0..n-1]");
  }
  // Each entry of G lands in exactly two overlapping windows
  // [s*(a-1) .. s*(a+1)); windows with index outside [0..q-1] pair only
  // with empty batches and are dropped.
  for (const auto& [j, g] : G.slots()) {
    for (const auto& [i, v] : g.entries()) {
      Index a0 = i / s_;
      for (Index a : {a0, a0 + 1}) {
        if (a < 0 || a >= q_) continue;
        g_star_[a].add_entry(j, i, v);
      }
    }
  }
  for (auto& [a, fs] : g_star_) fs.slot_count = G.slot_count;
}

const SparseFunc* BatchedState::g_window(Index a, Index j) const {
  auto it = g_star_.find(a);
  return it == g_star_.end() ? nullptr : it->second.slot(j);
}

std::uint64_t BatchedState::g_star_norm() const {
  std::uint64_t n = 0;
  for (const auto& [a, fs] : g_star_) n += fs.norm();
  return n;
}

std::uint64_t BatchedState::f_star_norm() const {
  std::uint64_t n = 0;
  for (const auto& [b, fs] : ring_) n += fs.norm();
  return n;
}

std::uint64_t BatchedState::cells() const {
  std::uint64_t c = g_star_norm() + f_star_norm();
  if (job_) c += job_->cells();
  return c;
}

void BatchedState::begin_batch(FuncSeq batch) {
  if (job_)
    throw OrderingError("BatchedState: previous batch not taken yet");
  const Index i = next_ordinal_++;
  if (i > q_) throw OrderingError("BatchedState: batch past the domain bound");
  const Index phi_lo = s_ * (i - 1), phi_hi = s_ * i;
  if (!batch.empty()) {
    auto [lo, hi] = batch.support_range();
    if (lo < phi_lo || hi >= phi_hi)
      throw OrderingError("BatchedState: batch support outside its window");
  }

  f_norm_seen_ += batch.norm();
  if (wc_ && s_ < static_cast<Index>(f_norm_seen_ + g_star_norm() / 2))
    ++wc_->small_block_warnings;

  if (!batch.empty()) ring_.emplace_back(i, std::move(batch));
  while (!ring_.empty() && ring_.front().first <= i - q_) ring_.pop_front();

  std::vector<ConvJob::Task> tasks;
  for (const auto& [b, fs] : ring_) {
    const Index a = i - b;
    auto git = g_star_.find(a);
    if (git == g_star_.end()) continue;
    auto fi = fs.slots().begin();
    auto gi = git->second.slots().begin();
    while (fi != fs.slots().end() && gi != git->second.slots().end()) {
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
  }
  if (wc_) wc_->charge_misc(tasks.size() + 1);
  job_ordinal_ = i;
  job_.emplace(std::move(tasks), threshold_, phi_lo, phi_hi, wc_);
}

bool BatchedState::advance(std::uint64_t budget) {
  if (!job_) throw OrderingError("BatchedState: no batch in progress");
  return job_->advance(budget);
}

SparseFunc BatchedState::take_output() {
  if (!job_ || !job_->done())
    throw OrderingError("BatchedState: batch not finished");
  SparseFunc out = job_->take_result();
  job_.reset();
  return out;
}

SparseFunc BatchedState::ingest_batch(const FuncSeq& batch) {
  begin_batch(batch);
  advance(std::numeric_limits<std::uint64_t>::max());
  return take_output();
}

}  // namespace kmm
