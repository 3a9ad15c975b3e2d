#include "kmm/online.hpp"

#include <limits>

namespace kmm {

OnlineConv::OnlineConv(const FuncSeq& G, Index m, Index n, WorkCounters* wc,
                       Index fft_threshold)
    : m_(m), n_(n), threshold_override_(fft_threshold), wc_(wc) {
  if (m_ < 1 || n_ < 1) throw DomainError("OnlineConv: bounds must be >= 1");
  if (!G.empty()) {
    auto [lo, hi] = G.support_range();
    if (lo < 0 || hi > m_ - 1)
      throw DomainError("OnlineConv: G support outside [0..m-1]");
  }
  M_ = 0;
  while ((Index(1) << (M_ + 1)) < m_ + 2) ++M_;  // ceil(log2(m+2)) - 1
  if (M_ < 1) M_ = 1;
  if ((Index(1) << (M_ + 1)) - 3 < m_ - 1)
    throw PipelineError("OnlineConv: level ranges fail to cover the kernel");

  levels_.resize(M_);
  for (Index a = 1; a <= M_; ++a) {
    auto [lo, hi] = level_range(a);
    levels_[a - 1].g = G.restricted(lo, hi + 1);
  }
  // Window material must survive lazy ingestion for the whole job life.
  retention_ = 4 * (Index(1) << (M_ - 1)) + 2;
}

Index OnlineConv::level_threshold(Index a) const {
  if (threshold_override_ > 0) return threshold_override_;
  // Dense only when entry pairs cost more than the widest level transform.
  return static_cast<Index>(detail::transform_units(5 * (Index(1) << (a - 1))));
}

std::uint64_t OnlineConv::entries_between(Index lo, Index hi) const {
  if (cum_.empty()) return 0;
  const Index last = ring_base_ + Index(cum_.size()) - 1;
  lo = std::max(lo, ring_base_);
  hi = std::min(hi, last);
  if (lo > hi) return 0;
  const std::uint64_t upper = cum_[hi - ring_base_];
  const std::uint64_t lower = (lo == ring_base_)
                                  ? cum_.front() - slices_.front().size()
                                  : cum_[lo - 1 - ring_base_];
  return upper - lower;
}

void OnlineConv::start_job(Index a, Index b) {
  Level& lvl = levels_[a - 1];
  if (lvl.job)
    throw PipelineError("OnlineConv: level already has a job in progress");
  const Index w = Index(1) << (a - 1);
  auto [lo, hi] = block_range(a, b);
  LevelJob job;
  job.b = b;
  job.ingest_next = std::max<Index>(lo, 0);
  job.ingest_hi = hi;
  job.ingesting = true;
  job.deadline = b * w;
  // A priori bound on the convolution cost, so pacing can reserve room for
  // it before the window is materialized: per slot, entry-pair work is at
  // most (window entries) * |g_j|, and a dense transform spans at most the
  // window plus the level kernel.
  const std::uint64_t entries =
      entries_between(job.ingest_next, job.ingest_hi);
  const Index threshold = level_threshold(a);
  std::uint64_t bound = 1;
  for (const auto& [j, g] : lvl.g.slots()) {
    const std::uint64_t pairs = entries * g.size();
    bound += 1 + (pairs <= static_cast<std::uint64_t>(threshold)
                      ? pairs
                      : detail::transform_units(3 * w + 2 * w));
  }
  job.conv_bound = bound;
  lvl.job = std::move(job);
}

void OnlineConv::advance_job(Index a, Index now) {
  Level& lvl = levels_[a - 1];
  if (!lvl.job) return;
  LevelJob& job = *lvl.job;
  const Index pushes_left = std::max<Index>(job.deadline - now + 1, 1);

  // One budget covers both stages, so a slow ingestion cannot push the
  // whole convolution onto the deadline push.
  std::uint64_t budget = 0;
  if (job.ingesting) {
    std::uint64_t ingest_left = (job.ingest_hi - job.ingest_next + 1) +
                                entries_between(job.ingest_next, job.ingest_hi);
    budget = (ingest_left + job.conv_bound) / pushes_left + 1;
  } else {
    budget = job.conv->remaining_estimate() / pushes_left + 1;
  }

  if (job.ingesting) {
    if (job.ingest_next < ring_base_)
      throw PipelineError("OnlineConv: window material evicted too early");
    std::uint64_t spent = 0;
    while (job.ingest_next <= job.ingest_hi && spent < budget) {
      const Slice& sl = slices_[job.ingest_next - ring_base_];
      for (const auto& [slot, v] : sl) {
        job.window.add_entry(slot, job.ingest_next, v);
        ++spent;
      }
      ++spent;
      ++job.ingest_next;
    }
    if (wc_) wc_->charge_misc(spent);
    if (job.ingest_next <= job.ingest_hi) return;  // budget exhausted

    job.ingesting = false;
    budget = budget > spent ? budget - spent : 0;
    std::vector<ConvJob::Task> tasks;
    auto fi = job.window.slots().begin();
    auto gi = lvl.g.slots().begin();
    while (fi != job.window.slots().end() && gi != lvl.g.slots().end()) {
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
    if (wc_) wc_->charge_misc(tasks.size() + 1);
    const Index w = Index(1) << (a - 1);
    job.conv.emplace(std::move(tasks), level_threshold(a), job.b * w,
                     (job.b + 1) * w, wc_);
  }
  if (budget > 0) job.conv->advance(budget);
}

void OnlineConv::finish_job(Index a) {
  Level& lvl = levels_[a - 1];
  LevelJob& job = *lvl.job;
  if (job.ingesting || !job.conv->done()) {
    if (wc_) ++wc_->deadline_misses;
    while (job.ingesting) advance_job(a, job.deadline);
    job.conv->advance(std::numeric_limits<std::uint64_t>::max());
  }
  lvl.ready = job.conv->take_result();
  lvl.ready_b = job.b;
  lvl.job.reset();
}

Value OnlineConv::push_index(const Slice& slice, Index i) {
  if (i != next_i_)
    throw OrderingError("OnlineConv: indices must be consecutive");
  if (i >= n_) throw DomainError("OnlineConv: index beyond the domain bound");
  ++next_i_;

  Slice clean;
  clean.reserve(slice.size());
  for (const auto& [slot, v] : slice)
    if (v != 0) clean.push_back({slot, v});
  ring_entries_ += clean.size();
  slices_.push_back(std::move(clean));
  cum_.push_back(ring_entries_);
  while (Index(slices_.size()) > retention_) {
    slices_.pop_front();
    cum_.pop_front();
    ++ring_base_;
  }

  Value out = 0;
  for (Index a = 1; a <= M_; ++a) {
    Level& lvl = levels_[a - 1];
    const Index w = Index(1) << (a - 1);
    const Index emod = ((i - 1) % w + w) % w;
    if (emod == 0) {
      const Index b_new = (i - 1 - emod) / w + 1;  // floor((i-1)/w) + 1
      // Blocks whose serve window starts past the stream end are useless;
      // blocks with an all-negative window are identically zero.
      if (b_new * w <= n_ - 1 && (b_new - 1) * w + 1 >= 0) start_job(a, b_new);
    }
    advance_job(a, i);
    const Index b_cur = i / w;
    if (lvl.job && lvl.job->b == b_cur) finish_job(a);
    if (lvl.ready_b == b_cur) out += lvl.ready.at(i);
  }
  return out;
}

std::uint64_t OnlineConv::cells() const {
  std::uint64_t c = 0;
  for (const auto& s : slices_) c += s.size();
  for (const auto& lvl : levels_) {
    c += lvl.g.norm() + lvl.ready.size();
    if (lvl.job) {
      c += lvl.job->window.norm();
      if (lvl.job->conv) c += lvl.job->conv->cells();
    }
  }
  return c;
}

}  // namespace kmm
