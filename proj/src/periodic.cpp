#include "kmm/periodic.hpp"

#include <algorithm>

namespace kmm {

CombinedEngine::CombinedEngine(const SymString& P, Index rho, Index k, Index s,
                               Index domain_bound, WorkCounters* wc,
                               EngineOptions opt)
    : m_(static_cast<Index>(P.size())),
      rho_(rho),
      k_(k),
      s_(s),
      n_dom_(domain_bound),
      wc_(wc) {
  if (m_ < 1) throw DomainError("CombinedEngine: empty pattern");
  if (rho_ < 1 || k_ < 1 || s_ < k_ || s_ > m_)
    throw DomainError("CombinedEngine: need 1 <= rho, 1 <= k <= s <= m");
  if (n_dom_ < m_) throw DomainError("CombinedEngine: domain bound below m");
  ring_.assign(rho_, 0);

  tail_len_ = std::min<Index>(2 * s_, m_);
  head_len_ = m_ - tail_len_;

  if (head_len_ > 0) {
    SymString head(P.begin(), P.begin() + head_len_);
    FuncSeq G = backward_diff_seq(head, rho_, true);
    head_ = std::make_unique<Head>(G, s_, n_dom_, rho_, wc_,
                                   opt.fft_threshold);
  }
  SymString tail(P.begin() + head_len_, P.end());
  FuncSeq Gt = backward_diff_seq(tail, rho_, true);
  tail_ = std::make_unique<Tail>(Gt, tail_len_ + rho_, n_dom_, rho_, wc_,
                                 opt.fft_threshold);
}

std::optional<Value> CombinedEngine::push(Symbol c) {
  const Index i = i_++;
  if (i >= n_dom_) throw OrderingError("CombinedEngine: past the domain bound");

  const bool have_prev = i >= rho_;
  const Symbol prev = have_prev ? ring_[i % rho_] : 0;
  OnlineConv::Slice slice;
  if (!have_prev || c != prev) {
    slice.push_back({static_cast<Index>(c), +1});
    if (have_prev) slice.push_back({static_cast<Index>(prev), -1});
  }
  ring_[i % rho_] = c;

  if (head_) {
    Head& h = *head_;
    if (i > 0 && i % s_ == 0) {
      h.batched.begin_batch(std::move(h.cur_batch));
      h.cur_batch = FuncSeq{};
      // Covers execution plus the 2x-paced charge drain.
      h.budget = 2 * h.batched.job_estimate() / s_ + 2;
    }
    for (const auto& [slot, v] : slice) h.cur_batch.add_entry(slot, i, v);
    if (h.batched.has_job()) h.batched.advance(h.budget);
    if (h.batched.job_done() && h.batched.pending_estimate() == 0) {
      SparseFunc block = h.batched.take_output();
      const Index b = h.batched.next_ordinal() - 1;  // just finished ordinal
      for (Index j = s_ * (b - 1); j < s_ * b && j < n_dom_; ++j) {
        Value corr = h.corr.step(block.at(j), j);
        if (j >= head_len_ - 1) {
          h.out.emplace_back(j, ham_from_corr(corr, head_len_));
          if (wc_) wc_->note_head_delay(i - j);
        }
      }
    }
  }

  const Value tail_corr = tail_->corr.step(tail_->online.push_index(slice, i), i);

  if (i < m_ - 1) return std::nullopt;
  Value head_dist = 0;
  if (head_) {
    Head& h = *head_;
    if (h.out.empty() || h.out.front().first != i - tail_len_)
      throw PipelineError("CombinedEngine: head value missing at its deadline");
    head_dist = h.out.front().second;
    h.out.pop_front();
    if (static_cast<Index>(h.out.size()) > 2 * s_)
      throw PipelineError("CombinedEngine: head buffer exceeded its bound");
  }
  return head_dist + ham_from_corr(tail_corr, tail_len_);
}

std::uint64_t CombinedEngine::cells() const {
  std::uint64_t c = ring_.size();
  if (head_) {
    c += head_->batched.cells() + head_->corr.cells() +
         head_->cur_batch.cells() + head_->out.size();
  }
  c += tail_->online.cells() + tail_->corr.cells();
  return c;
}

FragmentEngine::FragmentEngine(const SymString& P, Index rho, Index d, Index k,
                               Index s, Index frag_capacity, WorkCounters* wc,
                               EngineOptions opt)
    : pattern_(P),
      m_(static_cast<Index>(P.size())),
      rho_(rho),
      d_(d),
      k_(k),
      s_(s),
      half_(m_ / 2),
      cap_(frag_capacity),
      wc_(wc),
      opt_(opt),
      rep_(rho, 0) {
  if (m_ < 1) throw DomainError("FragmentEngine: empty pattern");
  if (cap_ < m_) throw DomainError("FragmentEngine: capacity below m");
  ring_.assign(rho_, 0);
}

void FragmentEngine::feed(Symbol c) {
  auto v = eng_->push(c);
  const Index pos = l0_ + fed_;
  ++fed_;
  if (v) {
    if (pos < m_ - 1)
      throw PipelineError("FragmentEngine: engine emitted before a window fits");
    emitted_ = MatchReport{pos, *v};
  }
}

std::optional<Value> FragmentEngine::push(Symbol c) {
  const Index i = i_++;
  if (i >= cap_) throw OrderingError("FragmentEngine: past fragment capacity");
  const bool have_prev = i >= rho_;
  const Symbol prev = have_prev ? ring_[i % rho_] : 0;
  emitted_.reset();

  if (i < half_) {
    rep_.grow(c, prev);
    if (rep_.mismatches() > d_ + 2 * k_) {
      rep_.crop(rep_.front_mismatch_index() - rho_);
      rep_.shrink();
    }
    ring_[i % rho_] = c;
    return std::nullopt;
  }

  if (i == half_) {
    l0_ = rep_.lo();
    eng_ = std::make_unique<CombinedEngine>(pattern_, rho_, k_, s_, cap_, wc_,
                                            opt_);
  }

  if (!stopped_) {
    if (i >= half_ + rho_ && have_prev && c != prev) {
      if (++right_mis_ > d_ + 2 * k_) {
        stopped_ = true;
        stop_pos_ = i;
      }
    }
  }
  if (!stopped_) {
    if (!caught_up_) {
      rep_.grow(c, prev);
      for (int t = 0; t < 2 && !rep_.empty(); ++t) feed(rep_.shrink());
      if (rep_.empty()) caught_up_ = true;
    } else {
      feed(c);
    }
  }
  ring_[i % rho_] = c;

  if (i < m_ - 1) return std::nullopt;
  if (emitted_) {
    if (emitted_->pos != i)
      throw PipelineError("FragmentEngine: output for an unexpected position");
    return emitted_->value;
  }
  return kExceedsK;
}

std::uint64_t FragmentEngine::cells() const {
  std::uint64_t c = ring_.size() + rep_.cells();
  if (eng_) c += eng_->cells();
  return c;
}

SplitDriver::SplitDriver(SymString P, Index k, Index s, Index rho,
                         WorkCounters* wc, EngineOptions opt)
    : pattern_(std::move(P)),
      m_(static_cast<Index>(pattern_.size())),
      k_(k),
      s_(s),
      rho_(rho),
      d_(6 * k),
      h_(std::max<Index>(1, m_ / 2)),
      cap_(m_ + std::max<Index>(1, m_ / 2)),
      wc_(wc),
      opt_(opt) {
  if (m_ < 1) throw DomainError("SplitDriver: empty pattern");
  if (k_ < 1 || k_ > s_ || s_ > m_)
    throw ConfigError("SplitDriver: need 1 <= k <= s <= m");
  if (rho_ < 1 || rho_ > k_)
    throw ConfigError("SplitDriver: period must satisfy 1 <= rho <= k");
}

void SplitDriver::push(Symbol c, ReportSink& out) {
  const Index x = x_++;
  if (x % h_ == 0)
    frags_.push_back({x, std::make_unique<FragmentEngine>(
                             pattern_, rho_, d_, k_, s_, cap_, wc_, opt_)});

  const Index owner_start = x >= m_ - 1 ? ((x - m_ + 1) / h_) * h_ : -1;
  for (auto& f : frags_) {
    auto r = f.eng->push(c);
    if (r && f.start == owner_start) {
      Value v = (*r == kExceedsK || *r > k_) ? kExceedsK : *r;
      out.emit({x, v});
      if (wc_) wc_->note_output_delay(0);
    }
  }
  while (!frags_.empty() && x - frags_.front().start + 1 >= cap_)
    frags_.pop_front();

  if (wc_) wc_->note_live_cells(cells());
}

std::uint64_t SplitDriver::cells() const {
  std::uint64_t c = 0;
  for (const auto& f : frags_) c += f.eng->cells();
  return c;
}

}  // namespace kmm
