#include "kmm/aperiodic.hpp"

#include <algorithm>
#include <cmath>

namespace kmm {
namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Polynomial rolling fingerprints modulo the Mersenne prime 2^61 - 1.
constexpr u64 kFpMod = (u64(1) << 61) - 1;

u64 fp_mul(u64 a, u64 b) {
  u128 t = u128(a) * b;
  u64 s = u64(t & kFpMod) + u64(t >> 61);
  return s >= kFpMod ? s - kFpMod : s;
}
u64 fp_add(u64 a, u64 b) {
  u64 s = a + b;
  return s >= kFpMod ? s - kFpMod : s;
}
u64 fp_sub(u64 a, u64 b) { return a >= b ? a - b : a + kFpMod - b; }
u64 fp_val(Symbol c) { return u64(c) + 1; }

std::vector<Index> primes_upto(Index n) {
  std::vector<bool> comp(std::max<Index>(n + 1, 2), false);
  std::vector<Index> out;
  for (Index i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    out.push_back(i);
    for (Index j = 2 * i; j <= n; j += i) comp[j] = true;
  }
  return out;
}

Index ceil_log2(Index m) {
  Index l = 0;
  while ((Index(1) << l) < m) ++l;
  return l;
}

}  // namespace

std::vector<Index> sample_filter_primes(Index k, Index m,
                                        std::mt19937_64& rng) {
  if (m < 2) throw DomainError("sample_filter_primes: m must be >= 2");
  if (k < 1) throw DomainError("sample_filter_primes: k must be >= 1");
  const Index count = std::max<Index>(ceil_log2(m), 1);
  const Index L = ceil_log2(m) * ceil_log2(m);
  const Index lo = k * L, hi = 34 * k * L;

  std::vector<Index> usable;
  if (lo <= m) {
    for (Index p : primes_upto(std::min(hi, m)))
      if (p >= lo) usable.push_back(p);
  }
  if (static_cast<Index>(usable.size()) >= count) {
    std::vector<Index> picked;
    for (Index t = 0; t < count; ++t) {
      std::uniform_int_distribution<std::size_t> d(0, usable.size() - 1);
      std::size_t at = d(rng);
      picked.push_back(usable[at]);
      usable.erase(usable.begin() + at);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  // Degenerate range at this scale: smallest `count` primes above k.
  std::vector<Index> out;
  for (Index cand = k + 1; static_cast<Index>(out.size()) < count; ++cand) {
    bool prime = cand >= 2;
    for (Index d = 2; d * d <= cand; ++d)
      if (cand % d == 0) {
        prime = false;
        break;
      }
    if (prime) out.push_back(cand);
  }
  return out;
}

std::vector<Index> localization_primes(Index m) {
  if (m < 2) throw DomainError("localization_primes: m must be >= 2");
  const double lnm = std::log(double(m));
  const double lo = std::max(2.0, lnm);
  const double hi = std::max(5.0 * lnm, 3.0);
  std::vector<Index> out;
  __int128 prod = 1;
  for (Index p : primes_upto(Index(hi) + 1)) {
    if (double(p) < lo || double(p) > hi) continue;
    out.push_back(p);
    prod *= p;
    if (prod > m) return out;
  }
  throw PipelineError("localization_primes: range primes do not cover m");
}

std::optional<Index> crt_combine(
    const std::vector<std::pair<Index, Index>>& residue_mod, Index bound) {
  if (residue_mod.empty()) return std::nullopt;
  __int128 x = 0, mod = 1;
  for (const auto& [r, q] : residue_mod) {
    const Index mod_q = Index(mod % q);
    Index inv = 1, b = mod_q % q, e = q - 2;  // inverse of mod, q prime
    while (e) {
      if (e & 1) inv = Index(__int128(inv) * b % q);
      b = Index(__int128(b) * b % q);
      e >>= 1;
    }
    Index t = Index((((r - Index(x % q)) % q + q) % q) * __int128(inv) % q);
    x += mod * t;
    mod *= q;
  }
  if (x >= bound) return std::nullopt;
  return Index(x);
}

OffsetDecomposition build_decomposition(const SymString& P, Index p) {
  if (p < 2) throw DomainError("build_decomposition: p must be >= 2");
  OffsetDecomposition d;
  d.p = p;
  d.m = static_cast<Index>(P.size());
  d.long_len = (d.m + p - 1) / p;
  d.short_len = d.m / p;
  d.num_long = d.m % p == 0 ? std::min(p, d.m) : d.m % p;
  d.ids.assign(p, -1);
  // Dedup columns by content, ids in first-occurrence order.
  std::unordered_map<u64, std::vector<std::pair<Index, Index>>> seen;
  auto col_equal = [&](Index a, Index b) {
    if (d.len(a) != d.len(b)) return false;
    for (Index x = 0; x < d.len(a); ++x)
      if (P[x * p + a] != P[x * p + b]) return false;
    return true;
  };
  for (Index r = 0; r < p; ++r) {
    u64 h = u64(d.len(r)) + 1;
    for (Index x = 0; x < d.len(r); ++x)
      h = fp_add(fp_mul(h, 1099511628211ULL), fp_val(P[x * p + r]));
    Index id = -1;
    for (const auto& [other, oid] : seen[h])
      if (col_equal(other, r)) {
        id = oid;
        break;
      }
    if (id < 0) {
      id = d.id_count++;
      seen[h].push_back({r, id});
    }
    d.ids[r] = id;
  }
  return d;
}

AperiodicEngine::AperiodicEngine(SymString P, Index k, std::uint64_t seed,
                                 WorkCounters* wc, EngineOptions)
    : pattern_(std::move(P)),
      m_(static_cast<Index>(pattern_.size())),
      k_(k),
      m_head_(m_ - 2 * k),
      wc_(wc),
      seed_(seed),
      rng_(seed) {
  if (k_ < 1) throw ConfigError("AperiodicEngine: k must be >= 1");
  if (m_head_ < 1)
    throw ConfigError("AperiodicEngine: pattern shorter than its 2k tail");
  primes_ = sample_filter_primes(k_, std::max<Index>(m_head_, 2), rng_);
  qprimes_ = localization_primes(std::max<Index>(m_head_, 2));
  const Index p_max = primes_.back();
  ring_.assign(m_head_ + p_max * 2 + 2 * k_ + 8, 0);
  build_prime_state();
}

void AperiodicEngine::build_prime_state() {
  const SymString head(pattern_.begin(), pattern_.begin() + m_head_);
  std::uniform_int_distribution<u64> pick(1 << 8, kFpMod - 2);
  for (int attempt = 0; attempt < 64; ++attempt) {
    fp_base_ = pick(rng_);
    states_.clear();
    states_.resize(primes_.size());
    bool clash = false;
    for (std::size_t pi = 0; pi < primes_.size() && !clash; ++pi) {
      PrimeState& ps = states_[pi];
      const Index p = primes_[pi];
      ps.decomp = build_decomposition(head, p);
      ps.fp_long.assign(p, 0);
      ps.fp_short.assign(p, 0);
      ps.ring_long.assign(p, -1);
      ps.ring_short.assign(p, -1);
      ps.bucket.assign(p, 0);
      ps.pow_long = 1;
      for (Index t = 1; t < ps.decomp.long_len; ++t)
        ps.pow_long = fp_mul(ps.pow_long, fp_base_);
      ps.pow_short = 1;
      for (Index t = 1; t < ps.decomp.short_len; ++t)
        ps.pow_short = fp_mul(ps.pow_short, fp_base_);
      const bool two_classes = ps.decomp.long_len != ps.decomp.short_len;
      for (Index r = 0; r < p; ++r) {
        const Index len = ps.decomp.len(r);
        if (len == 0) continue;
        ++ps.nonempty_cols;
        u64 h = 0;
        for (Index x = 0; x < len; ++x)
          h = fp_add(fp_mul(h, fp_base_), fp_val(head[x * p + r]));
        const bool is_short = two_classes && len == ps.decomp.short_len;
        auto& table = is_short ? ps.table_short : ps.table_long;
        auto it = table.find(h);
        if (it != table.end() && it->second != ps.decomp.ids[r]) {
          clash = true;  // two distinct columns share a fingerprint
          break;
        }
        table[h] = ps.decomp.ids[r];
        (is_short ? ps.cols_short : ps.cols_long)[ps.decomp.ids[r]].push_back(
            r);
      }
      if (!two_classes) ps.pow_short = ps.pow_long;
    }
    if (!clash) return;
    if (wc_) ++wc_->fingerprint_collisions;
  }
  throw PipelineError("AperiodicEngine: cannot build collision-free tables");
}

Index AperiodicEngine::column_distance(std::size_t prime_idx) const {
  return states_[prime_idx].col_dist;
}

std::uint64_t AperiodicEngine::hash_pattern_column(Index p, Index r, Index qq,
                                                   Index u, Index len) const {
  u64 h = 0;
  for (Index x = u; x < len; x += qq)
    h = fp_add(fp_mul(h, fp_base_), fp_val(pattern_[x * p + r]));
  return h;
}

std::uint64_t AperiodicEngine::hash_text_column(Index start, Index p, Index qq,
                                                Index u, Index len) const {
  u64 h = 0;
  for (Index x = u; x < len; x += qq)
    h = fp_add(fp_mul(h, fp_base_), fp_val(ring_at(start + x * p)));
  return h;
}

RecoverResult AperiodicEngine::recover_column_at(const PrimeState& ps,
                                                 Index column,
                                                 Index end_pos) const {
  const Index p = ps.decomp.p;
  const Index len = ps.decomp.len(column);
  const Index start = end_pos - m_head_ + 1 + column;  // first text position
  std::vector<std::pair<Index, Index>> residues;
  bool many = false, partial = false;
  for (Index qq : qprimes_) {
    Index mis = 0, mis_u = -1;
    for (Index u = 0; u < std::min(qq, len); ++u) {
      if (hash_pattern_column(p, column, qq, u, len) !=
          hash_text_column(start, p, qq, u, len)) {
        if (++mis > 1) break;
        mis_u = u;
      }
    }
    if (mis == 0) {
      partial = true;
      continue;
    }
    if (mis > 1) {
      many = true;
      break;
    }
    residues.push_back({mis_u, qq});
  }
  if (many) return {RecoverResult::kMany, -1};
  if (residues.empty()) return {RecoverResult::kZero, -1};
  if (!partial) {
    if (auto x = crt_combine(residues, len)) return {RecoverResult::kOne, *x};
  }
  // Either the residues admit no in-range position or the primes disagree
  // about there being a mismatch at all: a fingerprint accident. Resolve
  // the column exactly from the buffered text.
  if (wc_) ++wc_->fingerprint_collisions;
  Index found = -1, count = 0;
  for (Index x = 0; x < len; ++x) {
    if (pattern_[x * p + column] != ring_at(start + x * p)) {
      if (++count > 1) return {RecoverResult::kMany, -1};
      found = x;
    }
  }
  if (count == 0) return {RecoverResult::kZero, -1};
  return {RecoverResult::kOne, found};
}

RecoverResult AperiodicEngine::recover_column(std::size_t prime_idx,
                                              Index column,
                                              Index end_pos) const {
  return recover_column_at(states_[prime_idx], column, end_pos);
}

void AperiodicEngine::admit(Index j) {
  if (wc_) ++wc_->candidates_admitted;
  candidate_log_.push_back(j);
  Candidate cand;
  cand.j = j;
  cand.deadline = j + k_;
  if (static_cast<Index>(live_.size()) >= kMaxLiveCandidates) {
    // Spacing assumption violated; verify this candidate directly.
    cand.naive = true;
    Value d = 0;
    const Index a = j - m_head_ + 1;
    for (Index t = 0; t < m_head_; ++t)
      if (ring_at(a + t) != pattern_[t]) ++d;
    if (wc_) wc_->charge_misc(m_head_);
    cand.head_dist = d;
    cand.done = true;
    live_.push_back(std::move(cand));
    return;
  }
  std::uint64_t scan = 0;
  for (std::size_t pi = 0; pi < states_.size(); ++pi) {
    PrimeState& ps = states_[pi];
    const Index p = ps.decomp.p;
    for (Index y = 0; y < p; ++y) {
      const Index len = ps.decomp.len(y);
      if (len == 0) continue;
      ++scan;
      // Position of the last element of column y's aligned window.
      const Index e = j - (m_head_ - y - 1) % p;
      const bool is_long = len == ps.decomp.long_len;
      const Index got =
          is_long ? ps.ring_long[e % p] : ps.ring_short[e % p];
      if (got != ps.decomp.ids[y]) cand.columns.push_back({pi, y});
    }
  }
  if (wc_) wc_->charge_misc(scan);
  cand.total_est = 1;
  for (const auto& [pi, y] : cand.columns)
    cand.total_est += static_cast<std::uint64_t>(qprimes_.size()) *
                          states_[pi].decomp.len(y) +
                      2 * qprimes_.back();
  live_.push_back(std::move(cand));
}

void AperiodicEngine::advance_candidate(Candidate& cand, Index now) {
  if (cand.done) return;
  const Index pushes_left = std::max<Index>(cand.deadline - now + 1, 1);
  std::uint64_t est_left = 0;
  for (std::size_t t = cand.next_column; t < cand.columns.size(); ++t) {
    const auto& [pi, y] = cand.columns[t];
    est_left += static_cast<std::uint64_t>(qprimes_.size()) *
                    states_[pi].decomp.len(y) +
                2 * qprimes_.back();
  }
  const std::uint64_t budget = est_left / pushes_left + 1;
  std::uint64_t spent = 0;
  while (cand.next_column < cand.columns.size() && spent < budget) {
    const auto& [pi, y] = cand.columns[cand.next_column++];
    const PrimeState& ps = states_[pi];
    spent += static_cast<std::uint64_t>(qprimes_.size()) * ps.decomp.len(y) +
             2 * qprimes_.back();
    RecoverResult r = recover_column_at(ps, y, cand.j);
    if (r.kind == RecoverResult::kOne)
      cand.found.push_back(r.local_index * ps.decomp.p + y);
  }
  if (wc_) wc_->charge_misc(spent);
  if (cand.next_column == cand.columns.size()) {
    std::sort(cand.found.begin(), cand.found.end());
    cand.found.erase(std::unique(cand.found.begin(), cand.found.end()),
                     cand.found.end());
    cand.head_dist = static_cast<Value>(cand.found.size());
    cand.done = true;
    if (wc_) wc_->note_aperiodic_head_delay(now - cand.j);
  }
}

void AperiodicEngine::finish_candidate(Candidate& cand, Index now) {
  if (!cand.done) {
    if (wc_) ++wc_->deadline_misses;
    while (!cand.done) advance_candidate(cand, now);
  }
}

void AperiodicEngine::push(Symbol c, ReportSink& out) {
  const Index i = i_++;
  ring_[static_cast<std::size_t>(i) % ring_.size()] = c;

  // Route the character to each prime's stream; refresh that stream's
  // rolling fingerprints, emit column ids, and accumulate match credits for
  // the window ends each id supports.
  for (PrimeState& ps : states_) {
    const Index p = ps.decomp.p;
    const Index r = i % p;
    const Index cnt = i / p + 1;  // stream elements including this one
    auto roll = [&](u64& fp, Index len, u64 pow_top) {
      if (len == 0) return;
      if (cnt > len)
        fp = fp_sub(fp, fp_mul(fp_val(ring_at(i - len * p)), pow_top));
      fp = fp_add(fp_mul(fp, fp_base_), fp_val(c));
    };
    roll(ps.fp_long[r], ps.decomp.long_len, ps.pow_long);
    Index id_long = -1;
    if (ps.decomp.long_len > 0 && cnt >= ps.decomp.long_len) {
      auto it = ps.table_long.find(ps.fp_long[r]);
      if (it != ps.table_long.end()) id_long = it->second;
    }
    Index id_short = -1;
    if (ps.decomp.long_len != ps.decomp.short_len) {
      roll(ps.fp_short[r], ps.decomp.short_len, ps.pow_short);
      if (ps.decomp.short_len > 0 && cnt >= ps.decomp.short_len) {
        auto it = ps.table_short.find(ps.fp_short[r]);
        if (it != ps.table_short.end()) id_short = it->second;
      }
    }
    ps.ring_long[r] = id_long;
    ps.ring_short[r] = id_short;
    std::uint64_t steps = 1;
    auto credit = [&](Index id, const auto& cols) {
      if (id < 0) return;
      auto it = cols.find(id);
      if (it == cols.end()) return;
      for (Index y : it->second) {
        // This occurrence ends exactly where column y sits for the window
        // ending at i + (m_head - y - 1) mod p.
        ++ps.bucket[(i + (m_head_ - y - 1) % p) % p];
        ++steps;
      }
    };
    credit(id_long, ps.cols_long);
    credit(id_short, ps.cols_short);
    ps.col_dist = ps.nonempty_cols - static_cast<Index>(ps.bucket[i % p]);
    ps.bucket[i % p] = 0;
    if (wc_) wc_->charge_misc(steps);
  }

  // Live candidates: tail comparisons and budgeted head classification.
  for (Candidate& cand : live_) {
    if (i > cand.j && i <= cand.j + 2 * k_) {
      if (c != pattern_[m_head_ + (i - cand.j - 1)]) ++cand.tail_mis;
      if (wc_) wc_->charge_misc(1);
    }
    if (!cand.done) advance_candidate(cand, i);
  }

  // Filter decision for the head window ending here.
  last_pass_ = i >= m_head_ - 1;
  if (last_pass_)
    for (const PrimeState& ps : states_)
      if (ps.col_dist * 4 > 5 * k_) {
        last_pass_ = false;
        break;
      }
  if (last_pass_) admit(i);

  if (i >= m_ - 1) {
    const Index j0 = i - 2 * k_;
    if (!live_.empty() && live_.front().j == j0) {
      Candidate& cand = live_.front();
      finish_candidate(cand, i);
      const Value total = cand.head_dist + cand.tail_mis;
      out.emit({i, total <= k_ ? total : kExceedsK});
      live_.pop_front();
    } else {
      out.emit({i, kExceedsK});
    }
    if (wc_) wc_->note_output_delay(0);
  }
  if (wc_) wc_->note_live_cells(cells());
}

std::uint64_t AperiodicEngine::cells() const {
  std::uint64_t c = ring_.size();
  for (const PrimeState& ps : states_) {
    c += ps.fp_long.size() + ps.fp_short.size() + ps.ring_long.size() +
         ps.ring_short.size() + ps.bucket.size() + ps.table_long.size() +
         ps.table_short.size() + ps.decomp.ids.size();
    for (const auto& [id, v] : ps.cols_long) c += v.size();
    for (const auto& [id, v] : ps.cols_short) c += v.size();
  }
  for (const Candidate& cand : live_)
    c += cand.columns.size() + cand.found.size();
  return c;
}

}  // namespace kmm
