#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kmm/base.hpp"

namespace kmm {

// Finite-support integer-valued function on the integers. Zero values are
// never stored, so support(f) is exactly the key set.
class SparseFunc {
 public:
  SparseFunc() = default;
  SparseFunc(std::initializer_list<std::pair<Index, Value>> init) {
    for (const auto& [i, v] : init) add(i, v);
  }

  // Accumulates v at index i, erasing the entry when the sum reaches zero.
  void add(Index i, Value v) {
    if (v == 0) return;
    auto [it, inserted] = map_.try_emplace(i, v);
    if (!inserted) {
      it->second += v;
      if (it->second == 0) map_.erase(it);
    }
  }

  void set(Index i, Value v) {
    if (v == 0)
      map_.erase(i);
    else
      map_[i] = v;
  }

  Value at(Index i) const {
    auto it = map_.find(i);
    return it == map_.end() ? 0 : it->second;
  }

  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }

  Index min_index() const {
    Index m = map_.begin()->first;
    for (const auto& [i, v] : map_) m = std::min(m, i);
    return m;
  }
  Index max_index() const {
    Index m = map_.begin()->first;
    for (const auto& [i, v] : map_) m = std::max(m, i);
    return m;
  }
  Index diam() const {
    if (map_.empty()) return 0;
    return max_index() - min_index() + 1;
  }

  const std::unordered_map<Index, Value>& entries() const { return map_; }

  std::vector<std::pair<Index, Value>> sorted() const {
    std::vector<std::pair<Index, Value>> v(map_.begin(), map_.end());
    std::sort(v.begin(), v.end());
    return v;
  }

  bool operator==(const SparseFunc& o) const { return map_ == o.map_; }

  // Keeps exactly the entries with lo <= index < hi.
  SparseFunc restricted(Index lo, Index hi) const {
    if (lo > hi) throw DomainError("restricted: lo > hi");
    SparseFunc out;
    for (const auto& [i, v] : map_)
      if (i >= lo && i < hi) out.set(i, v);
    return out;
  }

 private:
  std::unordered_map<Index, Value> map_;
};

inline SparseFunc restrict_interval(const SparseFunc& f, Index lo, Index hi) {
  return f.restricted(lo, hi);
}

// Ordered sequence of sparse functions, keyed by slot index; only slots
// holding a nonzero function are stored. slot_count is the declared length
// t of the sequence (0 = unspecified, which skips shape checks).
class FuncSeq {
 public:
  FuncSeq() = default;
  explicit FuncSeq(Index t) : slot_count(t) {}

  void set_slot(Index j, SparseFunc f) {
    auto it = slots_.find(j);
    if (it != slots_.end()) {
      norm_ -= it->second.size();
      slots_.erase(it);
    }
    if (!f.empty()) {
      norm_ += f.size();
      slots_.emplace(j, std::move(f));
    }
  }

  void add_entry(Index j, Index i, Value v) {
    if (v == 0) return;
    auto& f = slots_[j];
    norm_ -= f.size();
    f.add(i, v);
    norm_ += f.size();
    if (f.empty()) slots_.erase(j);
  }

  const SparseFunc* slot(Index j) const {
    auto it = slots_.find(j);
    return it == slots_.end() ? nullptr : &it->second;
  }

  const std::map<Index, SparseFunc>& slots() const { return slots_; }

  bool empty() const { return slots_.empty(); }

  // Total number of nonzero entries across all stored functions.
  std::uint64_t norm() const { return norm_; }

  // Largest member diameter.
  Index diam() const {
    Index d = 0;
    for (const auto& [j, f] : slots_) d = std::max(d, f.diam());
    return d;
  }

  std::pair<Index, Index> support_range() const {  // [min, max], valid if !empty
    Index lo = 0, hi = -1;
    bool first = true;
    for (const auto& [j, f] : slots_) {
      if (f.empty()) continue;
      if (first) {
        lo = f.min_index();
        hi = f.max_index();
        first = false;
      } else {
        lo = std::min(lo, f.min_index());
        hi = std::max(hi, f.max_index());
      }
    }
    return {lo, hi};
  }

  FuncSeq restricted(Index lo, Index hi) const {
    FuncSeq out(slot_count);
    for (const auto& [j, f] : slots_) out.set_slot(j, f.restricted(lo, hi));
    return out;
  }

  std::uint64_t cells() const { return norm_; }

  Index slot_count = 0;

 private:
  std::map<Index, SparseFunc> slots_;
  std::uint64_t norm_ = 0;
};

}  // namespace kmm
