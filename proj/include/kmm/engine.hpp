#pragma once

#include <cstdint>

#include "kmm/base.hpp"
#include "kmm/counters.hpp"

namespace kmm {

// Marker value for "distance exceeds k".
constexpr Value kExceedsK = -1;

struct MatchReport {
  Index pos;    // absolute end index of the window
  Value value;  // distance in [0..k], or kExceedsK
};

class ReportSink {
 public:
  virtual ~ReportSink() = default;
  virtual void emit(const MatchReport& r) = 0;
};

struct EngineOptions {
  Index fft_threshold = 0;  // 0 = per-module default
};

// A streaming matcher: consumes one character per push and emits the report
// for the window ending at that character (if any) before returning.
class StreamEngine {
 public:
  virtual ~StreamEngine() = default;
  virtual void push(Symbol c, ReportSink& out) = 0;
  virtual std::uint64_t cells() const = 0;
};

}  // namespace kmm
