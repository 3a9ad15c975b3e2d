#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kmm/base.hpp"
#include "kmm/counters.hpp"
#include "kmm/engine.hpp"

namespace kmm {

struct RunConfig {
  std::string pattern_path;
  std::string text_path;  // "-" reads stdin
  Index k = 0;
  Index s = 0;
  enum class Mode { kAuto, kPeriodic, kAperiodic, kOracle } mode = Mode::kAuto;
  std::uint64_t seed = 1;
  Index fft_threshold = 0;
  std::string metrics_path;  // empty = no metrics
  enum class Symbols { kBytes, kU32 } symbols = Symbols::kBytes;
};

// Smallest 6k-approximate period at most k selects the periodic pipeline;
// otherwise the prime-filtered pipeline runs.
std::unique_ptr<StreamEngine> engine_select(const SymString& P, Index k,
                                            Index s, std::uint64_t seed,
                                            WorkCounters* wc = nullptr,
                                            EngineOptions opt = {});

// Ground truth: naive scan with early exit past k mismatches.
std::vector<MatchReport> oracle_kmismatch(const SymString& P,
                                          const SymString& T, Index k);

// Collects reports and checks the stream invariant: strictly increasing
// positions, exactly one report per position from m-1 on.
class VectorSink final : public ReportSink {
 public:
  void emit(const MatchReport& r) override;
  const std::vector<MatchReport>& reports() const { return reports_; }

 private:
  std::vector<MatchReport> reports_;
};

// Streams a whole text through an engine with per-character bookkeeping.
void run_stream(StreamEngine& eng, const SymString& text, ReportSink& out,
                WorkCounters* wc = nullptr);

std::string format_reports(const std::vector<MatchReport>& reports);

// Test-corpus generators.
SymString gen_periodic_pattern(std::mt19937_64& rng, Index m, Index k,
                               Symbol sigma);
SymString gen_aperiodic_pattern(std::mt19937_64& rng, Index m, Index k,
                                Symbol sigma);  // verified 6k-period > k
SymString gen_text_with_plants(std::mt19937_64& rng, const SymString& P,
                               Index n, Index k, Symbol sigma);

// Full CLI: parses argv, streams reports to `out`, metrics to a file.
// Exit codes: 0 success, 2 config error, 3 I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace kmm
