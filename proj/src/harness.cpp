#include "kmm/harness.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kmm/aperiodic.hpp"
#include "kmm/ham.hpp"
#include "kmm/periodic.hpp"

namespace kmm {

std::unique_ptr<StreamEngine> engine_select(const SymString& P, Index k,
                                            Index s, std::uint64_t seed,
                                            WorkCounters* wc,
                                            EngineOptions opt) {
  const Index m = static_cast<Index>(P.size());
  if (k < 1 || k > s || s > m)
    throw ConfigError("engine_select: need 1 <= k <= s <= m");
  const Index rho = smallest_dperiod(P, 6 * k);
  if (rho <= k)
    return std::make_unique<SplitDriver>(P, k, s, rho, wc, opt);
  return std::make_unique<AperiodicEngine>(P, k, seed, wc, opt);
}

std::vector<MatchReport> oracle_kmismatch(const SymString& P,
                                          const SymString& T, Index k) {
  const Index m = static_cast<Index>(P.size());
  const Index n = static_cast<Index>(T.size());
  std::vector<MatchReport> out;
  for (Index i = m - 1; i < n; ++i) {
    Value d = 0;
    for (Index t = 0; t < m; ++t) {
      if (T[i - m + 1 + t] != P[t] && ++d > k) break;
    }
    out.push_back({i, d > k ? kExceedsK : d});
  }
  return out;
}

void VectorSink::emit(const MatchReport& r) {
  if (!reports_.empty() && r.pos <= reports_.back().pos)
    throw PipelineError("report positions must be strictly increasing");
  reports_.push_back(r);
}

void run_stream(StreamEngine& eng, const SymString& text, ReportSink& out,
                WorkCounters* wc) {
  for (Symbol c : text) {
    std::uint64_t before = wc ? wc->work_units : 0;
    eng.push(c, out);
    if (wc) {
      ++wc->chars;
      wc->max_units_per_char =
          std::max(wc->max_units_per_char, wc->work_units - before);
    }
  }
}

std::string format_reports(const std::vector<MatchReport>& reports) {
  std::ostringstream os;
  for (const auto& r : reports) os << r.pos << '\t' << r.value << '\n';
  return os.str();
}

SymString gen_periodic_pattern(std::mt19937_64& rng, Index m, Index k,
                               Symbol sigma) {
  std::uniform_int_distribution<Index> rho_d(1, std::min(k, m));
  std::uniform_int_distribution<Symbol> sym(0, sigma - 1);
  const Index rho = rho_d(rng);
  SymString base(rho);
  for (auto& c : base) c = sym(rng);
  SymString P(m);
  for (Index i = 0; i < m; ++i) P[i] = base[i % rho];
  // Up to 3k scattered edits keep the 6k-period at most rho.
  std::uniform_int_distribution<Index> edits_d(0, std::min<Index>(3 * k, m));
  Index edits = edits_d(rng);
  std::uniform_int_distribution<Index> pos_d(0, m - 1);
  for (Index e = 0; e < edits; ++e) P[pos_d(rng)] = sym(rng);
  return P;
}

SymString gen_aperiodic_pattern(std::mt19937_64& rng, Index m, Index k,
                                Symbol sigma) {
  std::uniform_int_distribution<Symbol> sym(0, sigma - 1);
  for (int attempt = 0; attempt < 200; ++attempt) {
    SymString P(m);
    for (auto& c : P) c = sym(rng);
    if (smallest_dperiod(P, 6 * k) > k) return P;
  }
  throw ConfigError("gen_aperiodic_pattern: no such pattern at this (m,k,sigma)");
}

SymString gen_text_with_plants(std::mt19937_64& rng, const SymString& P,
                               Index n, Index k, Symbol sigma) {
  const Index m = static_cast<Index>(P.size());
  std::uniform_int_distribution<Symbol> sym(0, sigma - 1);
  SymString T(n);
  for (auto& c : T) c = sym(rng);
  if (n < m) return T;
  // A few planted occurrences with 0..k+2 edits each.
  std::uniform_int_distribution<Index> count_d(0, 4);
  std::uniform_int_distribution<Index> start_d(0, n - m);
  const Index plants = count_d(rng);
  for (Index t = 0; t < plants; ++t) {
    const Index at = start_d(rng);
    std::copy(P.begin(), P.end(), T.begin() + at);
    std::uniform_int_distribution<Index> edits_d(0, k + 2);
    std::uniform_int_distribution<Index> pos_d(0, m - 1);
    const Index edits = edits_d(rng);
    for (Index e = 0; e < edits; ++e) T[at + pos_d(rng)] = sym(rng);
  }
  return T;
}

namespace {

bool read_symbols(const std::string& path, RunConfig::Symbols mode,
                  SymString& out, std::string& err) {
  std::istream* in;
  std::ifstream file;
  if (path == "-") {
    in = &std::cin;
  } else {
    file.open(path, std::ios::binary);
    if (!file) {
      err = "cannot open " + path;
      return false;
    }
    in = &file;
  }
  if (mode == RunConfig::Symbols::kBytes) {
    char c;
    while (in->get(c)) out.push_back(static_cast<unsigned char>(c));
  } else {
    std::uint64_t v;
    while (*in >> v) out.push_back(static_cast<Symbol>(v));
    if (!in->eof() && in->fail()) {
      err = "non-numeric token in " + path;
      return false;
    }
  }
  return true;
}

class LineSink final : public ReportSink {
 public:
  explicit LineSink(std::ostream& os) : os_(os) {}
  void emit(const MatchReport& r) override {
    os_ << r.pos << '\t' << r.value << '\n';
  }

 private:
  std::ostream& os_;
};

bool write_metrics(const std::string& path, const WorkCounters& wc,
                   std::ostream& err) {
  nlohmann::json j{{"chars", wc.chars},
                   {"pair_mults", wc.pair_mults},
                   {"transform_calls", wc.transform_calls},
                   {"live_cells_max", wc.live_cells_max},
                   {"max_delay_observed", wc.max_delay_output},
                   {"candidates_admitted", wc.candidates_admitted},
                   {"transform_units", wc.transform_units},
                   {"work_units", wc.work_units},
                   {"max_units_per_char", wc.max_units_per_char},
                   {"delay_head_max", wc.max_delay_head},
                   {"delay_aperiodic_head_max", wc.max_delay_aperiodic_head},
                   {"deadline_misses", wc.deadline_misses},
                   {"fingerprint_collisions", wc.fingerprint_collisions},
                   {"small_block_warnings", wc.small_block_warnings}};
  std::ofstream f(path);
  if (!f) {
    err << "kmismatch: cannot write metrics to " << path << "\n";
    return false;
  }
  f << j.dump() << "\n";
  return true;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"streaming k-mismatch matcher"};
  RunConfig cfg;
  std::string mode = "auto", symbols = "bytes";
  app.add_option("--pattern", cfg.pattern_path, "pattern file")->required();
  app.add_option("--text", cfg.text_path, "text file, or - for stdin")
      ->required();
  app.add_option("--k", cfg.k, "mismatch threshold")->required();
  app.add_option("--s", cfg.s, "space parameter (k <= s <= m)");
  app.add_option("--mode", mode, "auto|periodic|aperiodic|oracle");
  app.add_option("--seed", cfg.seed, "seed for randomized structures");
  app.add_option("--fft-threshold", cfg.fft_threshold,
                 "pair/transform switchover override");
  app.add_option("--metrics", cfg.metrics_path, "metrics output file");
  app.add_option("--symbols", symbols, "bytes|u32");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    err << e.get_name() << ": " << e.what() << "\n";
    return 2;
  }

  if (mode == "auto")
    cfg.mode = RunConfig::Mode::kAuto;
  else if (mode == "periodic")
    cfg.mode = RunConfig::Mode::kPeriodic;
  else if (mode == "aperiodic")
    cfg.mode = RunConfig::Mode::kAperiodic;
  else if (mode == "oracle")
    cfg.mode = RunConfig::Mode::kOracle;
  else {
    err << "kmismatch: unknown mode " << mode << "\n";
    return 2;
  }
  if (symbols == "bytes")
    cfg.symbols = RunConfig::Symbols::kBytes;
  else if (symbols == "u32")
    cfg.symbols = RunConfig::Symbols::kU32;
  else {
    err << "kmismatch: unknown symbol mode " << symbols << "\n";
    return 2;
  }

  SymString P;
  std::string io_err;
  if (!read_symbols(cfg.pattern_path, cfg.symbols, P, io_err)) {
    err << "kmismatch: " << io_err << "\n";
    return 3;
  }
  const Index m = static_cast<Index>(P.size());
  if (m < 1) {
    err << "kmismatch: empty pattern\n";
    return 2;
  }
  if (cfg.s == 0) cfg.s = m;  // default: full space budget
  if (cfg.k < 1 || cfg.k > cfg.s || cfg.s > m) {
    err << "kmismatch: need 1 <= k <= s <= m\n";
    return 2;
  }

  WorkCounters wc;
  std::unique_ptr<StreamEngine> eng;
  EngineOptions opt{cfg.fft_threshold};
  try {
    switch (cfg.mode) {
      case RunConfig::Mode::kAuto:
        eng = engine_select(P, cfg.k, cfg.s, cfg.seed, &wc, opt);
        break;
      case RunConfig::Mode::kPeriodic: {
        const Index rho = smallest_dperiod(P, 6 * cfg.k);
        if (rho > cfg.k) {
          err << "kmismatch: pattern has no 6k-period <= k; periodic mode "
                 "impossible\n";
          return 2;
        }
        eng = std::make_unique<SplitDriver>(P, cfg.k, cfg.s, rho, &wc, opt);
        break;
      }
      case RunConfig::Mode::kAperiodic:
        eng = std::make_unique<AperiodicEngine>(P, cfg.k, cfg.seed, &wc, opt);
        break;
      case RunConfig::Mode::kOracle:
        break;
    }
  } catch (const ConfigError& e) {
    err << "kmismatch: " << e.what() << "\n";
    return 2;
  }

  LineSink sink(out);
  if (cfg.mode == RunConfig::Mode::kOracle) {
    SymString T;
    if (!read_symbols(cfg.text_path, cfg.symbols, T, io_err)) {
      err << "kmismatch: " << io_err << "\n";
      return 3;
    }
    for (const auto& r : oracle_kmismatch(P, T, cfg.k)) sink.emit(r);
    wc.chars = T.size();
  } else {
    // Stream the text without buffering it.
    std::istream* in;
    std::ifstream file;
    if (cfg.text_path == "-") {
      in = &std::cin;
    } else {
      file.open(cfg.text_path, std::ios::binary);
      if (!file) {
        err << "kmismatch: cannot open " << cfg.text_path << "\n";
        return 3;
      }
      in = &file;
    }
    auto feed = [&](Symbol c) {
      std::uint64_t before = wc.work_units;
      eng->push(c, sink);
      ++wc.chars;
      wc.max_units_per_char =
          std::max(wc.max_units_per_char, wc.work_units - before);
    };
    if (cfg.symbols == RunConfig::Symbols::kBytes) {
      char c;
      while (in->get(c)) feed(static_cast<unsigned char>(c));
    } else {
      std::uint64_t v;
      while (*in >> v) feed(static_cast<Symbol>(v));
      if (!in->eof() && in->fail()) {
        err << "kmismatch: non-numeric token in " << cfg.text_path << "\n";
        return 3;
      }
    }
  }

  if (!cfg.metrics_path.empty() && !write_metrics(cfg.metrics_path, wc, err))
    return 3;
  return 0;
}

}  // namespace kmm
