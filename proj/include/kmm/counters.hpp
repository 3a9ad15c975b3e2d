#pragma once

#include <algorithm>
#include <cstdint>

namespace kmm {

// Instrumentation shared by all engines in a run. Work is counted in
// abstract units: one unit per enumerated entry pair, per transform cell
// step, or per bookkeeping step charged explicitly. live_cells is a gauge
// (current dictionary/buffer cells) sampled by the engines after each push;
// everything else is monotone.
struct WorkCounters {
  std::uint64_t chars = 0;
  std::uint64_t pair_mults = 0;
  std::uint64_t transform_calls = 0;
  std::uint64_t transform_units = 0;
  std::uint64_t work_units = 0;
  std::uint64_t live_cells = 0;
  std::uint64_t live_cells_max = 0;
  std::uint64_t max_units_per_char = 0;

  // Delay of a value is (arrival index when it became final) - (its position).
  std::int64_t max_delay_head = 0;
  std::int64_t max_delay_output = 0;
  std::int64_t max_delay_aperiodic_head = 0;

  std::uint64_t candidates_admitted = 0;
  std::uint64_t deadline_misses = 0;
  std::uint64_t fingerprint_collisions = 0;
  std::uint64_t small_block_warnings = 0;
  std::uint64_t accumulator_warnings = 0;

  void charge_pairs(std::uint64_t n) {
    pair_mults += n;
    work_units += n;
  }
  void charge_transform(std::uint64_t units) {
    ++transform_calls;
    transform_units += units;
    work_units += units;
  }
  void charge_misc(std::uint64_t n) { work_units += n; }

  void note_live_cells(std::uint64_t cells) {
    live_cells = cells;
    live_cells_max = std::max(live_cells_max, cells);
  }
  void note_head_delay(std::int64_t d) {
    max_delay_head = std::max(max_delay_head, d);
  }
  void note_output_delay(std::int64_t d) {
    max_delay_output = std::max(max_delay_output, d);
  }
  void note_aperiodic_head_delay(std::int64_t d) {
    max_delay_aperiodic_head = std::max(max_delay_aperiodic_head, d);
  }
};

}  // namespace kmm
