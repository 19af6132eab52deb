#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sdm/map_update.hpp"

namespace sdm {

// Service rates and buffering of the three-stage abstraction: a slow-rate
// front stage, the fast-rate scan stage, and a slow-rate back stage joined
// by bounded FIFOs.
struct PipelineConfig {
  int slow_rate = 5;      // cycles per point, front and back stages
  int scan_cost = 1;      // cycles per scan step
  int skip_cost = 1;      // cycles to forward a skipped point
  int init_cost = 4;      // cycles to set up a scan
  int fifo_depth = 1024;  // entries per inter-unit buffer
  double clock_mhz = 100.0;
  int mem_bandwidth = 8;  // bytes per cycle for burst DMA
  int parallelism = 1;    // fast-stage lanes, scales the per-step cost
};

// Per-point load in stream order: 0 = skip, s > 0 = scan with s steps.
struct FrameWorkload {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> points;

  std::size_t size() const { return points.size(); }
};

FrameWorkload workload_from_trace(const UpdateTrace& trace);

// Fast-stage service time for one point under `config`.
std::uint64_t fast_service_cycles(const PipelineConfig& config,
                                  std::uint16_t steps);

// First-order per-row cost: skip_cost per skip, steps * scan_cost per scan.
// Setup cycles are deliberately excluded here; the simulator includes them.
std::uint64_t analytic_row_cycles(std::span<const std::uint16_t> row,
                                  const PipelineConfig& config);

struct SimReport {
  std::uint64_t total_cycles = 0;
  std::uint64_t points = 0;
  std::array<std::uint64_t, 3> busy_cycles{};   // front, fast, back
  std::array<std::uint64_t, 3> stall_cycles{};  // blocked on a full FIFO
  std::array<int, 2> fifo_peak{};               // front->fast, fast->back

  bool operator==(const SimReport&) const = default;
};

// Deterministic discrete-event simulation of the three-stage line with
// blocking-after-service semantics and same-cycle handoff through the
// FIFOs. Total cycles are bounded below by every stage's aggregate service
// demand.
SimReport simulate_frame(const FrameWorkload& workload,
                         const PipelineConfig& config);

struct FrameTime {
  double compute_ms = 0.0;
  double memory_ms = 0.0;
  double total_ms = 0.0;
};

// Compute time from the cycle count, memory time from streaming the map
// twice (read + write) plus the frame once. With overlap the total is the
// max of the two phases, otherwise their sum.
FrameTime frame_time_ms(const SimReport& sim, const PipelineConfig& config,
                        std::uint64_t frame_bytes, std::uint64_t map_bytes,
                        bool overlap = true);

struct TuneResult {
  bool feasible = false;
  PipelineConfig config;
  double p99_ms = 0.0;
  double resource_proxy = 0.0;
};

// Grid search over slow_rate in {2..10} and fast-stage parallelism in
// {1,2}, minimising the resource proxy 1/slow_rate + 0.25*(parallelism-1)
// subject to the simulated p99 frame time meeting the target rate. When no
// combination meets the target the result carries feasible = false and the
// best-effort p99 of the most capable configuration.
TuneResult tune_rates(double target_fps,
                      const std::vector<FrameWorkload>& frames,
                      double clock_mhz, const PipelineConfig& base = {});

struct WorkloadStats {
  int width = 0;
  int height = 0;
  std::vector<double> scan_frequency;  // per pixel, in [0,1]
  std::vector<double> row_profile;     // mean frequency per row
  std::uint64_t scan_count = 0;
  std::uint64_t point_count = 0;
  double mean_steps = 0.0;
  double p50_steps = 0.0;
  double p98_steps = 0.0;
  std::uint16_t max_steps = 0;
};

// Aggregates scan frequency and step statistics over a trace sequence.
// Throws std::invalid_argument on empty input or mismatched dimensions.
WorkloadStats scan_frequency_heatmap(const std::vector<UpdateTrace>& traces);

}  // namespace sdm
