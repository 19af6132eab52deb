#include "sdm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace sdm {

FrameWorkload workload_from_trace(const UpdateTrace& trace) {
  FrameWorkload w;
  w.width = trace.width;
  w.height = trace.height;
  w.points.reserve(trace.entries.size());
  for (const TraceEntry& e : trace.entries)
    w.points.push_back(e.verdict == Verdict::Scan
                           ? std::max<std::uint16_t>(1, e.steps)
                           : std::uint16_t{0});
  return w;
}

std::uint64_t fast_service_cycles(const PipelineConfig& config,
                                  std::uint16_t steps) {
  if (steps == 0) return static_cast<std::uint64_t>(config.skip_cost);
  const std::uint64_t scan =
      (static_cast<std::uint64_t>(steps) * config.scan_cost +
       config.parallelism - 1) /
      config.parallelism;
  return static_cast<std::uint64_t>(config.init_cost) + scan;
}

std::uint64_t analytic_row_cycles(std::span<const std::uint16_t> row,
                                  const PipelineConfig& config) {
  std::uint64_t cycles = 0;
  for (const std::uint16_t steps : row)
    cycles += steps == 0
                  ? static_cast<std::uint64_t>(config.skip_cost)
                  : static_cast<std::uint64_t>(steps) * config.scan_cost;
  return cycles;
}

namespace {

// One stage of the line. A stage is either idle, serving an item until
// `busy_until`, or holding a finished item it could not push downstream yet
// (blocking-after-service).
struct Stage {
  bool busy = false;
  bool holding = false;
  std::uint64_t busy_until = 0;
  std::uint16_t item = 0;
  std::uint64_t busy_cycles = 0;
  std::uint64_t stall_since = 0;
  std::uint64_t stall_cycles = 0;
};

}  // namespace

SimReport simulate_frame(const FrameWorkload& workload,
                         const PipelineConfig& config) {
  if (config.slow_rate < 1 || config.scan_cost < 1 || config.skip_cost < 1 ||
      config.init_cost < 0 || config.fifo_depth < 1 || config.parallelism < 1)
    throw std::invalid_argument("pipeline configuration out of range");

  SimReport report;
  report.points = workload.points.size();
  if (workload.points.empty()) return report;

  Stage stage[3];
  std::deque<std::uint16_t> fifo[2];  // front->fast, fast->back
  std::size_t next_in = 0;
  std::size_t emitted = 0;
  std::uint64_t now = 0;

  const auto service = [&](int s, std::uint16_t item) -> std::uint64_t {
    return s == 1 ? fast_service_cycles(config, item)
                  : static_cast<std::uint64_t>(config.slow_rate);
  };

  // Advance every stage as far as possible at the current timestamp.
  // Sweeping back-to-front and repeating until nothing moves gives the
  // zero-latency handoff: an item pushed at time T can be consumed at T.
  const auto settle = [&] {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int s = 2; s >= 0; --s) {
        Stage& st = stage[s];
        if (st.busy && st.busy_until <= now) {
          st.busy = false;
          st.holding = true;
          st.stall_since = now;
          moved = true;
        }
        if (st.holding) {
          const bool can_push =
              s == 2 || static_cast<int>(fifo[s].size()) < config.fifo_depth;
          if (can_push) {
            st.stall_cycles += now - st.stall_since;
            st.holding = false;
            if (s == 2) {
              ++emitted;
            } else {
              fifo[s].push_back(st.item);
              report.fifo_peak[s] = std::max(
                  report.fifo_peak[s], static_cast<int>(fifo[s].size()));
            }
            moved = true;
          }
        }
        if (!st.busy && !st.holding) {
          bool started = false;
          if (s == 0) {
            if (next_in < workload.points.size()) {
              st.item = workload.points[next_in++];
              started = true;
            }
          } else if (!fifo[s - 1].empty()) {
            st.item = fifo[s - 1].front();
            fifo[s - 1].pop_front();
            started = true;
          }
          if (started) {
            const std::uint64_t t = service(s, st.item);
            st.busy = true;
            st.busy_until = now + t;
            st.busy_cycles += t;
            moved = true;
          }
        }
      }
    }
  };

  settle();
  while (emitted < workload.points.size()) {
    std::uint64_t next = std::numeric_limits<std::uint64_t>::max();
    for (const Stage& st : stage)
      if (st.busy) next = std::min(next, st.busy_until);
    if (next == std::numeric_limits<std::uint64_t>::max())
      throw std::logic_error("pipeline deadlock");  // cannot happen: back never blocks
    now = next;
    settle();
  }

  report.total_cycles = now;
  for (int s = 0; s < 3; ++s) {
    report.busy_cycles[static_cast<std::size_t>(s)] = stage[s].busy_cycles;
    report.stall_cycles[static_cast<std::size_t>(s)] = stage[s].stall_cycles;
  }
  return report;
}

FrameTime frame_time_ms(const SimReport& sim, const PipelineConfig& config,
                        std::uint64_t frame_bytes, std::uint64_t map_bytes,
                        bool overlap) {
  FrameTime ft;
  const double cycles_per_ms = config.clock_mhz * 1000.0;
  ft.compute_ms = static_cast<double>(sim.total_cycles) / cycles_per_ms;
  const std::uint64_t bytes = frame_bytes + 2 * map_bytes;  // map in + out
  const double mem_cycles =
      static_cast<double>(bytes) / static_cast<double>(config.mem_bandwidth);
  ft.memory_ms = mem_cycles / cycles_per_ms;
  ft.total_ms = overlap ? std::max(ft.compute_ms, ft.memory_ms)
                        : ft.compute_ms + ft.memory_ms;
  return ft;
}

TuneResult tune_rates(double target_fps,
                      const std::vector<FrameWorkload>& frames,
                      double clock_mhz, const PipelineConfig& base) {
  if (!(target_fps > 0.0) || frames.empty() || !(clock_mhz > 0.0))
    throw std::invalid_argument("tune_rates needs frames and positive rates");

  const double budget_ms = 1000.0 / target_fps;
  const auto p99_of = [&](const PipelineConfig& config) {
    std::vector<double> ms;
    ms.reserve(frames.size());
    for (const FrameWorkload& f : frames) {
      const SimReport sim = simulate_frame(f, config);
      ms.push_back(static_cast<double>(sim.total_cycles) /
                   (config.clock_mhz * 1000.0));
    }
    std::sort(ms.begin(), ms.end());
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(ms.size()))) - 1;
    return ms[std::min(idx, ms.size() - 1)];
  };
  const auto proxy_of = [](const PipelineConfig& config) {
    return 1.0 / config.slow_rate + 0.25 * (config.parallelism - 1);
  };

  TuneResult best;
  TuneResult fallback;  // most capable combination, reported when infeasible
  bool have_fallback = false;
  for (int parallelism = 1; parallelism <= 2; ++parallelism) {
    for (int slow_rate = 2; slow_rate <= 10; ++slow_rate) {
      PipelineConfig config = base;
      config.slow_rate = slow_rate;
      config.parallelism = parallelism;
      config.clock_mhz = clock_mhz;
      const double p99 = p99_of(config);
      const double proxy = proxy_of(config);
      if (p99 <= budget_ms) {
        const bool better =
            !best.feasible || proxy < best.resource_proxy ||
            (proxy == best.resource_proxy &&
             config.parallelism < best.config.parallelism);
        if (better) {
          best.feasible = true;
          best.config = config;
          best.p99_ms = p99;
          best.resource_proxy = proxy;
        }
      }
      if (!have_fallback || p99 < fallback.p99_ms) {
        have_fallback = true;
        fallback.config = config;
        fallback.p99_ms = p99;
        fallback.resource_proxy = proxy;
      }
    }
  }
  return best.feasible ? best : fallback;
}

WorkloadStats scan_frequency_heatmap(const std::vector<UpdateTrace>& traces) {
  if (traces.empty())
    throw std::invalid_argument("no traces to aggregate");
  const int w = traces.front().width;
  const int h = traces.front().height;
  for (const UpdateTrace& t : traces)
    if (t.width != w || t.height != h)
      throw std::invalid_argument("trace dimensions differ");

  WorkloadStats stats;
  stats.width = w;
  stats.height = h;
  stats.scan_frequency.assign(static_cast<std::size_t>(w) * h, 0.0);
  stats.row_profile.assign(static_cast<std::size_t>(h), 0.0);

  std::vector<std::uint16_t> scan_steps;
  double step_sum = 0.0;
  for (const UpdateTrace& t : traces) {
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
      ++stats.point_count;
      const TraceEntry& e = t.entries[i];
      if (e.verdict != Verdict::Scan) continue;
      ++stats.scan_count;
      stats.scan_frequency[i] += 1.0;
      step_sum += e.steps;
      scan_steps.push_back(e.steps);
      stats.max_steps = std::max(stats.max_steps, e.steps);
    }
  }
  const double n_frames = static_cast<double>(traces.size());
  for (double& f : stats.scan_frequency) f /= n_frames;
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x)
      row += stats.scan_frequency[static_cast<std::size_t>(y) * w + x];
    stats.row_profile[static_cast<std::size_t>(y)] = row / w;
  }
  if (!scan_steps.empty()) {
    stats.mean_steps = step_sum / static_cast<double>(scan_steps.size());
    std::sort(scan_steps.begin(), scan_steps.end());
    const auto pct = [&](double q) {
      const std::size_t idx = static_cast<std::size_t>(std::ceil(
          q * static_cast<double>(scan_steps.size()))) - 1;
      return static_cast<double>(scan_steps[std::min(idx, scan_steps.size() - 1)]);
    };
    stats.p50_steps = pct(0.50);
    stats.p98_steps = pct(0.98);
  }
  return stats;
}

}  // namespace sdm
