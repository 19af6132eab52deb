#include <numeric>
#include <random>
#include <vector>

#include <doctest.h>

#include "sdm/pipeline.hpp"

#include "cycle_oracle.hpp"

using namespace sdm;

namespace {

FrameWorkload make_workload(std::vector<std::uint16_t> points, int width = 0) {
  FrameWorkload w;
  w.width = width ? width : static_cast<int>(points.size());
  w.height = width ? static_cast<int>(points.size()) / width : 1;
  w.points = std::move(points);
  return w;
}

FrameWorkload all_skip_frame(int w, int h) {
  FrameWorkload f;
  f.width = w;
  f.height = h;
  f.points.assign(static_cast<std::size_t>(w) * h, 0);
  return f;
}

std::vector<std::uint16_t> random_points(std::mt19937& rng, int max_n,
                                         int max_steps) {
  std::uniform_int_distribution<int> n_dist(0, max_n);
  std::uniform_int_distribution<int> step_dist(0, max_steps);
  std::uniform_int_distribution<int> scan_dist(0, 3);
  std::vector<std::uint16_t> pts(static_cast<std::size_t>(n_dist(rng)));
  for (auto& p : pts)
    p = scan_dist(rng) == 0 ? static_cast<std::uint16_t>(step_dist(rng)) : 0;
  return pts;
}

UpdateTrace trace_with_scans(int w, int h,
                             const std::vector<std::pair<int, int>>& scans,
                             std::uint16_t steps = 5) {
  UpdateTrace t(w, h);
  for (auto& e : t.entries) e.verdict = Verdict::SkipLowGradient;
  for (auto [x, y] : scans) {
    t.at(x, y).verdict = Verdict::Scan;
    t.at(x, y).steps = steps;
  }
  return t;
}

}  // namespace

TEST_CASE("workloads map skips to zero and scans to at least one step") {
  UpdateTrace trace(3, 2);
  trace.at(0, 0) = {Verdict::Scan, 7, 1.0f, 2.0f};
  trace.at(1, 0) = {Verdict::Scan, 0, 0.0f, 0.0f};  // degenerate scan
  trace.at(2, 0) = {Verdict::SkipLowGradient, 0, 0.0f, 0.0f};
  trace.at(0, 1) = {Verdict::SkipBlacklisted, 9, 0.0f, 0.0f};
  trace.at(1, 1) = {Verdict::SkipOutOfFrame, 0, 0.0f, 0.0f};
  trace.at(2, 1) = {Verdict::SkipGeometry, 0, 0.0f, 0.0f};

  const FrameWorkload w = workload_from_trace(trace);
  CHECK(w.width == 3);
  CHECK(w.height == 2);
  CHECK(w.points ==
        std::vector<std::uint16_t>{7, 1, 0, 0, 0, 0});
}

TEST_CASE("fast-stage service covers setup plus parallel scan steps") {
  PipelineConfig cfg;
  CHECK(fast_service_cycles(cfg, 0) == 1);    // forwarding a skip
  CHECK(fast_service_cycles(cfg, 1) == 5);    // 4 setup + 1 step
  CHECK(fast_service_cycles(cfg, 11) == 15);

  cfg.parallelism = 2;
  CHECK(fast_service_cycles(cfg, 11) == 10);  // 4 + ceil(11/2)
  CHECK(fast_service_cycles(cfg, 1) == 5);
  CHECK(fast_service_cycles(cfg, 0) == 1);

  cfg.parallelism = 1;
  cfg.scan_cost = 3;
  CHECK(fast_service_cycles(cfg, 5) == 19);   // 4 + 15
  cfg.parallelism = 2;
  CHECK(fast_service_cycles(cfg, 5) == 12);   // 4 + ceil(15/2)
}

TEST_CASE("analytic row cost is linear in skips and scan steps") {
  const PipelineConfig cfg;

  std::vector<std::uint16_t> row(640, 0);
  for (int i = 0; i < 160; ++i) row[static_cast<std::size_t>(i) * 4] = 11;
  CHECK(analytic_row_cycles(row, cfg) == 2240);  // 160*11 + 480*1

  CHECK(analytic_row_cycles(std::vector<std::uint16_t>{}, cfg) == 0);

  std::mt19937 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(rng, 200, 30);
    std::uint64_t want = 0;
    for (auto p : pts)
      want += p == 0 ? std::uint64_t(cfg.skip_cost)
                     : std::uint64_t(p) * cfg.scan_cost;
    CHECK(analytic_row_cycles(pts, cfg) == want);
  }
}

TEST_CASE("simulation rejects out-of-range configurations") {
  const FrameWorkload w = make_workload({0, 1, 0});
  PipelineConfig cfg;
  cfg.slow_rate = 0;
  CHECK_THROWS_AS(simulate_frame(w, cfg), std::invalid_argument);
  cfg = {};
  cfg.scan_cost = 0;
  CHECK_THROWS_AS(simulate_frame(w, cfg), std::invalid_argument);
  cfg = {};
  cfg.skip_cost = 0;
  CHECK_THROWS_AS(simulate_frame(w, cfg), std::invalid_argument);
  cfg = {};
  cfg.init_cost = -1;
  CHECK_THROWS_AS(simulate_frame(w, cfg), std::invalid_argument);
  cfg = {};
  cfg.fifo_depth = 0;
  CHECK_THROWS_AS(simulate_frame(w, cfg), std::invalid_argument);
  cfg = {};
  cfg.parallelism = 0;
  CHECK_THROWS_AS(simulate_frame(w, cfg), std::invalid_argument);
}

TEST_CASE("a single point passes through all three stages back to back") {
  const PipelineConfig cfg;
  CHECK(simulate_frame(make_workload({0}), cfg).total_cycles == 11);  // 5+1+5
  CHECK(simulate_frame(make_workload({3}), cfg).total_cycles == 17);  // 5+7+5
  const SimReport empty = simulate_frame(FrameWorkload{}, cfg);
  CHECK(empty.total_cycles == 0);
  CHECK(empty.points == 0);
}

TEST_CASE("an all-skip frame is bounded by the slow stages") {
  const FrameWorkload frame = all_skip_frame(640, 480);
  const PipelineConfig cfg;
  const SimReport sim = simulate_frame(frame, cfg);
  const std::uint64_t n = frame.size();

  // Pipelined: the back stage emits one point per slow_rate cycles after an
  // 11-cycle fill, so the total is 5N + 6.
  CHECK(sim.total_cycles == 5 * n + 6);
  CHECK(sim.points == n);
  CHECK(sim.busy_cycles[0] == 5 * n);
  CHECK(sim.busy_cycles[1] == n);  // one forwarding cycle per skip
  CHECK(sim.busy_cycles[2] == 5 * n);
  CHECK(sim.busy_cycles[1] < sim.busy_cycles[0]);
  CHECK(sim.total_cycles >= 5 * n);
  CHECK(sim.total_cycles <= static_cast<std::uint64_t>(5 * n * 1.005));
}

TEST_CASE("a scan-saturated frame is bounded by the fast stage") {
  // All points scan with >= slow_rate service, so the fast stage is never
  // starved and never blocked: total = fill + sum of services + drain.
  std::vector<std::uint16_t> pts(500, 7);  // service 11 each
  const PipelineConfig cfg;
  const SimReport sim = simulate_frame(make_workload(pts), cfg);
  CHECK(sim.busy_cycles[1] == 500 * 11);
  CHECK(sim.total_cycles == 5 + 500 * 11 + 5);
  CHECK(sim.stall_cycles[1] == 0);
}

TEST_CASE("total cycles dominate every stage's aggregate service") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = random_points(rng, 300, 25);
    if (pts.empty()) continue;
    PipelineConfig cfg;
    cfg.fifo_depth = 1 + (trial % 3) * 500;
    const SimReport sim = simulate_frame(make_workload(pts), cfg);
    const std::uint64_t lower = std::max(
        {sim.busy_cycles[0], sim.busy_cycles[1], sim.busy_cycles[2]});
    CHECK(sim.total_cycles >= lower);
    CHECK(sim.total_cycles <=
          sim.busy_cycles[0] + sim.busy_cycles[1] + sim.busy_cycles[2]);
  }
}

TEST_CASE("shrinking the FIFOs never speeds the line up") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pts = random_points(rng, 200, 40);
    const FrameWorkload w = make_workload(pts);
    PipelineConfig cfg;
    cfg.fifo_depth = 1;
    const std::uint64_t tight = simulate_frame(w, cfg).total_cycles;
    cfg.fifo_depth = 4;
    const std::uint64_t mid = simulate_frame(w, cfg).total_cycles;
    cfg.fifo_depth = 1024;
    const std::uint64_t deep = simulate_frame(w, cfg).total_cycles;
    CHECK(tight >= mid);
    CHECK(mid >= deep);
  }
}

TEST_CASE("a unit FIFO in front of long scans backs the front stage up") {
  // Long scans around a fast front: with depth 1 the front must wait.
  std::vector<std::uint16_t> pts(50, 30);  // fast service 34 >> slow_rate
  PipelineConfig cfg;
  cfg.fifo_depth = 1;
  const SimReport sim = simulate_frame(make_workload(pts), cfg);
  CHECK(sim.stall_cycles[0] > 0);
  CHECK(sim.fifo_peak[0] == 1);
  cfg.fifo_depth = 1024;
  const SimReport deep = simulate_frame(make_workload(pts), cfg);
  CHECK(deep.stall_cycles[0] == 0);
  CHECK(deep.total_cycles <= sim.total_cycles);
}

TEST_CASE("raising any service cost never lowers the total") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const auto pts = random_points(rng, 150, 20);
    const FrameWorkload w = make_workload(pts);
    const PipelineConfig base;
    const std::uint64_t t0 = simulate_frame(w, base).total_cycles;

    PipelineConfig cfg = base;
    cfg.slow_rate = 6;
    CHECK(simulate_frame(w, cfg).total_cycles >= t0);
    cfg = base;
    cfg.scan_cost = 2;
    CHECK(simulate_frame(w, cfg).total_cycles >= t0);
    cfg = base;
    cfg.skip_cost = 2;
    CHECK(simulate_frame(w, cfg).total_cycles >= t0);
    cfg = base;
    cfg.init_cost = 8;
    CHECK(simulate_frame(w, cfg).total_cycles >= t0);
    cfg = base;
    cfg.parallelism = 2;
    CHECK(simulate_frame(w, cfg).total_cycles <= t0);
  }
}

TEST_CASE("simulation reports are deterministic") {
  std::mt19937 rng(17);
  const FrameWorkload w = make_workload(random_points(rng, 400, 30));
  const PipelineConfig cfg;
  CHECK(simulate_frame(w, cfg) == simulate_frame(w, cfg));
}

TEST_CASE("event simulation matches the per-cycle reference model") {
  std::mt19937 rng(1234);
  std::uniform_int_distribution<int> slow(1, 7);
  std::uniform_int_distribution<int> cost(1, 3);
  std::uniform_int_distribution<int> init(0, 5);
  std::uniform_int_distribution<int> par(1, 2);
  const int depths[] = {1, 2, 4, 1024};

  for (int trial = 0; trial < 300; ++trial) {
    PipelineConfig cfg;
    cfg.slow_rate = slow(rng);
    cfg.scan_cost = cost(rng);
    cfg.skip_cost = cost(rng);
    cfg.init_cost = init(rng);
    cfg.fifo_depth = depths[trial % 4];
    cfg.parallelism = par(rng);
    const auto pts = random_points(rng, 64, 20);
    const SimReport got = simulate_frame(make_workload(pts), cfg);
    const SimReport want = refsim::run(pts, cfg);
    CHECK(got == want);
  }
}

TEST_CASE("frame time splits compute and memory phases") {
  PipelineConfig cfg;  // 100 MHz, 8 bytes per cycle
  SimReport sim;
  sim.total_cycles = 1536006;

  SUBCASE("compute only") {
    const FrameTime ft = frame_time_ms(sim, cfg, 0, 0);
    CHECK(ft.compute_ms == doctest::Approx(15.36006));
    CHECK(ft.memory_ms == doctest::Approx(0.0));
    CHECK(ft.total_ms == doctest::Approx(15.36006));
  }
  SUBCASE("memory-bound frame with map read and write") {
    const std::uint64_t frame_bytes = 640 * 480;
    const std::uint64_t map_bytes = 7372800;
    const FrameTime ft = frame_time_ms(sim, cfg, frame_bytes, map_bytes);
    CHECK(ft.memory_ms == doctest::Approx(18.816));  // 15052800 B / 8 / 100e3
    CHECK(ft.total_ms == doctest::Approx(18.816));   // overlap: max of phases

    const FrameTime serial = frame_time_ms(sim, cfg, frame_bytes, map_bytes,
                                           /*overlap=*/false);
    CHECK(serial.total_ms == doctest::Approx(15.36006 + 18.816));
  }
  SUBCASE("doubling the memory bandwidth halves the memory phase") {
    cfg.mem_bandwidth = 16;
    const FrameTime ft = frame_time_ms(sim, cfg, 640 * 480, 7372800);
    CHECK(ft.memory_ms == doctest::Approx(9.408));
    CHECK(ft.total_ms == doctest::Approx(15.36006));  // compute dominates again
  }
  SUBCASE("clock scales the compute phase") {
    cfg.clock_mhz = 125.0;
    const FrameTime ft = frame_time_ms(sim, cfg, 0, 0);
    CHECK(ft.compute_ms == doctest::Approx(15.36006 * 100.0 / 125.0));
  }
}

TEST_CASE("rate tuning returns the cheapest feasible configuration") {
  // 18% scans of 11 steps: the fast stage averages 3.52 cycles per point, so
  // the slow stages dominate and the tuner can relax them to slow_rate 6 at
  // 125 MHz / 60 fps (6 * 307200 cycles = 14.75 ms).
  FrameWorkload frame = all_skip_frame(640, 480);
  for (std::size_t i = 0; i < frame.points.size(); ++i)
    if (i % 100 < 18) frame.points[i] = 11;
  const std::vector<FrameWorkload> frames{frame};

  const TuneResult r = tune_rates(60.0, frames, 125.0);
  CHECK(r.feasible);
  CHECK(r.p99_ms <= 1000.0 / 60.0);
  CHECK(r.config.slow_rate == 6);
  CHECK(r.config.parallelism == 1);
  CHECK(r.resource_proxy == doctest::Approx(1.0 / 6.0));

  // The returned configuration really meets the budget when re-simulated.
  PipelineConfig chosen = r.config;
  const SimReport sim = simulate_frame(frame, chosen);
  CHECK(static_cast<double>(sim.total_cycles) / (125.0 * 1000.0) <=
        1000.0 / 60.0);

  // A slow_rate 5 line at the same clock also meets 60 fps.
  PipelineConfig five;
  five.slow_rate = 5;
  five.clock_mhz = 125.0;
  const SimReport sim5 = simulate_frame(frame, five);
  CHECK(static_cast<double>(sim5.total_cycles) / (125.0 * 1000.0) <
        1000.0 / 60.0);
}

TEST_CASE("rate tuning is optimal against a brute-force grid sweep") {
  std::mt19937 rng(21);
  std::vector<FrameWorkload> frames;
  for (int i = 0; i < 5; ++i)
    frames.push_back(make_workload(random_points(rng, 4000, 30)));

  const double fps = 2000.0;
  const double clock = 100.0;
  const TuneResult r = tune_rates(fps, frames, clock);

  const auto p99 = [&](const PipelineConfig& cfg) {
    std::vector<double> ms;
    for (const auto& f : frames)
      ms.push_back(double(simulate_frame(f, cfg).total_cycles) / (clock * 1e3));
    std::sort(ms.begin(), ms.end());
    return ms[static_cast<std::size_t>(std::ceil(0.99 * ms.size())) - 1];
  };

  bool any_feasible = false;
  double best_proxy = 1e9;
  for (int parallelism = 1; parallelism <= 2; ++parallelism)
    for (int slow_rate = 2; slow_rate <= 10; ++slow_rate) {
      PipelineConfig cfg;
      cfg.slow_rate = slow_rate;
      cfg.parallelism = parallelism;
      cfg.clock_mhz = clock;
      if (p99(cfg) <= 1000.0 / fps) {
        any_feasible = true;
        best_proxy = std::min(
            best_proxy, 1.0 / slow_rate + 0.25 * (parallelism - 1));
      }
    }

  CHECK(r.feasible == any_feasible);
  if (any_feasible) {
    CHECK(r.resource_proxy == doctest::Approx(best_proxy));
    CHECK(p99(r.config) <= 1000.0 / fps);
  }
}

TEST_CASE("impossible targets report the most capable configuration") {
  std::vector<std::uint16_t> pts(2000, 11);
  const std::vector<FrameWorkload> frames{make_workload(pts)};
  const TuneResult r = tune_rates(1e7, frames, 100.0);
  CHECK_FALSE(r.feasible);
  CHECK(r.p99_ms > 1000.0 / 1e7);
  // Scan-heavy load: the double-lane, fastest-slow-rate line wins.
  CHECK(r.config.slow_rate == 2);
  CHECK(r.config.parallelism == 2);

  CHECK_THROWS_AS(tune_rates(0.0, frames, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(tune_rates(30.0, {}, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(tune_rates(30.0, frames, 0.0), std::invalid_argument);
}

TEST_CASE("the heatmap reports per-pixel scan frequencies") {
  const UpdateTrace a = trace_with_scans(4, 3, {{1, 1}, {2, 2}}, 5);
  const UpdateTrace b = trace_with_scans(4, 3, {{1, 1}, {3, 0}}, 9);
  const WorkloadStats stats = scan_frequency_heatmap({a, b});

  CHECK(stats.width == 4);
  CHECK(stats.height == 3);
  CHECK(stats.point_count == 24);
  CHECK(stats.scan_count == 4);
  CHECK(stats.scan_frequency[1 * 4 + 1] == doctest::Approx(1.0));
  CHECK(stats.scan_frequency[2 * 4 + 2] == doctest::Approx(0.5));
  CHECK(stats.scan_frequency[0 * 4 + 3] == doctest::Approx(0.5));
  CHECK(stats.scan_frequency[0] == doctest::Approx(0.0));
  for (double f : stats.scan_frequency) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
  CHECK(stats.row_profile[0] == doctest::Approx(0.5 / 4.0));
  CHECK(stats.row_profile[1] == doctest::Approx(1.0 / 4.0));
  CHECK(stats.max_steps == 9);
  CHECK(stats.mean_steps == doctest::Approx((5 + 5 + 9 + 9) / 4.0));
}

TEST_CASE("heatmap aggregation validates its input") {
  CHECK_THROWS_AS(scan_frequency_heatmap({}), std::invalid_argument);
  const UpdateTrace a = trace_with_scans(4, 3, {});
  const UpdateTrace b = trace_with_scans(5, 3, {});
  CHECK_THROWS_AS(scan_frequency_heatmap({a, b}), std::invalid_argument);
}

TEST_CASE("step percentiles use the ceil-rank convention") {
  UpdateTrace t(100, 1);
  for (int x = 0; x < 100; ++x) {
    t.at(x, 0).verdict = Verdict::Scan;
    t.at(x, 0).steps = static_cast<std::uint16_t>(x + 1);  // 1..100
  }
  const WorkloadStats stats = scan_frequency_heatmap({t});
  CHECK(stats.p50_steps == doctest::Approx(50.0));
  CHECK(stats.p98_steps == doctest::Approx(98.0));
  CHECK(stats.mean_steps == doctest::Approx(50.5));
  CHECK(stats.max_steps == 100);
}
