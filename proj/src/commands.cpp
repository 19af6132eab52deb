#include "sdm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <vector>

#include "sdm/dataset.hpp"
#include "sdm/io.hpp"
#include "sdm/map_update.hpp"
#include "sdm/pipeline.hpp"
#include "sdm/run_config.hpp"

namespace sdm {

namespace {

namespace fs = std::filesystem;

std::string indexed_name(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.%s", prefix, index, ext);
  return buf;
}

void write_keyframe_artifacts(const Keyframe& kf, int index,
                              const fs::path& out_dir) {
  const int w = kf.width();
  const int h = kf.height();
  std::vector<float> depth(static_cast<std::size_t>(w) * h,
                           std::numeric_limits<float>::quiet_NaN());
  Image8 mask(w, h, 0);
  for (std::size_t i = 0; i < kf.hypotheses.size(); ++i) {
    const DepthHypothesis& hyp = kf.hypotheses[i];
    if (!hyp.valid()) continue;
    depth[i] = hyp.idepth_smoothed;
    mask.pixels[i] = 255;
  }
  write_pfm((out_dir / indexed_name("idepth", index, "pfm")).string(), depth,
            w, h);
  write_pgm8((out_dir / indexed_name("validity", index, "pgm")).string(), mask);
  save_keyframe(kf, (out_dir / indexed_name("keyframe", index, "kfd")).string());
}

double scan_share(const UpdateTrace& trace) {
  std::size_t scans = 0;
  for (const TraceEntry& e : trace.entries)
    if (e.verdict == Verdict::Scan) ++scans;
  return trace.entries.empty()
             ? 0.0
             : static_cast<double>(scans) / static_cast<double>(trace.entries.size());
}

std::vector<UpdateTrace> load_traces_dir(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("trace directory not found: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      paths.push_back(entry.path().string());
  if (paths.empty())
    throw std::runtime_error("no trace CSV files in " + dir);
  std::sort(paths.begin(), paths.end());
  std::vector<UpdateTrace> traces;
  traces.reserve(paths.size());
  for (const std::string& p : paths) traces.push_back(read_trace_csv(p));
  return traces;
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

double percentile(std::vector<double> sorted, double q) {
  const std::size_t idx = static_cast<std::size_t>(std::ceil(
      q * static_cast<double>(sorted.size()))) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out) {
  const RunConfig config = config_or_default(options.config);
  const DatasetSequence seq =
      load_dataset(options.image_dir, options.trajectory, options.calib);
  const fs::path out_dir = options.out_dir;
  fs::create_directories(out_dir);

  const std::size_t n_frames =
      options.max_frames > 0
          ? std::min<std::size_t>(seq.frames.size(),
                                  static_cast<std::size_t>(options.max_frames))
          : seq.frames.size();

  Keyframe keyframe;
  int keyframe_index = -1;
  int keyframes = 0;
  int updates = 0;
  double share_sum = 0.0;

  for (std::size_t i = 0; i < n_frames; ++i) {
    const DatasetFrame& frame = seq.frames[i];
    const Image8 image = load_image(frame.image_path);
    if (image.width != seq.intrinsics.width ||
        image.height != seq.intrinsics.height)
      throw DatasetError("frame size does not match calibration: " +
                         frame.image_path);

    if (keyframe_index < 0 ||
        static_cast<int>(i) - keyframe_index >= config.keyframe_interval) {
      if (keyframe_index >= 0)
        write_keyframe_artifacts(keyframe, keyframe_index, out_dir);
      keyframe = Keyframe(image, frame.pose);
      keyframe_index = static_cast<int>(i);
      ++keyframes;
      out << "frame " << i << ": new keyframe\n";
      continue;
    }

    const Pose rel_pose = frame.pose * keyframe.pose.inverse();
    const UpdateTrace trace =
        update_map(keyframe, image, rel_pose, seq.intrinsics, config.map);
    write_trace_csv(trace, (out_dir / indexed_name("trace", static_cast<int>(i),
                                                   "csv")).string());
    const double share = scan_share(trace);
    share_sum += share;
    ++updates;
    out << "frame " << i << ": scan_share=" << share << "\n";
  }
  if (keyframe_index >= 0)
    write_keyframe_artifacts(keyframe, keyframe_index, out_dir);

  out << "frames: " << n_frames << "\n";
  out << "keyframes: " << keyframes << "\n";
  out << "updates: " << updates << "\n";
  if (updates > 0) out << "mean_scan_share: " << share_sum / updates << "\n";
  return 0;
}

int cmd_analyze(const AnalyzeOptions& options, std::ostream& out) {
  const std::vector<UpdateTrace> traces = load_traces_dir(options.traces_dir);
  const WorkloadStats stats = scan_frequency_heatmap(traces);

  const double share =
      stats.point_count > 0
          ? static_cast<double>(stats.scan_count) / static_cast<double>(stats.point_count)
          : 0.0;
  double busiest = 0.0;
  for (const double r : stats.row_profile) busiest = std::max(busiest, r);

  out << "frames: " << traces.size() << "\n";
  out << "points_per_frame: " << static_cast<std::size_t>(stats.width) * stats.height << "\n";
  out << "scan_share: " << share << "\n";
  out << "mean_steps: " << stats.mean_steps << "\n";
  out << "p50_steps: " << stats.p50_steps << "\n";
  out << "p98_steps: " << stats.p98_steps << "\n";
  out << "max_steps: " << stats.max_steps << "\n";
  out << "busiest_row_share: " << busiest << "\n";

  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);

    Image16 heat;
    heat.width = stats.width;
    heat.height = stats.height;
    heat.pixels.resize(stats.scan_frequency.size());
    for (std::size_t i = 0; i < stats.scan_frequency.size(); ++i)
      heat.pixels[i] = static_cast<std::uint16_t>(
          std::lround(65535.0 * stats.scan_frequency[i]));
    write_pgm16((fs::path(options.out_dir) / "scan_frequency.pgm").string(),
                heat);

    std::ofstream profile(fs::path(options.out_dir) / "row_profile.csv");
    profile << "row,scan_share\n";
    for (std::size_t y = 0; y < stats.row_profile.size(); ++y)
      profile << y << "," << stats.row_profile[y] << "\n";

    std::map<std::uint16_t, std::uint64_t> histogram;
    for (const UpdateTrace& t : traces)
      for (const TraceEntry& e : t.entries)
        if (e.verdict == Verdict::Scan) ++histogram[e.steps];
    std::ofstream hist(fs::path(options.out_dir) / "step_histogram.csv");
    hist << "steps,count\n";
    for (const auto& [steps, count] : histogram)
      hist << steps << "," << count << "\n";

    out << "artifacts: " << options.out_dir << "\n";
  }
  return 0;
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out) {
  RunConfig config = config_or_default(options.config);
  if (options.clock_mhz > 0.0) config.pipeline.clock_mhz = options.clock_mhz;

  const std::vector<UpdateTrace> traces = load_traces_dir(options.traces_dir);

  std::ofstream report_csv;
  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    report_csv.open(fs::path(options.out_dir) / "sim_reports.csv");
    report_csv << "frame,points,total_cycles,busy_front,busy_fast,busy_back,"
                  "stall_front,stall_fast,stall_back,fifo_peak_front,"
                  "fifo_peak_back,compute_ms,memory_ms,total_ms\n";
  }

  std::vector<double> totals;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const FrameWorkload workload = workload_from_trace(traces[i]);
    const SimReport sim = simulate_frame(workload, config.pipeline);
    const std::uint64_t frame_bytes =
        static_cast<std::uint64_t>(workload.width) * workload.height;
    const std::uint64_t map_bytes = frame_bytes * kHypothesisRecordBytes;
    const FrameTime ft =
        frame_time_ms(sim, config.pipeline, frame_bytes, map_bytes);
    totals.push_back(ft.total_ms);
    out << "frame " << i << ": cycles=" << sim.total_cycles
        << " compute_ms=" << ft.compute_ms << " memory_ms=" << ft.memory_ms
        << " total_ms=" << ft.total_ms << " fifo_peak=" << sim.fifo_peak[0]
        << "/" << sim.fifo_peak[1] << "\n";
    if (report_csv.is_open()) {
      report_csv << i << "," << sim.points << "," << sim.total_cycles;
      for (const std::uint64_t b : sim.busy_cycles) report_csv << "," << b;
      for (const std::uint64_t s : sim.stall_cycles) report_csv << "," << s;
      for (const int p : sim.fifo_peak) report_csv << "," << p;
      report_csv << "," << ft.compute_ms << "," << ft.memory_ms << ","
                 << ft.total_ms << "\n";
    }
  }

  std::sort(totals.begin(), totals.end());
  const double mean = std::accumulate(totals.begin(), totals.end(), 0.0) /
                      static_cast<double>(totals.size());
  out << "frames: " << totals.size() << "\n";
  out << "mean_ms: " << mean << "\n";
  out << "median_ms: " << percentile(totals, 0.50) << "\n";
  out << "p98_ms: " << percentile(totals, 0.98) << "\n";
  out << "max_ms: " << totals.back() << "\n";
  return 0;
}

int cmd_tune(const TuneOptions& options, std::ostream& out) {
  RunConfig config = config_or_default(options.config);
  const double clock =
      options.clock_mhz > 0.0 ? options.clock_mhz : config.pipeline.clock_mhz;

  const std::vector<UpdateTrace> traces = load_traces_dir(options.traces_dir);
  std::vector<FrameWorkload> workloads;
  workloads.reserve(traces.size());
  for (const UpdateTrace& t : traces) workloads.push_back(workload_from_trace(t));

  const TuneResult result =
      tune_rates(options.target_fps, workloads, clock, config.pipeline);
  out << "target_fps: " << options.target_fps << "\n";
  out << "budget_ms: " << 1000.0 / options.target_fps << "\n";
  out << "feasible: " << (result.feasible ? "yes" : "no") << "\n";
  out << "slow_rate: " << result.config.slow_rate << "\n";
  out << "parallelism: " << result.config.parallelism << "\n";
  out << "p99_ms: " << result.p99_ms << "\n";
  return result.feasible ? 0 : 2;
}

}  // namespace sdm
