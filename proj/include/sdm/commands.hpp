#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdm {

// The CLI front-end is a thin shell over these functions so the behaviour
// stays testable without spawning processes. All of them return a process
// exit code and report through `out`.

struct RunOptions {
  std::string image_dir;
  std::string trajectory;
  std::string calib;
  std::string config;  // optional run-config file
  std::string out_dir;
  int max_frames = 0;  // 0 = all
};

// Full mapping pass: keyframe promotion, per-frame map updates, and
// per-update trace capture. Writes per-keyframe inverse-depth maps (PFM),
// validity masks (PGM), keyframe dumps (.kfd) and per-frame trace CSVs
// under the output directory.
int cmd_run(const RunOptions& options, std::ostream& out);

struct AnalyzeOptions {
  std::string traces_dir;  // directory of trace CSVs from a previous run
  std::string out_dir;     // optional; heatmap + profile artifacts
};

// Workload statistics over recorded traces: scan share, step distribution
// and per-row profile. With an output directory it writes the scan
// frequency heatmap as 16-bit PGM (frequency x 65535), the row profile and
// the step histogram as CSV.
int cmd_analyze(const AnalyzeOptions& options, std::ostream& out);

struct SimulateOptions {
  std::string traces_dir;
  std::string config;      // optional run-config file
  std::string out_dir;     // optional; per-frame report CSV
  double clock_mhz = 0.0;  // 0 = take from config
};

// Replays traces through the pipeline model; prints the latency
// distribution (mean, median, p98, max) and optionally writes one report
// row per frame.
int cmd_simulate(const SimulateOptions& options, std::ostream& out);

struct TuneOptions {
  std::string traces_dir;
  std::string config;
  double target_fps = 30.0;
  double clock_mhz = 0.0;
};

// Searches stage rate / parallelism combinations for the cheapest one whose
// p99 frame time meets the target rate. Exit code 2 when nothing does.
int cmd_tune(const TuneOptions& options, std::ostream& out);

}  // namespace sdm
