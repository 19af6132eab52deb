#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdm/depth_search.hpp"
#include "sdm/keyframe.hpp"
#include "sdm/regularize.hpp"

namespace sdm {

struct MapUpdateParams {
  double gradient_threshold = 5.0;  // intensity per px
  int blacklist_threshold = 3;      // failures before a pixel is retired
  int prior_validity_min = 1;
  EpipolarParams epipolar;
  SearchParams search;
  double new_variance_inflation = 1.5;
  FilterParams filter;
  bool enable_hole_fill = true;
  bool enable_smooth = true;
  int threads = 0;  // 0 = hardware concurrency
};

struct TraceEntry {
  Verdict verdict = Verdict::SkipOutOfFrame;
  std::uint16_t steps = 0;
  float best_err = 0.0f;
  float second_best_err = 0.0f;
};

// Per-pixel record of one map update, row-major. Drives the workload model
// and the scan-frequency analysis.
struct UpdateTrace {
  int width = 0;
  int height = 0;
  std::vector<TraceEntry> entries;

  UpdateTrace() = default;
  UpdateTrace(int w, int h)
      : width(w), height(h), entries(static_cast<std::size_t>(w) * h) {}

  TraceEntry& at(int x, int y) {
    return entries[static_cast<std::size_t>(y) * width + x];
  }
  const TraceEntry& at(int x, int y) const {
    return entries[static_cast<std::size_t>(y) * width + x];
  }
};

// One full map update: per-pixel eligibility, epipolar scan, subpixel
// refinement, triangulation and fusion, followed by the hole-fill and
// smoothing passes. The match phase is independent per pixel and runs over
// row bands; results are deterministic for fixed inputs regardless of the
// thread count. Throws std::invalid_argument on dimension mismatch.
UpdateTrace update_map(Keyframe& kf, const Image8& current_frame,
                       const Pose& rel_pose, const CameraIntrinsics& k,
                       const MapUpdateParams& params);

void write_trace_csv(const UpdateTrace& trace, const std::string& path);
UpdateTrace read_trace_csv(const std::string& path);

}  // namespace sdm
