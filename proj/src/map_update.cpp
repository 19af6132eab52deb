#include "sdm/map_update.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace sdm {

namespace {

constexpr int kBorderMargin = 3;

void bump_failure(DepthHypothesis& h, int blacklist_threshold) {
  if (h.failure_counter < 255) ++h.failure_counter;
  if (h.failure_counter >= blacklist_threshold)
    h.flags = DepthHypothesis::kBlacklisted;
}

void update_pixel(Keyframe& kf, const Image8& current, const Pose& rel_pose,
                  const CameraIntrinsics& k, const MapUpdateParams& params,
                  int x, int y, TraceEntry& trace) {
  DepthHypothesis& h = kf.hypothesis(x, y);

  if (h.blacklisted()) {
    trace.verdict = Verdict::SkipBlacklisted;
    return;
  }

  const EligibilityDecision elig =
      gradient_check(kf.image, x, y, params.gradient_threshold);
  if (elig.verdict != Verdict::Scan) {
    trace.verdict = elig.verdict;
    return;
  }

  const Eigen::Vector2d keypoint(x, y);
  std::optional<DepthPrior> prior;
  if (h.valid() && h.validity_counter >= params.prior_validity_min &&
      h.variance_smoothed > 0.0f &&
      std::sqrt(h.variance_smoothed) < params.search.sigma_max) {
    prior = DepthPrior{h.idepth_smoothed, std::sqrt(h.variance_smoothed)};
  }

  const SegmentResult seg =
      epipolar_segment(keypoint, rel_pose, k, prior, params.epipolar);
  if (!seg.ok()) {
    trace.verdict = seg.status == SegmentStatus::OutsideFrame
                        ? Verdict::SkipOutOfFrame
                        : Verdict::SkipGeometry;
    return;
  }

  const std::optional<Eigen::Vector2d> kf_dir =
      keyframe_epipolar_direction(keypoint, rel_pose, k);
  if (!kf_dir) {
    trace.verdict = Verdict::SkipGeometry;
    return;
  }

  const std::optional<SearchSpec> spec =
      build_search_spec(kf.image, keypoint, seg.segment, *kf_dir,
                        params.epipolar.step, params.epipolar.max_steps);
  if (!spec) {
    trace.verdict = Verdict::SkipGeometry;
    return;
  }

  const MatchResult match = scan_epipolar(*spec, current, params.search);
  if (match.status == MatchStatus::Skipped) {
    trace.verdict = Verdict::SkipGeometry;
    return;
  }

  trace.verdict = Verdict::Scan;
  trace.steps = static_cast<std::uint16_t>(match.steps_performed);
  trace.best_err = static_cast<float>(match.best_err);
  trace.second_best_err = static_cast<float>(match.second_best_err);

  if (match.status != MatchStatus::Good) {
    bump_failure(h, params.blacklist_threshold);
    return;
  }

  const Eigen::Vector2d matched = seg.segment.point_at(match.subpixel_t);
  const TriangulationResult tri =
      triangulate_inverse_depth(keypoint, matched, rel_pose, k);
  if (!tri.ok()) {
    bump_failure(h, params.blacklist_threshold);
    return;
  }

  const Eigen::Vector2d grad = gradient_bilinear(current, matched.x(), matched.y());
  const VarianceResult var =
      compute_variance(keypoint, seg.segment, match.subpixel_t, grad, rel_pose,
                       k, params.search, params.epipolar.step);
  // A well-matched point whose geometry cannot constrain the depth is not a
  // matching failure; drop the observation and wait for more baseline.
  if (var.degenerate ||
      std::sqrt(var.variance) > params.search.sigma_max)
    return;

  const Observation obs{tri.idepth, var.variance};
  if (!h.valid()) {
    h.idepth = static_cast<float>(obs.idepth);
    h.variance =
        static_cast<float>(obs.variance * params.new_variance_inflation);
    h.idepth_smoothed = h.idepth;
    h.variance_smoothed = h.variance;
    h.validity_counter = 1;
    h.failure_counter = 0;
    h.flags = DepthHypothesis::kValid;
    return;
  }

  const FusionResult fused =
      fuse_hypothesis(Observation{h.idepth, h.variance}, obs);
  if (fused.verdict == FusionVerdict::RejectedOutlier) {
    bump_failure(h, params.blacklist_threshold);
    return;
  }
  h.idepth = static_cast<float>(fused.posterior.idepth);
  h.variance = static_cast<float>(fused.posterior.variance);
  if (h.validity_counter < 255) ++h.validity_counter;
  if (h.failure_counter > 0) --h.failure_counter;
  h.flags = DepthHypothesis::kValid;
}

}  // namespace

UpdateTrace update_map(Keyframe& kf, const Image8& current_frame,
                       const Pose& rel_pose, const CameraIntrinsics& k,
                       const MapUpdateParams& params) {
  const int w = kf.width();
  const int h = kf.height();
  if (w != current_frame.width || h != current_frame.height)
    throw std::invalid_argument("current frame does not match keyframe size");
  if (w != k.width || h != k.height)
    throw std::invalid_argument("intrinsics do not match keyframe size");

  UpdateTrace trace(w, h);
  for (auto& e : trace.entries) e.verdict = Verdict::SkipOutOfFrame;

  const int y_begin = kBorderMargin;
  const int y_end = h - kBorderMargin;
  unsigned n_threads = params.threads > 0
                           ? static_cast<unsigned>(params.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads,
                                 std::max(1, y_end - y_begin));

  const auto run_rows = [&](int row0, int row1) {
    for (int y = row0; y < row1; ++y)
      for (int x = kBorderMargin; x < w - kBorderMargin; ++x)
        update_pixel(kf, current_frame, rel_pose, k, params, x, y,
                     trace.at(x, y));
  };

  if (n_threads <= 1 || y_end <= y_begin) {
    run_rows(y_begin, y_end);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int rows = y_end - y_begin;
    for (unsigned i = 0; i < n_threads; ++i) {
      const int r0 = y_begin + static_cast<int>(rows * static_cast<long long>(i) / n_threads);
      const int r1 = y_begin + static_cast<int>(rows * static_cast<long long>(i + 1) / n_threads);
      pool.emplace_back([&, r0, r1] {
        try {
          run_rows(r0, r1);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  if (params.enable_hole_fill) hole_fill(kf, params.filter);
  if (params.enable_smooth) smooth(kf, params.filter);
  return trace;
}

void write_trace_csv(const UpdateTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "x,y,verdict,steps,best_err,second_best_err\n";
  std::ostringstream buf;
  buf.precision(9);
  for (int y = 0; y < trace.height; ++y) {
    for (int x = 0; x < trace.width; ++x) {
      const TraceEntry& e = trace.at(x, y);
      buf << x << ',' << y << ',' << to_string(e.verdict) << ',' << e.steps
          << ',' << e.best_err << ',' << e.second_best_err << '\n';
    }
    out << buf.str();
    buf.str({});
  }
  if (!out) throw std::runtime_error("short write to trace file: " + path);
}

UpdateTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "x,y,verdict,steps,best_err,second_best_err")
    throw std::runtime_error("bad trace header in " + path);

  struct Row {
    int x;
    int y;
    TraceEntry entry;
  };
  std::vector<Row> rows;
  int max_x = -1;
  int max_y = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Row r;
    std::string verdict;
    int steps = 0;
    std::string best;
    std::string second;
    if (!(ss >> r.x >> r.y >> verdict >> steps >> best >> second))
      throw std::runtime_error("bad trace row in " + path + ": " + line);
    r.entry.verdict = verdict_from_string(verdict);
    r.entry.steps = static_cast<std::uint16_t>(steps);
    // stof instead of stream extraction: it accepts the "inf" sentinel.
    r.entry.best_err = std::stof(best);
    r.entry.second_best_err = std::stof(second);
    max_x = std::max(max_x, r.x);
    max_y = std::max(max_y, r.y);
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("empty trace file: " + path);

  UpdateTrace trace(max_x + 1, max_y + 1);
  for (const Row& r : rows) trace.at(r.x, r.y) = r.entry;
  return trace;
}

}  // namespace sdm
