#pragma once

#include <array>
#include <limits>
#include <optional>

#include <Eigen/Core>

#include "sdm/epipolar.hpp"
#include "sdm/image.hpp"

namespace sdm {

// Fully resolved scan plan for one keypoint.
struct SearchSpec {
  EpipolarSegment segment;
  double step = 1.0;  // px along segment.direction
  int n_steps = 1;
  std::array<double, 5> reference_pattern{};  // keyframe intensities, k=-2..2
  Eigen::Vector2d keyframe_epl_dir = Eigen::Vector2d::Zero();
};

enum class MatchStatus { Good, Ambiguous, BigError, Skipped };

struct MatchResult {
  double best_t = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  double second_best_err = std::numeric_limits<double>::infinity();
  int steps_performed = 0;
  double subpixel_t = 0.0;
  bool refined = false;
  MatchStatus status = MatchStatus::Skipped;
  int best_index = -1;
  // Errors adjacent to the best step, +inf when the best sits on a scan end.
  double err_before = std::numeric_limits<double>::infinity();
  double err_after = std::numeric_limits<double>::infinity();
};

// One inverse-depth measurement.
struct Observation {
  double idepth = 0.0;
  double variance = 0.0;
};

struct SearchParams {
  double ambiguity_ratio = 1.44;
  double max_error = 5.0 * 20.0 * 20.0;  // summed over the 5-point pattern
  double sigma_i = 4.0;   // image noise, intensity levels
  double sigma_l = 0.2;   // localisation noise, px
  double sigma_max = 1.0; // cap on the observation standard deviation
};

// Samples the 5-point reference pattern at keypoint + k*dir, k = -2..2,
// spacing 1 px. Keypoint must be >= 3 px from the borders.
std::array<double, 5> build_reference_pattern(const Image8& keyframe_image,
                                              const Eigen::Vector2d& keypoint,
                                              const Eigen::Vector2d& dir);

std::optional<SearchSpec> build_search_spec(const Image8& keyframe_image,
                                            const Eigen::Vector2d& keypoint,
                                            const EpipolarSegment& segment,
                                            const Eigen::Vector2d& keyframe_dir,
                                            double step, int max_steps);

// 5-point SSD scan over the segment. Each step consumes one new bilinear
// sample; the other four are reused from the previous step. Ties break to
// the earliest step; the second-best is taken at least 2 steps away from the
// best. Subpixel refinement is applied when the best step is interior and
// the parabola fit is well posed. `params` only sets the classification
// thresholds (ambiguity ratio, error cap).
MatchResult scan_epipolar(const SearchSpec& spec, const Image8& current_image,
                          const SearchParams& params = {});

struct SubpixelResult {
  double offset = 0.0;  // px, |offset| <= step/2
  bool refined = false;
};

// Parabola fit through (err_minus, err_0, err_plus) one step apart.
SubpixelResult subpixel_refine(double err_minus, double err_0, double err_plus,
                               double step);

struct VarianceResult {
  double variance = 0.0;
  bool degenerate = false;
};

// Observation variance: alpha^2 * (sigma_geo^2 + sigma_photo^2) with the
// geometric term driven by gradient/line alignment, the photometric term by
// the intensity slope along the line, and alpha = |d(idepth)/dt| from a
// finite difference of the triangulation along the segment. When both
// denominators clamp the result degenerates to sigma_max^2.
VarianceResult compute_variance(const Eigen::Vector2d& keypoint,
                                const EpipolarSegment& segment, double match_t,
                                const Eigen::Vector2d& gradient_at_match,
                                const Pose& rel_pose, const CameraIntrinsics& k,
                                const SearchParams& params, double step);

enum class FusionVerdict { Fused, RejectedOutlier };

struct FusionResult {
  Observation posterior;
  FusionVerdict verdict = FusionVerdict::Fused;
};

// Product of Gaussians gated at 2*(sigma_prior + sigma_obs); outliers leave
// the prior unchanged. Throws std::invalid_argument on non-positive
// variances.
FusionResult fuse_hypothesis(const Observation& prior, const Observation& obs);

}  // namespace sdm
