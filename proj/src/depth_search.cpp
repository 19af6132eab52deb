#include "sdm/depth_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sdm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAlignmentEps = 1e-4;
}

std::array<double, 5> build_reference_pattern(const Image8& keyframe_image,
                                              const Eigen::Vector2d& keypoint,
                                              const Eigen::Vector2d& dir) {
  std::array<double, 5> pattern{};
  for (int j = -2; j <= 2; ++j) {
    const Eigen::Vector2d p = keypoint + j * dir;
    pattern[j + 2] = sample_bilinear(keyframe_image, p.x(), p.y());
  }
  return pattern;
}

std::optional<SearchSpec> build_search_spec(const Image8& keyframe_image,
                                            const Eigen::Vector2d& keypoint,
                                            const EpipolarSegment& segment,
                                            const Eigen::Vector2d& keyframe_dir,
                                            double step, int max_steps) {
  if (step <= 0.0 || max_steps < 1) return std::nullopt;
  const Eigen::Vector2d dir = keyframe_dir.normalized() * step;
  for (int j = -2; j <= 2; ++j) {
    const Eigen::Vector2d p = keypoint + j * dir;
    if (!bilinear_in_bounds(keyframe_image, p.x(), p.y())) return std::nullopt;
  }
  SearchSpec spec;
  spec.segment = segment;
  spec.step = step;
  spec.n_steps = std::min(
      max_steps, static_cast<int>(std::floor(segment.length() / step)) + 1);
  if (spec.n_steps < 1) return std::nullopt;
  spec.reference_pattern = build_reference_pattern(keyframe_image, keypoint, dir);
  spec.keyframe_epl_dir = keyframe_dir.normalized();
  return spec;
}

MatchResult scan_epipolar(const SearchSpec& spec, const Image8& current_image,
                          const SearchParams& params) {
  MatchResult result;
  const int n = spec.n_steps;
  if (n < 1) return result;

  // One bilinear sample per offset j; the SSD at step i reuses the samples
  // of steps i-2..i+2, so each new step costs exactly one image fetch.
  std::vector<double> samples(static_cast<std::size_t>(n) + 4);
  for (int j = -2; j <= n + 1; ++j) {
    const Eigen::Vector2d p =
        spec.segment.point_at(spec.segment.t_min + j * spec.step);
    if (!bilinear_in_bounds(current_image, p.x(), p.y())) return result;
    samples[static_cast<std::size_t>(j) + 2] =
        sample_bilinear(current_image, p.x(), p.y());
  }

  std::vector<double> errors(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double e = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double d = samples[static_cast<std::size_t>(i) + j] -
                       spec.reference_pattern[static_cast<std::size_t>(j)];
      e += d * d;
    }
    errors[static_cast<std::size_t>(i)] = e;
  }

  int best = 0;
  for (int i = 1; i < n; ++i)
    if (errors[static_cast<std::size_t>(i)] <
        errors[static_cast<std::size_t>(best)])
      best = i;

  result.best_index = best;
  result.best_err = errors[static_cast<std::size_t>(best)];
  result.best_t = spec.segment.t_min + best * spec.step;
  result.steps_performed = n;
  result.err_before = best >= 1 ? errors[static_cast<std::size_t>(best) - 1] : kInf;
  result.err_after = best + 1 < n ? errors[static_cast<std::size_t>(best) + 1] : kInf;

  // Second-best outside the refinement neighbourhood of the winner.
  result.second_best_err = kInf;
  for (int i = 0; i < n; ++i)
    if (std::abs(i - best) >= 2)
      result.second_best_err =
          std::min(result.second_best_err, errors[static_cast<std::size_t>(i)]);

  result.subpixel_t = result.best_t;
  if (best >= 1 && best + 1 < n) {
    const SubpixelResult sub = subpixel_refine(result.err_before,
                                               result.best_err,
                                               result.err_after, spec.step);
    if (sub.refined) {
      result.subpixel_t = result.best_t + sub.offset;
      result.refined = true;
    }
  }

  if (result.best_err > params.max_error) {
    result.status = MatchStatus::BigError;
  } else if (result.second_best_err <= result.best_err ||
             result.second_best_err < params.ambiguity_ratio * result.best_err) {
    result.status = MatchStatus::Ambiguous;
  } else {
    result.status = MatchStatus::Good;
  }
  return result;
}

SubpixelResult subpixel_refine(double err_minus, double err_0, double err_plus,
                               double step) {
  SubpixelResult out;
  if (!std::isfinite(err_minus) || !std::isfinite(err_0) ||
      !std::isfinite(err_plus))
    return out;
  if (err_minus < err_0 || err_plus < err_0) return out;
  const double denom = err_minus - 2.0 * err_0 + err_plus;
  if (denom <= 0.0) return out;
  out.offset = 0.5 * step * (err_minus - err_plus) / denom;
  out.refined = true;
  return out;
}

VarianceResult compute_variance(const Eigen::Vector2d& keypoint,
                                const EpipolarSegment& segment, double match_t,
                                const Eigen::Vector2d& gradient_at_match,
                                const Pose& rel_pose, const CameraIntrinsics& k,
                                const SearchParams& params, double step) {
  VarianceResult out;
  const Eigen::Vector2d& l = segment.direction;
  const Eigen::Vector2d& g = gradient_at_match;

  const double gnorm = g.norm();
  const double cosang = gnorm > 0.0 ? std::abs(g.dot(l)) / gnorm : 0.0;
  const bool geo_clamped = cosang < kAlignmentEps;
  const double sigma_geo2 =
      params.sigma_l * params.sigma_l /
      (std::max(kAlignmentEps, cosang) * std::max(kAlignmentEps, cosang));

  const double g_along = g.dot(l);
  const bool photo_clamped = g_along * g_along < kAlignmentEps;
  const double sigma_photo2 = 2.0 * params.sigma_i * params.sigma_i /
                              std::max(kAlignmentEps, g_along * g_along);

  if (geo_clamped && photo_clamped) {
    out.variance = params.sigma_max * params.sigma_max;
    out.degenerate = true;
    return out;
  }

  // Sensitivity of the inverse depth to the match position, from a finite
  // difference of the triangulation one step along the line.
  const auto idepth_at = [&](double t) -> std::optional<double> {
    const TriangulationResult tri = triangulate_inverse_depth(
        keypoint, segment.point_at(t), rel_pose, k);
    if (!tri.ok()) return std::nullopt;
    return tri.idepth;
  };
  const std::optional<double> d0 = idepth_at(match_t);
  std::optional<double> d1 = idepth_at(match_t + step);
  if (!d1) d1 = idepth_at(match_t - step);
  if (!d0 || !d1) {
    out.variance = params.sigma_max * params.sigma_max;
    out.degenerate = true;
    return out;
  }
  const double alpha = std::abs(*d1 - *d0) / step;

  out.variance = alpha * alpha * (sigma_geo2 + sigma_photo2);
  return out;
}

FusionResult fuse_hypothesis(const Observation& prior, const Observation& obs) {
  if (!(prior.variance > 0.0) || !(obs.variance > 0.0))
    throw std::invalid_argument("fusion requires positive variances");
  FusionResult result;
  const double gate =
      2.0 * (std::sqrt(prior.variance) + std::sqrt(obs.variance));
  if (std::abs(prior.idepth - obs.idepth) > gate) {
    result.posterior = prior;
    result.verdict = FusionVerdict::RejectedOutlier;
    return result;
  }
  const double w = 1.0 / prior.variance + 1.0 / obs.variance;
  result.posterior.variance = 1.0 / w;
  result.posterior.idepth =
      (prior.idepth / prior.variance + obs.idepth / obs.variance) / w;
  return result;
}

}  // namespace sdm
