#include "sdm/epipolar.hpp"

#include <algorithm>
#include <cmath>

namespace sdm {

namespace {

constexpr double kDirectionEps = 1e-6;
constexpr double kMinHomogeneousDepth = 1e-3;
constexpr int kBorderMargin = 3;  // pattern (2) + bilinear halo (1)

// Unnormalised direction of increasing inverse depth in the current frame.
// The projection of the keypoint at inverse depth d is pi(r + d*t) with
// r = R * ray, so du/dd is a positive multiple of this vector everywhere in
// front of the camera.
Eigen::Vector2d raw_current_direction(const Eigen::Vector3d& r,
                                      const Eigen::Vector3d& t,
                                      const CameraIntrinsics& k) {
  return {k.fx * (t.x() * r.z() - r.x() * t.z()),
          k.fy * (t.y() * r.z() - r.y() * t.z())};
}

// Clips [t0, t1] of origin + t*dir against an axis-aligned rectangle
// (Liang-Barsky). Returns false when the intersection is empty.
bool clip_segment(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir,
                  double xmin, double xmax, double ymin, double ymax,
                  double& t0, double& t1) {
  const double p[4] = {-dir.x(), dir.x(), -dir.y(), dir.y()};
  const double q[4] = {origin.x() - xmin, xmax - origin.x(),
                       origin.y() - ymin, ymax - origin.y()};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      if (t > t1) return false;
      t0 = std::max(t0, t);
    } else {
      if (t < t0) return false;
      t1 = std::min(t1, t);
    }
  }
  return t0 <= t1;
}

}  // namespace

std::optional<Eigen::Vector2d> current_epipolar_direction(
    const Eigen::Vector2d& keypoint, const Pose& rel_pose,
    const CameraIntrinsics& k) {
  const Eigen::Vector3d r = rel_pose.rotation * unproject(keypoint, k);
  const Eigen::Vector2d n = raw_current_direction(r, rel_pose.translation, k);
  if (n.norm() < kDirectionEps) return std::nullopt;
  return n.normalized();
}

std::optional<Eigen::Vector2d> keyframe_epipolar_direction(
    const Eigen::Vector2d& keypoint, const Pose& rel_pose,
    const CameraIntrinsics& k) {
  // Line through the keypoint and the epipole (projection of the current
  // camera centre c = -R^T t), oriented away from the epipole so it agrees
  // with the current-frame scan direction under the local disparity shift.
  const Eigen::Vector3d c =
      -(rel_pose.rotation.transpose() * rel_pose.translation);
  const Eigen::Vector2d n{(keypoint.x() - k.cx) * c.z() - k.fx * c.x(),
                          (keypoint.y() - k.cy) * c.z() - k.fy * c.y()};
  if (n.norm() < kDirectionEps) return std::nullopt;
  return n.normalized();
}

SegmentResult epipolar_segment(const Eigen::Vector2d& keypoint,
                               const Pose& rel_pose, const CameraIntrinsics& k,
                               const std::optional<DepthPrior>& prior,
                               const EpipolarParams& params) {
  SegmentResult result;
  const Eigen::Vector3d r = rel_pose.rotation * unproject(keypoint, k);
  const Eigen::Vector3d& t = rel_pose.translation;

  const Eigen::Vector2d raw_dir = raw_current_direction(r, t, k);
  if (raw_dir.norm() < kDirectionEps) {
    result.status = SegmentStatus::NearEpipole;
    return result;
  }
  const Eigen::Vector2d dir = raw_dir.normalized();

  // Inverse-depth bracket to cover.
  double d_lo = params.idepth_min;
  double d_hi = params.idepth_max;
  double d_ctr = 0.0;
  if (prior) {
    d_lo = std::max(0.0, prior->idepth - 2.0 * prior->sigma);
    d_hi = std::min(params.idepth_max, prior->idepth + 2.0 * prior->sigma);
    d_ctr = std::clamp(prior->idepth, d_lo, std::max(d_lo, d_hi));
    d_hi = std::max(d_lo, d_hi);
  }

  // Keep the homogeneous depth r_z + d*t_z positive over the bracket; the
  // projection is undefined at or behind the camera plane.
  if (t.z() < 0.0) {
    const double d_max_ok = (r.z() - kMinHomogeneousDepth) / -t.z();
    if (d_lo > d_max_ok) {
      result.status = SegmentStatus::OutsideFrame;
      return result;
    }
    d_hi = std::min(d_hi, d_max_ok);
  } else if (t.z() > 0.0) {
    const double d_min_ok = (kMinHomogeneousDepth - r.z()) / t.z();
    if (d_hi < d_min_ok) {
      result.status = SegmentStatus::OutsideFrame;
      return result;
    }
    d_lo = std::max(d_lo, d_min_ok);
  } else if (r.z() < kMinHomogeneousDepth) {
    result.status = SegmentStatus::OutsideFrame;
    return result;
  }
  d_ctr = std::clamp(d_ctr, d_lo, d_hi);

  const auto project_at = [&](double d) -> Eigen::Vector2d {
    const Eigen::Vector3d h = r + d * t;
    return {k.fx * h.x() / h.z() + k.cx, k.fy * h.y() / h.z() + k.cy};
  };

  const Eigen::Vector2d origin = prior ? project_at(d_ctr) : project_at(d_lo);
  double t_min = (project_at(d_lo) - origin).dot(dir);
  double t_max = (project_at(d_hi) - origin).dot(dir);
  if (t_min > t_max) std::swap(t_min, t_max);  // numerical safety only

  // A confident prior can shrink the interval below anything searchable;
  // widen it symmetrically before clipping so such pixels keep refining.
  if (prior && t_max - t_min < params.min_search_length) {
    const double pad = 0.5 * (params.min_search_length - (t_max - t_min));
    t_min -= pad;
    t_max += pad;
  }

  const double xmin = kBorderMargin;
  const double xmax = k.width - 1 - kBorderMargin;
  const double ymin = kBorderMargin;
  const double ymax = k.height - 1 - kBorderMargin;
  if (!clip_segment(origin, dir, xmin, xmax, ymin, ymax, t_min, t_max)) {
    result.status = SegmentStatus::OutsideFrame;
    return result;
  }

  if (t_max - t_min < params.min_epl_length) {
    result.status = SegmentStatus::TooShort;
    return result;
  }

  // Bound the scan cost: at most max_steps positions. With a prior, keep
  // the window centred on the prior projection; otherwise keep the far end
  // so the first exhaustive scan always covers the small-disparity range.
  const double cap = (params.max_steps - 1) * params.step;
  if (t_max - t_min > cap) {
    if (prior) {
      const double centre = std::clamp(0.0, t_min, t_max);
      double lo = centre - 0.5 * cap;
      double hi = lo + cap;
      if (lo < t_min) {
        lo = t_min;
        hi = t_min + cap;
      } else if (hi > t_max) {
        hi = t_max;
        lo = t_max - cap;
      }
      t_min = lo;
      t_max = hi;
    } else {
      t_max = t_min + cap;
    }
  }

  result.segment = EpipolarSegment{origin, dir, t_min, t_max};
  return result;
}

TriangulationResult triangulate_inverse_depth(const Eigen::Vector2d& keypoint,
                                              const Eigen::Vector2d& matched,
                                              const Pose& rel_pose,
                                              const CameraIntrinsics& k) {
  TriangulationResult result;
  const Eigen::Vector3d r = rel_pose.rotation * unproject(keypoint, k);
  const Eigen::Vector3d& t = rel_pose.translation;
  const Eigen::Vector3d q = unproject(matched, k);

  // Solve q_a (z r_z + t_z) = z r_a + t_a on the better-conditioned axis.
  const Eigen::Vector2d n = raw_current_direction(r, t, k);
  const bool use_x = std::abs(n.x()) >= std::abs(n.y());
  const double q_a = use_x ? q.x() : q.y();
  const double r_a = use_x ? r.x() : r.y();
  const double t_a = use_x ? t.x() : t.y();

  const double denom = q_a * r.z() - r_a;
  if (std::abs(denom) < 1e-9) {
    result.status = TriangulationStatus::DivergentRays;
    return result;
  }
  const double z = (t_a - q_a * t.z()) / denom;
  if (!(z > 0.0) || z * r.z() + t.z() <= 0.0) {
    result.status = TriangulationStatus::BehindCamera;
    return result;
  }
  result.idepth = 1.0 / z;
  return result;
}

}  // namespace sdm
