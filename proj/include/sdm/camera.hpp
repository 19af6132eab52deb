#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

namespace sdm {

// Pinhole model, no distortion. Reference configuration is 640x480.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx > 0.0 &&
           cx < width && cy > 0.0 && cy < height;
  }
};

// Loads a single-line calibration file: "fx fy cx cy width height".
CameraIntrinsics load_intrinsics(const std::string& path);
void save_intrinsics(const CameraIntrinsics& k, const std::string& path);

// Ray through the pixel on the z=1 plane of the camera.
inline Eigen::Vector3d unproject(const Eigen::Vector2d& pixel,
                                 const CameraIntrinsics& k) {
  return {(pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy, 1.0};
}

// Projects a camera-space point. Empty if the point is at or behind the
// image plane (z <= 1e-6).
inline std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& p,
                                              const CameraIntrinsics& k) {
  if (p.z() <= 1e-6) return std::nullopt;
  return Eigen::Vector2d{k.fx * p.x() / p.z() + k.cx,
                         k.fy * p.y() / p.z() + k.cy};
}

}  // namespace sdm
