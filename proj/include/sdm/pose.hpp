#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace sdm {

// Rigid transform x' = R x + t. Keyframes store world-to-camera poses;
// relative poses map keyframe coordinates to current-frame coordinates.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }

  Pose inverse() const {
    Pose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -inv.rotation * translation;
    return inv;
  }

  // this ∘ other: applies `other` first.
  Pose operator*(const Pose& other) const {
    Pose out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  // R orthonormal with det +1, within tol.
  bool is_rigid(double tol = 1e-9) const {
    const Eigen::Matrix3d err =
        rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    return err.cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }

  static Pose from_quaternion(const Eigen::Quaterniond& q,
                              const Eigen::Vector3d& t) {
    Pose p;
    p.rotation = q.normalized().toRotationMatrix();
    p.translation = t;
    return p;
  }
};

}  // namespace sdm
