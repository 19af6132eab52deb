#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sdm/camera.hpp"
#include "sdm/pose.hpp"

namespace sdm {

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingCalib : DatasetError {
  using DatasetError::DatasetError;
};
struct UnsortedTrajectory : DatasetError {
  using DatasetError::DatasetError;
};
struct NoPoseWithinWindow : DatasetError {
  using DatasetError::DatasetError;
};

struct DatasetFrame {
  double timestamp = 0.0;
  std::string image_path;
  Pose pose;  // world -> camera
};

struct DatasetSequence {
  CameraIntrinsics intrinsics;
  std::vector<DatasetFrame> frames;
};

// A trajectory line is "timestamp tx ty tz qx qy qz qw" giving the
// camera-to-world transform; lines must be sorted by timestamp, comments
// start with '#'.
struct TrajectoryEntry {
  double timestamp = 0.0;
  Pose camera_to_world;
};

std::vector<TrajectoryEntry> load_trajectory(const std::string& path);

// World-to-camera pose for `timestamp`: nearest entry within `window`
// seconds, otherwise interpolated (linear position, slerp orientation, in
// the camera-to-world frame of the file) between the bracketing entries.
// Throws NoPoseWithinWindow when the timestamp falls outside the trajectory
// span and no entry is close enough.
Pose pose_at_time(const std::vector<TrajectoryEntry>& trajectory,
                  double timestamp, double window = 0.01);

// Loads a directory of frames. `image_dir` holds grayscale images named
// <timestamp>.<ext>; `trajectory_path` the matching trajectory file and
// `calib_path` a "fx fy cx cy width height" calibration line.
DatasetSequence load_dataset(const std::string& image_dir,
                             const std::string& trajectory_path,
                             const std::string& calib_path,
                             double window = 0.01);

}  // namespace sdm
