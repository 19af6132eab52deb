#include "sdm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>

namespace sdm {

std::vector<TrajectoryEntry> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open trajectory file: " + path);
  std::vector<TrajectoryEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
      throw DatasetError("malformed trajectory line: " + line);
    if (!entries.empty() && ts < entries.back().timestamp)
      throw UnsortedTrajectory("trajectory timestamps go backwards at " +
                               std::to_string(ts));
    TrajectoryEntry e;
    e.timestamp = ts;
    e.camera_to_world = Pose::from_quaternion(Eigen::Quaterniond(qw, qx, qy, qz),
                                              Eigen::Vector3d(tx, ty, tz));
    entries.push_back(e);
  }
  if (entries.empty()) throw DatasetError("empty trajectory file: " + path);
  return entries;
}

Pose pose_at_time(const std::vector<TrajectoryEntry>& trajectory,
                  double timestamp, double window) {
  if (trajectory.empty()) throw DatasetError("empty trajectory");

  const auto it = std::lower_bound(
      trajectory.begin(), trajectory.end(), timestamp,
      [](const TrajectoryEntry& e, double t) { return e.timestamp < t; });

  const TrajectoryEntry* after = it != trajectory.end() ? &*it : nullptr;
  const TrajectoryEntry* before = it != trajectory.begin() ? &*(it - 1) : nullptr;
  const double d_after =
      after ? std::abs(after->timestamp - timestamp) : INFINITY;
  const double d_before =
      before ? std::abs(before->timestamp - timestamp) : INFINITY;

  // Snap to the nearest stamped pose when one is close enough.
  const TrajectoryEntry* nearest = d_before <= d_after ? before : after;
  if (nearest && std::min(d_before, d_after) <= window)
    return nearest->camera_to_world.inverse();

  if (!before || !after)
    throw NoPoseWithinWindow("no pose within " + std::to_string(window) +
                             "s of t=" + std::to_string(timestamp));

  // Interpolate in the stored camera-to-world frame, then convert.
  const double span = after->timestamp - before->timestamp;
  const double u = span > 0.0 ? (timestamp - before->timestamp) / span : 0.0;
  const Eigen::Quaterniond qa(before->camera_to_world.rotation);
  const Eigen::Quaterniond qb(after->camera_to_world.rotation);
  const Eigen::Vector3d t = (1.0 - u) * before->camera_to_world.translation +
                            u * after->camera_to_world.translation;
  return Pose::from_quaternion(qa.slerp(u, qb), t).inverse();
}

DatasetSequence load_dataset(const std::string& image_dir,
                             const std::string& trajectory_path,
                             const std::string& calib_path,
                             double window) {
  namespace fs = std::filesystem;

  DatasetSequence seq;
  if (!fs::exists(calib_path))
    throw MissingCalib("calibration file not found: " + calib_path);
  try {
    seq.intrinsics = load_intrinsics(calib_path);
  } catch (const std::exception& e) {
    throw MissingCalib(e.what());
  }

  if (!fs::is_directory(image_dir))
    throw DatasetError("image directory not found: " + image_dir);
  std::vector<std::pair<double, std::string>> stamped;
  for (const auto& entry : fs::directory_iterator(image_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".png" && ext != ".pgm") continue;
    try {
      std::size_t pos = 0;
      const std::string stem = entry.path().stem().string();
      const double ts = std::stod(stem, &pos);
      if (pos != stem.size()) continue;  // stray non-timestamp file
      stamped.emplace_back(ts, entry.path().string());
    } catch (const std::exception&) {
      continue;
    }
  }
  if (stamped.empty())
    throw DatasetError("no timestamped images in " + image_dir);
  std::sort(stamped.begin(), stamped.end());

  const std::vector<TrajectoryEntry> trajectory =
      load_trajectory(trajectory_path);
  for (const auto& [ts, path] : stamped) {
    DatasetFrame frame;
    frame.timestamp = ts;
    frame.image_path = path;
    frame.pose = pose_at_time(trajectory, ts, window);
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace sdm
