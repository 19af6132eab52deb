#include <cmath>
#include <fstream>

#include <doctest.h>

#include "sdm/dataset.hpp"
#include "sdm/io.hpp"

#include "temp_dir.hpp"

using namespace sdm;

namespace {

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

TrajectoryEntry entry(double ts, const Eigen::Vector3d& t,
                      const Eigen::Quaterniond& q = Eigen::Quaterniond::Identity()) {
  TrajectoryEntry e;
  e.timestamp = ts;
  e.camera_to_world = Pose::from_quaternion(q, t);
  return e;
}

}  // namespace

TEST_CASE("trajectory files parse TUM-style lines and skip comments") {
  testutil::TempDir dir;
  const std::string path = dir.file("traj.txt");
  spit(path,
       "# timestamp tx ty tz qx qy qz qw\n"
       "\n"
       "0.0  1 2 3  0 0 0 1\n"
       "0.5  4 5 6  0 0 0 1\n"
       "# trailing comment\n"
       "1.0  7 8 9  0 0 1 0\n");

  const auto traj = load_trajectory(path);
  REQUIRE(traj.size() == 3);
  CHECK(traj[0].timestamp == doctest::Approx(0.0));
  CHECK(traj[2].timestamp == doctest::Approx(1.0));
  CHECK(traj[1].camera_to_world.translation.isApprox(Eigen::Vector3d(4, 5, 6)));
  CHECK(traj[0].camera_to_world.rotation.isApprox(Eigen::Matrix3d::Identity()));
  // 180 degrees about z: x and y flip.
  CHECK(traj[2].camera_to_world.rotation(0, 0) == doctest::Approx(-1.0));
  CHECK(traj[2].camera_to_world.rotation(1, 1) == doctest::Approx(-1.0));
  CHECK(traj[2].camera_to_world.rotation(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("trajectory loading rejects bad files") {
  testutil::TempDir dir;

  const std::string unsorted = dir.file("unsorted.txt");
  spit(unsorted, "1.0 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1\n");
  CHECK_THROWS_AS(load_trajectory(unsorted), UnsortedTrajectory);

  const std::string malformed = dir.file("malformed.txt");
  spit(malformed, "0.0 1 2 3 0 0 1\n");  // one field short
  CHECK_THROWS_AS(load_trajectory(malformed), DatasetError);

  const std::string empty = dir.file("empty.txt");
  spit(empty, "# only a comment\n");
  CHECK_THROWS_AS(load_trajectory(empty), DatasetError);

  CHECK_THROWS_AS(load_trajectory(dir.file("missing.txt")), DatasetError);
}

TEST_CASE("pose lookup snaps to a near entry and inverts to world-to-camera") {
  const std::vector<TrajectoryEntry> traj = {
      entry(0.1, {1.0, 2.0, 3.0}),
      entry(0.2, {2.0, 2.0, 3.0}),
  };

  const Pose exact = pose_at_time(traj, 0.1);
  CHECK(exact.translation.isApprox(Eigen::Vector3d(-1.0, -2.0, -3.0)));
  CHECK(exact.rotation.isApprox(Eigen::Matrix3d::Identity()));

  const Pose snapped = pose_at_time(traj, 0.105);
  CHECK(snapped.translation.isApprox(Eigen::Vector3d(-1.0, -2.0, -3.0)));

  const Pose snapped_up = pose_at_time(traj, 0.196);
  CHECK(snapped_up.translation.isApprox(Eigen::Vector3d(-2.0, -2.0, -3.0)));
}

TEST_CASE("pose lookup interpolates between distant entries") {
  const std::vector<TrajectoryEntry> traj = {
      entry(0.0, {0.0, 0.0, 0.0}),
      entry(1.0, {1.0, 0.0, 0.0}),
  };
  const Pose mid = pose_at_time(traj, 0.5);
  CHECK(mid.translation.isApprox(Eigen::Vector3d(-0.5, 0.0, 0.0)));

  const Pose quarter = pose_at_time(traj, 0.25);
  CHECK(quarter.translation.isApprox(Eigen::Vector3d(-0.25, 0.0, 0.0)));
}

TEST_CASE("pose lookup slerps the orientation") {
  const Eigen::Quaterniond quarter_turn(
      Eigen::AngleAxisd(M_PI / 2.0, Eigen::Vector3d::UnitZ()));
  const std::vector<TrajectoryEntry> traj = {
      entry(0.0, {0.0, 0.0, 0.0}),
      entry(1.0, {0.0, 0.0, 0.0}, quarter_turn),
  };
  const Pose mid = pose_at_time(traj, 0.5);
  // Camera-to-world is a 45 degree turn; world-to-camera its transpose.
  const Eigen::Matrix3d want =
      Eigen::AngleAxisd(-M_PI / 4.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  CHECK(mid.rotation.isApprox(want, 1e-12));
  CHECK(mid.translation.norm() == doctest::Approx(0.0));
}

TEST_CASE("pose lookup refuses timestamps outside the covered span") {
  const std::vector<TrajectoryEntry> traj = {
      entry(0.1, {0.0, 0.0, 0.0}),
      entry(0.9, {1.0, 0.0, 0.0}),
  };
  CHECK_THROWS_AS(pose_at_time(traj, 1.2), NoPoseWithinWindow);
  CHECK_THROWS_AS(pose_at_time(traj, -0.5), NoPoseWithinWindow);
  CHECK_NOTHROW(pose_at_time(traj, 0.905));  // inside the snap window
  CHECK_THROWS_AS(pose_at_time({}, 0.0), DatasetError);
}

TEST_CASE("datasets load frames, poses and calibration together") {
  testutil::TempDir dir;
  namespace fs = std::filesystem;
  const std::string frames = dir.file("frames");
  fs::create_directory(frames);

  for (int i = 0; i < 3; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%.6f.pgm", 0.1 * i);
    write_pgm8(frames + "/" + name, Image8(8, 6, std::uint8_t(i)));
  }
  spit(frames + "/readme.txt", "not an image");
  spit(frames + "/notes.pgm", "P5\n1 1\n255\nA");       // non-numeric stem
  spit(frames + "/1.5x.pgm", "P5\n1 1\n255\nA");        // trailing junk stem

  const std::string traj = dir.file("traj.txt");
  spit(traj,
       "0.0 0 0 0 0 0 0 1\n"
       "0.1 0.1 0 0 0 0 0 1\n"
       "0.2 0.2 0 0 0 0 0 1\n");
  const std::string calib = dir.file("calib.txt");
  spit(calib, "100 100 3.5 2.5 8 6\n");

  const DatasetSequence seq = load_dataset(frames, traj, calib);
  CHECK(seq.intrinsics.fx == doctest::Approx(100.0));
  CHECK(seq.intrinsics.width == 8);
  REQUIRE(seq.frames.size() == 3);
  CHECK(seq.frames[0].timestamp == doctest::Approx(0.0));
  CHECK(seq.frames[1].timestamp == doctest::Approx(0.1));
  CHECK(seq.frames[2].timestamp == doctest::Approx(0.2));
  CHECK(seq.frames[1].pose.translation.isApprox(Eigen::Vector3d(-0.1, 0.0, 0.0)));
  CHECK(load_image(seq.frames[2].image_path).at(0, 0) == 2);
}

TEST_CASE("dataset loading reports missing pieces distinctly") {
  testutil::TempDir dir;
  namespace fs = std::filesystem;
  const std::string frames = dir.file("frames");
  fs::create_directory(frames);
  write_pgm8(frames + "/0.000000.pgm", Image8(4, 4));
  const std::string traj = dir.file("traj.txt");
  spit(traj, "0.0 0 0 0 0 0 0 1\n");
  const std::string calib = dir.file("calib.txt");
  spit(calib, "100 100 1.5 1.5 4 4\n");

  CHECK_THROWS_AS(load_dataset(frames, traj, dir.file("nope.txt")), MissingCalib);
  CHECK_THROWS_AS(load_dataset(dir.file("nodir"), traj, calib), DatasetError);

  const std::string empty_dir = dir.file("empty");
  fs::create_directory(empty_dir);
  CHECK_THROWS_AS(load_dataset(empty_dir, traj, calib), DatasetError);

  CHECK_NOTHROW(load_dataset(frames, traj, calib));
}
