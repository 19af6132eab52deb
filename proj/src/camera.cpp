#include "sdm/camera.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdm {

CameraIntrinsics load_intrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    CameraIntrinsics k;
    if (!(ss >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height))
      throw std::runtime_error("malformed calibration line in " + path);
    if (!k.valid())
      throw std::runtime_error("invalid calibration values in " + path);
    return k;
  }
  throw std::runtime_error("empty calibration file: " + path);
}

void save_intrinsics(const CameraIntrinsics& k, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write calibration file: " + path);
  out << k.fx << " " << k.fy << " " << k.cx << " " << k.cy << " " << k.width
      << " " << k.height << "\n";
}

}  // namespace sdm
