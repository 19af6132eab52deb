#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sdm/image.hpp"
#include "sdm/pose.hpp"

namespace sdm {

// Per-pixel inverse-depth hypothesis. Serializes to a 24-byte record so a
// 640x480 grid occupies exactly 7,372,800 bytes.
struct DepthHypothesis {
  static constexpr std::uint8_t kValid = 1u << 0;
  static constexpr std::uint8_t kBlacklisted = 1u << 1;
  static constexpr std::uint8_t kFilledByNeighbour = 1u << 2;

  float idepth = 0.0f;             // 1/m
  float variance = 0.0f;           // 1/m^2
  float idepth_smoothed = 0.0f;
  float variance_smoothed = 0.0f;
  std::uint8_t validity_counter = 0;
  std::uint8_t failure_counter = 0;
  std::uint8_t flags = 0;

  bool valid() const { return flags & kValid; }
  bool blacklisted() const { return flags & kBlacklisted; }

  bool operator==(const DepthHypothesis&) const = default;
};

constexpr std::size_t kHypothesisRecordBytes = 24;
constexpr std::size_t kKfdHeaderBytes = 16;
constexpr std::uint32_t kKfdFormatVersion = 1;

// The map under estimation: greyscale image, world-to-camera pose and one
// hypothesis per pixel. The pose is carried alongside the map in memory but
// is not part of the .kfd byte stream (it arrives with the trajectory).
struct Keyframe {
  Image8 image;
  Pose pose;
  std::vector<DepthHypothesis> hypotheses;

  Keyframe() = default;
  Keyframe(Image8 img, const Pose& p)
      : image(std::move(img)),
        pose(p),
        hypotheses(static_cast<std::size_t>(image.width) * image.height) {}

  int width() const { return image.width; }
  int height() const { return image.height; }

  DepthHypothesis& hypothesis(int x, int y) {
    return hypotheses[static_cast<std::size_t>(y) * image.width + x];
  }
  const DepthHypothesis& hypothesis(int x, int y) const {
    return hypotheses[static_cast<std::size_t>(y) * image.width + x];
  }

  void reset_hypotheses() {
    hypotheses.assign(hypotheses.size(), DepthHypothesis{});
  }
};

class BadMagic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Little-endian byte stream: 16-byte header (width, height, version,
// reserved as u32) + image bytes + 24 bytes per hypothesis, row-major.
std::vector<std::uint8_t> serialize(const Keyframe& kf);
Keyframe deserialize(std::span<const std::uint8_t> bytes);

void save_keyframe(const Keyframe& kf, const std::string& path);
Keyframe load_keyframe(const std::string& path);

enum class Verdict : std::uint8_t {
  Scan = 0,
  SkipLowGradient = 1,
  SkipBlacklisted = 2,
  SkipOutOfFrame = 3,
  SkipGeometry = 4,
};

const char* to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct EligibilityDecision {
  Verdict verdict = Verdict::SkipLowGradient;
  double max_neighbourhood_gradient = 0.0;
};

// Max central-difference gradient magnitude over the 3x3 neighbourhood;
// SCAN when it reaches the threshold. Throws std::out_of_range for pixels
// closer than 1 px to the border.
EligibilityDecision gradient_check(const Image8& image, int x, int y,
                                   double threshold);

}  // namespace sdm
