#include "sdm/keyframe.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace sdm {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

float get_f32(const std::uint8_t* p) {
  const std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Keyframe& kf) {
  const std::size_t n = kf.hypotheses.size();
  std::vector<std::uint8_t> out;
  out.reserve(kKfdHeaderBytes + kf.image.pixels.size() +
              n * kHypothesisRecordBytes);
  put_u32(out, static_cast<std::uint32_t>(kf.width()));
  put_u32(out, static_cast<std::uint32_t>(kf.height()));
  put_u32(out, kKfdFormatVersion);
  put_u32(out, 0);  // reserved
  out.insert(out.end(), kf.image.pixels.begin(), kf.image.pixels.end());
  for (const DepthHypothesis& h : kf.hypotheses) {
    put_f32(out, h.idepth);
    put_f32(out, h.variance);
    put_f32(out, h.idepth_smoothed);
    put_f32(out, h.variance_smoothed);
    out.push_back(h.validity_counter);
    out.push_back(h.failure_counter);
    out.push_back(h.flags);
    out.insert(out.end(), 5, std::uint8_t{0});  // pad to 24 bytes
  }
  return out;
}

Keyframe deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kKfdHeaderBytes)
    throw BadMagic("keyframe stream shorter than the header");
  const std::uint32_t width = get_u32(bytes.data());
  const std::uint32_t height = get_u32(bytes.data() + 4);
  const std::uint32_t version = get_u32(bytes.data() + 8);
  if (version != kKfdFormatVersion)
    throw BadMagic("unsupported keyframe format version " +
                   std::to_string(version));
  if (width == 0 || height == 0 || width > 1u << 16 || height > 1u << 16)
    throw SizeMismatch("implausible keyframe dimensions");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const std::size_t expected =
      kKfdHeaderBytes + n + n * kHypothesisRecordBytes;
  if (bytes.size() != expected)
    throw SizeMismatch("keyframe stream is " + std::to_string(bytes.size()) +
                       " bytes, expected " + std::to_string(expected));

  Keyframe kf;
  kf.image.width = static_cast<int>(width);
  kf.image.height = static_cast<int>(height);
  kf.image.pixels.assign(bytes.begin() + kKfdHeaderBytes,
                         bytes.begin() + kKfdHeaderBytes + n);
  kf.hypotheses.resize(n);
  const std::uint8_t* p = bytes.data() + kKfdHeaderBytes + n;
  for (std::size_t i = 0; i < n; ++i, p += kHypothesisRecordBytes) {
    DepthHypothesis& h = kf.hypotheses[i];
    h.idepth = get_f32(p);
    h.variance = get_f32(p + 4);
    h.idepth_smoothed = get_f32(p + 8);
    h.variance_smoothed = get_f32(p + 12);
    h.validity_counter = p[16];
    h.failure_counter = p[17];
    h.flags = p[18];
  }
  return kf;
}

void save_keyframe(const Keyframe& kf, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize(kf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write keyframe file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to keyframe file: " + path);
}

Keyframe load_keyframe(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open keyframe file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Scan: return "SCAN";
    case Verdict::SkipLowGradient: return "SKIP_LOW_GRADIENT";
    case Verdict::SkipBlacklisted: return "SKIP_BLACKLISTED";
    case Verdict::SkipOutOfFrame: return "SKIP_OUT_OF_FRAME";
    case Verdict::SkipGeometry: return "SKIP_GEOMETRY";
  }
  return "UNKNOWN";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "SCAN") return Verdict::Scan;
  if (s == "SKIP_LOW_GRADIENT") return Verdict::SkipLowGradient;
  if (s == "SKIP_BLACKLISTED") return Verdict::SkipBlacklisted;
  if (s == "SKIP_OUT_OF_FRAME") return Verdict::SkipOutOfFrame;
  if (s == "SKIP_GEOMETRY") return Verdict::SkipGeometry;
  throw std::invalid_argument("unknown verdict: " + s);
}

EligibilityDecision gradient_check(const Image8& image, int x, int y,
                                   double threshold) {
  if (x < 1 || y < 1 || x >= image.width - 1 || y >= image.height - 1)
    throw std::out_of_range("gradient_check needs a 1 px interior margin");
  EligibilityDecision decision;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const double mag = central_gradient(image, x + dx, y + dy).norm();
      decision.max_neighbourhood_gradient =
          std::max(decision.max_neighbourhood_gradient, mag);
    }
  decision.verdict = decision.max_neighbourhood_gradient >= threshold
                         ? Verdict::Scan
                         : Verdict::SkipLowGradient;
  return decision;
}

}  // namespace sdm
