#include <cstring>
#include <random>
#include <vector>

#include <doctest.h>

#include "sdm/keyframe.hpp"

#include "temp_dir.hpp"

using namespace sdm;

namespace {

Keyframe random_keyframe(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_real_distribution<float> d(0.05f, 2.0f);
  std::uniform_real_distribution<float> v(1e-4f, 1.0f);

  Image8 img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(byte(rng));
  Keyframe kf(std::move(img), Pose{});
  for (auto& hyp : kf.hypotheses) {
    if (byte(rng) < 128) continue;  // leave some hypotheses empty
    hyp.idepth = d(rng);
    hyp.variance = v(rng);
    hyp.idepth_smoothed = d(rng);
    hyp.variance_smoothed = v(rng);
    hyp.validity_counter = static_cast<std::uint8_t>(byte(rng));
    hyp.failure_counter = static_cast<std::uint8_t>(byte(rng) % 4);
    hyp.flags = static_cast<std::uint8_t>(byte(rng) % 8);
  }
  return kf;
}

}  // namespace

TEST_CASE("serialized size is header + image + 24 bytes per pixel") {
  const Keyframe kf(Image8(640, 480), Pose{});
  const auto bytes = serialize(kf);
  CHECK(bytes.size() == kKfdHeaderBytes + 640 * 480 + 640 * 480 * 24);
  CHECK(640 * 480 * kHypothesisRecordBytes == 7372800u);

  for (auto [w, h] : {std::pair{3, 5}, {17, 1}, {64, 48}}) {
    const Keyframe small(Image8(w, h), Pose{});
    CHECK(serialize(small).size() ==
          kKfdHeaderBytes + std::size_t(w) * h * (1 + kHypothesisRecordBytes));
  }
}

TEST_CASE("serialize round-trips every field and re-encodes identically") {
  const Keyframe kf = random_keyframe(37, 23, 5);
  const auto bytes = serialize(kf);
  const Keyframe back = deserialize(bytes);

  REQUIRE(back.width() == kf.width());
  REQUIRE(back.height() == kf.height());
  CHECK(back.image.pixels == kf.image.pixels);
  REQUIRE(back.hypotheses.size() == kf.hypotheses.size());
  for (std::size_t i = 0; i < kf.hypotheses.size(); ++i)
    CHECK(back.hypotheses[i] == kf.hypotheses[i]);

  CHECK(serialize(back) == bytes);
}

TEST_CASE("deserialize validates header and length") {
  const Keyframe kf = random_keyframe(8, 6, 11);
  auto bytes = serialize(kf);

  SUBCASE("truncated payload") {
    bytes.pop_back();
    CHECK_THROWS_AS(deserialize(bytes), SizeMismatch);
  }
  SUBCASE("extra payload") {
    bytes.push_back(0);
    CHECK_THROWS_AS(deserialize(bytes), SizeMismatch);
  }
  SUBCASE("wrong version") {
    bytes[8] = 99;  // version lives at offset 8, little endian
    CHECK_THROWS_AS(deserialize(bytes), BadMagic);
  }
  SUBCASE("header alone is too short") {
    std::vector<std::uint8_t> stub(kKfdHeaderBytes - 1, 0);
    CHECK_THROWS_AS(deserialize(stub), BadMagic);
  }
}

TEST_CASE("keyframe files round-trip through disk") {
  testutil::TempDir dir;
  const Keyframe kf = random_keyframe(12, 9, 21);
  const std::string path = dir.file("map.kfd");
  save_keyframe(kf, path);
  const Keyframe back = load_keyframe(path);
  CHECK(serialize(back) == serialize(kf));
  CHECK_THROWS(load_keyframe(dir.file("absent.kfd")));
}

TEST_CASE("verdict names round-trip") {
  for (Verdict v : {Verdict::Scan, Verdict::SkipLowGradient,
                    Verdict::SkipBlacklisted, Verdict::SkipOutOfFrame,
                    Verdict::SkipGeometry})
    CHECK(verdict_from_string(to_string(v)) == v);
  CHECK(std::string(to_string(Verdict::Scan)) == "SCAN");
  CHECK_THROWS_AS(verdict_from_string("NOT_A_VERDICT"), std::invalid_argument);
}

TEST_CASE("gradient check on flat and edge images") {
  Image8 flat(9, 9);
  std::fill(flat.pixels.begin(), flat.pixels.end(), std::uint8_t(77));
  const auto d = gradient_check(flat, 4, 4, 5.0);
  CHECK(d.verdict == Verdict::SkipLowGradient);
  CHECK(d.max_neighbourhood_gradient == doctest::Approx(0.0));

  Image8 edge(9, 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) edge.at(x, y) = x >= 5 ? 100 : 0;
  const auto e = gradient_check(edge, 4, 4, 5.0);
  CHECK(e.verdict == Verdict::Scan);
  CHECK(e.max_neighbourhood_gradient == doctest::Approx(50.0));

  // One pixel further from the edge the 3x3 window still touches x=4.
  CHECK(gradient_check(edge, 3, 4, 5.0).verdict == Verdict::Scan);
  CHECK(gradient_check(edge, 2, 4, 5.0).verdict == Verdict::SkipLowGradient);
}

TEST_CASE("gradient check rejects border pixels") {
  Image8 img(6, 5);
  CHECK_THROWS_AS(gradient_check(img, 0, 2, 5.0), std::out_of_range);
  CHECK_THROWS_AS(gradient_check(img, 5, 2, 5.0), std::out_of_range);
  CHECK_THROWS_AS(gradient_check(img, 2, 0, 5.0), std::out_of_range);
  CHECK_THROWS_AS(gradient_check(img, 2, 4, 5.0), std::out_of_range);
  CHECK_NOTHROW(gradient_check(img, 1, 1, 5.0));
}

TEST_CASE("gradient check matches a naive neighbourhood maximum") {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> byte(0, 255);
  Image8 img(120, 90);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(byte(rng));

  std::uniform_int_distribution<int> px(1, img.width - 2);
  std::uniform_int_distribution<int> py(1, img.height - 2);
  for (int i = 0; i < 10000; ++i) {
    const int x = px(rng);
    const int y = py(rng);
    double want = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        want = std::max(want, central_gradient(img, x + dx, y + dy).norm());
    const auto got = gradient_check(img, x, y, 12.0);
    CHECK(got.max_neighbourhood_gradient == doctest::Approx(want));
    CHECK((got.verdict == Verdict::Scan) == (want >= 12.0));
  }
}
