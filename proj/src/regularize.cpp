#include "sdm/regularize.hpp"

#include <cmath>
#include <vector>

namespace sdm {

namespace {

bool compatible(const DepthHypothesis& a, const DepthHypothesis& b,
                double gate) {
  const double tol = gate * (std::sqrt(a.variance) + std::sqrt(b.variance));
  return std::abs(a.idepth - b.idepth) <= tol;
}

}  // namespace

void hole_fill(Keyframe& kf, const FilterParams& params) {
  const int w = kf.width();
  const int h = kf.height();
  const std::vector<DepthHypothesis> snapshot = kf.hypotheses;
  const auto old = [&](int x, int y) -> const DepthHypothesis& {
    return snapshot[static_cast<std::size_t>(y) * w + x];
  };

  std::vector<const DepthHypothesis*> support;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const DepthHypothesis& centre = old(x, y);
      if (centre.valid() || centre.blacklisted()) continue;

      support.clear();
      for (int dy = -params.radius; dy <= params.radius; ++dy)
        for (int dx = -params.radius; dx <= params.radius; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const DepthHypothesis& n = old(nx, ny);
          if (n.valid()) support.push_back(&n);
        }
      if (static_cast<int>(support.size()) < params.min_valid_neighbours)
        continue;

      // Only fill genuinely flat neighbourhoods: every pair of supporting
      // hypotheses has to agree, not just a majority.
      bool consistent = true;
      for (std::size_t i = 0; i + 1 < support.size() && consistent; ++i)
        for (std::size_t j = i + 1; j < support.size(); ++j)
          if (!compatible(*support[i], *support[j], params.gate)) {
            consistent = false;
            break;
          }
      if (!consistent) continue;

      double sum_w = 0.0;
      double sum_wd = 0.0;
      for (const DepthHypothesis* n : support) {
        const double wgt = 1.0 / n->variance;
        sum_w += wgt;
        sum_wd += wgt * n->idepth;
      }
      DepthHypothesis& filled = kf.hypothesis(x, y);
      filled.idepth = static_cast<float>(sum_wd / sum_w);
      filled.variance =
          static_cast<float>(params.fill_variance_inflation / sum_w);
      filled.idepth_smoothed = filled.idepth;
      filled.variance_smoothed = filled.variance;
      filled.validity_counter = 1;
      filled.failure_counter = 0;
      filled.flags = DepthHypothesis::kValid | DepthHypothesis::kFilledByNeighbour;
    }
}

void smooth(Keyframe& kf, const FilterParams& params) {
  const int w = kf.width();
  const int h = kf.height();
  const std::vector<DepthHypothesis> snapshot = kf.hypotheses;
  const auto old = [&](int x, int y) -> const DepthHypothesis& {
    return snapshot[static_cast<std::size_t>(y) * w + x];
  };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const DepthHypothesis& centre = old(x, y);
      if (!centre.valid()) continue;

      double sum_w = 1.0 / centre.variance;
      double sum_wd = centre.idepth / centre.variance;
      for (int dy = -params.radius; dy <= params.radius; ++dy)
        for (int dx = -params.radius; dx <= params.radius; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const DepthHypothesis& n = old(nx, ny);
          if (!n.valid() || !compatible(n, centre, params.gate)) continue;
          const double wgt = 1.0 / n.variance;
          sum_w += wgt;
          sum_wd += wgt * n.idepth;
        }

      DepthHypothesis& out = kf.hypothesis(x, y);
      out.idepth_smoothed = static_cast<float>(sum_wd / sum_w);
      out.variance_smoothed = static_cast<float>(1.0 / sum_w);
    }
}

}  // namespace sdm
