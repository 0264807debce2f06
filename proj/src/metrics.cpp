// SPDX-License-Identifier: Apache-2.0
#include "ledit/metrics.hpp"

#include <cmath>
#include <numeric>

namespace ledit {

double psnr(const Image& a, const Image& b, const std::optional<EditMask>& mask) {
  require_same_shape(a, b, "psnr");
  double se = 0.0;
  Eigen::Index count = 0;
  if (mask) {
    if (mask->grid.height != a.height || mask->grid.width != a.width || mask->grid.channels != 1)
      throw std::invalid_argument("psnr: mask must be single-channel at the images' resolution");
    const Eigen::Index hw = a.pixels();
    for (Eigen::Index i = 0; i < hw; ++i) {
      if (mask->grid.data[i] == 0.0) continue;
      for (int c = 0; c < a.channels; ++c) {
        const double d = a.data[c * hw + i] - b.data[c * hw + i];
        se += d * d;
      }
      count += a.channels;
    }
    if (count == 0) throw std::invalid_argument("psnr: empty restriction set");
  } else {
    se = (a.data - b.data).matrix().squaredNorm();
    count = a.size();
  }
  const double mse = se / static_cast<double>(count);
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double mask_iou(const EditMask& a, const EditMask& b) {
  require_same_shape(a.grid, b.grid, "mask_iou");
  Eigen::Index inter = 0, uni = 0;
  for (Eigen::Index i = 0; i < a.grid.size(); ++i) {
    const bool pa = a.grid.data[i] != 0.0;
    const bool pb = b.grid.data[i] != 0.0;
    inter += (pa && pb) ? 1 : 0;
    uni += (pa || pb) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double frame_consistency(const std::vector<Image>& frames) {
  if (frames.size() < 2) throw std::invalid_argument("frame_consistency: need at least 2 frames");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    require_same_shape(frames[i], frames[i + 1], "frame_consistency");
    total += 1.0 - (frames[i].data - frames[i + 1].data).abs().mean();
  }
  return total / static_cast<double>(frames.size() - 1);
}

double MetricReport::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

EmbeddingFn make_downsample_embedding(int grid) {
  if (grid < 1) throw std::invalid_argument("make_downsample_embedding: grid must be >= 1");
  return [grid](const Image& img) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(grid) * grid * img.channels);
    Eigen::Index k = 0;
    for (int c = 0; c < img.channels; ++c)
      for (int gy = 0; gy < grid; ++gy)
        for (int gx = 0; gx < grid; ++gx) {
          const int y0 = gy * img.height / grid, y1 = (gy + 1) * img.height / grid;
          const int x0 = gx * img.width / grid, x1 = (gx + 1) * img.width / grid;
          double sum = 0.0;
          int count = 0;
          for (int y = y0; y < std::max(y1, y0 + 1) && y < img.height; ++y)
            for (int x = x0; x < std::max(x1, x0 + 1) && x < img.width; ++x) {
              sum += img.at(y, x, c);
              ++count;
            }
          out[k++] = count > 0 ? sum / count : 0.0;
        }
    return out;
  };
}

double embedding_similarity(const Image& a, const Image& b, const EmbeddingFn& embed) {
  require_same_shape(a, b, "embedding_similarity");
  const Eigen::VectorXd ea = embed(a);
  const Eigen::VectorXd eb = embed(b);
  const double na = ea.norm(), nb = eb.norm();
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return ea.dot(eb) / (na * nb);
}

}  // namespace ledit
