// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ledit/grid.hpp"
#include "ledit/relevance.hpp"

namespace ledit {

/// PSNR values at or above this are reported as the cap (zero-MSE sentinel).
inline constexpr double kPsnrCap = 120.0;

/// 10*log10(1/MSE) for images valued in [0,1]; an optional mask restricts the
/// pixel set (broadcast across channels). Empty restriction set throws.
double psnr(const Image& a, const Image& b, const std::optional<EditMask>& mask = std::nullopt);

/// Intersection-over-union of two binary masks; both empty is defined as 1.
double mask_iou(const EditMask& a, const EditMask& b);

/// Mean over consecutive pairs of (1 - mean absolute difference).
double frame_consistency(const std::vector<Image>& frames);

struct MetricReport {
  std::string name;
  std::vector<std::string> item_names;
  std::vector<double> values;
  std::string parameters;

  double mean() const;
};

/// Pluggable image embedding for similarity metrics. The shipped embedding is
/// a block-averaged thumbnail: pure pixel statistics, no learned model, so
/// reports built on it are labeled as pixel-space analogs.
using EmbeddingFn = std::function<Eigen::VectorXd(const Image&)>;

EmbeddingFn make_downsample_embedding(int grid);

/// Cosine similarity of two images under an embedding.
double embedding_similarity(const Image& a, const Image& b, const EmbeddingFn& embed);

}  // namespace ledit
