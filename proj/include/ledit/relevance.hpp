// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "ledit/codec.hpp"
#include "ledit/denoise.hpp"
#include "ledit/grid.hpp"

namespace ledit {

/// Per-latent-pixel relevance in [0,1], single channel at latent resolution.
struct RelevanceMap {
  Image grid;
};

enum class MaskSpace { latent, pixel };

/// Binary edit mask; values are exactly 0 or 1.
struct EditMask {
  Image grid;
  MaskSpace space = MaskSpace::latent;

  Eigen::Index area() const { return static_cast<Eigen::Index>((grid.data != 0.0).count()); }
};

struct RelevanceParams {
  double t_rel_fraction = 0.8;
  int samples = 1;  // independent noise draws averaged into the raw map
};

/// Linear-interpolation quantile of the values of `v` (q in [0,1]).
double quantile(const Eigen::VectorXd& sorted_values, double q);

/// Upper-sided IQR clamp (fence Q3 + 1.5*IQR) followed by min-max
/// normalization to [0,1]. A constant input maps to all zeros.
Image iqr_clamp_normalize(const Image& raw);

/// Relevance of each latent pixel to the instruction: the channel-mean of
/// |eps(image,text) - eps(image)| at noise level t_rel, clamped and
/// normalized. `condition_image` defaults to `image`; passing the original
/// capture while editing a render mirrors the scene-editing conditioning.
RelevanceMap compute_relevance(const Denoiser& denoiser, const Codec& codec, const Image& image,
                               const std::string& instruction, const RelevanceParams& params,
                               std::uint64_t seed,
                               const std::optional<Image>& condition_image = std::nullopt);

/// M = 1(R >= tau); tau = 0 yields the all-ones mask.
EditMask threshold_mask(const RelevanceMap& rel, double tau);

/// Nearest-neighbor upsample of a latent mask to pixel resolution.
EditMask mask_to_pixel(const EditMask& mask, const Codec& codec);

/// Nearest-neighbor upsample of a latent relevance map to pixel resolution.
RelevanceMap relevance_to_pixel(const RelevanceMap& rel, const Codec& codec);

}  // namespace ledit
