// SPDX-License-Identifier: Apache-2.0
#include "ledit/relevance.hpp"

#include <algorithm>
#include <cmath>

#include "ledit/rng.hpp"

namespace ledit {

double quantile(const Eigen::VectorXd& sorted_values, double q) {
  const Eigen::Index n = sorted_values.size();
  if (n == 0) throw std::invalid_argument("quantile: empty input");
  if (n == 1) return sorted_values[0];
  const double pos = q * static_cast<double>(n - 1);
  const Eigen::Index lo = static_cast<Eigen::Index>(std::floor(pos));
  const Eigen::Index hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

Image iqr_clamp_normalize(const Image& raw) {
  Eigen::VectorXd sorted = raw.data.matrix();
  std::sort(sorted.begin(), sorted.end());

  const double q1 = quantile(sorted, 0.25);
  const double q3 = quantile(sorted, 0.75);
  const double iqr = q3 - q1;

  Image out = raw;
  // A zero interquartile range carries no outlier information (typical for
  // maps that are exactly zero outside a sparse edit support); the fence
  // would collapse onto the lower quartile and erase the signal.
  if (iqr > 0.0) out.data = out.data.min(q3 + 1.5 * iqr);

  const double lo = out.data.minCoeff();
  const double hi = out.data.maxCoeff();
  if (hi - lo <= 0.0) {
    out.data.setZero();
    return out;
  }
  out.data = (out.data - lo) / (hi - lo);
  return out;
}

RelevanceMap compute_relevance(const Denoiser& denoiser, const Codec& codec, const Image& image,
                               const std::string& instruction, const RelevanceParams& params,
                               std::uint64_t seed, const std::optional<Image>& condition_image) {
  if (instruction.empty()) throw std::invalid_argument("compute_relevance: empty instruction");
  if (!(params.t_rel_fraction > 0.0) || !(params.t_rel_fraction < 1.0))
    throw std::invalid_argument("compute_relevance: t_rel fraction must be in (0,1)");
  if (params.samples < 1) throw std::invalid_argument("compute_relevance: samples must be >= 1");

  const NoiseSchedule& sched = denoiser.schedule();
  const int t_rel = sched.timestep_from_fraction(params.t_rel_fraction);

  const Image x0_lat = encode(codec, image);
  const Image cond_lat = condition_image ? encode(codec, *condition_image) : x0_lat;

  Rng rng(mix_seed(seed, 0x7e1e7a9ceULL));
  Image accum = Image::zeros(x0_lat.height, x0_lat.width, 1);
  for (int s = 0; s < params.samples; ++s) {
    const Image eps = normal_grid(x0_lat.height, x0_lat.width, x0_lat.channels, rng);
    const Image z = add_noise(x0_lat, eps, t_rel, sched);
    const Image eps_full = denoiser.predict(z, t_rel, Condition::full(cond_lat, instruction));
    const Image eps_img = denoiser.predict(z, t_rel, Condition::image_only(cond_lat));
    Image diff = eps_full;
    diff.data = (eps_full.data - eps_img.data).abs();
    accum.data += channel_mean(diff).data;
  }
  accum.data /= static_cast<double>(params.samples);

  return RelevanceMap{iqr_clamp_normalize(accum)};
}

EditMask threshold_mask(const RelevanceMap& rel, double tau) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("threshold_mask: tau must be in [0,1]");
  EditMask mask;
  mask.space = MaskSpace::latent;
  mask.grid = rel.grid;
  mask.grid.data = (rel.grid.data >= tau).cast<double>();
  return mask;
}

EditMask mask_to_pixel(const EditMask& mask, const Codec& codec) {
  if (mask.space != MaskSpace::latent) throw std::invalid_argument("mask_to_pixel: mask already at pixel resolution");
  EditMask out;
  out.space = MaskSpace::pixel;
  out.grid = upsample_nearest(mask.grid, codec.factor);
  return out;
}

RelevanceMap relevance_to_pixel(const RelevanceMap& rel, const Codec& codec) {
  return RelevanceMap{upsample_nearest(rel.grid, codec.factor)};
}

}  // namespace ledit
