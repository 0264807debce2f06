// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ledit/grid.hpp"
#include "ledit/schedule.hpp"

namespace ledit {

/// Conditioning pair for a noise prediction. Absent members are the null
/// conditions (image-free / text-free).
struct Condition {
  std::optional<Image> image;
  std::optional<std::string> text;

  static Condition none() { return {}; }
  static Condition image_only(Image img) { return {std::move(img), std::nullopt}; }
  static Condition full(Image img, std::string txt) { return {std::move(img), std::move(txt)}; }
};

struct GuidanceScales {
  double image = 1.0;  // s_I
  double text = 7.5;   // s_T
};

struct LatentShape {
  int height = 0, width = 0, channels = 0;
  bool matches(const Image& img) const {
    return img.height == height && img.width == width && img.channels == channels;
  }
};

/// Noise-prediction interface. Implementations here are closed-form oracles;
/// they bind a schedule so predictions at a timestep are well defined.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Image predict(const Image& z_t, int t, const Condition& cond) const = 0;
  virtual const NoiseSchedule& schedule() const = 0;
  virtual LatentShape latent_shape() const = 0;
};

/// Maps the fully specified (image, text) condition to a clean target latent.
/// The null-condition targets are fixed by the denoiser itself.
using EditTargetFn = std::function<Image(const Image& image_cond, const std::string& text)>;

/// Oracle whose prediction points the latent at a deterministic clean target:
///   eps = (z_t - sqrt(ab_t) * target(cond)) / sqrt(1 - ab_t).
/// Null semantics: text-free -> target is the conditioning image itself;
/// image-free -> target is the zero latent.
class ProceduralDenoiser final : public Denoiser {
 public:
  ProceduralDenoiser(NoiseSchedule sched, LatentShape shape, EditTargetFn edit_target);

  Image predict(const Image& z_t, int t, const Condition& cond) const override;
  const NoiseSchedule& schedule() const override { return sched_; }
  LatentShape latent_shape() const override { return shape_; }

  /// Clean target for a condition (the x-hat the prediction aims at).
  Image target(const Condition& cond) const;

 private:
  NoiseSchedule sched_;
  LatentShape shape_;
  EditTargetFn edit_target_;
};

/// Isotropic Gaussian mixture prior, exactly solvable: the prediction is
/// (z_t - sqrt(ab_t) * E[x0|z_t]) / sqrt(1 - ab_t) with the posterior mean
/// taken under z_t | k ~ N(sqrt(ab)*mu_k, (1 - ab + ab*s^2) I).
struct GmmMixture {
  std::vector<Image> means;
  std::vector<double> weights;
  double sigma = 0.0;  // shared component standard deviation s >= 0
};

class GmmDenoiser final : public Denoiser {
 public:
  /// Mixtures keyed by text label; the empty key serves the text-free
  /// condition. The image condition does not enter the prior.
  GmmDenoiser(NoiseSchedule sched, LatentShape shape, std::map<std::string, GmmMixture> mixtures);

  Image predict(const Image& z_t, int t, const Condition& cond) const override;
  const NoiseSchedule& schedule() const override { return sched_; }
  LatentShape latent_shape() const override { return shape_; }

  /// Exact posterior mean E[x0 | z_t] for the mixture behind `cond`.
  Image posterior_mean(const Image& z_t, int t, const Condition& cond) const;

 private:
  const GmmMixture& mixture_for(const Condition& cond) const;

  NoiseSchedule sched_;
  LatentShape shape_;
  std::map<std::string, GmmMixture> mixtures_;
};

/// Dual-scale guided combination of the three raw predictions:
///   eps_uncond + s_I (eps_img - eps_uncond) + s_T (eps_img_text - eps_img).
Image guided_epsilon(const Denoiser& denoiser, const Image& z_t, int t, const Image& image_cond,
                     const std::string& text, const GuidanceScales& scales);

}  // namespace ledit
