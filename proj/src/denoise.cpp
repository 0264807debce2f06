// SPDX-License-Identifier: Apache-2.0
#include "ledit/denoise.hpp"

#include <cmath>

namespace ledit {

namespace {

void check_inputs(const Denoiser& d, const Image& z_t, int t) {
  if (!d.latent_shape().matches(z_t)) throw std::invalid_argument("predict: latent shape mismatch");
  if (!d.schedule().valid_timestep(t) || t == kNoNoiseTimestep)
    throw std::invalid_argument("predict: timestep out of range");
  if (d.schedule().alpha_bar_at(t) >= 1.0)
    throw std::invalid_argument("predict: undefined at the no-noise boundary");
}

}  // namespace

ProceduralDenoiser::ProceduralDenoiser(NoiseSchedule sched, LatentShape shape, EditTargetFn edit_target)
    : sched_(std::move(sched)), shape_(shape), edit_target_(std::move(edit_target)) {}

Image ProceduralDenoiser::target(const Condition& cond) const {
  if (!cond.image) return Image::zeros(shape_.height, shape_.width, shape_.channels);
  if (!cond.text) return *cond.image;
  Image t = edit_target_(*cond.image, *cond.text);
  if (!shape_.matches(t)) throw std::logic_error("ProceduralDenoiser: target_fn returned wrong shape");
  return t;
}

Image ProceduralDenoiser::predict(const Image& z_t, int t, const Condition& cond) const {
  check_inputs(*this, z_t, t);
  if (cond.image && !shape_.matches(*cond.image))
    throw std::invalid_argument("predict: condition image shape mismatch");
  const double ab = sched_.alpha_bar_at(t);
  const Image xhat = target(cond);
  Image eps = z_t;
  eps.data = (z_t.data - std::sqrt(ab) * xhat.data) / std::sqrt(1.0 - ab);
  return eps;
}

GmmDenoiser::GmmDenoiser(NoiseSchedule sched, LatentShape shape, std::map<std::string, GmmMixture> mixtures)
    : sched_(std::move(sched)), shape_(shape), mixtures_(std::move(mixtures)) {
  for (auto& [label, mix] : mixtures_) {
    if (mix.means.empty()) throw std::invalid_argument("GmmDenoiser: mixture needs at least one component");
    if (mix.means.size() != mix.weights.size())
      throw std::invalid_argument("GmmDenoiser: means/weights size mismatch");
    if (mix.sigma < 0.0) throw std::invalid_argument("GmmDenoiser: negative component sigma");
    double total = 0.0;
    for (double w : mix.weights) {
      if (!(w > 0.0)) throw std::invalid_argument("GmmDenoiser: weights must be positive");
      total += w;
    }
    for (auto& mean : mix.means)
      if (!shape_.matches(mean)) throw std::invalid_argument("GmmDenoiser: mean shape mismatch");
    for (double& w : mix.weights) w /= total;
  }
}

const GmmMixture& GmmDenoiser::mixture_for(const Condition& cond) const {
  const std::string label = cond.text ? *cond.text : std::string();
  auto it = mixtures_.find(label);
  if (it == mixtures_.end()) throw std::invalid_argument("GmmDenoiser: unknown text label '" + label + "'");
  return it->second;
}

Image GmmDenoiser::posterior_mean(const Image& z_t, int t, const Condition& cond) const {
  const GmmMixture& mix = mixture_for(cond);
  const double ab = sched_.alpha_bar_at(t);
  const double s2 = mix.sigma * mix.sigma;
  const double var = (1.0 - ab) + ab * s2;  // marginal per-dimension variance of z given k

  // Component responsibilities via log-sum-exp; the shared (2*pi*var)^(-d/2)
  // factor cancels.
  const std::size_t K = mix.means.size();
  std::vector<double> logits(K);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    const double sq = (z_t.data - std::sqrt(ab) * mix.means[k].data).matrix().squaredNorm();
    logits[k] = std::log(mix.weights[k]) - 0.5 * sq / var;
    max_logit = std::max(max_logit, logits[k]);
  }
  double denom = 0.0;
  for (std::size_t k = 0; k < K; ++k) denom += std::exp(logits[k] - max_logit);

  // E[x0 | z, k] = mu_k + (sqrt(ab) s^2 / var) (z - sqrt(ab) mu_k).
  const double shrink = std::sqrt(ab) * s2 / var;
  Image mean = Image::zeros(shape_.height, shape_.width, shape_.channels);
  for (std::size_t k = 0; k < K; ++k) {
    const double gamma = std::exp(logits[k] - max_logit) / denom;
    mean.data += gamma * (mix.means[k].data + shrink * (z_t.data - std::sqrt(ab) * mix.means[k].data));
  }
  return mean;
}

Image GmmDenoiser::predict(const Image& z_t, int t, const Condition& cond) const {
  check_inputs(*this, z_t, t);
  const double ab = sched_.alpha_bar_at(t);
  const Image mean = posterior_mean(z_t, t, cond);
  Image eps = z_t;
  eps.data = (z_t.data - std::sqrt(ab) * mean.data) / std::sqrt(1.0 - ab);
  return eps;
}

Image guided_epsilon(const Denoiser& denoiser, const Image& z_t, int t, const Image& image_cond,
                     const std::string& text, const GuidanceScales& scales) {
  if (!std::isfinite(scales.image) || !std::isfinite(scales.text) || scales.image < 0.0 || scales.text < 0.0)
    throw std::invalid_argument("guided_epsilon: scales must be finite and nonnegative");
  const Image eps_uncond = denoiser.predict(z_t, t, Condition::none());
  const Image eps_img = denoiser.predict(z_t, t, Condition::image_only(image_cond));
  const Image eps_img_text = denoiser.predict(z_t, t, Condition::full(image_cond, text));
  Image out = eps_uncond;
  out.data = eps_uncond.data + scales.image * (eps_img.data - eps_uncond.data) +
             scales.text * (eps_img_text.data - eps_img.data);
  return out;
}

}  // namespace ledit
