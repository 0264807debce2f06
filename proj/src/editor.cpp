// SPDX-License-Identifier: Apache-2.0
#include "ledit/editor.hpp"

#include <cmath>

#include "ledit/rng.hpp"

namespace ledit {

Image masked_combine(const Image& z_tilde, const Image& x0_lat, const Image& eps0, int t_prev,
                     const EditMask& mask, const NoiseSchedule& sched) {
  require_same_shape(z_tilde, x0_lat, "masked_combine");
  require_same_shape(z_tilde, eps0, "masked_combine");
  if (mask.space != MaskSpace::latent) throw std::invalid_argument("masked_combine: mask must be at latent resolution");
  const Image z_hat = add_noise(x0_lat, eps0, t_prev, sched);
  return select_by_mask(mask.grid, z_tilde, z_hat);
}

EditResult edit_image(const Denoiser& denoiser, const Codec& codec, const Image& input,
                      const EditTask& task, const std::optional<EditMask>& guidance_mask,
                      const std::optional<Image>& condition_image) {
  if (task.num_steps < 1) throw std::invalid_argument("edit_image: num_steps must be >= 1");
  if (condition_image) require_same_shape(input, *condition_image, "edit_image: condition image");
  codec.check_divisible(input.height, input.width);

  const NoiseSchedule& sched = denoiser.schedule();
  const Image x0_lat = encode(codec, input);
  const Image cond_lat = condition_image ? encode(codec, *condition_image) : x0_lat;

  EditResult result;
  if (guidance_mask) {
    if (guidance_mask->space != MaskSpace::latent ||
        guidance_mask->grid.height != x0_lat.height || guidance_mask->grid.width != x0_lat.width)
      throw std::invalid_argument("edit_image: guidance mask must be single-channel at latent resolution");
    result.mask = *guidance_mask;
    result.relevance = RelevanceMap{guidance_mask->grid};
  } else {
    result.relevance =
        compute_relevance(denoiser, codec, input, task.instruction, task.relevance, task.seed, condition_image);
    result.mask = threshold_mask(result.relevance, task.tau);
  }

  const TimestepPlan plan = make_plan(sched, task.num_steps, task.t_edit_fraction);

  Rng noise_rng(mix_seed(task.seed, 0xed17ULL));
  const Image eps0 = normal_grid(x0_lat.height, x0_lat.width, x0_lat.channels, noise_rng);
  Image z = add_noise(x0_lat, eps0, plan.steps.front(), sched);

  Image eps_replace = eps0;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const int t = plan.steps[k];
    const int t_prev = plan.step_after(k);
    const Image eps_hat = guided_epsilon(denoiser, z, t, cond_lat, task.instruction, task.scales);
    const Image z_tilde = ddim_step(z, eps_hat, t, t_prev, sched);
    if (task.resample_unedited_noise)
      eps_replace = normal_grid(x0_lat.height, x0_lat.width, x0_lat.channels, noise_rng);
    z = masked_combine(z_tilde, x0_lat, eps_replace, t_prev, result.mask, sched);
    result.trace.push_back(
        StepStats{t, z.data.mean(), std::sqrt(z.data.matrix().squaredNorm() / static_cast<double>(z.size()))});
  }

  const Image edited = decode(codec, z);
  const EditMask mask_px = mask_to_pixel(result.mask, codec);
  const Image& source = condition_image ? *condition_image : input;
  result.image = select_by_mask(mask_px.grid, edited, source);
  return result;
}

}  // namespace ledit
