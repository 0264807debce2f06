// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ledit/codec.hpp"
#include "ledit/denoise.hpp"
#include "ledit/relevance.hpp"
#include "ledit/schedule.hpp"

namespace ledit {

struct EditTask {
  std::string instruction;
  GuidanceScales scales;
  double tau = 0.5;
  double t_edit_fraction = 0.9;
  int num_steps = 100;
  std::uint64_t seed = 0;
  RelevanceParams relevance;          // used when no guidance mask is supplied
  bool resample_unedited_noise = false;  // redraw the replacement noise each step
};

struct StepStats {
  int t = 0;
  double mean = 0.0;
  double norm = 0.0;
};

struct EditResult {
  Image image;
  RelevanceMap relevance;
  EditMask mask;
  std::vector<StepStats> trace;
};

/// Deterministic DDIM update from t to t_prev (t_prev may be
/// kNoNoiseTimestep):
///   z~ = sqrt(ab_prev) * (z_t - sqrt(1-ab_t) eps) / sqrt(ab_t)
///      + sqrt(1-ab_prev) * eps.
template <typename Scalar>
GridT<Scalar> ddim_step(const GridT<Scalar>& z_t, const GridT<Scalar>& eps_hat, int t, int t_prev,
                        const NoiseSchedule& sched) {
  require_same_shape(z_t, eps_hat, "ddim_step");
  const double ab_t = sched.alpha_bar_at(t);
  const double ab_prev = sched.alpha_bar_at(t_prev);
  if (ab_t >= 1.0) throw std::invalid_argument("ddim_step: alpha_bar at t must be < 1");
  if (!(ab_prev > ab_t)) throw std::invalid_argument("ddim_step: t_prev must carry less noise than t");
  GridT<Scalar> out = z_t;
  out.data = std::sqrt(ab_prev) * (z_t.data - std::sqrt(1.0 - ab_t) * eps_hat.data) / std::sqrt(ab_t) +
             std::sqrt(1.0 - ab_prev) * eps_hat.data;
  return out;
}

/// Masked latent combination: keeps the DDIM prediction inside the mask and
/// substitutes the input renoised to t_prev outside it. The mask is broadcast
/// across channels; unmasked latents come out bit-identical to the renoised
/// input.
Image masked_combine(const Image& z_tilde, const Image& x0_lat, const Image& eps0, int t_prev,
                     const EditMask& mask, const NoiseSchedule& sched);

/// Relevance-guided image edit: compute (or accept) the edit mask, run the
/// masked DDIM loop from t_edit, decode, and composite unedited pixels back
/// from the source. `condition_image` fixes the image condition (and the
/// compositing source) to something other than the edited input, as scene
/// editing requires; it defaults to the input itself.
EditResult edit_image(const Denoiser& denoiser, const Codec& codec, const Image& input,
                      const EditTask& task, const std::optional<EditMask>& guidance_mask = std::nullopt,
                      const std::optional<Image>& condition_image = std::nullopt);

}  // namespace ledit
