// SPDX-License-Identifier: Apache-2.0
#include "ledit/scene_edit.hpp"

#include <cmath>

#include "ledit/metrics.hpp"
#include "ledit/relevance.hpp"
#include "ledit/rng.hpp"

namespace ledit {

TrainingSet TrainingSet::from_captures(const std::vector<PosedImage>& captures) {
  TrainingSet set;
  set.views.reserve(captures.size());
  for (const auto& c : captures) set.views.push_back(TrainingView{c.cam, c.image, c.image, std::nullopt});
  return set;
}

std::size_t TrainingSet::supervised_views() const {
  std::size_t n = 0;
  for (const auto& v : views) n += v.cached_relevance ? 1 : 0;
  return n;
}

SceneEditResult edit_scene(VoxelField& field, TrainingSet& train, const Denoiser& denoiser,
                           const Codec& codec, const std::string& instruction,
                           const SceneEditConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (!field.geometry_ready || field.fit_steps == 0)
    throw std::invalid_argument("edit_scene: field must be pre-fitted to the original captures");
  if (train.views.empty()) throw std::invalid_argument("edit_scene: empty training set");
  for (const auto& view : train.views) codec.check_divisible(view.original.height, view.original.width);

  FieldOptimizer optim(field, cfg.rgb_fit, cfg.rel_fit);
  Rng pick_rng(mix_seed(seed, 1));
  Rng tedit_rng(mix_seed(seed, 2));
  Rng fit_rng(mix_seed(seed, 3));

  SceneEditResult result;
  std::vector<PosedImage> rgb_views(train.views.size());
  std::vector<PosedImage> rel_views;  // views with cached supervision
  for (std::size_t i = 0; i < train.views.size(); ++i)
    rgb_views[i] = PosedImage{train.views[i].cam, train.views[i].current};

  bool warmed_up = false;
  for (int iter = 0; iter < cfg.total_iters; ++iter) {
    SceneEditLogRow row;
    row.iter = iter;
    row.edit_psnr = -1.0;

    if (iter % cfg.n_edit == 0) {
      const int vi = static_cast<int>(pick_rng.uniform_int(train.views.size()));
      TrainingView& view = train.views[vi];
      row.view = vi;

      // Render the current state of the scene from this view.
      const Image rendered = render_color_image(field, view.cam, cfg.render);
      const Camera lat_cam = view.cam.scaled_down(codec.factor);

      const bool first_visit = !view.cached_relevance.has_value();
      std::optional<RelevanceMap> fresh_map;
      if (first_visit || cfg.relevance_refresh == RelevanceRefresh::every_edit) {
        // 2D relevance of the render, conditioned on the original capture;
        // cached at pixel resolution as relevance-field supervision.
        fresh_map = compute_relevance(denoiser, codec, rendered, instruction, cfg.relevance,
                                      mix_seed(seed, 100 + iter), view.original);
        view.cached_relevance = relevance_to_pixel(*fresh_map, codec).grid;
        // Rebuild the supervision list (replaces on refresh).
        rel_views.clear();
        for (auto& tv : train.views)
          if (tv.cached_relevance) rel_views.push_back(PosedImage{tv.cam, *tv.cached_relevance});

        if (!warmed_up) {
          for (int w = 0; w < cfg.relevance_warmup; ++w) optim.relevance_step(rel_views, fit_rng);
          warmed_up = true;
        }
      }

      // Guidance mask: rendered relevance field at latent resolution, except
      // on a view's first edit where the fresh 2D map bridges the cold start.
      EditMask guidance;
      if (first_visit) {
        guidance = threshold_mask(*fresh_map, cfg.tau);
      } else {
        const Image rhat = render_relevance_image(field, lat_cam, cfg.render);
        guidance = threshold_mask(RelevanceMap{rhat}, cfg.tau);
      }

      EditTask task;
      task.instruction = instruction;
      task.scales = cfg.scales;
      task.tau = cfg.tau;
      task.t_edit_fraction = tedit_rng.uniform(cfg.t_edit_lo, cfg.t_edit_hi);
      task.num_steps = cfg.steps_per_edit;
      task.seed = mix_seed(seed, 1000 + static_cast<std::uint64_t>(iter));
      task.relevance = cfg.relevance;

      const EditResult edit = edit_image(denoiser, codec, rendered, task, guidance, view.original);
      view.current = edit.image;
      rgb_views[vi].image = view.current;
      ++result.edits_performed;

      row.edit_psnr = psnr(view.current, view.original);
      row.mask_area = static_cast<double>(edit.mask.area()) / static_cast<double>(edit.mask.grid.pixels());
    }

    row.loss_rgb = optim.rgb_step(rgb_views, fit_rng);
    row.loss_rel = rel_views.empty() ? 0.0 : optim.relevance_step(rel_views, fit_rng);
    result.log.push_back(row);
  }
  return result;
}

EditPsnrReport edit_psnr(const VoxelField& edited_field, const VoxelField& original_field,
                         const std::vector<Camera>& cams, const RenderOptions& opts,
                         const std::vector<EditMask>* masks) {
  if (masks && masks->size() != cams.size())
    throw std::invalid_argument("edit_psnr: one mask per camera required");
  EditPsnrReport report;
  report.per_view.reserve(cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const Image a = render_color_image(edited_field, cams[i], opts);
    const Image b = render_color_image(original_field, cams[i], opts);
    const std::optional<EditMask> mask =
        masks ? std::optional<EditMask>((*masks)[i]) : std::nullopt;
    report.per_view.push_back(psnr(a, b, mask));
  }
  for (double v : report.per_view) report.mean += v;
  if (!report.per_view.empty()) report.mean /= static_cast<double>(report.per_view.size());
  return report;
}

}  // namespace ledit
