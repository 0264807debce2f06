// SPDX-License-Identifier: Apache-2.0
#include "ledit/scene_edit.hpp"

#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ledit/metrics.hpp"
#include "ledit/synth.hpp"

using namespace ledit;

namespace {

struct ToyScene {
  SceneSpec spec;
  VoxelField gt;
  std::vector<PosedImage> captures;
  VoxelField fitted;
  NoiseSchedule sched = make_schedule(ScheduleKind::linear_beta, 500);
  Codec codec = Codec::identity();
  OrbitParams orbit;
  RenderOptions ropts;
};

ToyScene make_toy_scene(int n_views = 4, int res = 32, int prefit_iters = 500) {
  ToyScene toy;
  Primitive sphere;
  sphere.id = "ball";
  sphere.center = Eigen::Vector3d(-0.3, 0.15, 0.0);
  sphere.size = Eigen::Vector3d::Constant(0.4);
  sphere.color = Eigen::Vector3d(0.3, 0.6, 0.8);
  Primitive box;
  box.shape = PrimitiveShape::box;
  box.id = "crate";
  box.center = Eigen::Vector3d(0.45, -0.25, 0.0);
  box.size = Eigen::Vector3d::Constant(0.28);
  box.color = Eigen::Vector3d(0.75, 0.7, 0.25);
  toy.spec.primitives = {sphere, box};

  toy.orbit.radius = 3.0;
  toy.orbit.near = 1.2;
  toy.orbit.far = 5.2;
  toy.ropts.samples_per_ray = 24;

  const Eigen::Vector3i dims(14, 14, 14);
  toy.gt = build_scene(toy.spec, dims);
  toy.captures = capture(toy.gt, n_views, toy.orbit, res, res, toy.ropts);

  toy.fitted = VoxelField::make(dims, toy.gt.bbox_min, toy.gt.bbox_max);
  FitOptions fopts;
  fopts.iters = prefit_iters;
  fopts.batch_rays = 384;
  fopts.samples_per_ray = 24;
  fopts.lr = 2.5e-2;
  fopts.seed = 3;
  fit_field(toy.fitted, toy.captures, fopts);
  return toy;
}

const ToyScene& shared_toy() {
  static const ToyScene toy = make_toy_scene();
  return toy;
}

SceneEditConfig toy_config(int total_iters) {
  SceneEditConfig cfg;
  cfg.total_iters = total_iters;
  cfg.n_edit = 10;
  cfg.steps_per_edit = 8;
  cfg.tau = 0.5;
  cfg.scales = GuidanceScales{1.0, 1.0};
  cfg.relevance_warmup = 60;
  cfg.rgb_fit.batch_rays = 256;
  cfg.rgb_fit.samples_per_ray = 24;
  cfg.rgb_fit.lr = 1e-2;
  cfg.rel_fit.batch_rays = 256;
  cfg.rel_fit.samples_per_ray = 24;
  cfg.rel_fit.lr = 1e-1;
  cfg.render.samples_per_ray = 24;
  return cfg;
}

}  // namespace

TEST_CASE("no-op instruction leaves the scene intact") {
  const ToyScene& toy = shared_toy();
  const VoxelField pre_edit = toy.fitted;
  VoxelField field = toy.fitted;

  // Oracle whose fully conditioned target is the conditioning image itself:
  // relevance is identically zero, so no pixel is allowed to change.
  ProceduralDenoiser noop(toy.sched, LatentShape{32, 32, 3},
                          [](const Image& cond, const std::string&) { return cond; });

  TrainingSet train = TrainingSet::from_captures(toy.captures);
  const SceneEditConfig cfg = toy_config(200);
  edit_scene(field, train, noop, toy.codec, "do nothing", cfg, 17);

  // Views were never replaced with anything new.
  for (std::size_t i = 0; i < train.views.size(); ++i)
    CHECK((train.views[i].current.data - train.views[i].original.data).abs().maxCoeff() == 0.0);

  // Continued fitting on unchanged data keeps renders where they were.
  std::vector<Camera> cams;
  for (const auto& v : toy.captures) cams.push_back(v.cam);
  const EditPsnrReport report = edit_psnr(field, pre_edit, cams, toy.ropts);
  CHECK(report.mean >= 40.0);
}

TEST_CASE("scene editing bookkeeping") {
  const ToyScene& toy = shared_toy();

  const std::string instruction = "recolor ball red";
  InstructionRule rule;
  rule.pattern = instruction;
  rule.effect = EditEffect::recolor;
  rule.target_id = "ball";
  rule.color = Eigen::Vector3d(0.85, 0.15, 0.1);
  const auto applied = apply_instruction(toy.spec, rule, toy.gt.dims);
  const VoxelField gt_edited = build_scene(applied.edited, toy.gt.dims);

  std::vector<Image> edited_renders;
  for (const auto& view : toy.captures)
    edited_renders.push_back(render_color_image(gt_edited, view.cam, toy.ropts));
  const auto denoiser =
      make_scene_denoiser(toy.sched, toy.codec, instruction, toy.captures, edited_renders);

  SUBCASE("preconditions") {
    TrainingSet train = TrainingSet::from_captures(toy.captures);
    VoxelField unfitted = VoxelField::make(toy.gt.dims, toy.gt.bbox_min, toy.gt.bbox_max);
    CHECK_THROWS_AS(edit_scene(unfitted, train, *denoiser, toy.codec, instruction, toy_config(50), 1),
                    std::invalid_argument);
  }

  SUBCASE("originals immutable, supervision counts views, edits logged") {
    TrainingSet train = TrainingSet::from_captures(toy.captures);
    std::vector<std::uint64_t> original_hashes;
    for (const auto& v : train.views) original_hashes.push_back(testing::hash_array(v.original.data));

    VoxelField field = toy.fitted;
    const SceneEditConfig cfg = toy_config(120);
    const SceneEditResult result = edit_scene(field, train, *denoiser, toy.codec, instruction, cfg, 29);

    for (std::size_t i = 0; i < train.views.size(); ++i)
      CHECK(testing::hash_array(train.views[i].original.data) == original_hashes[i]);

    std::set<int> visited;
    for (const auto& row : result.log)
      if (row.view >= 0) visited.insert(row.view);
    CHECK(train.supervised_views() == visited.size());
    CHECK(result.edits_performed == 12);
  }

  SUBCASE("refreshing relevance on every edit keeps one map per view") {
    TrainingSet train = TrainingSet::from_captures(toy.captures);
    VoxelField field = toy.fitted;
    SceneEditConfig cfg = toy_config(100);
    cfg.relevance_refresh = RelevanceRefresh::every_edit;
    const SceneEditResult result = edit_scene(field, train, *denoiser, toy.codec, instruction, cfg, 5);
    std::set<int> visited;
    for (const auto& row : result.log)
      if (row.view >= 0) visited.insert(row.view);
    CHECK(train.supervised_views() == visited.size());
  }

  SUBCASE("avgpool codec drives masks at latent resolution") {
    TrainingSet train = TrainingSet::from_captures(toy.captures);
    VoxelField field = toy.fitted;
    const SceneEditConfig cfg = toy_config(40);
    const Codec codec = Codec::avgpool(2);
    ProceduralDenoiser half_noop(toy.sched, LatentShape{16, 16, 3},
                                 [](const Image& cond, const std::string&) { return cond; });
    const SceneEditResult result = edit_scene(field, train, half_noop, codec, "hold still", cfg, 5);
    CHECK(result.edits_performed == 4);
    for (const auto& v : train.views)
      if (v.cached_relevance) CHECK(v.cached_relevance->height == 32);  // pixel resolution
  }

  SUBCASE("deterministic for a fixed seed") {
    TrainingSet train_a = TrainingSet::from_captures(toy.captures);
    TrainingSet train_b = TrainingSet::from_captures(toy.captures);
    VoxelField field_a = toy.fitted;
    VoxelField field_b = toy.fitted;
    const SceneEditConfig cfg = toy_config(60);
    const SceneEditResult ra = edit_scene(field_a, train_a, *denoiser, toy.codec, instruction, cfg, 7);
    const SceneEditResult rb = edit_scene(field_b, train_b, *denoiser, toy.codec, instruction, cfg, 7);

    REQUIRE(ra.log.size() == rb.log.size());
    for (std::size_t i = 0; i < ra.log.size(); ++i) {
      CHECK(ra.log[i].view == rb.log[i].view);
      CHECK(ra.log[i].loss_rgb == rb.log[i].loss_rgb);
      CHECK(ra.log[i].loss_rel == rb.log[i].loss_rel);
    }
    CHECK(testing::hash_array(field_a.density_raw) == testing::hash_array(field_b.density_raw));
    CHECK(testing::hash_array(field_a.color_raw) == testing::hash_array(field_b.color_raw));
    CHECK(testing::hash_array(field_a.relevance_raw) == testing::hash_array(field_b.relevance_raw));
    for (std::size_t i = 0; i < train_a.views.size(); ++i)
      CHECK((train_a.views[i].current.data - train_b.views[i].current.data).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("edit PSNR closed forms") {
  ToyScene toy = make_toy_scene(2, 24, 60);
  std::vector<Camera> cams;
  for (const auto& v : toy.captures) cams.push_back(v.cam);

  SUBCASE("identical fields cap out") {
    const EditPsnrReport report = edit_psnr(toy.gt, toy.gt, cams, toy.ropts);
    CHECK(report.mean == kPsnrCap);
  }
  SUBCASE("mask count must match cameras") {
    std::vector<EditMask> masks(1);
    CHECK_THROWS_AS(edit_psnr(toy.gt, toy.gt, cams, toy.ropts, &masks), std::invalid_argument);
  }
}
