// SPDX-License-Identifier: Apache-2.0
//
// ledit: localized diffusion editing of images and voxel scenes.
//
// Subcommands: relevance, edit-image, synth (make-scene | capture), fit,
// edit-scene, render, metrics. Every artifact-producing run writes an
// effective-config JSON next to its outputs so a rerun reproduces the bytes.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ledit/checkpoint.hpp"
#include "ledit/config.hpp"
#include "ledit/editor.hpp"
#include "ledit/image_io.hpp"
#include "ledit/metrics.hpp"
#include "ledit/scene_edit.hpp"
#include "ledit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ledit;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool deterministic = false;
  int threads = 2;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run-config JSON; flags override its values");
  cmd->add_option("--seed", args.seed, "Global seed")->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_flag("--deterministic", args.deterministic, "Single-threaded deterministic kernels");
  cmd->add_option("--threads", args.threads, "Render threads (ignored when --deterministic)");
}

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = parse_run_config(read_text_file(args.config_path));
  if (args.seed_set) cfg.seed = args.seed;
  if (args.deterministic) cfg.deterministic = true;
  return cfg;
}

int render_threads(const CommonArgs& args, const RunConfig& cfg) {
  return (cfg.deterministic || args.deterministic) ? 1 : std::max(1, args.threads);
}

/// Effective config next to the first output: full RunConfig plus the
/// subcommand's own parameters.
void persist_effective_config(const std::string& out_path, const RunConfig& cfg,
                              const std::string& subcommand, const json& params) {
  json j;
  j["subcommand"] = subcommand;
  j["parameters"] = params;
  j["config"] = json::parse(serialize_run_config(cfg));
  fs::path p(out_path);
  const fs::path target = fs::is_directory(p) ? p / "effective-config.json"
                                              : p.parent_path() / (p.stem().string() + ".effective-config.json");
  write_text_file(target.string(), j.dump(2) + "\n");
}

LatentShape latent_shape_for(const Image& image, const Codec& codec) {
  codec.check_divisible(image.height, image.width);
  return LatentShape{image.height / codec.factor, image.width / codec.factor, image.channels};
}

std::unique_ptr<Denoiser> load_denoiser(const std::string& spec_path, const NoiseSchedule& sched,
                                        const Codec& codec, const LatentShape& shape) {
  return parse_denoiser_spec(read_text_file(spec_path), sched, codec, shape,
                             fs::path(spec_path).parent_path().string());
}

int cmd_relevance(const CommonArgs& common, const std::string& input_path,
                  const std::string& denoiser_path, const std::string& instruction, double trel,
                  int samples, double tau, const std::string& out_rel, const std::string& out_mask) {
  RunConfig cfg = load_config(common);
  if (trel > 0) cfg.relevance.t_rel = trel;
  if (samples > 0) cfg.relevance.samples = samples;

  const Codec codec = cfg.make_codec();
  const NoiseSchedule sched = cfg.make_schedule();
  const Image input = read_png(input_path);
  const auto denoiser = load_denoiser(denoiser_path, sched, codec, latent_shape_for(input, codec));

  const RelevanceMap rel =
      compute_relevance(*denoiser, codec, input, instruction, cfg.relevance_params(), cfg.seed);
  const EditMask mask = threshold_mask(rel, tau);

  write_pfm(out_rel, rel.grid);
  write_mask_png(out_mask, mask);
  persist_effective_config(out_rel, cfg, "relevance",
                           json{{"input", input_path},
                                {"denoiser", denoiser_path},
                                {"instruction", instruction},
                                {"tau", tau},
                                {"out", out_rel},
                                {"mask", out_mask}});
  std::cout << "relevance: wrote " << out_rel << " and " << out_mask << " (mask area " << mask.area()
            << ")\n";
  return 0;
}

int cmd_edit_image(const CommonArgs& common, const std::string& input_path,
                   const std::string& denoiser_path, const std::string& instruction,
                   const std::string& condition_path, double tau, double si, double st, double tedit,
                   int steps, const std::string& out_path, const std::string& out_rel,
                   const std::string& out_mask) {
  RunConfig cfg = load_config(common);
  if (tau >= 0) cfg.editor.tau = tau;
  if (si >= 0) cfg.editor.s_image = si;
  if (st >= 0) cfg.editor.s_text = st;
  if (tedit > 0) cfg.editor.t_edit = tedit;
  if (steps > 0) cfg.editor.steps = steps;

  const Codec codec = cfg.make_codec();
  const NoiseSchedule sched = cfg.make_schedule();
  const Image input = read_png(input_path);
  const auto denoiser = load_denoiser(denoiser_path, sched, codec, latent_shape_for(input, codec));

  EditTask task;
  task.instruction = instruction;
  task.scales = GuidanceScales{cfg.editor.s_image, cfg.editor.s_text};
  task.tau = cfg.editor.tau;
  task.t_edit_fraction = cfg.editor.t_edit;
  task.num_steps = cfg.editor.steps;
  task.seed = cfg.seed;
  task.relevance = cfg.relevance_params();
  task.resample_unedited_noise = cfg.editor.resample_unedited_noise;

  std::optional<Image> condition;
  if (!condition_path.empty()) condition = read_png(condition_path);

  const EditResult result = edit_image(*denoiser, codec, input, task, std::nullopt, condition);
  write_png(out_path, result.image);
  if (!out_rel.empty()) write_pfm(out_rel, result.relevance.grid);
  if (!out_mask.empty()) write_mask_png(out_mask, result.mask);

  persist_effective_config(out_path, cfg, "edit-image",
                           json{{"input", input_path},
                                {"denoiser", denoiser_path},
                                {"instruction", instruction},
                                {"condition", condition_path},
                                {"out", out_path},
                                {"relevance", out_rel},
                                {"mask", out_mask}});
  std::cout << "edit-image: wrote " << out_path << " (mask area " << result.mask.area() << ")\n";
  return 0;
}

int cmd_synth_make_scene(const CommonArgs& common, const std::string& scene_path,
                         const std::string& out_prefix) {
  const RunConfig cfg = load_config(common);
  const SceneFile scene = parse_scene_file(read_text_file(scene_path));
  int overlaps = 0;
  const VoxelField field = build_scene(scene.spec, cfg.field.dims, &overlaps);
  if (overlaps > 0) std::cerr << "warning: " << overlaps << " voxels overwritten by overlapping primitives\n";
  save_field(out_prefix, field);
  persist_effective_config(out_prefix + ".json", cfg, "synth make-scene",
                           json{{"scene", scene_path}, {"out", out_prefix}});
  std::cout << "make-scene: wrote " << out_prefix << ".json/.f32\n";
  return 0;
}

int cmd_synth_capture(const CommonArgs& common, const std::string& scene_path,
                      const std::string& out_dir) {
  const RunConfig cfg = load_config(common);
  const SceneFile scene = parse_scene_file(read_text_file(scene_path));
  const VoxelField field = build_scene(scene.spec, cfg.field.dims);

  RenderOptions ropts;
  ropts.samples_per_ray = cfg.field.samples_per_ray;
  ropts.background = cfg.field.background;
  ropts.threads = render_threads(common, cfg);
  const auto views =
      capture(field, cfg.synth.views, cfg.orbit_params(), cfg.synth.width, cfg.synth.height, ropts);
  save_captures(out_dir, views);
  persist_effective_config(out_dir, cfg, "synth capture",
                           json{{"scene", scene_path}, {"out", out_dir}});
  std::cout << "capture: wrote " << views.size() << " views to " << out_dir << "\n";
  return 0;
}

int cmd_fit(const CommonArgs& common, const std::string& captures_dir, const std::string& out_prefix,
            int iters) {
  RunConfig cfg = load_config(common);
  if (iters > 0) cfg.field.prefit_iters = iters;
  const auto views = load_captures(captures_dir);

  VoxelField field = VoxelField::make(cfg.field.dims, cfg.field.bbox_min, cfg.field.bbox_max);
  FitOptions fopts = cfg.rgb_fit_options();
  fopts.iters = cfg.field.prefit_iters;
  const FitLog log = fit_field(field, views, fopts);
  save_field(out_prefix, field);
  persist_effective_config(out_prefix + ".json", cfg, "fit",
                           json{{"captures", captures_dir}, {"out", out_prefix}, {"iters", fopts.iters}});
  std::cout << "fit: " << fopts.iters << " iters, final loss "
            << (log.losses.empty() ? 0.0 : log.losses.back()) << ", wrote " << out_prefix << ".json\n";
  return 0;
}

int cmd_render(const CommonArgs& common, const std::string& ckpt_prefix,
               const std::string& cameras_path, const std::string& out_dir, const std::string& what) {
  const RunConfig cfg = load_config(common);
  const VoxelField field = load_field(ckpt_prefix);
  const auto cams = load_cameras(cameras_path);
  fs::create_directories(out_dir);

  RenderOptions ropts;
  ropts.samples_per_ray = cfg.field.samples_per_ray;
  ropts.background = cfg.field.background;
  ropts.threads = render_threads(common, cfg);

  for (std::size_t i = 0; i < cams.size(); ++i) {
    std::ostringstream name;
    name << what << "_" << std::setw(3) << std::setfill('0') << i;
    const fs::path base = fs::path(out_dir) / name.str();
    if (what == "color") {
      write_png(base.string() + ".png", render_color_image(field, cams[i], ropts));
    } else if (what == "relevance") {
      write_pfm(base.string() + ".pfm", render_relevance_image(field, cams[i], ropts));
    } else if (what == "alpha") {
      write_pfm(base.string() + ".pfm", render_alpha_image(field, cams[i], ropts));
    } else {
      throw std::invalid_argument("render: --what must be color, relevance or alpha");
    }
  }
  persist_effective_config(out_dir, cfg, "render",
                           json{{"ckpt", ckpt_prefix}, {"cameras", cameras_path}, {"what", what}});
  std::cout << "render: wrote " << cams.size() << " " << what << " images to " << out_dir << "\n";
  return 0;
}

void write_log_csv(const std::string& path, const std::vector<SceneEditLogRow>& log) {
  std::ostringstream csv;
  csv << "iter,view,loss_rgb,loss_rel,edit_psnr,mask_area\n";
  for (const auto& row : log) {
    csv << row.iter << "," << row.view << "," << row.loss_rgb << "," << row.loss_rel << ",";
    if (row.edit_psnr >= 0) csv << row.edit_psnr;
    csv << ",";
    if (row.mask_area >= 0) csv << row.mask_area;
    csv << "\n";
  }
  write_text_file(path, csv.str());
}

int cmd_edit_scene(const CommonArgs& common, const std::string& scene_path,
                   const std::string& instruction, const std::string& captures_dir,
                   const std::string& init_ckpt, const std::string& out_dir,
                   const std::string& log_path) {
  const RunConfig cfg = load_config(common);
  const SceneFile scene = parse_scene_file(read_text_file(scene_path));
  const int threads = render_threads(common, cfg);

  RenderOptions ropts;
  ropts.samples_per_ray = cfg.field.samples_per_ray;
  ropts.background = cfg.field.background;
  ropts.threads = threads;

  // Ground-truth scene, its captures, and the instruction's edited twin.
  const VoxelField gt = build_scene(scene.spec, cfg.field.dims);
  std::vector<PosedImage> captures;
  if (!captures_dir.empty()) {
    captures = load_captures(captures_dir);
  } else {
    captures = capture(gt, cfg.synth.views, cfg.orbit_params(), cfg.synth.width, cfg.synth.height, ropts);
  }

  const auto applied = apply_instruction(scene.spec, scene.registry.lookup(instruction), cfg.field.dims);
  const VoxelField gt_edited = build_scene(applied.edited, cfg.field.dims);
  std::vector<Image> edited_renders;
  edited_renders.reserve(captures.size());
  for (const auto& view : captures)
    edited_renders.push_back(render_color_image(gt_edited, view.cam, ropts));

  const NoiseSchedule sched = cfg.make_schedule();
  const Codec codec = cfg.make_codec();
  const auto denoiser = make_scene_denoiser(sched, codec, instruction, captures, edited_renders);

  // Pre-fit on the original captures (or resume from a checkpoint).
  VoxelField field = init_ckpt.empty()
                         ? VoxelField::make(cfg.field.dims, cfg.field.bbox_min, cfg.field.bbox_max)
                         : load_field(init_ckpt);
  if (init_ckpt.empty()) {
    FitOptions fopts = cfg.rgb_fit_options();
    fopts.iters = cfg.field.prefit_iters;
    fit_field(field, captures, fopts);
  }
  fs::create_directories(out_dir);
  save_field((fs::path(out_dir) / "prefit").string(), field);

  TrainingSet train = TrainingSet::from_captures(captures);
  const SceneEditConfig edit_cfg = cfg.scene_edit_config(threads);
  const SceneEditResult result = edit_scene(field, train, *denoiser, codec, instruction, edit_cfg, cfg.seed);

  save_field((fs::path(out_dir) / "edited").string(), field);
  std::vector<Camera> cams;
  for (const auto& v : captures) cams.push_back(v.cam);
  save_cameras((fs::path(out_dir) / "cameras.json").string(), cams);
  const fs::path renders = fs::path(out_dir) / "renders";
  fs::create_directories(renders);
  for (std::size_t i = 0; i < cams.size(); ++i) {
    std::ostringstream name;
    name << std::setw(3) << std::setfill('0') << i;
    write_png((renders / ("color_" + name.str() + ".png")).string(),
              render_color_image(field, cams[i], ropts));
    write_pfm((renders / ("relevance_" + name.str() + ".pfm")).string(),
              render_relevance_image(field, cams[i], ropts));
  }
  write_log_csv(log_path.empty() ? (fs::path(out_dir) / "metrics.csv").string() : log_path, result.log);
  persist_effective_config(out_dir, cfg, "edit-scene",
                           json{{"scene", scene_path},
                                {"instruction", instruction},
                                {"captures", captures_dir},
                                {"init_ckpt", init_ckpt},
                                {"out", out_dir},
                                {"log", log_path}});
  std::cout << "edit-scene: " << result.edits_performed << " edits over " << cfg.scene_edit.total_iters
            << " iters, outputs in " << out_dir << "\n";
  return 0;
}

std::vector<std::string> matched_files(const std::string& dir, const std::string& ext) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ext) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_metrics(const CommonArgs& common, const std::string& kind, const std::string& a_path,
                const std::string& b_path, const std::string& mask_path,
                const std::string& out_prefix) {
  const RunConfig cfg = load_config(common);
  MetricReport report;
  report.name = kind;

  if (kind == "psnr") {
    std::optional<EditMask> mask;
    if (!mask_path.empty()) mask = read_mask_png(mask_path, MaskSpace::pixel);
    if (fs::is_directory(a_path)) {
      const auto as = matched_files(a_path, ".png");
      const auto bs = matched_files(b_path, ".png");
      if (as.size() != bs.size()) throw std::invalid_argument("metrics: directories differ in size");
      for (std::size_t i = 0; i < as.size(); ++i) {
        report.item_names.push_back(fs::path(as[i]).filename().string());
        report.values.push_back(psnr(read_png(as[i]), read_png(bs[i]), mask));
      }
    } else {
      report.item_names.push_back(fs::path(a_path).filename().string());
      report.values.push_back(psnr(read_png(a_path), read_png(b_path), mask));
    }
    report.parameters = mask_path.empty() ? "full-frame" : ("mask=" + mask_path);
  } else if (kind == "iou") {
    report.item_names.push_back("iou");
    report.values.push_back(
        mask_iou(read_mask_png(a_path, MaskSpace::pixel), read_mask_png(b_path, MaskSpace::pixel)));
  } else if (kind == "embed") {
    // Declared pixel-space analog: cosine similarity of thumbnail embeddings.
    const EmbeddingFn embed = make_downsample_embedding(8);
    if (fs::is_directory(a_path)) {
      const auto as = matched_files(a_path, ".png");
      const auto bs = matched_files(b_path, ".png");
      if (as.size() != bs.size()) throw std::invalid_argument("metrics: directories differ in size");
      for (std::size_t i = 0; i < as.size(); ++i) {
        report.item_names.push_back(fs::path(as[i]).filename().string());
        report.values.push_back(embedding_similarity(read_png(as[i]), read_png(bs[i]), embed));
      }
    } else {
      report.item_names.push_back(fs::path(a_path).filename().string());
      report.values.push_back(embedding_similarity(read_png(a_path), read_png(b_path), embed));
    }
    report.parameters = "pixel-embedding (8x8 thumbnail cosine); no learned model";
  } else if (kind == "frames") {
    std::vector<Image> frames;
    for (const auto& f : matched_files(a_path, ".png")) frames.push_back(read_png(f));
    report.item_names.push_back("frame_consistency");
    report.values.push_back(frame_consistency(frames));
  } else {
    throw std::invalid_argument("metrics: --kind must be psnr, iou, embed or frames");
  }

  std::ostringstream csv;
  csv << "metric,item,value\n";
  for (std::size_t i = 0; i < report.values.size(); ++i)
    csv << report.name << "," << report.item_names[i] << "," << std::setprecision(10)
        << report.values[i] << "\n";
  write_text_file(out_prefix + ".csv", csv.str());

  json summary;
  summary["name"] = report.name;
  summary["parameters"] = report.parameters;
  summary["values"] = report.values;
  summary["mean"] = report.mean();
  write_text_file(out_prefix + ".json", summary.dump(2) + "\n");
  persist_effective_config(out_prefix + ".json", cfg, "metrics",
                           json{{"kind", kind}, {"a", a_path}, {"b", b_path}, {"mask", mask_path}});
  std::cout << "metrics: " << report.name << " mean " << report.mean() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ledit: relevance-guided localized diffusion editing of images and voxel scenes"};
  app.require_subcommand(1);

  CommonArgs common;

  // relevance
  auto* rel = app.add_subcommand("relevance", "Compute a relevance map and edit mask for an image");
  std::string rel_input, rel_denoiser, rel_instruction, rel_out = "rel.pfm", rel_mask = "mask.png";
  double rel_trel = -1, rel_tau = 0.5;
  int rel_samples = -1;
  rel->add_option("--input", rel_input, "Input PNG")->required();
  rel->add_option("--denoiser", rel_denoiser, "Denoiser spec JSON")->required();
  rel->add_option("--instruction", rel_instruction, "Edit instruction")->required();
  rel->add_option("--trel", rel_trel, "Relevance noise fraction (default 0.8)");
  rel->add_option("--samples", rel_samples, "Noise draws to average");
  rel->add_option("--tau", rel_tau, "Mask threshold");
  rel->add_option("--out", rel_out, "Output relevance PFM");
  rel->add_option("--mask", rel_mask, "Output mask PNG");
  add_common(rel, common);

  // edit-image
  auto* ed = app.add_subcommand("edit-image", "Relevance-guided image edit");
  std::string ed_input, ed_denoiser, ed_instruction, ed_condition, ed_out = "out.png", ed_rel, ed_mask;
  double ed_tau = -1, ed_si = -1, ed_st = -1, ed_tedit = -1;
  int ed_steps = -1;
  ed->add_option("--input", ed_input, "Input PNG")->required();
  ed->add_option("--denoiser", ed_denoiser, "Denoiser spec JSON")->required();
  ed->add_option("--instruction", ed_instruction, "Edit instruction")->required();
  ed->add_option("--condition", ed_condition, "Conditioning image (defaults to the input)");
  ed->add_option("--tau", ed_tau, "Mask threshold");
  ed->add_option("--si", ed_si, "Image guidance scale");
  ed->add_option("--st", ed_st, "Text guidance scale");
  ed->add_option("--tedit", ed_tedit, "Edit noise fraction");
  ed->add_option("--steps", ed_steps, "Denoising steps");
  ed->add_option("--out", ed_out, "Output PNG")->required();
  ed->add_option("--relevance", ed_rel, "Also write the relevance PFM");
  ed->add_option("--mask", ed_mask, "Also write the mask PNG");
  add_common(ed, common);

  // synth
  auto* synth = app.add_subcommand("synth", "Synthetic scenes and captures");
  synth->require_subcommand(1);
  auto* mk = synth->add_subcommand("make-scene", "Rasterize a scene JSON into a field checkpoint");
  std::string mk_scene, mk_out = "scene_ckpt";
  mk->add_option("--scene", mk_scene, "Scene JSON")->required();
  mk->add_option("--out", mk_out, "Checkpoint prefix");
  add_common(mk, common);
  auto* cap = synth->add_subcommand("capture", "Render an orbit of posed views");
  std::string cap_scene, cap_out = "captures";
  cap->add_option("--scene", cap_scene, "Scene JSON")->required();
  cap->add_option("--out", cap_out, "Output directory");
  add_common(cap, common);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a voxel field to posed captures");
  std::string fit_captures, fit_out = "field_ckpt";
  int fit_iters = -1;
  fit->add_option("--captures", fit_captures, "Captures directory")->required();
  fit->add_option("--out", fit_out, "Checkpoint prefix");
  fit->add_option("--iters", fit_iters, "Fit iterations");
  add_common(fit, common);

  // edit-scene
  auto* es = app.add_subcommand("edit-scene", "Relevance-guided scene editing by dataset updates");
  std::string es_scene, es_instruction, es_captures, es_init, es_out = "scene_edit_out", es_log;
  es->add_option("--scene", es_scene, "Scene JSON (with instruction registry)")->required();
  es->add_option("--instruction", es_instruction, "Edit instruction")->required();
  es->add_option("--captures", es_captures, "Existing captures directory (else synthesized)");
  es->add_option("--init-ckpt", es_init, "Pre-fitted field checkpoint prefix (else fits now)");
  es->add_option("--out", es_out, "Output directory");
  es->add_option("--log", es_log, "Metrics CSV path (default <out>/metrics.csv)");
  add_common(es, common);

  // render
  auto* rn = app.add_subcommand("render", "Render a field checkpoint from saved cameras");
  std::string rn_ckpt, rn_cams, rn_out = "renders", rn_what = "color";
  rn->add_option("--ckpt", rn_ckpt, "Checkpoint prefix")->required();
  rn->add_option("--cameras", rn_cams, "Cameras JSON")->required();
  rn->add_option("--out", rn_out, "Output directory");
  rn->add_option("--what", rn_what, "color | relevance | alpha");
  add_common(rn, common);

  // metrics
  auto* mt = app.add_subcommand("metrics", "Pixel-space evaluation reports (CSV + JSON)");
  std::string mt_kind = "psnr", mt_a, mt_b, mt_mask, mt_out = "report";
  mt->add_option("--kind", mt_kind, "psnr | iou | embed | frames");
  mt->add_option("--a", mt_a, "First image/mask/dir")->required();
  mt->add_option("--b", mt_b, "Second image/mask/dir");
  mt->add_option("--mask", mt_mask, "Restriction mask PNG (psnr)");
  mt->add_option("--out", mt_out, "Report prefix (.csv/.json)");
  add_common(mt, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (rel->parsed())
      return cmd_relevance(common, rel_input, rel_denoiser, rel_instruction, rel_trel, rel_samples,
                           rel_tau, rel_out, rel_mask);
    if (ed->parsed())
      return cmd_edit_image(common, ed_input, ed_denoiser, ed_instruction, ed_condition, ed_tau, ed_si,
                            ed_st, ed_tedit, ed_steps, ed_out, ed_rel, ed_mask);
    if (synth->parsed()) {
      if (mk->parsed()) return cmd_synth_make_scene(common, mk_scene, mk_out);
      if (cap->parsed()) return cmd_synth_capture(common, cap_scene, cap_out);
    }
    if (fit->parsed()) return cmd_fit(common, fit_captures, fit_out, fit_iters);
    if (es->parsed())
      return cmd_edit_scene(common, es_scene, es_instruction, es_captures, es_init, es_out, es_log);
    if (rn->parsed()) return cmd_render(common, rn_ckpt, rn_cams, rn_out, rn_what);
    if (mt->parsed()) return cmd_metrics(common, mt_kind, mt_a, mt_b, mt_mask, mt_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
