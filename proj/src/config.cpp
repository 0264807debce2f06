// SPDX-License-Identifier: Apache-2.0
#include "ledit/config.hpp"

#include <filesystem>
#include <set>

#include "json.hpp"
#include "ledit/image_io.hpp"

namespace ledit {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

Eigen::Vector3d vec3_from(const json& j, const std::string& where) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw std::invalid_argument("config: " + where + " must have 3 entries");
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

json vec3_to(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

NoiseSchedule RunConfig::make_schedule() const {
  ScheduleKind kind;
  if (schedule.kind == "linear_beta") kind = ScheduleKind::linear_beta;
  else if (schedule.kind == "cosine") kind = ScheduleKind::cosine;
  else throw std::invalid_argument("config: schedule.kind must be linear_beta or cosine");
  return ledit::make_schedule(kind, schedule.T);
}

Codec RunConfig::make_codec() const {
  if (codec.kind == "identity") {
    if (codec.factor > 1) throw std::invalid_argument("config: identity codec requires factor 1");
    return Codec::identity();
  }
  if (codec.kind == "avgpool") return Codec::avgpool(codec.factor == 0 ? 2 : codec.factor);
  throw std::invalid_argument("config: codec.kind must be identity or avgpool");
}

RelevanceParams RunConfig::relevance_params() const {
  return RelevanceParams{relevance.t_rel, relevance.samples};
}

FitOptions RunConfig::rgb_fit_options() const {
  FitOptions opt;
  opt.lr = field.lr_rgb;
  opt.batch_rays = field.batch_rays;
  opt.samples_per_ray = field.samples_per_ray;
  opt.background = field.background;
  opt.seed = seed;
  return opt;
}

FitOptions RunConfig::relevance_fit_options() const {
  FitOptions opt = rgb_fit_options();
  opt.lr = field.lr_relevance;
  return opt;
}

OrbitParams RunConfig::orbit_params() const {
  OrbitParams p;
  p.radius = synth.orbit_radius;
  p.elevation_rad = synth.orbit_elevation;
  p.fov_rad = synth.fov;
  p.phase_rad = synth.phase;
  p.near = synth.near;
  p.far = synth.far;
  p.target = 0.5 * (field.bbox_min + field.bbox_max);
  return p;
}

SceneEditConfig RunConfig::scene_edit_config(int render_threads) const {
  SceneEditConfig cfg;
  cfg.n_edit = scene_edit.n_edit;
  cfg.t_edit_lo = scene_edit.t_edit_lo;
  cfg.t_edit_hi = scene_edit.t_edit_hi;
  cfg.steps_per_edit = scene_edit.steps_per_edit;
  cfg.tau = scene_edit.tau;
  cfg.scales = GuidanceScales{scene_edit.s_image, scene_edit.s_text};
  cfg.total_iters = scene_edit.total_iters;
  if (scene_edit.relevance_refresh == "once") cfg.relevance_refresh = RelevanceRefresh::once;
  else if (scene_edit.relevance_refresh == "every_edit") cfg.relevance_refresh = RelevanceRefresh::every_edit;
  else throw std::invalid_argument("config: scene_edit.relevance_refresh must be once or every_edit");
  cfg.relevance_warmup = scene_edit.relevance_warmup;
  cfg.relevance = relevance_params();
  cfg.rgb_fit = rgb_fit_options();
  cfg.rel_fit = relevance_fit_options();
  cfg.render.samples_per_ray = field.samples_per_ray;
  cfg.render.background = field.background;
  cfg.render.threads = render_threads;
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  reject_unknown_keys(j, {"seed", "deterministic", "schedule", "codec", "relevance", "editor",
                          "field", "synth", "scene_edit"},
                      "config");
  RunConfig cfg;
  maybe(j, "seed", cfg.seed);
  maybe(j, "deterministic", cfg.deterministic);

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    reject_unknown_keys(s, {"kind", "T"}, "schedule");
    maybe(s, "kind", cfg.schedule.kind);
    maybe(s, "T", cfg.schedule.T);
  }
  if (j.contains("codec")) {
    const json& s = j.at("codec");
    reject_unknown_keys(s, {"kind", "factor"}, "codec");
    maybe(s, "kind", cfg.codec.kind);
    maybe(s, "factor", cfg.codec.factor);
  }
  if (j.contains("relevance")) {
    const json& s = j.at("relevance");
    reject_unknown_keys(s, {"t_rel", "samples"}, "relevance");
    maybe(s, "t_rel", cfg.relevance.t_rel);
    maybe(s, "samples", cfg.relevance.samples);
  }
  if (j.contains("editor")) {
    const json& s = j.at("editor");
    reject_unknown_keys(s, {"tau", "s_image", "s_text", "t_edit", "steps", "resample_unedited_noise"},
                        "editor");
    maybe(s, "tau", cfg.editor.tau);
    maybe(s, "s_image", cfg.editor.s_image);
    maybe(s, "s_text", cfg.editor.s_text);
    maybe(s, "t_edit", cfg.editor.t_edit);
    maybe(s, "steps", cfg.editor.steps);
    maybe(s, "resample_unedited_noise", cfg.editor.resample_unedited_noise);
  }
  if (j.contains("field")) {
    const json& s = j.at("field");
    reject_unknown_keys(s, {"dims", "bbox", "samples_per_ray", "lr_rgb", "lr_relevance",
                            "batch_rays", "prefit_iters", "background"},
                        "field");
    if (s.contains("dims")) {
      const auto d = s.at("dims").get<std::vector<int>>();
      if (d.size() != 3) throw std::invalid_argument("config: field.dims must have 3 entries");
      cfg.field.dims = Eigen::Vector3i(d[0], d[1], d[2]);
    }
    if (s.contains("bbox")) {
      const json& b = s.at("bbox");
      reject_unknown_keys(b, {"min", "max"}, "field.bbox");
      if (b.contains("min")) cfg.field.bbox_min = vec3_from(b.at("min"), "field.bbox.min");
      if (b.contains("max")) cfg.field.bbox_max = vec3_from(b.at("max"), "field.bbox.max");
    }
    maybe(s, "samples_per_ray", cfg.field.samples_per_ray);
    maybe(s, "lr_rgb", cfg.field.lr_rgb);
    maybe(s, "lr_relevance", cfg.field.lr_relevance);
    maybe(s, "batch_rays", cfg.field.batch_rays);
    maybe(s, "prefit_iters", cfg.field.prefit_iters);
    if (s.contains("background")) cfg.field.background = vec3_from(s.at("background"), "field.background");
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    reject_unknown_keys(s, {"views", "width", "height", "orbit_radius", "orbit_elevation", "fov",
                            "phase", "near", "far"},
                        "synth");
    maybe(s, "views", cfg.synth.views);
    maybe(s, "width", cfg.synth.width);
    maybe(s, "height", cfg.synth.height);
    maybe(s, "orbit_radius", cfg.synth.orbit_radius);
    maybe(s, "orbit_elevation", cfg.synth.orbit_elevation);
    maybe(s, "fov", cfg.synth.fov);
    maybe(s, "phase", cfg.synth.phase);
    maybe(s, "near", cfg.synth.near);
    maybe(s, "far", cfg.synth.far);
  }
  if (j.contains("scene_edit")) {
    const json& s = j.at("scene_edit");
    reject_unknown_keys(s, {"n_edit", "t_edit_lo", "t_edit_hi", "steps_per_edit", "tau", "s_image",
                            "s_text", "total_iters", "relevance_refresh", "relevance_warmup",
                            "iters_note"},
                        "scene_edit");
    maybe(s, "n_edit", cfg.scene_edit.n_edit);
    maybe(s, "t_edit_lo", cfg.scene_edit.t_edit_lo);
    maybe(s, "t_edit_hi", cfg.scene_edit.t_edit_hi);
    maybe(s, "steps_per_edit", cfg.scene_edit.steps_per_edit);
    maybe(s, "tau", cfg.scene_edit.tau);
    maybe(s, "s_image", cfg.scene_edit.s_image);
    maybe(s, "s_text", cfg.scene_edit.s_text);
    maybe(s, "total_iters", cfg.scene_edit.total_iters);
    maybe(s, "relevance_refresh", cfg.scene_edit.relevance_refresh);
    maybe(s, "relevance_warmup", cfg.scene_edit.relevance_warmup);
    maybe(s, "iters_note", cfg.scene_edit.iters_note);
  }
  return cfg;
}

std::string serialize_run_config(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["deterministic"] = cfg.deterministic;
  j["schedule"] = {{"kind", cfg.schedule.kind}, {"T", cfg.schedule.T}};
  j["codec"] = {{"kind", cfg.codec.kind}, {"factor", cfg.make_codec().factor}};
  j["relevance"] = {{"t_rel", cfg.relevance.t_rel}, {"samples", cfg.relevance.samples}};
  j["editor"] = {{"tau", cfg.editor.tau},
                 {"s_image", cfg.editor.s_image},
                 {"s_text", cfg.editor.s_text},
                 {"t_edit", cfg.editor.t_edit},
                 {"steps", cfg.editor.steps},
                 {"resample_unedited_noise", cfg.editor.resample_unedited_noise}};
  j["field"] = {{"dims", {cfg.field.dims.x(), cfg.field.dims.y(), cfg.field.dims.z()}},
                {"bbox", {{"min", vec3_to(cfg.field.bbox_min)}, {"max", vec3_to(cfg.field.bbox_max)}}},
                {"samples_per_ray", cfg.field.samples_per_ray},
                {"lr_rgb", cfg.field.lr_rgb},
                {"lr_relevance", cfg.field.lr_relevance},
                {"batch_rays", cfg.field.batch_rays},
                {"prefit_iters", cfg.field.prefit_iters},
                {"background", vec3_to(cfg.field.background)}};
  j["synth"] = {{"views", cfg.synth.views},       {"width", cfg.synth.width},
                {"height", cfg.synth.height},     {"orbit_radius", cfg.synth.orbit_radius},
                {"orbit_elevation", cfg.synth.orbit_elevation}, {"fov", cfg.synth.fov},
                {"phase", cfg.synth.phase},       {"near", cfg.synth.near},
                {"far", cfg.synth.far}};
  j["scene_edit"] = {{"n_edit", cfg.scene_edit.n_edit},
                     {"t_edit_lo", cfg.scene_edit.t_edit_lo},
                     {"t_edit_hi", cfg.scene_edit.t_edit_hi},
                     {"steps_per_edit", cfg.scene_edit.steps_per_edit},
                     {"tau", cfg.scene_edit.tau},
                     {"s_image", cfg.scene_edit.s_image},
                     {"s_text", cfg.scene_edit.s_text},
                     {"total_iters", cfg.scene_edit.total_iters},
                     {"relevance_refresh", cfg.scene_edit.relevance_refresh},
                     {"relevance_warmup", cfg.scene_edit.relevance_warmup},
                     {"iters_note", cfg.scene_edit.iters_note}};
  return j.dump(2) + "\n";
}

namespace {

Primitive primitive_from_json(const json& j) {
  reject_unknown_keys(j, {"shape", "id", "center", "size", "color", "checker", "color_b", "checker_period"},
                      "primitive");
  Primitive p;
  const std::string shape = j.at("shape").get<std::string>();
  if (shape == "sphere") p.shape = PrimitiveShape::sphere;
  else if (shape == "box") p.shape = PrimitiveShape::box;
  else throw std::invalid_argument("scene: primitive shape must be sphere or box");
  p.id = j.at("id").get<std::string>();
  p.center = vec3_from(j.at("center"), "primitive.center");
  if (j.at("size").is_number()) p.size = Eigen::Vector3d::Constant(j.at("size").get<double>());
  else p.size = vec3_from(j.at("size"), "primitive.size");
  p.color = vec3_from(j.at("color"), "primitive.color");
  maybe(j, "checker", p.checker);
  if (j.contains("color_b")) p.color_b = vec3_from(j.at("color_b"), "primitive.color_b");
  maybe(j, "checker_period", p.checker_period);
  return p;
}

json primitive_to_json(const Primitive& p) {
  json j;
  j["shape"] = p.shape == PrimitiveShape::sphere ? "sphere" : "box";
  j["id"] = p.id;
  j["center"] = vec3_to(p.center);
  j["size"] = vec3_to(p.size);
  j["color"] = vec3_to(p.color);
  if (p.checker) {
    j["checker"] = true;
    j["color_b"] = vec3_to(p.color_b);
    j["checker_period"] = p.checker_period;
  }
  return j;
}

InstructionRule rule_from_json(const json& j) {
  reject_unknown_keys(j, {"pattern", "effect", "target", "color", "color_b", "period"}, "instruction");
  InstructionRule r;
  r.pattern = j.at("pattern").get<std::string>();
  const std::string effect = j.at("effect").get<std::string>();
  if (effect == "recolor") r.effect = EditEffect::recolor;
  else if (effect == "remove") r.effect = EditEffect::remove;
  else if (effect == "texture-swap") r.effect = EditEffect::texture_swap;
  else if (effect == "noop") r.effect = EditEffect::noop;
  else throw std::invalid_argument("scene: unknown instruction effect '" + effect + "'");
  if (r.effect != EditEffect::noop) r.target_id = j.at("target").get<std::string>();
  if (j.contains("color")) r.color = vec3_from(j.at("color"), "instruction.color");
  if (j.contains("color_b")) r.color_b = vec3_from(j.at("color_b"), "instruction.color_b");
  maybe(j, "period", r.texture_period);
  return r;
}

json rule_to_json(const InstructionRule& r) {
  json j;
  j["pattern"] = r.pattern;
  switch (r.effect) {
    case EditEffect::recolor: j["effect"] = "recolor"; break;
    case EditEffect::remove: j["effect"] = "remove"; break;
    case EditEffect::texture_swap: j["effect"] = "texture-swap"; break;
    case EditEffect::noop: j["effect"] = "noop"; break;
  }
  if (r.effect != EditEffect::noop) j["target"] = r.target_id;
  j["color"] = vec3_to(r.color);
  if (r.effect == EditEffect::texture_swap) {
    j["color_b"] = vec3_to(r.color_b);
    j["period"] = r.texture_period;
  }
  return j;
}

}  // namespace

SceneFile parse_scene_file(const std::string& json_text) {
  const json j = json::parse(json_text);
  reject_unknown_keys(j, {"bbox", "background", "interior_sigma", "primitives", "instructions"}, "scene");
  SceneFile out;
  if (j.contains("bbox")) {
    const json& b = j.at("bbox");
    reject_unknown_keys(b, {"min", "max"}, "scene.bbox");
    out.spec.bbox_min = vec3_from(b.at("min"), "scene.bbox.min");
    out.spec.bbox_max = vec3_from(b.at("max"), "scene.bbox.max");
  }
  if (j.contains("background")) out.spec.background = vec3_from(j.at("background"), "scene.background");
  maybe(j, "interior_sigma", out.spec.interior_sigma);
  for (const auto& pj : j.value("primitives", json::array())) out.spec.primitives.push_back(primitive_from_json(pj));
  for (const auto& rj : j.value("instructions", json::array())) out.registry.rules.push_back(rule_from_json(rj));
  return out;
}

std::string serialize_scene_file(const SceneFile& scene) {
  json j;
  j["bbox"] = {{"min", vec3_to(scene.spec.bbox_min)}, {"max", vec3_to(scene.spec.bbox_max)}};
  j["background"] = vec3_to(scene.spec.background);
  j["interior_sigma"] = scene.spec.interior_sigma;
  j["primitives"] = json::array();
  for (const auto& p : scene.spec.primitives) j["primitives"].push_back(primitive_to_json(p));
  j["instructions"] = json::array();
  for (const auto& r : scene.registry.rules) j["instructions"].push_back(rule_to_json(r));
  return j.dump(2) + "\n";
}

namespace {

struct Region {
  std::string type;  // "rect" or "disk"
  double x = 0, y = 0, w = 0, h = 0;  // rect, pixel coordinates
  double cx = 0, cy = 0, r = 0;       // disk

  bool contains_pixel(double px, double py) const {
    if (type == "rect") return px >= x && px < x + w && py >= y && py < y + h;
    const double dx = px - cx, dy = py - cy;
    return dx * dx + dy * dy <= r * r;
  }
};

Region region_from_json(const json& j) {
  reject_unknown_keys(j, {"type", "x", "y", "w", "h", "cx", "cy", "r"}, "region");
  Region reg;
  reg.type = j.at("type").get<std::string>();
  if (reg.type == "rect") {
    reg.x = j.at("x").get<double>();
    reg.y = j.at("y").get<double>();
    reg.w = j.at("w").get<double>();
    reg.h = j.at("h").get<double>();
  } else if (reg.type == "disk") {
    reg.cx = j.at("cx").get<double>();
    reg.cy = j.at("cy").get<double>();
    reg.r = j.at("r").get<double>();
  } else {
    throw std::invalid_argument("denoiser: region type must be rect or disk");
  }
  return reg;
}

struct RegionEdit {
  std::string instruction;
  std::string effect;  // "recolor", "shift", "erase"
  Region region;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  Eigen::Vector3d delta = Eigen::Vector3d::Zero();
};

}  // namespace

std::unique_ptr<Denoiser> parse_denoiser_spec(const std::string& json_text, const NoiseSchedule& sched,
                                              const Codec& codec, const LatentShape& shape,
                                              const std::string& base_dir) {
  const json j = json::parse(json_text);
  const std::string type = j.at("type").get<std::string>();

  if (type == "procedural") {
    reject_unknown_keys(j, {"type", "edits"}, "denoiser");
    auto edits = std::make_shared<std::vector<RegionEdit>>();
    for (const auto& ej : j.at("edits")) {
      reject_unknown_keys(ej, {"instruction", "effect", "region", "color", "delta"}, "denoiser.edit");
      RegionEdit e;
      e.instruction = ej.at("instruction").get<std::string>();
      e.effect = ej.at("effect").get<std::string>();
      if (e.effect != "recolor" && e.effect != "shift" && e.effect != "erase")
        throw std::invalid_argument("denoiser: effect must be recolor, shift or erase");
      e.region = region_from_json(ej.at("region"));
      if (ej.contains("color")) e.color = vec3_from(ej.at("color"), "denoiser.edit.color");
      if (ej.contains("delta")) e.delta = vec3_from(ej.at("delta"), "denoiser.edit.delta");
      edits->push_back(e);
    }
    const int factor = codec.factor;
    EditTargetFn fn = [edits, factor](const Image& image_cond, const std::string& text) -> Image {
      for (const auto& e : *edits) {
        if (e.instruction != text) continue;
        Image target = image_cond;
        for (int y = 0; y < target.height; ++y)
          for (int x = 0; x < target.width; ++x) {
            // Region given in pixel coordinates; latent pixel centers map back
            // through the codec factor.
            const double px = (x + 0.5) * factor;
            const double py = (y + 0.5) * factor;
            if (!e.region.contains_pixel(px, py)) continue;
            for (int c = 0; c < target.channels; ++c) {
              if (e.effect == "recolor") target.at(y, x, c) = c < 3 ? e.color[c] : 0.0;
              else if (e.effect == "shift") target.at(y, x, c) += c < 3 ? e.delta[c] : 0.0;
              else target.at(y, x, c) = 0.0;
            }
          }
        return target;
      }
      throw std::invalid_argument("denoiser: no edit registered for instruction '" + text + "'");
    };
    return std::make_unique<ProceduralDenoiser>(sched, shape, std::move(fn));
  }

  if (type == "gmm") {
    reject_unknown_keys(j, {"type", "sigma", "mixtures"}, "denoiser");
    std::map<std::string, GmmMixture> mixtures;
    const double sigma = j.value("sigma", 0.0);
    for (const auto& [label, mj] : j.at("mixtures").items()) {
      reject_unknown_keys(mj, {"means", "weights"}, "denoiser.mixture");
      GmmMixture mix;
      mix.sigma = sigma;
      for (const auto& mean_j : mj.at("means")) {
        reject_unknown_keys(mean_j, {"const", "pfm", "png"}, "denoiser.mean");
        if (mean_j.contains("const")) {
          mix.means.push_back(Image::constant(shape.height, shape.width, shape.channels,
                                              mean_j.at("const").get<double>()));
        } else if (mean_j.contains("pfm")) {
          mix.means.push_back(read_pfm((std::filesystem::path(base_dir) / mean_j.at("pfm").get<std::string>()).string()));
        } else if (mean_j.contains("png")) {
          mix.means.push_back(encode(codec, read_png((std::filesystem::path(base_dir) / mean_j.at("png").get<std::string>()).string())));
        } else {
          throw std::invalid_argument("denoiser: mean needs const, pfm or png");
        }
      }
      mix.weights = mj.at("weights").get<std::vector<double>>();
      mixtures.emplace(label, std::move(mix));
    }
    return std::make_unique<GmmDenoiser>(sched, shape, std::move(mixtures));
  }

  throw std::invalid_argument("denoiser: type must be procedural or gmm");
}

}  // namespace ledit
