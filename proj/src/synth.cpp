// SPDX-License-Identifier: Apache-2.0
#include "ledit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace ledit {

namespace {

// Sigmoid clamp for rasterized colors: clamped away from {0,1} so the logits
// stay finite; renders of ground-truth scenes use the clamped values
// consistently.
constexpr double kColorEps = 5e-3;

double clamped_logit(double v) { return logit(std::clamp(v, kColorEps, 1.0 - kColorEps)); }

bool inside(const Primitive& prim, const Eigen::Vector3d& p) {
  if (prim.shape == PrimitiveShape::sphere)
    return (p - prim.center).norm() <= prim.size.x();
  return ((p - prim.center).cwiseAbs().array() <= prim.size.array()).all();
}

Eigen::Vector3d voxel_color(const Primitive& prim, int ix, int iy, int iz) {
  if (!prim.checker) return prim.color;
  const int period = std::max(1, prim.checker_period);
  const bool odd = ((ix / period) + (iy / period) + (iz / period)) % 2 != 0;
  return odd ? prim.color_b : prim.color;
}

}  // namespace

const InstructionRule& InstructionRegistry::lookup(const std::string& instruction) const {
  for (const auto& rule : rules)
    if (rule.pattern == instruction) return rule;
  throw std::invalid_argument("InstructionRegistry: unknown instruction '" + instruction + "'");
}

bool InstructionRegistry::contains(const std::string& instruction) const {
  return std::any_of(rules.begin(), rules.end(),
                     [&](const InstructionRule& r) { return r.pattern == instruction; });
}

VoxelField build_scene(const SceneSpec& spec, const Eigen::Vector3i& dims, int* overlap_voxels) {
  for (const auto& prim : spec.primitives) {
    if ((prim.center.array() < spec.bbox_min.array()).any() ||
        (prim.center.array() > spec.bbox_max.array()).any())
      throw std::invalid_argument("build_scene: primitive center outside bbox");
    if ((prim.size.array() <= 0.0).any()) throw std::invalid_argument("build_scene: non-positive size");
    if ((prim.color.array() < 0.0).any() || (prim.color.array() > 1.0).any())
      throw std::invalid_argument("build_scene: color outside [0,1]");
  }
  if (!(spec.interior_sigma > 0.0)) throw std::invalid_argument("build_scene: interior_sigma must be positive");

  VoxelField field = VoxelField::make(dims, spec.bbox_min, spec.bbox_max);
  // Empty space: exactly zero density (softplus_inv(0) is -inf, so write a
  // very negative raw value; softplus(-60) < 1e-26).
  field.density_raw.setConstant(-60.0);
  const Eigen::Index n = field.voxels();
  for (int c = 0; c < 3; ++c)
    field.color_raw.segment(c * n, n).setConstant(clamped_logit(spec.background[c]));

  int overlaps = 0;
  std::vector<bool> written(static_cast<std::size_t>(n), false);
  for (const auto& prim : spec.primitives) {
    for (int iz = 0; iz < dims.z(); ++iz)
      for (int iy = 0; iy < dims.y(); ++iy)
        for (int ix = 0; ix < dims.x(); ++ix) {
          const Eigen::Vector3d p = field.voxel_center(ix, iy, iz);
          if (!inside(prim, p)) continue;
          const Eigen::Index idx = field.vindex(ix, iy, iz);
          if (written[static_cast<std::size_t>(idx)]) ++overlaps;
          written[static_cast<std::size_t>(idx)] = true;
          field.density_raw[idx] = softplus_inv(spec.interior_sigma);
          const Eigen::Vector3d col = voxel_color(prim, ix, iy, iz);
          for (int c = 0; c < 3; ++c) field.color_raw[c * n + idx] = clamped_logit(col[c]);
        }
  }
  if (overlap_voxels) *overlap_voxels = overlaps;
  field.geometry_ready = true;
  return field;
}

std::vector<PosedImage> capture(const VoxelField& field, int n_views, const OrbitParams& orbit,
                                int width, int height, const RenderOptions& render_opts) {
  if (n_views < 2) throw std::invalid_argument("capture: need at least 2 views");
  std::vector<PosedImage> views;
  views.reserve(n_views);
  for (const Camera& cam : orbit_cameras(n_views, orbit, width, height))
    views.push_back(PosedImage{cam, render_color_image(field, cam, render_opts)});
  return views;
}

AppliedInstruction apply_instruction(const SceneSpec& spec, const InstructionRule& rule,
                                     const Eigen::Vector3i& dims) {
  AppliedInstruction out;
  out.edited = spec;

  if (rule.effect != EditEffect::noop) {
    bool found = false;
    for (auto it = out.edited.primitives.begin(); it != out.edited.primitives.end(); ++it) {
      if (it->id != rule.target_id) continue;
      found = true;
      switch (rule.effect) {
        case EditEffect::recolor:
          it->color = rule.color;
          it->checker = false;
          break;
        case EditEffect::remove:
          out.edited.primitives.erase(it);
          break;
        case EditEffect::texture_swap:
          it->checker = true;
          it->color = rule.color;
          it->color_b = rule.color_b;
          it->checker_period = rule.texture_period;
          break;
        case EditEffect::noop:
          break;
      }
      break;
    }
    if (!found) throw std::invalid_argument("apply_instruction: no primitive with id '" + rule.target_id + "'");
  }

  // 3D support: voxels where the rasterized fields differ.
  const VoxelField before = build_scene(spec, dims);
  const VoxelField after = build_scene(out.edited, dims);
  const Eigen::Index n = before.voxels();
  for (Eigen::Index i = 0; i < n; ++i) {
    bool differs = before.density_raw[i] != after.density_raw[i];
    for (int c = 0; !differs && c < 3; ++c) differs = before.color_raw[c * n + i] != after.color_raw[c * n + i];
    if (differs) out.support_voxels.push_back(i);
  }
  return out;
}

EditMask project_support(const VoxelField& field_a, const VoxelField& field_b,
                         const std::vector<Eigen::Index>& support_voxels, const Camera& cam,
                         const RenderOptions& opts, double weight_eps) {
  if (field_a.dims != field_b.dims) throw std::invalid_argument("project_support: field dims mismatch");
  std::unordered_set<Eigen::Index> support(support_voxels.begin(), support_voxels.end());

  EditMask mask;
  mask.space = MaskSpace::pixel;
  mask.grid = Image::zeros(cam.height, cam.width, 1);
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u) {
      const SampledRay sr = sample_ray(cam, u, v, opts.samples_per_ray, Jitter::none, nullptr);
      double support_weight = 0.0;
      for (const VoxelField* field : {&field_a, &field_b}) {
        double T = 1.0;
        for (int i = 0; i < opts.samples_per_ray; ++i) {
          const Eigen::Vector3d p = sr.ray.origin + sr.t[i] * sr.ray.dir;
          const InterpStencil st = interp_stencil(*field, p);
          double sigma = 0.0;
          double support_fraction = 0.0;  // trilinear mass on support voxels
          for (int j = 0; j < st.count; ++j) {
            sigma += st.weight[j] * softplus(field->density_raw[st.index[j]]);
            if (support.count(st.index[j])) support_fraction += st.weight[j];
          }
          const double e = std::exp(-sigma * sr.delta[i]);
          support_weight += T * (1.0 - e) * support_fraction;
          T *= e;
        }
      }
      mask.grid.at(v, u, 0) = support_weight > weight_eps ? 1.0 : 0.0;
    }
  return mask;
}

EditMask support_silhouette(const VoxelField& field, const std::vector<Eigen::Index>& support_voxels,
                            const Camera& cam) {
  const Eigen::Vector3d half_cell = field.cell_size() / 2.0;
  std::vector<Eigen::Vector3d> centers;
  centers.reserve(support_voxels.size());
  const Eigen::Index nxy = static_cast<Eigen::Index>(field.dims.x()) * field.dims.y();
  for (const Eigen::Index idx : support_voxels) {
    const int iz = static_cast<int>(idx / nxy);
    const int iy = static_cast<int>((idx % nxy) / field.dims.x());
    const int ix = static_cast<int>(idx % field.dims.x());
    centers.push_back(field.voxel_center(ix, iy, iz));
  }

  EditMask mask;
  mask.space = MaskSpace::pixel;
  mask.grid = Image::zeros(cam.height, cam.width, 1);
  for (int v = 0; v < cam.height; ++v)
    for (int u = 0; u < cam.width; ++u) {
      const Ray ray = cam.pixel_ray(u, v);
      bool hit = false;
      for (const Eigen::Vector3d& c : centers) {
        // Slab test against the voxel cube, restricted to [near, far].
        double t0 = cam.near, t1 = cam.far;
        for (int k = 0; k < 3; ++k) {
          const double inv = 1.0 / ray.dir[k];
          double ta = (c[k] - half_cell[k] - ray.origin[k]) * inv;
          double tb = (c[k] + half_cell[k] - ray.origin[k]) * inv;
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
        }
        if (t0 <= t1) {
          hit = true;
          break;
        }
      }
      mask.grid.at(v, u, 0) = hit ? 1.0 : 0.0;
    }
  return mask;
}

std::unique_ptr<ProceduralDenoiser> make_scene_denoiser(
    const NoiseSchedule& sched, const Codec& codec, const std::string& instruction,
    const std::vector<PosedImage>& captures, const std::vector<Image>& edited_renders) {
  if (captures.size() != edited_renders.size())
    throw std::invalid_argument("make_scene_denoiser: captures/renders size mismatch");
  if (captures.empty()) throw std::invalid_argument("make_scene_denoiser: no views");

  struct Pair {
    Image cond;
    Image target;
  };
  auto pairs = std::make_shared<std::vector<Pair>>();
  pairs->reserve(captures.size());
  for (std::size_t i = 0; i < captures.size(); ++i)
    pairs->push_back(Pair{encode(codec, captures[i].image), encode(codec, edited_renders[i])});

  const Image& first = pairs->front().cond;
  LatentShape shape{first.height, first.width, first.channels};
  std::string known_instruction = instruction;

  EditTargetFn fn = [pairs, known_instruction](const Image& image_cond, const std::string& text) -> Image {
    if (text != known_instruction)
      throw std::invalid_argument("scene denoiser: unknown instruction '" + text + "'");
    for (const auto& pair : *pairs) {
      if (!pair.cond.same_shape(image_cond)) continue;
      if ((pair.cond.data - image_cond.data).abs().maxCoeff() <= 1e-12) return pair.target;
    }
    throw std::invalid_argument("scene denoiser: condition image does not match any registered view");
  };
  return std::make_unique<ProceduralDenoiser>(sched, shape, std::move(fn));
}

}  // namespace ledit
