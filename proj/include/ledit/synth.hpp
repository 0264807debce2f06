// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ledit/codec.hpp"
#include "ledit/denoise.hpp"
#include "ledit/field.hpp"
#include "ledit/relevance.hpp"

namespace ledit {

enum class PrimitiveShape { sphere, box };

struct Primitive {
  PrimitiveShape shape = PrimitiveShape::sphere;
  std::string id;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Constant(0.3);  // sphere: radius in x; box: half extents
  Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);
  // Procedural checker texture (set by texture-swap edits).
  bool checker = false;
  Eigen::Vector3d color_b = Eigen::Vector3d::Ones();
  int checker_period = 2;  // in voxels
};

struct SceneSpec {
  Eigen::Vector3d bbox_min = Eigen::Vector3d::Constant(-1.0);
  Eigen::Vector3d bbox_max = Eigen::Vector3d::Constant(1.0);
  Eigen::Vector3d background = Eigen::Vector3d::Zero();
  // Density written inside primitives. Moderate values keep silhouettes well
  // conditioned under trilinear interpolation; very large ones push all the
  // quadrature weight into the one-voxel surface skirt.
  double interior_sigma = 12.0;
  std::vector<Primitive> primitives;
};

enum class EditEffect { recolor, remove, texture_swap, noop };

struct InstructionRule {
  std::string pattern;  // exact-match instruction string
  EditEffect effect = EditEffect::noop;
  std::string target_id;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();     // recolor / texture primary
  Eigen::Vector3d color_b = Eigen::Vector3d::Ones();   // texture secondary
  int texture_period = 2;                              // in voxels
};

struct InstructionRegistry {
  std::vector<InstructionRule> rules;

  const InstructionRule& lookup(const std::string& instruction) const;
  bool contains(const std::string& instruction) const;
};

/// Rasterizes primitives into a ground-truth field: nearest-neighbor
/// voxel-center tests, opaque interior density, no anti-aliasing. Marks the
/// geometry ready. Overlapping primitives resolve last-writer-wins; the
/// optional out-parameter reports how many voxels were overwritten.
VoxelField build_scene(const SceneSpec& spec, const Eigen::Vector3i& dims, int* overlap_voxels = nullptr);

/// Orbit capture of the scene: cameras ringed around the bbox center plus the
/// rendered views.
std::vector<PosedImage> capture(const VoxelField& field, int n_views, const OrbitParams& orbit,
                                int width, int height, const RenderOptions& render_opts);

/// Edited spec plus the ground-truth 3D support of the change (voxel indices
/// at the given grid dims where the rasterized fields differ).
struct AppliedInstruction {
  SceneSpec edited;
  std::vector<Eigen::Index> support_voxels;
};

AppliedInstruction apply_instruction(const SceneSpec& spec, const InstructionRule& rule,
                                     const Eigen::Vector3i& dims);

/// Pixel-space projection of a 3D voxel support: a pixel is in the projection
/// when quadrature weight from either field falls on a support voxel's
/// interpolation stencil. `weight_eps` sets how much weight counts as
/// contributing.
EditMask project_support(const VoxelField& field_a, const VoxelField& field_b,
                         const std::vector<Eigen::Index>& support_voxels, const Camera& cam,
                         const RenderOptions& opts, double weight_eps = 1e-6);

/// Exact geometric projection of a voxel support: pixels whose rays intersect
/// any support voxel's cube between the camera bounds. No rendering, no
/// thresholds.
EditMask support_silhouette(const VoxelField& field, const std::vector<Eigen::Index>& support_voxels,
                            const Camera& cam);

/// Procedural denoiser for scene editing: for each view, the fully
/// conditioned target of the original capture's latent is the encoded render
/// of the ground-truth edited scene from that view. Conditions are matched by
/// content.
std::unique_ptr<ProceduralDenoiser> make_scene_denoiser(
    const NoiseSchedule& sched, const Codec& codec, const std::string& instruction,
    const std::vector<PosedImage>& captures, const std::vector<Image>& edited_renders);

}  // namespace ledit
