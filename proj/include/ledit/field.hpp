// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ledit/camera.hpp"
#include "ledit/grid.hpp"
#include "ledit/rng.hpp"

namespace ledit {

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double y) { return std::log(y / (1.0 - y)); }

/// Dense voxel grid of (density, color, relevance). Raw parameters are stored
/// pre-activation: softplus keeps density nonnegative, sigmoids keep color and
/// relevance in [0,1]. Activated values are trilinearly interpolated between
/// voxel centers; space outside the bounding box is empty.
struct VoxelField {
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  Eigen::Vector3d bbox_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d bbox_max = Eigen::Vector3d::Zero();
  Eigen::ArrayXd density_raw;    // N
  Eigen::ArrayXd color_raw;      // 3N, planar by channel
  Eigen::ArrayXd relevance_raw;  // N
  std::int64_t fit_steps = 0;    // photometric optimizer steps taken
  bool geometry_ready = false;   // set by fitting or ground-truth rasterization

  static VoxelField make(const Eigen::Vector3i& dims, const Eigen::Vector3d& bbox_min,
                         const Eigen::Vector3d& bbox_max);

  Eigen::Index voxels() const { return static_cast<Eigen::Index>(dims.x()) * dims.y() * dims.z(); }
  Eigen::Index vindex(int ix, int iy, int iz) const {
    return (static_cast<Eigen::Index>(iz) * dims.y() + iy) * dims.x() + ix;
  }
  Eigen::Vector3d cell_size() const {
    return (bbox_max - bbox_min).cwiseQuotient(dims.cast<double>());
  }
  Eigen::Vector3d voxel_center(int ix, int iy, int iz) const {
    const Eigen::Vector3d cell = cell_size();
    return bbox_min + cell.cwiseProduct(Eigen::Vector3d(ix + 0.5, iy + 0.5, iz + 0.5));
  }
};

/// Up to 8 voxel taps with trilinear weights; empty outside the bbox.
struct InterpStencil {
  int count = 0;
  Eigen::Index index[8];
  double weight[8];
};

InterpStencil interp_stencil(const VoxelField& field, const Eigen::Vector3d& p);

/// Activated (sigma, rgb, relevance) at a world position.
struct FieldSample {
  double sigma = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double relevance = 0.0;
};

FieldSample sample_field(const VoxelField& field, const Eigen::Vector3d& p);

enum class Jitter { none, stratified };

/// Ray with its quadrature nodes. Positions are bin midpoints between near
/// and far (or stratified within the bins); the last spacing is truncated at
/// the far bound.
struct SampledRay {
  Ray ray;
  std::vector<double> t;
  std::vector<double> delta;
};

SampledRay sample_ray(const Camera& cam, int u, int v, int n, Jitter jitter, Rng* rng);
SampledRay sample_ray(const Camera& cam, int u, int v, int n, Jitter jitter, std::uint64_t seed);

struct RenderOptions {
  int samples_per_ray = 48;
  Jitter jitter = Jitter::none;
  std::uint64_t seed = 0;
  Eigen::Vector3d background = Eigen::Vector3d::Zero();
  int threads = 1;
};

struct PixelRender {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double alpha = 0.0;        // sum of weights
  double relevance = 0.0;    // no background term
  double transmittance = 1.0;  // T after the last sample
};

PixelRender render_pixel(const VoxelField& field, const Camera& cam, int u, int v,
                         const RenderOptions& opts);

Image render_color_image(const VoxelField& field, const Camera& cam, const RenderOptions& opts);
Image render_relevance_image(const VoxelField& field, const Camera& cam, const RenderOptions& opts);
Image render_alpha_image(const VoxelField& field, const Camera& cam, const RenderOptions& opts);

/// Dense gradient accumulators matching the field's parameter arrays.
struct FieldGrads {
  Eigen::ArrayXd density_raw, color_raw, relevance_raw;

  explicit FieldGrads(const VoxelField& f)
      : density_raw(Eigen::ArrayXd::Zero(f.voxels())),
        color_raw(Eigen::ArrayXd::Zero(3 * f.voxels())),
        relevance_raw(Eigen::ArrayXd::Zero(f.voxels())) {}

  void set_zero() {
    density_raw.setZero();
    color_raw.setZero();
    relevance_raw.setZero();
  }
};

/// Backpropagates dL/d(rendered color) of one pixel into density and color
/// parameters (analytic gradients through the quadrature).
void accumulate_color_gradients(const VoxelField& field, const Camera& cam, int u, int v,
                                const RenderOptions& opts, const Eigen::Vector3d& dl_dcolor,
                                FieldGrads& grads);

/// Backpropagates dL/d(rendered relevance). Density is detached: only
/// relevance parameters receive gradient.
void accumulate_relevance_gradients(const VoxelField& field, const Camera& cam, int u, int v,
                                    const RenderOptions& opts, double dl_drel, FieldGrads& grads);

struct PosedImage {
  Camera cam;
  Image image;  // 3 channels for color supervision, 1 for relevance
};

struct FitOptions {
  int iters = 2000;
  int batch_rays = 512;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int samples_per_ray = 48;
  Jitter jitter = Jitter::stratified;
  std::uint64_t seed = 0;
  Eigen::Vector3d background = Eigen::Vector3d::Zero();
};

struct AdamState {
  Eigen::ArrayXd m, v;
  std::int64_t step = 0;

  explicit AdamState(Eigen::Index n) : m(Eigen::ArrayXd::Zero(n)), v(Eigen::ArrayXd::Zero(n)) {}

  void update(Eigen::ArrayXd& param, const Eigen::ArrayXd& grad, double lr, double beta1,
              double beta2, double eps);
};

/// Adam optimizer with persistent state for interleaved photometric and
/// relevance steps over one field (scene editing drives both each iteration).
class FieldOptimizer {
 public:
  FieldOptimizer(VoxelField& field, FitOptions rgb_opts, FitOptions rel_opts);

  /// One photometric step on (density, color); returns batch MSE.
  double rgb_step(const std::vector<PosedImage>& views, Rng& rng);

  /// One relevance step; density and color bytes are untouched. Returns MSE.
  double relevance_step(const std::vector<PosedImage>& rel_views, Rng& rng);

 private:
  VoxelField& field_;
  FitOptions rgb_opts_, rel_opts_;
  FieldGrads grads_;
  AdamState density_state_, color_state_, relevance_state_;
};

struct FitLog {
  std::vector<double> losses;
};

/// Fits density and color to posed images with Adam over random ray batches.
FitLog fit_field(VoxelField& field, const std::vector<PosedImage>& views, const FitOptions& opts);

/// Fits the relevance channel to single-channel supervision maps at pixel
/// resolution; geometry must already be in place and is never modified.
FitLog fit_relevance(VoxelField& field, const std::vector<PosedImage>& rel_views,
                     const FitOptions& opts);

}  // namespace ledit
