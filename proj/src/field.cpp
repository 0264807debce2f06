// SPDX-License-Identifier: Apache-2.0
#include "ledit/field.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace ledit {

VoxelField VoxelField::make(const Eigen::Vector3i& dims, const Eigen::Vector3d& bbox_min,
                            const Eigen::Vector3d& bbox_max) {
  if ((dims.array() < 1).any()) throw std::invalid_argument("VoxelField: dims must be positive");
  if (((bbox_max - bbox_min).array() <= 0.0).any())
    throw std::invalid_argument("VoxelField: bbox must have positive extent");
  VoxelField f;
  f.dims = dims;
  f.bbox_min = bbox_min;
  f.bbox_max = bbox_max;
  const Eigen::Index n = f.voxels();
  // Near-empty start: sigma ~= 0.05, gray color, relevance ~= 0.02.
  f.density_raw = Eigen::ArrayXd::Constant(n, softplus_inv(0.05));
  f.color_raw = Eigen::ArrayXd::Zero(3 * n);
  f.relevance_raw = Eigen::ArrayXd::Constant(n, -4.0);
  return f;
}

InterpStencil interp_stencil(const VoxelField& field, const Eigen::Vector3d& p) {
  InterpStencil st;
  if ((p.array() < field.bbox_min.array()).any() || (p.array() > field.bbox_max.array()).any())
    return st;  // outside: empty space

  const Eigen::Vector3d cell = field.cell_size();
  const Eigen::Vector3d g = (p - field.bbox_min).cwiseQuotient(cell) - Eigen::Vector3d::Constant(0.5);

  int base[3];
  double frac[3];
  for (int k = 0; k < 3; ++k) {
    const double gk = g[k];
    int lo = static_cast<int>(std::floor(gk));
    double f = gk - lo;
    if (lo < 0) {  // clamp to border inside the bbox
      lo = 0;
      f = 0.0;
    }
    if (lo >= field.dims[k] - 1) {
      lo = field.dims[k] - 1;
      f = 0.0;
    }
    base[k] = lo;
    frac[k] = f;
  }

  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const int ix = std::min(base[0] + dx, field.dims.x() - 1);
        const int iy = std::min(base[1] + dy, field.dims.y() - 1);
        const int iz = std::min(base[2] + dz, field.dims.z() - 1);
        const double w = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                         (dz ? frac[2] : 1.0 - frac[2]);
        if (w == 0.0) continue;
        st.index[st.count] = field.vindex(ix, iy, iz);
        st.weight[st.count] = w;
        ++st.count;
      }
  return st;
}

FieldSample sample_field(const VoxelField& field, const Eigen::Vector3d& p) {
  FieldSample s;
  const InterpStencil st = interp_stencil(field, p);
  const Eigen::Index n = field.voxels();
  for (int i = 0; i < st.count; ++i) {
    const Eigen::Index idx = st.index[i];
    const double w = st.weight[i];
    s.sigma += w * softplus(field.density_raw[idx]);
    for (int c = 0; c < 3; ++c) s.color[c] += w * sigmoid(field.color_raw[c * n + idx]);
    s.relevance += w * sigmoid(field.relevance_raw[idx]);
  }
  return s;
}

SampledRay sample_ray(const Camera& cam, int u, int v, int n, Jitter jitter, Rng* rng) {
  if (n < 1) throw std::invalid_argument("sample_ray: need at least one sample");
  if (jitter == Jitter::stratified && rng == nullptr)
    throw std::invalid_argument("sample_ray: stratified jitter needs a generator");
  SampledRay out;
  out.ray = cam.pixel_ray(u, v);
  out.t.resize(n);
  out.delta.resize(n);
  const double bin = (cam.far - cam.near) / n;
  for (int i = 0; i < n; ++i) {
    const double offset = (jitter == Jitter::stratified) ? rng->uniform01() : 0.5;
    out.t[i] = cam.near + (i + offset) * bin;
  }
  for (int i = 0; i + 1 < n; ++i) out.delta[i] = out.t[i + 1] - out.t[i];
  out.delta[n - 1] = cam.far - out.t[n - 1];
  return out;
}

SampledRay sample_ray(const Camera& cam, int u, int v, int n, Jitter jitter, std::uint64_t seed) {
  Rng rng(seed);
  return sample_ray(cam, u, v, n, jitter, &rng);
}

namespace {

/// Forward quadrature state kept for the backward pass.
struct RayForward {
  SampledRay samples;
  std::vector<InterpStencil> stencils;
  std::vector<double> sigma, a, trans, alpha, weight, rel;  // trans[i] = T_i, size n+1
  std::vector<Eigen::Vector3d> color;
};

RayForward forward_ray(const VoxelField& field, const Camera& cam, int u, int v,
                       const RenderOptions& opts, Rng* rng) {
  RayForward f;
  f.samples = sample_ray(cam, u, v, opts.samples_per_ray, opts.jitter, rng);
  const int n = opts.samples_per_ray;
  f.stencils.resize(n);
  f.sigma.assign(n, 0.0);
  f.a.assign(n, 0.0);
  f.alpha.assign(n, 0.0);
  f.weight.assign(n, 0.0);
  f.rel.assign(n, 0.0);
  f.color.assign(n, Eigen::Vector3d::Zero());
  f.trans.assign(n + 1, 1.0);

  const Eigen::Index nv = field.voxels();
  double T = 1.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d p = f.samples.ray.origin + f.samples.t[i] * f.samples.ray.dir;
    f.stencils[i] = interp_stencil(field, p);
    double sigma = 0.0, rel = 0.0;
    Eigen::Vector3d col = Eigen::Vector3d::Zero();
    for (int j = 0; j < f.stencils[i].count; ++j) {
      const Eigen::Index idx = f.stencils[i].index[j];
      const double w = f.stencils[i].weight[j];
      sigma += w * softplus(field.density_raw[idx]);
      rel += w * sigmoid(field.relevance_raw[idx]);
      for (int c = 0; c < 3; ++c) col[c] += w * sigmoid(field.color_raw[c * nv + idx]);
    }
    f.sigma[i] = sigma;
    f.rel[i] = rel;
    f.color[i] = col;
    f.a[i] = sigma * f.samples.delta[i];
    const double e = std::exp(-f.a[i]);
    f.alpha[i] = 1.0 - e;
    f.weight[i] = T * f.alpha[i];
    T *= e;
    f.trans[i + 1] = T;
  }
  return f;
}

PixelRender composite(const RayForward& f, const Eigen::Vector3d& background) {
  PixelRender r;
  const int n = static_cast<int>(f.weight.size());
  for (int i = 0; i < n; ++i) {
    r.color += f.weight[i] * f.color[i];
    r.relevance += f.weight[i] * f.rel[i];
    r.alpha += f.weight[i];
  }
  r.transmittance = f.trans[n];
  r.color += r.transmittance * background;
  return r;
}

Rng pixel_rng(const RenderOptions& opts, const Camera& cam, int u, int v) {
  return Rng(mix_seed(opts.seed, static_cast<std::uint64_t>(v) * cam.width + u + 1));
}

template <typename Fn>
void for_each_pixel(const Camera& cam, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u) fn(u, v);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next_row{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int v = next_row.fetch_add(1); v < cam.height; v = next_row.fetch_add(1))
        for (int u = 0; u < cam.width; ++u) fn(u, v);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

PixelRender render_pixel(const VoxelField& field, const Camera& cam, int u, int v,
                         const RenderOptions& opts) {
  Rng rng = pixel_rng(opts, cam, u, v);
  const RayForward f = forward_ray(field, cam, u, v, opts, &rng);
  return composite(f, opts.background);
}

Image render_color_image(const VoxelField& field, const Camera& cam, const RenderOptions& opts) {
  Image img(cam.height, cam.width, 3);
  for_each_pixel(cam, opts.threads, [&](int u, int v) {
    const PixelRender r = render_pixel(field, cam, u, v, opts);
    for (int c = 0; c < 3; ++c) img.at(v, u, c) = r.color[c];
  });
  return img;
}

Image render_relevance_image(const VoxelField& field, const Camera& cam, const RenderOptions& opts) {
  Image img(cam.height, cam.width, 1);
  for_each_pixel(cam, opts.threads, [&](int u, int v) { img.at(v, u, 0) = render_pixel(field, cam, u, v, opts).relevance; });
  return img;
}

Image render_alpha_image(const VoxelField& field, const Camera& cam, const RenderOptions& opts) {
  Image img(cam.height, cam.width, 1);
  for_each_pixel(cam, opts.threads, [&](int u, int v) { img.at(v, u, 0) = render_pixel(field, cam, u, v, opts).alpha; });
  return img;
}

namespace {

void backward_color(const VoxelField& field, const RayForward& f, const Eigen::Vector3d& background,
                    const Eigen::Vector3d& dl_dcolor, FieldGrads& grads) {
  const int n = static_cast<int>(f.weight.size());
  const Eigen::Index nv = field.voxels();

  // Suffix accumulator S_i = sum_{k>i} w_k c_k + T_{n} * bg, built backward.
  Eigen::Vector3d suffix = f.trans[n] * background;
  for (int i = n - 1; i >= 0; --i) {
    const Eigen::Vector3d dl_dci = f.weight[i] * dl_dcolor;
    // dC/da_i = T_{i+1} c_i - S_i  (later contributions shrink as a_i grows).
    const double dl_da = dl_dcolor.dot(f.trans[i + 1] * f.color[i] - suffix);
    const double dl_dsigma = dl_da * f.samples.delta[i];
    for (int j = 0; j < f.stencils[i].count; ++j) {
      const Eigen::Index idx = f.stencils[i].index[j];
      const double w = f.stencils[i].weight[j];
      grads.density_raw[idx] += dl_dsigma * w * sigmoid(field.density_raw[idx]);
      for (int c = 0; c < 3; ++c) {
        const double s = sigmoid(field.color_raw[c * nv + idx]);
        grads.color_raw[c * nv + idx] += dl_dci[c] * w * s * (1.0 - s);
      }
    }
    suffix += f.weight[i] * f.color[i];
  }
}

void backward_relevance(const VoxelField& field, const RayForward& f, double dl_drel,
                        FieldGrads& grads) {
  const int n = static_cast<int>(f.weight.size());
  for (int i = 0; i < n; ++i) {
    const double dl_dri = dl_drel * f.weight[i];  // density detached by construction
    for (int j = 0; j < f.stencils[i].count; ++j) {
      const Eigen::Index idx = f.stencils[i].index[j];
      const double s = sigmoid(field.relevance_raw[idx]);
      grads.relevance_raw[idx] += dl_dri * f.stencils[i].weight[j] * s * (1.0 - s);
    }
  }
}

}  // namespace

void accumulate_color_gradients(const VoxelField& field, const Camera& cam, int u, int v,
                                const RenderOptions& opts, const Eigen::Vector3d& dl_dcolor,
                                FieldGrads& grads) {
  Rng rng = pixel_rng(opts, cam, u, v);
  const RayForward f = forward_ray(field, cam, u, v, opts, &rng);
  backward_color(field, f, opts.background, dl_dcolor, grads);
}

void accumulate_relevance_gradients(const VoxelField& field, const Camera& cam, int u, int v,
                                    const RenderOptions& opts, double dl_drel, FieldGrads& grads) {
  Rng rng = pixel_rng(opts, cam, u, v);
  const RayForward f = forward_ray(field, cam, u, v, opts, &rng);
  backward_relevance(field, f, dl_drel, grads);
}

void AdamState::update(Eigen::ArrayXd& param, const Eigen::ArrayXd& grad, double lr, double beta1,
                       double beta2, double eps) {
  ++step;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.square();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  param -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
}

FieldOptimizer::FieldOptimizer(VoxelField& field, FitOptions rgb_opts, FitOptions rel_opts)
    : field_(field),
      rgb_opts_(rgb_opts),
      rel_opts_(rel_opts),
      grads_(field),
      density_state_(field.voxels()),
      color_state_(3 * field.voxels()),
      relevance_state_(field.voxels()) {}

double FieldOptimizer::rgb_step(const std::vector<PosedImage>& views, Rng& rng) {
  if (views.empty()) throw std::invalid_argument("rgb_step: no views");
  RenderOptions ropts;
  ropts.samples_per_ray = rgb_opts_.samples_per_ray;
  ropts.jitter = rgb_opts_.jitter;
  ropts.background = rgb_opts_.background;

  grads_.density_raw.setZero();
  grads_.color_raw.setZero();

  const int B = rgb_opts_.batch_rays;
  double loss = 0.0;
  const double norm = 1.0 / (3.0 * B);
  for (int b = 0; b < B; ++b) {
    const auto& view = views[rng.uniform_int(views.size())];
    const int u = static_cast<int>(rng.uniform_int(view.cam.width));
    const int v = static_cast<int>(rng.uniform_int(view.cam.height));
    ropts.seed = rng.raw();  // fresh jitter stream per ray

    Rng jitter_rng = pixel_rng(ropts, view.cam, u, v);
    const RayForward f = forward_ray(field_, view.cam, u, v, ropts, &jitter_rng);
    const PixelRender r = composite(f, ropts.background);
    Eigen::Vector3d err;
    for (int c = 0; c < 3; ++c) err[c] = r.color[c] - view.image.at(v, u, c);
    loss += err.squaredNorm() * norm;
    backward_color(field_, f, ropts.background, 2.0 * norm * err, grads_);
  }
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "rgb_step: non-finite loss at optimizer step " << field_.fit_steps;
    throw std::runtime_error(msg.str());
  }
  density_state_.update(field_.density_raw, grads_.density_raw, rgb_opts_.lr, rgb_opts_.beta1,
                        rgb_opts_.beta2, rgb_opts_.adam_eps);
  color_state_.update(field_.color_raw, grads_.color_raw, rgb_opts_.lr, rgb_opts_.beta1,
                      rgb_opts_.beta2, rgb_opts_.adam_eps);
  ++field_.fit_steps;
  field_.geometry_ready = true;
  return loss;
}

double FieldOptimizer::relevance_step(const std::vector<PosedImage>& rel_views, Rng& rng) {
  if (rel_views.empty()) throw std::invalid_argument("relevance_step: no supervision maps");
  RenderOptions ropts;
  ropts.samples_per_ray = rel_opts_.samples_per_ray;
  ropts.jitter = rel_opts_.jitter;

  grads_.relevance_raw.setZero();

  const int B = rel_opts_.batch_rays;
  double loss = 0.0;
  const double norm = 1.0 / B;
  for (int b = 0; b < B; ++b) {
    const auto& view = rel_views[rng.uniform_int(rel_views.size())];
    const int u = static_cast<int>(rng.uniform_int(view.cam.width));
    const int v = static_cast<int>(rng.uniform_int(view.cam.height));
    ropts.seed = rng.raw();

    Rng jitter_rng = pixel_rng(ropts, view.cam, u, v);
    const RayForward f = forward_ray(field_, view.cam, u, v, ropts, &jitter_rng);
    const double err = composite(f, ropts.background).relevance - view.image.at(v, u, 0);
    loss += err * err * norm;
    backward_relevance(field_, f, 2.0 * norm * err, grads_);
  }
  if (!std::isfinite(loss)) throw std::runtime_error("relevance_step: non-finite loss");
  relevance_state_.update(field_.relevance_raw, grads_.relevance_raw, rel_opts_.lr, rel_opts_.beta1,
                          rel_opts_.beta2, rel_opts_.adam_eps);
  return loss;
}

FitLog fit_field(VoxelField& field, const std::vector<PosedImage>& views, const FitOptions& opts) {
  if (views.size() < 2) throw std::invalid_argument("fit_field: need at least 2 views");
  for (const auto& v : views)
    if (v.image.channels != 3 || v.image.height != v.cam.height || v.image.width != v.cam.width)
      throw std::invalid_argument("fit_field: view image must be 3-channel at camera resolution");
  FieldOptimizer optim(field, opts, opts);
  Rng rng(mix_seed(opts.seed, 0xf17f1e1dULL));
  FitLog log;
  log.losses.reserve(opts.iters);
  for (int it = 0; it < opts.iters; ++it) log.losses.push_back(optim.rgb_step(views, rng));
  return log;
}

FitLog fit_relevance(VoxelField& field, const std::vector<PosedImage>& rel_views,
                     const FitOptions& opts) {
  if (!field.geometry_ready) throw std::invalid_argument("fit_relevance: field geometry not fitted");
  for (const auto& v : rel_views)
    if (v.image.channels != 1 || v.image.height != v.cam.height || v.image.width != v.cam.width)
      throw std::invalid_argument("fit_relevance: map must be single-channel at camera resolution");
  FieldOptimizer optim(field, opts, opts);
  Rng rng(mix_seed(opts.seed, 0xf17e1ULL));
  FitLog log;
  log.losses.reserve(opts.iters);
  for (int it = 0; it < opts.iters; ++it) log.losses.push_back(optim.relevance_step(rel_views, rng));
  return log;
}

}  // namespace ledit
