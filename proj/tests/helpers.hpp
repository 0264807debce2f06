// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <set>

#include "ledit/denoise.hpp"
#include "ledit/field.hpp"
#include "ledit/rng.hpp"
#include "ledit/schedule.hpp"

namespace ledit::testing {

inline Image random_image(int h, int w, int c, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Rng rng(seed);
  Image img(h, w, c);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data[i] = rng.uniform(lo, hi);
  return img;
}

/// FNV-1a over raw bytes; used to assert parameter arrays are untouched.
inline std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash_array(const Eigen::ArrayXd& a) {
  return fnv1a(a.data(), static_cast<std::size_t>(a.size()) * sizeof(double));
}

/// Procedural denoiser whose instruction recolors a rectangle of the
/// conditioning latent; the rectangle is the known edit support.
struct RectEditOracle {
  std::unique_ptr<ProceduralDenoiser> denoiser;
  std::string instruction;
  int x0, y0, x1, y1;  // half-open latent rect
  Eigen::Vector3d color;

  bool in_rect(int y, int x) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

inline RectEditOracle make_rect_oracle(const NoiseSchedule& sched, int h, int w, int x0, int y0,
                                       int x1, int y1, const Eigen::Vector3d& color,
                                       const std::string& instruction = "recolor the patch") {
  RectEditOracle oracle;
  oracle.instruction = instruction;
  oracle.x0 = x0;
  oracle.y0 = y0;
  oracle.x1 = x1;
  oracle.y1 = y1;
  oracle.color = color;
  EditTargetFn fn = [x0, y0, x1, y1, color](const Image& cond, const std::string&) {
    Image target = cond;
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        for (int c = 0; c < std::min(3, cond.channels); ++c) target.at(y, x, c) = color[c];
    return target;
  };
  oracle.denoiser =
      std::make_unique<ProceduralDenoiser>(sched, LatentShape{h, w, 3}, std::move(fn));
  return oracle;
}

/// Brute-force 1D posterior mean over a Gaussian-mixture prior by trapezoid
/// quadrature: E[x0|z] = Int x p(x) N(z; sqrt(ab) x, 1-ab) dx / normalizer.
inline double quadrature_posterior_mean_1d(const std::vector<double>& means,
                                           const std::vector<double>& weights, double sigma,
                                           double alpha_bar, double z, double span = 12.0,
                                           int grid = 400001) {
  const double lo = -span, hi = span;
  const double step = (hi - lo) / (grid - 1);
  const double lik_var = 1.0 - alpha_bar;
  long double num = 0.0L, den = 0.0L;
  for (int i = 0; i < grid; ++i) {
    const double x = lo + i * step;
    double prior = 0.0;
    for (std::size_t k = 0; k < means.size(); ++k) {
      const double d = (x - means[k]) / sigma;
      prior += weights[k] / sigma * std::exp(-0.5 * d * d);
    }
    const double resid = z - std::sqrt(alpha_bar) * x;
    const double lik = std::exp(-0.5 * resid * resid / lik_var);
    const double trap = (i == 0 || i == grid - 1) ? 0.5 : 1.0;
    num += static_cast<long double>(trap * x * prior * lik);
    den += static_cast<long double>(trap * prior * lik);
  }
  return static_cast<double>(num / den);
}

/// Discrete-prior variant for sigma = 0 (point masses at the means).
inline double discrete_posterior_mean_1d(const std::vector<double>& means,
                                         const std::vector<double>& weights, double alpha_bar,
                                         double z) {
  const double lik_var = 1.0 - alpha_bar;
  long double num = 0.0L, den = 0.0L;
  for (std::size_t k = 0; k < means.size(); ++k) {
    const double resid = z - std::sqrt(alpha_bar) * means[k];
    const long double lik = weights[k] * std::exp(-0.5 * resid * resid / lik_var);
    num += means[k] * lik;
    den += lik;
  }
  return static_cast<double>(num / den);
}

/// Independent volumetric quadrature for cross-checks: transmittance by
/// direct exponential of the prefix sum rather than the running product.
struct BruteForcePixel {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double alpha = 0.0;
  double relevance = 0.0;
  double final_transmittance = 1.0;
};

inline BruteForcePixel brute_force_render(const VoxelField& field, const Camera& cam, int u, int v,
                                          int n_samples, const Eigen::Vector3d& background) {
  const SampledRay sr = sample_ray(cam, u, v, n_samples, Jitter::none, nullptr);
  BruteForcePixel out;
  for (int i = 0; i < n_samples; ++i) {
    double acc = 0.0;  // sum_{j<i} sigma_j delta_j, recomputed from scratch
    for (int j = 0; j < i; ++j) {
      const Eigen::Vector3d pj = sr.ray.origin + sr.t[j] * sr.ray.dir;
      acc += sample_field(field, pj).sigma * sr.delta[j];
    }
    const double T_i = std::exp(-acc);
    const Eigen::Vector3d p = sr.ray.origin + sr.t[i] * sr.ray.dir;
    const FieldSample s = sample_field(field, p);
    const double w = T_i * (1.0 - std::exp(-s.sigma * sr.delta[i]));
    out.color += w * s.color;
    out.relevance += w * s.relevance;
    out.alpha += w;
  }
  double acc = 0.0;
  for (int j = 0; j < n_samples; ++j) {
    const Eigen::Vector3d pj = sr.ray.origin + sr.t[j] * sr.ray.dir;
    acc += sample_field(field, pj).sigma * sr.delta[j];
  }
  out.final_transmittance = std::exp(-acc);
  out.color += out.final_transmittance * background;
  return out;
}

inline VoxelField random_field(const Eigen::Vector3i& dims, std::uint64_t seed) {
  VoxelField f = VoxelField::make(dims, Eigen::Vector3d(-1, -1, -1), Eigen::Vector3d(1, 1, 1));
  Rng rng(seed);
  for (Eigen::Index i = 0; i < f.density_raw.size(); ++i) f.density_raw[i] = rng.uniform(-2.0, 2.0);
  for (Eigen::Index i = 0; i < f.color_raw.size(); ++i) f.color_raw[i] = rng.uniform(-2.0, 2.0);
  for (Eigen::Index i = 0; i < f.relevance_raw.size(); ++i) f.relevance_raw[i] = rng.uniform(-2.0, 2.0);
  f.geometry_ready = true;
  return f;
}

}  // namespace ledit::testing
