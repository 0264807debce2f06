// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace ledit {

/// Dense H x W x C grid with planar channel storage (channel c occupies
/// data[c*H*W, (c+1)*H*W), row-major pixels within a channel).
/// Used for pixel images, latents, relevance maps and masks alike.
template <typename Scalar>
struct GridT {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  int height = 0;
  int width = 0;
  int channels = 0;
  Array data;

  GridT() = default;
  GridT(int h, int w, int c) : height(h), width(w), channels(c) {
    if (h <= 0 || w <= 0 || c <= 0) throw std::invalid_argument("GridT: non-positive shape");
    data = Array::Zero(static_cast<Eigen::Index>(h) * w * c);
  }

  static GridT zeros(int h, int w, int c) { return GridT(h, w, c); }

  static GridT constant(int h, int w, int c, Scalar v) {
    GridT g(h, w, c);
    g.data.setConstant(v);
    return g;
  }

  Eigen::Index size() const { return data.size(); }
  Eigen::Index pixels() const { return static_cast<Eigen::Index>(height) * width; }

  Scalar& at(int y, int x, int c) { return data[static_cast<Eigen::Index>(c) * pixels() + static_cast<Eigen::Index>(y) * width + x]; }
  Scalar at(int y, int x, int c) const { return data[static_cast<Eigen::Index>(c) * pixels() + static_cast<Eigen::Index>(y) * width + x]; }

  auto channel(int c) { return data.segment(static_cast<Eigen::Index>(c) * pixels(), pixels()); }
  auto channel(int c) const { return data.segment(static_cast<Eigen::Index>(c) * pixels(), pixels()); }

  bool same_shape(const GridT& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

using Grid = GridT<double>;

// PixelImage and LatentImage share the representation; the codec decides the
// resolution relationship between the two.
using Image = Grid;

template <typename Scalar>
void require_same_shape(const GridT<Scalar>& a, const GridT<Scalar>& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

/// Mean over channels, yielding a single-channel grid of the same spatial size.
template <typename Scalar>
GridT<Scalar> channel_mean(const GridT<Scalar>& g) {
  GridT<Scalar> out(g.height, g.width, 1);
  out.data = g.channel(0);
  for (int c = 1; c < g.channels; ++c) out.data += g.channel(c);
  out.data /= static_cast<Scalar>(g.channels);
  return out;
}

/// Per-pixel select between two equally shaped grids, driven by a
/// single-channel 0/1 selector broadcast across channels. Implemented as a
/// copy-through so unselected values stay bit-identical.
template <typename Scalar>
GridT<Scalar> select_by_mask(const GridT<Scalar>& mask1ch, const GridT<Scalar>& when_one,
                             const GridT<Scalar>& when_zero) {
  require_same_shape(when_one, when_zero, "select_by_mask");
  if (mask1ch.channels != 1 || mask1ch.height != when_one.height || mask1ch.width != when_one.width)
    throw std::invalid_argument("select_by_mask: mask must be single-channel at the grids' resolution");
  GridT<Scalar> out = when_zero;
  const Eigen::Index hw = out.pixels();
  for (int c = 0; c < out.channels; ++c) {
    const Eigen::Index base = static_cast<Eigen::Index>(c) * hw;
    for (Eigen::Index i = 0; i < hw; ++i) {
      if (mask1ch.data[i] != Scalar(0)) out.data[base + i] = when_one.data[base + i];
    }
  }
  return out;
}

}  // namespace ledit
