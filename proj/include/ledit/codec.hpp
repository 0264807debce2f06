// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

#include "ledit/grid.hpp"

namespace ledit {

enum class CodecKind { identity, avgpool };

/// Encoder/decoder pair between pixel and latent resolution. identity copies;
/// avgpool averages factor x factor blocks on encode and nearest-neighbor
/// upsamples on decode.
struct Codec {
  CodecKind kind = CodecKind::identity;
  int factor = 1;

  static Codec identity() { return Codec{CodecKind::identity, 1}; }

  static Codec avgpool(int factor) {
    if (factor < 1) throw std::invalid_argument("Codec: factor must be >= 1");
    return Codec{CodecKind::avgpool, factor};
  }

  void check_divisible(int h, int w) const {
    if (h % factor != 0 || w % factor != 0)
      throw std::invalid_argument("Codec: image dims not divisible by factor");
  }
};

inline Image encode(const Codec& codec, const Image& image) {
  if (codec.kind == CodecKind::identity) return image;
  codec.check_divisible(image.height, image.width);
  const int f = codec.factor;
  Image lat(image.height / f, image.width / f, image.channels);
  const double inv = 1.0 / (f * f);
  for (int c = 0; c < image.channels; ++c)
    for (int y = 0; y < lat.height; ++y)
      for (int x = 0; x < lat.width; ++x) {
        double sum = 0.0;
        for (int dy = 0; dy < f; ++dy)
          for (int dx = 0; dx < f; ++dx) sum += image.at(y * f + dy, x * f + dx, c);
        lat.at(y, x, c) = sum * inv;
      }
  return lat;
}

/// Nearest-neighbor upsample of any grid by an integer factor.
template <typename Scalar>
GridT<Scalar> upsample_nearest(const GridT<Scalar>& g, int factor) {
  if (factor == 1) return g;
  GridT<Scalar> out(g.height * factor, g.width * factor, g.channels);
  for (int c = 0; c < g.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) out.at(y, x, c) = g.at(y / factor, x / factor, c);
  return out;
}

inline Image decode(const Codec& codec, const Image& latent) {
  if (codec.kind == CodecKind::identity) return latent;
  return upsample_nearest(latent, codec.factor);
}

}  // namespace ledit
