// SPDX-License-Identifier: Apache-2.0
#include "ledit/codec.hpp"

#include "doctest.h"
#include "helpers.hpp"

using namespace ledit;

TEST_CASE("identity codec copies both ways") {
  const Codec codec = Codec::identity();
  const Image img = testing::random_image(6, 8, 3, 1);
  const Image lat = encode(codec, img);
  CHECK((lat.data - img.data).abs().maxCoeff() == 0.0);
  const Image back = decode(codec, lat);
  CHECK((back.data - img.data).abs().maxCoeff() == 0.0);
}

TEST_CASE("avgpool encode averages blocks") {
  const Codec codec = Codec::avgpool(2);
  Image img = Image::zeros(2, 2, 1);
  img.at(0, 0, 0) = 0.0;
  img.at(0, 1, 0) = 0.0;
  img.at(1, 0, 0) = 1.0;
  img.at(1, 1, 0) = 1.0;
  const Image lat = encode(codec, img);
  REQUIRE(lat.height == 1);
  REQUIRE(lat.width == 1);
  CHECK(lat.data[0] == doctest::Approx(0.5));

  const Image constant = Image::constant(4, 6, 3, 0.7);
  const Image clat = encode(codec, constant);
  CHECK(clat.height == 2);
  CHECK(clat.width == 3);
  CHECK((clat.data - 0.7).abs().maxCoeff() < 1e-15);
}

TEST_CASE("avgpool decode is nearest-neighbor upsampling") {
  const Codec codec = Codec::avgpool(2);
  Image lat = Image::zeros(1, 2, 1);
  lat.at(0, 0, 0) = 0.25;
  lat.at(0, 1, 0) = 0.75;
  const Image px = decode(codec, lat);
  REQUIRE(px.height == 2);
  REQUIRE(px.width == 4);
  for (int y = 0; y < 2; ++y) {
    CHECK(px.at(y, 0, 0) == 0.25);
    CHECK(px.at(y, 1, 0) == 0.25);
    CHECK(px.at(y, 2, 0) == 0.75);
    CHECK(px.at(y, 3, 0) == 0.75);
  }
}

TEST_CASE("avgpool round-trip properties") {
  const Codec codec = Codec::avgpool(4);
  SUBCASE("encode after decode recovers the latent exactly") {
    const Image lat = testing::random_image(3, 5, 3, 2);
    const Image again = encode(codec, decode(codec, lat));
    CHECK((again.data - lat.data).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("decode-encode is a projection") {
    const Image img = testing::random_image(8, 12, 3, 3);
    const Image once = decode(codec, encode(codec, img));
    const Image twice = decode(codec, encode(codec, once));
    CHECK((twice.data - once.data).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("indivisible dimensions are rejected") {
  const Codec codec = Codec::avgpool(2);
  CHECK_THROWS_AS(encode(codec, Image::zeros(5, 4, 3)), std::invalid_argument);
  CHECK_THROWS_AS(Codec::avgpool(0), std::invalid_argument);
}
