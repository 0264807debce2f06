// SPDX-License-Identifier: Apache-2.0
#include "ledit/denoise.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ledit/rng.hpp"

using namespace ledit;

namespace {

NoiseSchedule quarter_schedule() {
  NoiseSchedule sched;
  sched.num_train_timesteps = 2;
  sched.alpha_bar.resize(2);
  sched.alpha_bar << 0.81, 0.25;
  return sched;
}

GmmDenoiser make_1d_gmm(const NoiseSchedule& sched, std::vector<double> means,
                        std::vector<double> weights, double sigma) {
  GmmMixture mix;
  mix.sigma = sigma;
  mix.weights = std::move(weights);
  for (double m : means) mix.means.push_back(Image::constant(1, 1, 1, m));
  std::map<std::string, GmmMixture> mixtures;
  mixtures.emplace("", mix);
  mixtures.emplace("label", std::move(mix));
  return GmmDenoiser(sched, LatentShape{1, 1, 1}, std::move(mixtures));
}

Image scalar_latent(double v) { return Image::constant(1, 1, 1, v); }

/// Fixed-output denoiser for exercising the guided combination in isolation.
class FixedDenoiser final : public Denoiser {
 public:
  FixedDenoiser(NoiseSchedule sched, Image uncond, Image img, Image img_text)
      : sched_(std::move(sched)), uncond_(std::move(uncond)), img_(std::move(img)), img_text_(std::move(img_text)) {}

  Image predict(const Image&, int, const Condition& cond) const override {
    if (!cond.image) return uncond_;
    return cond.text ? img_text_ : img_;
  }
  const NoiseSchedule& schedule() const override { return sched_; }
  LatentShape latent_shape() const override {
    return LatentShape{uncond_.height, uncond_.width, uncond_.channels};
  }

 private:
  NoiseSchedule sched_;
  Image uncond_, img_, img_text_;
};

}  // namespace

TEST_CASE("procedural oracle inverts forward noising") {
  const NoiseSchedule sched = make_schedule(ScheduleKind::linear_beta, 200);
  auto oracle = testing::make_rect_oracle(sched, 6, 5, 1, 1, 3, 3, Eigen::Vector3d(1, 0, 0));
  const Image x0 = testing::random_image(6, 5, 3, 3);
  Rng rng(4);
  const Image eps = normal_grid(6, 5, 3, rng);
  const int t = 120;
  const Image z = add_noise(x0, eps, t, sched);

  // Text-free condition targets the conditioning image itself.
  const Image pred = oracle.denoiser->predict(z, t, Condition::image_only(x0));
  CHECK((pred.data - eps.data).abs().maxCoeff() < 1e-10);
}

TEST_CASE("procedural oracle null semantics") {
  const NoiseSchedule sched = make_schedule(ScheduleKind::linear_beta, 200);
  auto oracle = testing::make_rect_oracle(sched, 4, 4, 0, 0, 2, 2, Eigen::Vector3d(0, 1, 0));
  const Image zeros = Image::zeros(4, 4, 3);
  CHECK((oracle.denoiser->target(Condition::none()).data - zeros.data).abs().maxCoeff() == 0.0);

  const Image cond = testing::random_image(4, 4, 3, 9);
  const Image target = oracle.denoiser->target(Condition::full(cond, oracle.instruction));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) {
        if (oracle.in_rect(y, x)) CHECK(target.at(y, x, c) == oracle.color[c]);
        else CHECK(target.at(y, x, c) == cond.at(y, x, c));
      }
}

TEST_CASE("one DDIM-implied clean estimate lands on the oracle target") {
  const NoiseSchedule sched = make_schedule(ScheduleKind::linear_beta, 500);
  auto oracle = testing::make_rect_oracle(sched, 5, 7, 2, 1, 5, 4, Eigen::Vector3d(0.2, 0.9, 0.4));
  const Image cond = testing::random_image(5, 7, 3, 21);
  const Condition full = Condition::full(cond, oracle.instruction);
  const Image xhat = oracle.denoiser->target(full);

  Rng rng(5);
  const int t = 333;
  const Image z = add_noise(testing::random_image(5, 7, 3, 22), normal_grid(5, 7, 3, rng), t, sched);
  const Image eps = oracle.denoiser->predict(z, t, full);
  const double ab = sched.alpha_bar_at(t);
  Image implied = z;
  implied.data = (z.data - std::sqrt(1.0 - ab) * eps.data) / std::sqrt(ab);
  CHECK((implied.data - xhat.data).abs().maxCoeff() /
            std::max(1.0, xhat.data.abs().maxCoeff()) < 1e-6);
}

TEST_CASE("gmm oracle symmetry and closed form") {
  const NoiseSchedule sched = quarter_schedule();
  const int t = 1;  // alpha_bar = 0.25
  const GmmDenoiser gmm = make_1d_gmm(sched, {1.0, -1.0}, {0.5, 0.5}, 0.0);

  SUBCASE("symmetric mixture at the origin predicts zero") {
    const Image pred = gmm.predict(scalar_latent(0.0), t, Condition::none());
    CHECK(std::abs(pred.data[0]) < 1e-14);
  }
  SUBCASE("posterior mean matches tanh closed form and quadrature") {
    const double z = 0.8660254;
    const double expected_mean = std::tanh(std::sqrt(0.25) * z / (1.0 - 0.25));
    const Image mean = gmm.posterior_mean(scalar_latent(z), t, Condition::none());
    CHECK(mean.data[0] == doctest::Approx(expected_mean).epsilon(1e-12));

    const double discrete = testing::discrete_posterior_mean_1d({1.0, -1.0}, {0.5, 0.5}, 0.25, z);
    CHECK(mean.data[0] == doctest::Approx(discrete).epsilon(1e-12));

    const Image pred = gmm.predict(scalar_latent(z), t, Condition::none());
    CHECK(pred.data[0] == doctest::Approx((z - 0.5 * expected_mean) / std::sqrt(0.75)).epsilon(1e-12));
  }
}

TEST_CASE("gmm posterior matches brute-force quadrature with component spread") {
  const NoiseSchedule sched = quarter_schedule();
  const std::vector<double> means = {-1.3, 0.4, 1.7};
  const std::vector<double> weights = {0.2, 0.5, 0.3};
  const double sigma = 0.6;
  GmmMixture mix;
  mix.sigma = sigma;
  for (double m : means) mix.means.push_back(scalar_latent(m));
  mix.weights = weights;
  std::map<std::string, GmmMixture> mixtures;
  mixtures.emplace("", std::move(mix));
  const GmmDenoiser gmm(sched, LatentShape{1, 1, 1}, std::move(mixtures));

  for (const double z : {-2.0, -0.3, 0.0, 0.9, 2.4}) {
    for (const int t : {0, 1}) {
      const double ab = sched.alpha_bar_at(t);
      const double expected =
          testing::quadrature_posterior_mean_1d(means, weights, sigma, ab, z);
      const Image mean = gmm.posterior_mean(scalar_latent(z), t, Condition::none());
      CHECK(mean.data[0] == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("single-component gmm equals the procedural oracle") {
  const NoiseSchedule sched = make_schedule(ScheduleKind::linear_beta, 100);
  const Image mu = testing::random_image(3, 4, 2, 31);
  GmmMixture mix;
  mix.sigma = 0.0;
  mix.means.push_back(mu);
  mix.weights = {1.0};
  std::map<std::string, GmmMixture> mixtures;
  mixtures.emplace("", std::move(mix));
  const GmmDenoiser gmm(sched, LatentShape{3, 4, 2}, std::move(mixtures));

  const ProceduralDenoiser proc(sched, LatentShape{3, 4, 2},
                                [mu](const Image&, const std::string&) { return mu; });

  Rng rng(8);
  const Image z = normal_grid(3, 4, 2, rng);
  for (const int t : {3, 47, 99}) {
    const Image a = gmm.predict(z, t, Condition::none());
    // Procedural image-free target is zero, so compare through the full
    // condition whose target function returns mu.
    const Image b = proc.predict(z, t, Condition::full(Image::zeros(3, 4, 2), "x"));
    CHECK((a.data - b.data).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("predict rejects bad inputs") {
  const NoiseSchedule sched = make_schedule(ScheduleKind::linear_beta, 100);
  auto oracle = testing::make_rect_oracle(sched, 4, 4, 0, 0, 1, 1, Eigen::Vector3d(1, 1, 1));
  const Image z = Image::zeros(4, 4, 3);
  CHECK_THROWS_AS(oracle.denoiser->predict(z, kNoNoiseTimestep, Condition::none()),
                  std::invalid_argument);
  CHECK_THROWS_AS(oracle.denoiser->predict(z, 100, Condition::none()), std::invalid_argument);
  CHECK_THROWS_AS(oracle.denoiser->predict(Image::zeros(3, 4, 3), 5, Condition::none()),
                  std::invalid_argument);
}

TEST_CASE("guided combination") {
  const NoiseSchedule sched = make_schedule(ScheduleKind::linear_beta, 100);

  SUBCASE("direct substitution") {
    const FixedDenoiser fixed(sched, scalar_latent(0.0), scalar_latent(1.0), scalar_latent(3.0));
    const Image out = guided_epsilon(fixed, scalar_latent(0.0), 10, scalar_latent(0.0), "go",
                                     GuidanceScales{1.5, 7.5});
    CHECK(out.data[0] == doctest::Approx(16.5).epsilon(1e-12));
  }
  SUBCASE("scales off reduce to the unconditional prediction") {
    const FixedDenoiser fixed(sched, scalar_latent(0.7), scalar_latent(-2.0), scalar_latent(5.0));
    const Image out = guided_epsilon(fixed, scalar_latent(0.0), 10, scalar_latent(0.0), "go",
                                     GuidanceScales{0.0, 0.0});
    CHECK(out.data[0] == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("unit scales telescope to the fully conditioned prediction") {
    const Image a = testing::random_image(4, 6, 3, 41, -2.0, 2.0);
    const Image b = testing::random_image(4, 6, 3, 42, -2.0, 2.0);
    const Image c = testing::random_image(4, 6, 3, 43, -2.0, 2.0);
    const FixedDenoiser fixed(sched, a, b, c);
    const Image out = guided_epsilon(fixed, Image::zeros(4, 6, 3), 10, Image::zeros(4, 6, 3), "go",
                                     GuidanceScales{1.0, 1.0});
    CHECK((out.data - c.data).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("affine in the three raw predictions") {
    const Image a = testing::random_image(2, 3, 1, 51, -1.0, 1.0);
    const Image b = testing::random_image(2, 3, 1, 52, -1.0, 1.0);
    const Image c = testing::random_image(2, 3, 1, 53, -1.0, 1.0);
    const FixedDenoiser fixed(sched, a, b, c);
    const GuidanceScales scales{1.7, 4.2};
    const Image out = guided_epsilon(fixed, Image::zeros(2, 3, 1), 10, Image::zeros(2, 3, 1), "go", scales);
    const Eigen::ArrayXd expected = (1.0 - scales.image) * a.data +
                                    (scales.image - scales.text) * b.data + scales.text * c.data;
    CHECK((out.data - expected).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("negative scales are rejected") {
    const FixedDenoiser fixed(sched, scalar_latent(0), scalar_latent(0), scalar_latent(0));
    CHECK_THROWS_AS(guided_epsilon(fixed, scalar_latent(0), 10, scalar_latent(0), "go",
                                   GuidanceScales{-1.0, 1.0}),
                    std::invalid_argument);
  }
}
