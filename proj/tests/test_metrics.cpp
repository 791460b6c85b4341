#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kgas/error.hpp"
#include "kgas/image_io.hpp"
#include "kgas/metrics.hpp"
#include "kgas/rng.hpp"
#include "oracles.hpp"

using namespace kgas;

namespace {

ImageRGBA random_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  ImageRGBA img = ImageRGBA::blank(w, h);
  for (auto& v : img.rgb) v = rng.uniform();
  for (auto& v : img.alpha) v = rng.uniform();
  return img;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "kgas_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("color loss is the RMS over RGB channels") {
  ImageRGBA a = ImageRGBA::blank(2, 1);
  ImageRGBA b = ImageRGBA::blank(2, 1);
  // one channel off by 0.6, the other five equal
  a.rgb = {0.6, 0.0, 0.0, 0.0, 0.0, 0.0};
  b.rgb = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(color_loss(a, b) == doctest::Approx(std::sqrt(0.36 / 6.0)).epsilon(1e-12));
  CHECK(color_loss(a, a) == 0.0);

  ImageRGBA c = ImageRGBA::blank(3, 1);
  CHECK_THROWS_AS(color_loss(a, c), ValidationError);
}

TEST_CASE("mask loss compares alpha against a binary reference") {
  const std::vector<double> pred = {0.0, 1.0, 0.5, 0.25};
  const std::vector<double> gt = {0.0, 1.0, 1.0, 0.0};
  const double expect =
      std::sqrt((0.0 + 0.0 + 0.25 + 0.0625) / 4.0);
  CHECK(mask_loss(pred, gt) == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(mask_loss(pred, {0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(mask_loss(pred, {0.0, 1.0, 0.5, 0.0}), ValidationError);
}

TEST_CASE("ssim of an image with itself is exactly one") {
  const ImageRGBA img = random_image(24, 18, 9);
  CHECK(ssim(img, img) == 1.0);
  CHECK(ssim_windowed(img, img, 7, 3) == 1.0);
}

TEST_CASE("ssim matches the dense reference implementation") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const ImageRGBA a = random_image(20, 16, seed);
    const ImageRGBA b = random_image(20, 16, seed + 100);
    const double got = ssim(a, b);
    const double ref = oracles::ssim_ref(a.rgb, b.rgb, a.width, a.height, 11, 1);
    CHECK(got == doctest::Approx(ref).epsilon(1e-10));
    // unrelated noise images score near zero, possibly slightly negative
    CHECK(got < 1.0);
    const double wgot = ssim_windowed(a, b, 7, 2);
    const double wref = oracles::ssim_ref(a.rgb, b.rgb, a.width, a.height, 7, 2);
    CHECK(wgot == doctest::Approx(wref).epsilon(1e-10));
  }
}

TEST_CASE("ssim degrades monotonically with added noise") {
  const ImageRGBA base = random_image(32, 32, 21);
  ImageRGBA small_noise = base;
  ImageRGBA large_noise = base;
  Rng rng(22);
  for (std::size_t i = 0; i < base.rgb.size(); ++i) {
    const double n = rng.uniform(-1.0, 1.0);
    small_noise.rgb[i] = std::clamp(base.rgb[i] + 0.02 * n, 0.0, 1.0);
    large_noise.rgb[i] = std::clamp(base.rgb[i] + 0.3 * n, 0.0, 1.0);
  }
  CHECK(ssim(base, small_noise) > ssim(base, large_noise));
}

TEST_CASE("ssim rejects images smaller than the window") {
  const ImageRGBA tiny = random_image(8, 8, 30);
  CHECK_THROWS_AS(ssim(tiny, tiny), ValidationError);
  CHECK_THROWS_AS(ssim_windowed(tiny, tiny, 0, 1), ValidationError);
  CHECK_THROWS_AS(ssim_windowed(tiny, tiny, 4, 0), ValidationError);
}

TEST_CASE("s3im is deterministic per seed and exact on identical inputs") {
  const ImageRGBA a = random_image(24, 24, 40);
  const ImageRGBA b = random_image(24, 24, 41);
  const double s1 = s3im(a, b, 10, 4, 4, 7);
  const double s2 = s3im(a, b, 10, 4, 4, 7);
  CHECK(s1 == s2);
  const double other_seed = s3im(a, b, 10, 4, 4, 8);
  CHECK(s1 != other_seed);

  CHECK(s3im(a, a, 10, 4, 4, 7) == 1.0);

  // with one shuffle (the identity) s3im reduces to windowed ssim
  const double one = s3im(a, b, 1, 4, 4, 7);
  CHECK(one == doctest::Approx(ssim_windowed(a, b, 4, 4)).epsilon(1e-12));

  CHECK_THROWS_AS(s3im(a, b, 0, 4, 4, 7), ValidationError);
}

TEST_CASE("psnr hits the 20 dB reference case and +inf on equality") {
  ImageRGBA a = ImageRGBA::blank(4, 4);
  ImageRGBA b = ImageRGBA::blank(4, 4);
  for (auto& v : a.rgb) v = 0.5;
  for (auto& v : b.rgb) v = 0.4;  // uniform 0.1 error -> MSE 0.01 -> 20 dB
  CHECK(std::abs(psnr(a, b) - 20.0) <= 1e-9);
  CHECK(std::isinf(psnr(a, a)));
}

TEST_CASE("total loss reproduces its formula to 1e-12") {
  LossWeights w;
  w.lambda1 = 0.9;
  w.lambda2 = 1.1;
  w.lambda3 = 0.7;
  const double color = 0.12, mask = 0.05, sv = 0.83, s3 = 0.76, ps = 18.0,
               nll = 2.4;
  const LossReport r = total_loss(color, mask, sv, s3, ps, nll, w);
  const double expect = w.lambda1 * (color + w.alpha1 * mask) +
                        w.lambda2 * (w.alpha2 * (1.0 - sv) +
                                     w.alpha3 * (1.0 - s3) + w.alpha4 * 0.0) +
                        w.lambda3 * (w.alpha_joint * nll);
  CHECK(std::abs(r.total - expect) <= 1e-12);
  CHECK(r.color == color);
  CHECK(r.mask == mask);
  CHECK(r.ssim == sv);
  CHECK(r.s3im == s3);
  CHECK(r.psnr == ps);
  CHECK(r.joint_nll == nll);

  // default weights: alpha1 = 0.5, alpha2 = 0.2, alpha3 = 0.5, alpha4 = 0.3,
  // alpha_joint = 0.06
  const LossWeights d;
  CHECK(d.alpha1 == 0.5);
  CHECK(d.alpha2 == 0.2);
  CHECK(d.alpha3 == 0.5);
  CHECK(d.alpha4 == 0.3);
  CHECK(d.alpha_joint == 0.06);

  LossWeights bad;
  bad.lambda1 = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  LossWeights bad2;
  bad2.alpha_joint = -0.5;
  CHECK_THROWS_AS(bad2.validate(), ValidationError);
}

TEST_CASE("metric files round-trip in order") {
  const std::vector<std::pair<std::string, double>> metrics = {
      {"color", 0.123456789123},
      {"psnr", 20.0},
      {"total", 1e-7},
  };
  const auto path = temp_file("metrics.txt");
  save_metrics(metrics, path.string());
  const auto back = load_metrics(path.string());
  REQUIRE(back.size() == 3);
  CHECK(back[0].first == "color");
  CHECK(back[1].first == "psnr");
  CHECK(back[2].first == "total");
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(back[i].second == doctest::Approx(metrics[i].second).epsilon(1e-8));

  CHECK(format_metric(20.0) == "20");
  CHECK(format_metric(0.5) == "0.5");
  // 9 significant digits
  CHECK(format_metric(0.123456789123) == "0.123456789");
}
