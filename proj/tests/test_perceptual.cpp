#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kpst/core/archive.hpp"
#include "kpst/core/errors.hpp"
#include "kpst/perceptual/vgg16.hpp"
#include "oracles.hpp"

using namespace kpst;
using namespace kpst::perceptual;

namespace {

nn::Var random_image(int size, Rng& rng) {
  Tensor t({3, size, size});
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return nn::Var(std::move(t), false);
}

std::filesystem::path temp_path(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "kpst_perceptual";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("layer names round-trip and unknown names are rejected") {
  CHECK(layer_from_name("conv2_2") == VggLayer::conv2_2);
  CHECK(layer_from_name("conv4_1") == VggLayer::conv4_1);
  for (VggLayer l : {VggLayer::conv1_1, VggLayer::conv1_2, VggLayer::conv2_1, VggLayer::conv2_2,
                     VggLayer::conv3_2, VggLayer::conv4_1}) {
    CHECK(layer_from_name(layer_name(l)) == l);
  }
  CHECK_THROWS_AS(layer_from_name("conv3_1"), UsageError);
  CHECK_THROWS_AS(layer_from_name("fc6"), UsageError);
  CHECK_THROWS_AS(layer_from_name(""), UsageError);
}

TEST_CASE("feature map shapes for a 256x256 input follow the backbone downsampling") {
  Vgg16 net;
  Rng rng(11);
  nn::Var x = random_image(256, rng);
  auto maps = net.extract_features(
      x, {VggLayer::conv2_2, VggLayer::conv3_2, VggLayer::conv4_1, VggLayer::conv1_1});
  REQUIRE(maps.size() == 4);
  CHECK(maps[0].val().shape() == std::vector<int>{128, 128, 128});
  CHECK(maps[1].val().shape() == std::vector<int>{256, 64, 64});
  CHECK(maps[2].val().shape() == std::vector<int>{512, 32, 32});
  CHECK(maps[3].val().shape() == std::vector<int>{64, 256, 256});
}

TEST_CASE("extraction is deterministic and the backbone stays frozen") {
  Vgg16 net;
  Rng rng(12);
  Tensor img({3, 32, 32});
  for (int64_t i = 0; i < img.numel(); ++i) img[i] = static_cast<float>(rng.uniform(-1.0, 1.0));

  auto a = net.extract_features(nn::Var(img, false), {VggLayer::conv2_2});
  auto b = net.extract_features(nn::Var(img, false), {VggLayer::conv2_2});
  REQUIRE(a[0].val().numel() == b[0].val().numel());
  for (int64_t i = 0; i < a[0].val().numel(); ++i) REQUIRE(a[0].val()[i] == b[0].val()[i]);

  // Backprop through a loss on the features, then re-extract: unchanged.
  nn::Var x(img, true);
  auto f = net.extract_features(x, {VggLayer::conv2_2});
  nn::backward(nn::mean_all(f[0]));
  CHECK(x.has_grad());
  auto c = net.extract_features(nn::Var(img, false), {VggLayer::conv2_2});
  for (int64_t i = 0; i < a[0].val().numel(); ++i) REQUIRE(a[0].val()[i] == c[0].val()[i]);
}

TEST_CASE("weights archive round-trips and rejects foreign files") {
  auto path = temp_path("vgg_roundtrip.bin");
  Vgg16 seeded;
  seeded.save(path);
  Vgg16 loaded(path);
  CHECK(loaded.pretrained());
  CHECK_FALSE(seeded.pretrained());

  Rng rng(13);
  Tensor img({3, 16, 16});
  for (int64_t i = 0; i < img.numel(); ++i) img[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  auto a = seeded.extract_features(nn::Var(img, false), {VggLayer::conv1_2});
  auto b = loaded.extract_features(nn::Var(img, false), {VggLayer::conv1_2});
  for (int64_t i = 0; i < a[0].val().numel(); ++i) REQUIRE(a[0].val()[i] == b[0].val()[i]);

  auto alien = temp_path("alien.bin");
  {
    Archive other;
    other.strings["schema"] = "something-else";
    other.save(alien);
  }
  CHECK_THROWS_AS(Vgg16{alien}, CheckpointError);

  auto garbage = temp_path("garbage.bin");
  std::ofstream(garbage) << "not an archive";
  CHECK_THROWS_AS(Vgg16{garbage}, CheckpointError);
}

TEST_CASE("gram: zero map, hand-evaluated outer product, and loop oracle") {
  nn::Var zero(Tensor::zeros({4, 3, 3}), false);
  Tensor gz = gram(zero).val();
  CHECK(gz.shape() == std::vector<int>{4, 4});
  for (int64_t i = 0; i < gz.numel(); ++i) CHECK(gz[i] == 0.0f);

  Tensor two({2, 1, 1});
  two[0] = 2.0f;
  two[1] = 3.0f;
  Tensor g2 = gram(nn::Var(two, false)).val();
  CHECK(g2[0] == doctest::Approx(4.0));
  CHECK(g2[1] == doctest::Approx(6.0));
  CHECK(g2[2] == doctest::Approx(6.0));
  CHECK(g2[3] == doctest::Approx(9.0));

  Rng rng(14);
  Tensor f = oracles::random_tensor({3, 4, 4}, rng);
  Tensor got = gram(nn::Var(f, false)).val();
  Tensor want = oracles::gram_ref(f);
  for (int64_t i = 0; i < got.numel(); ++i) {
    REQUIRE(std::fabs(got[i] - want[i]) <= 1e-5 * std::max(1.0f, std::fabs(want[i])));
  }
}

TEST_CASE("gram: symmetric, PSD, permutation-invariant, quadratic in scale") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    int c = 2 + static_cast<int>(rng.uniform_int(6));
    int h = 1 + static_cast<int>(rng.uniform_int(7));
    int w = 1 + static_cast<int>(rng.uniform_int(7));
    Tensor f = oracles::random_tensor({c, h, w}, rng);
    Tensor g = gram(nn::Var(f, false)).val();

    double trace = 0.0;
    for (int i = 0; i < c; ++i) trace += g[i * c + i];
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) REQUIRE(g[i * c + j] == g[j * c + i]);
    }
    // x'Gx = |V'x|^2 must be nonnegative up to roundoff.
    for (int probe = 0; probe < 10; ++probe) {
      std::vector<double> x(static_cast<size_t>(c));
      for (auto& v : x) v = rng.uniform(-1.0, 1.0);
      double q = 0.0;
      for (int i = 0; i < c; ++i) {
        for (int j = 0; j < c; ++j) q += x[static_cast<size_t>(i)] * g[i * c + j] * x[static_cast<size_t>(j)];
      }
      REQUIRE(q >= -1e-6 * trace);
    }

    // Same spatial permutation applied to every channel leaves G unchanged.
    std::vector<int> perm(static_cast<size_t>(h * w));
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    rng.shuffle(perm);
    Tensor fp({c, h, w});
    for (int ch = 0; ch < c; ++ch) {
      for (int i = 0; i < h * w; ++i) {
        fp[ch * h * w + i] = f[ch * h * w + perm[static_cast<size_t>(i)]];
      }
    }
    Tensor gp = gram(nn::Var(fp, false)).val();
    for (int64_t i = 0; i < g.numel(); ++i) REQUIRE(gp[i] == doctest::Approx(g[i]).epsilon(1e-5));

    // gram(s f) = s^2 gram(f)
    float s = static_cast<float>(rng.uniform(0.5, 2.0));
    Tensor fs = f;
    for (int64_t i = 0; i < fs.numel(); ++i) fs[i] *= s;
    Tensor gs = gram(nn::Var(fs, false)).val();
    for (int64_t i = 0; i < g.numel(); ++i) {
      REQUIRE(gs[i] == doctest::Approx(s * s * g[i]).epsilon(1e-4));
    }
  }
}
