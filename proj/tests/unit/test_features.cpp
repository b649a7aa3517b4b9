#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "deepstq/features.hpp"

namespace deepstq {
namespace {

Tensor random_tensor(std::mt19937& rng, int size = 224) {
  Image8 img(size, size, 3);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng());
  return preprocess(img, PixelKind::Rgb, size);
}

// Recomputes the stub's documented projection from scratch.
std::vector<float> stub_by_formula(const Tensor& x, std::uint64_t seed, int taps, int dim) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t n = x.chw.size();
  std::vector<float> out(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    double acc = 0;
    for (int t = 0; t < taps; ++t) {
      const std::uint64_t h = mix(seed + static_cast<std::uint64_t>(j) * taps + t);
      acc += ((h >> 63) ? -1.0 : 1.0) * x.chw[h % n];
    }
    out[static_cast<std::size_t>(j)] = static_cast<float>(std::max(0.0, acc / std::sqrt(static_cast<double>(taps))));
  }
  return out;
}

class FixedBackend : public FeatureBackend {
 public:
  FixedBackend(int declared, int produced, float value) : declared_(declared), produced_(produced), value_(value) {}
  std::string identity() const override { return "fixed"; }
  int output_dim() const override { return declared_; }
  std::vector<std::vector<float>> infer(std::span<const Tensor> batch) const override {
    return std::vector<std::vector<float>>(batch.size(), std::vector<float>(static_cast<std::size_t>(produced_), value_));
  }

 private:
  int declared_, produced_;
  float value_;
};

TEST(Preprocess, GrayZeroReplicatedAndNormalised) {
  const auto t = preprocess(Image8(224, 224, 1, 0), PixelKind::Gray);
  ASSERT_EQ(t.chw.size(), 3u * 224 * 224);
  for (int c = 0; c < 3; ++c) {
    const float want = -kChannelMean[c] / kChannelStd[c];
    EXPECT_FLOAT_EQ(t.at(c, 0, 0), want);
    EXPECT_FLOAT_EQ(t.at(c, 223, 111), want);
  }
}

TEST(Preprocess, MeanPixelMapsToZero) {
  Image<float> img(224, 224, 3);
  for (int r = 0; r < 224; ++r)
    for (int c = 0; c < 224; ++c) {
      img.at(r, c, 0) = 123.675f;
      img.at(r, c, 1) = 116.28f;
      img.at(r, c, 2) = 103.53f;
    }
  const auto t = preprocess(img, PixelKind::Rgb);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(t.at(c, 10, 20), 0.0f, 1e-6f);
}

TEST(Preprocess, GrayWhite) {
  const auto t = preprocess(Image8(224, 224, 1, 255), PixelKind::Gray);
  EXPECT_NEAR(t.at(0, 5, 5), (1.0 - 0.485) / 0.229, 1e-5);
  EXPECT_NEAR(t.at(0, 5, 5), 2.2489, 1e-4);
}

TEST(Preprocess, RgbChannelsStayPlanar) {
  Image8 img(224, 224, 3);
  img.at(3, 4, 0) = 255;
  const auto t = preprocess(img, PixelKind::Rgb);
  EXPECT_NEAR(t.at(0, 3, 4), (1.0 - 0.485) / 0.229, 1e-5);
  EXPECT_NEAR(t.at(1, 3, 4), -0.456 / 0.224, 1e-5);
}

TEST(Preprocess, WrongGeometry) {
  EXPECT_THROW(preprocess(Image8(100, 224, 3), PixelKind::Rgb), GeometryError);
  EXPECT_THROW(preprocess(Image8(224, 224, 3), PixelKind::Gray), GeometryError);
  EXPECT_THROW(preprocess(Image8(224, 224, 1), PixelKind::Rgb), GeometryError);
}

TEST(Extract, EmptyBatch) {
  const StubBackend stub;
  EXPECT_TRUE(extract(stub, {}, Stream::GlobalFrame).empty());
}

TEST(StubBackend, MatchesDocumentedFormula) {
  std::mt19937 rng(21);
  const auto x = random_tensor(rng);
  const StubBackend stub;
  const auto got = extract(stub, std::span(&x, 1), Stream::LocalDiff, 7);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].stream, Stream::LocalDiff);
  EXPECT_EQ(got[0].source_index, 7);
  ASSERT_EQ(got[0].values.size(), static_cast<std::size_t>(kFeatureDim));
  const auto want = stub_by_formula(x, StubBackend::kDefaultSeed, StubBackend::kDefaultTaps, kFeatureDim);
  EXPECT_EQ(got[0].values, want);
  int positive = 0;
  for (float v : want) positive += v > 0;
  EXPECT_GT(positive, 0);
  EXPECT_LT(positive, kFeatureDim);
}

TEST(StubBackend, OtherSeedDiffers) {
  std::mt19937 rng(22);
  const auto x = random_tensor(rng);
  const auto a = StubBackend(1).infer(std::span(&x, 1));
  const auto b = StubBackend(2).infer(std::span(&x, 1));
  EXPECT_NE(a, b);
  EXPECT_EQ(a[0], stub_by_formula(x, 1, StubBackend::kDefaultTaps, kFeatureDim));
}

TEST(StubBackend, DeterministicAndBatchEquivalent) {
  std::mt19937 rng(23);
  std::vector<Tensor> batch = {random_tensor(rng), random_tensor(rng), random_tensor(rng)};
  const StubBackend stub;
  const auto once = extract(stub, batch, Stream::GlobalFrame);
  const auto twice = extract(stub, batch, Stream::GlobalFrame);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(once[i].values, twice[i].values);
    const auto single = extract(stub, std::span(&batch[i], 1), Stream::GlobalFrame);
    for (std::size_t k = 0; k < single[0].values.size(); ++k)
      ASSERT_NEAR(single[0].values[k], once[i].values[k], 1e-5);
  }
}

TEST(Extract, DeclaredDimensionMismatch) {
  std::mt19937 rng(24);
  const auto x = random_tensor(rng);
  EXPECT_THROW(extract(FixedBackend(2048, 10, 1.0f), std::span(&x, 1), Stream::GlobalFrame), BackendError);
}

TEST(Extract, NonFiniteOutputRejected) {
  std::mt19937 rng(25);
  const auto x = random_tensor(rng);
  EXPECT_THROW(extract(FixedBackend(4, 4, NAN), std::span(&x, 1), Stream::GlobalFrame), BackendError);
}

TEST(Extract, TensorGeometryChecked) {
  Tensor t;
  t.size = 100;
  t.chw.assign(3 * 100 * 100, 0.0f);
  EXPECT_THROW(extract(StubBackend(), std::span(&t, 1), Stream::GlobalFrame), GeometryError);
}

TEST(Streams, NamesAndKinds) {
  EXPECT_EQ(stream_name(Stream::GlobalFrame), "global_frame");
  EXPECT_EQ(stream_name(Stream::LocalDiff), "local_diff");
  EXPECT_TRUE(is_diff_stream(Stream::GlobalDiff));
  EXPECT_FALSE(is_diff_stream(Stream::LocalFrame));
}

}  // namespace
}  // namespace deepstq
