#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "deepstq/aggregate.hpp"

namespace deepstq {
namespace {

FeatureVector fv(std::vector<float> v, Stream s = Stream::GlobalFrame) { return {std::move(v), s, 0}; }

std::vector<FeatureVector> random_vectors(std::mt19937& rng, int n, int dim, Stream s = Stream::LocalFrame) {
  std::uniform_real_distribution<float> u(-3.0f, 5.0f);
  std::vector<FeatureVector> out;
  for (int i = 0; i < n; ++i) {
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (auto& x : v) x = u(rng);
    out.push_back(fv(std::move(v), s));
  }
  return out;
}

TEST(AverageStream, IdenticalVectors) {
  const std::vector<FeatureVector> in(5, fv({1.5f, -2.0f, 0.25f}));
  EXPECT_EQ(average_stream(in, Stream::GlobalFrame), (std::vector<double>{1.5, -2.0, 0.25}));
}

TEST(AverageStream, TwoVectors) {
  const std::vector<FeatureVector> in = {fv(std::vector<float>(2048, 0.0f)), fv(std::vector<float>(2048, 2.0f))};
  const auto m = average_stream(in, Stream::GlobalFrame);
  ASSERT_EQ(m.size(), 2048u);
  for (double v : m) EXPECT_EQ(v, 1.0);
}

TEST(AverageStream, MatchesSummationOracle) {
  std::mt19937 rng(31);
  const auto in = random_vectors(rng, 3, 2048);
  const auto m = average_stream(in, Stream::LocalFrame);
  for (std::size_t k = 0; k < m.size(); ++k) {
    long double s = 0;
    for (const auto& f : in) s += f.values[k];
    EXPECT_NEAR(m[k], static_cast<double>(s / 3.0L), 1e-12);
  }
}

TEST(AverageStream, Errors) {
  EXPECT_THROW(average_stream({}, Stream::GlobalFrame), InvalidArgument);
  const std::vector<FeatureVector> mixed = {fv({1.0f}, Stream::GlobalFrame), fv({1.0f}, Stream::GlobalDiff)};
  EXPECT_THROW(average_stream(mixed, Stream::GlobalFrame), InvalidArgument);
  const std::vector<FeatureVector> ragged = {fv({1.0f, 2.0f}), fv({1.0f})};
  EXPECT_THROW(average_stream(ragged, Stream::GlobalFrame), InvalidArgument);
}

TEST(AverageStream, PermutationInvariant) {
  std::mt19937 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    auto in = random_vectors(rng, 500 + trial * 97, 16);
    const auto a = average_stream(in, Stream::LocalFrame);
    std::shuffle(in.begin(), in.end(), rng);
    const auto b = average_stream(in, Stream::LocalFrame);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(AverageStream, Linear) {
  std::mt19937 rng(33);
  const auto in = random_vectors(rng, 40, 32);
  const float scale = 0.5f;  // power of two keeps the scaled inputs exact
  std::vector<FeatureVector> scaled = in;
  for (auto& f : scaled)
    for (auto& v : f.values) v *= scale;
  const auto a = average_stream(in, Stream::LocalFrame);
  const auto b = average_stream(scaled, Stream::LocalFrame);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(b[k], scale * a[k], 1e-12);
}

TEST(StreamMean, PoolsAllPatchesOfAllFrames) {
  StreamMean acc(Stream::LocalDiff, 2);
  // 2 frames x 3 patches; pooled mean over 6 vectors.
  for (int f = 0; f < 2; ++f)
    for (int p = 0; p < 3; ++p) acc.add(std::vector<float>{static_cast<float>(f * 3 + p), 1.0f});
  EXPECT_EQ(acc.count(), 6u);
  EXPECT_EQ(acc.mean(), (std::vector<double>{2.5, 1.0}));
}

std::vector<double> constant(double v, std::size_t n = 2048) { return std::vector<double>(n, v); }

TEST(ConcatStreams, AllFour) {
  const std::vector<StreamAverage> means = {{Stream::GlobalFrame, constant(1)},
                                            {Stream::GlobalDiff, constant(2)},
                                            {Stream::LocalFrame, constant(3)},
                                            {Stream::LocalDiff, constant(4)}};
  const auto agg = concat_streams(means, StreamMask::all(), "vid");
  EXPECT_EQ(agg.values.size(), 8192u);
  EXPECT_EQ(agg.video_id, "vid");
  for (std::size_t s = 0; s < 4; ++s) {
    // Slicing at stream boundaries recovers each input exactly.
    const std::vector<double> slice(agg.values.begin() + static_cast<long>(s * 2048),
                                    agg.values.begin() + static_cast<long>((s + 1) * 2048));
    EXPECT_EQ(slice, means[s].values);
  }
}

TEST(ConcatStreams, SingleAndPairMasks) {
  const std::vector<StreamAverage> gf = {{Stream::GlobalFrame, constant(1)}};
  EXPECT_EQ(concat_streams(gf, {Stream::GlobalFrame}).values.size(), 2048u);
  const std::vector<StreamAverage> local = {{Stream::LocalFrame, constant(1)}, {Stream::LocalDiff, constant(2)}};
  const auto agg = concat_streams(local, {Stream::LocalDiff, Stream::LocalFrame});
  EXPECT_EQ(agg.values.size(), 4096u);
  EXPECT_EQ(agg.values[2047], 1.0);
  EXPECT_EQ(agg.values[2048], 2.0);
}

TEST(ConcatStreams, WrongCountOrOrder) {
  const std::vector<StreamAverage> swapped = {{Stream::LocalDiff, constant(1)}, {Stream::LocalFrame, constant(2)}};
  EXPECT_THROW(concat_streams(swapped, {Stream::LocalFrame, Stream::LocalDiff}), InvalidArgument);
  const std::vector<StreamAverage> one = {{Stream::LocalFrame, constant(1)}};
  EXPECT_THROW(concat_streams(one, {Stream::LocalFrame, Stream::LocalDiff}), InvalidArgument);
  const std::vector<StreamAverage> bad = {{Stream::GlobalFrame, {1.0, NAN}}};
  EXPECT_THROW(concat_streams(bad, {Stream::GlobalFrame}), InvalidArgument);
}

TEST(StreamMask, ParseAndPrint) {
  EXPECT_EQ(parse_stream_mask("all"), StreamMask::all());
  EXPECT_EQ(parse_stream_mask("gd, lf"), (StreamMask{Stream::GlobalDiff, Stream::LocalFrame}));
  EXPECT_EQ(parse_stream_mask("local_diff,global_frame").to_string(), "global_frame,local_diff");
  EXPECT_THROW(parse_stream_mask("bogus"), InvalidArgument);
  EXPECT_THROW(parse_stream_mask(""), InvalidArgument);
}

}  // namespace
}  // namespace deepstq
