#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "deepstq/views.hpp"
#include "support/oracles.hpp"

namespace deepstq {
namespace {

// Every offset o in [0, dim - patch] kept iff o is a multiple of the stride
// or o is the last admissible offset.
std::vector<int> offsets_by_enumeration(int dim, int patch, int stride) {
  std::vector<int> out;
  for (int o = 0; o <= dim - patch; ++o)
    if (o % stride == 0 || o == dim - patch) out.push_back(o);
  return out;
}

Frame random_frame(int w, int h, int index, std::mt19937& rng) {
  Frame f;
  f.index = index;
  f.luma = Image8(w, h, 1);
  f.rgb = Image8(w, h, 3);
  for (auto& v : f.luma.data) v = static_cast<std::uint8_t>(rng());
  for (auto& v : f.rgb.data) v = static_cast<std::uint8_t>(rng());
  return f;
}

TEST(PlanPatches, ExactFitIsOneAnchor) {
  const auto g = plan_patches(224, 224, 224, 112);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.anchors[0], (PatchAnchor{0, 0}));
}

TEST(PlanPatches, CsiqGeometry) {
  const auto g = plan_patches(832, 480, 224, 112);
  EXPECT_EQ(g.x_anchors, (std::vector<int>{0, 112, 224, 336, 448, 560, 608}));
  EXPECT_EQ(g.y_anchors, (std::vector<int>{0, 112, 224, 256}));
  EXPECT_EQ(g.size(), 28u);
  EXPECT_EQ(g.x_anchors, offsets_by_enumeration(832, 224, 112));
  EXPECT_EQ(g.y_anchors, offsets_by_enumeration(480, 224, 112));
}

TEST(PlanPatches, NoExtraAnchorWhenStrideLandsOnEdge) {
  const auto g = plan_patches(448, 224, 224, 112);
  EXPECT_EQ(g.x_anchors, (std::vector<int>{0, 112, 224}));
  EXPECT_EQ(g.size(), 3u);
}

TEST(PlanPatches, RowMajorOrder) {
  const auto g = plan_patches(448, 336, 224, 112);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g.anchors[0], (PatchAnchor{0, 0}));
  EXPECT_EQ(g.anchors[2], (PatchAnchor{224, 0}));
  EXPECT_EQ(g.anchors[3], (PatchAnchor{0, 112}));
}

TEST(PlanPatches, Errors) {
  EXPECT_THROW(plan_patches(200, 480, 224, 112), GeometryError);
  EXPECT_THROW(plan_patches(832, 100, 224, 112), GeometryError);
  EXPECT_THROW(plan_patches(832, 480, 224, 0), InvalidArgument);
}

TEST(PlanPatches, PropertiesOnRandomGeometries) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int patch = 1 + static_cast<int>(rng() % 40);
    const int stride = 1 + static_cast<int>(rng() % 50);
    const int w = patch + static_cast<int>(rng() % 90);
    const int h = patch + static_cast<int>(rng() % 90);
    const auto g = plan_patches(w, h, patch, stride);
    EXPECT_EQ(g.x_anchors, offsets_by_enumeration(w, patch, stride));
    EXPECT_EQ(g.y_anchors, offsets_by_enumeration(h, patch, stride));
    std::vector<char> covered(static_cast<std::size_t>(w) * h, 0);
    for (const auto& a : g.anchors) {
      ASSERT_LE(a.x + patch, w);
      ASSERT_LE(a.y + patch, h);
      for (int y = a.y; y < a.y + patch; ++y)
        for (int x = a.x; x < a.x + patch; ++x) covered[static_cast<std::size_t>(y) * w + x] = 1;
    }
    for (std::size_t i = 0; i + 1 < g.x_anchors.size(); ++i) {
      ASSERT_LT(g.x_anchors[i], g.x_anchors[i + 1]);
      // Interior neighbours overlap by patch - stride (when they overlap at all).
      if (i + 2 < g.x_anchors.size()) {
        EXPECT_EQ(g.x_anchors[i + 1] - g.x_anchors[i], stride);
      }
    }
    // Strides wider than the patch leave gaps by design.
    if (stride <= patch) {
      for (char c : covered) ASSERT_TRUE(c) << w << "x" << h << " patch " << patch << " stride " << stride;
    }
  }
}

TEST(GlobalView, IdentityResizeIsBitIdentical) {
  std::mt19937 rng(1);
  Image8 img(224, 224, 3);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng());
  EXPECT_EQ(global_view(img), img);
  EXPECT_EQ(resize_bilinear(img, 224, 224), img);
}

TEST(GlobalView, OutputGeometry) {
  const auto out = global_view(Image8(832, 480, 3, 9));
  EXPECT_EQ(out.width, 224);
  EXPECT_EQ(out.height, 224);
  EXPECT_EQ(out.channels, 3);
}

TEST(GlobalView, TwoByTwoToOnePixel) {
  Image8 img(2, 2, 1);
  img.data = {0, 255, 0, 255};
  // Half-pixel centre of the single output pixel maps to source (0.5, 0.5):
  // 0.5 * 0 + 0.5 * 255 = 127.5, rounded half away from zero -> 128.
  EXPECT_EQ(resize_bilinear(img, 1, 1).data[0], 128);
}

TEST(GlobalView, MatchesBilinearOracle) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 3 + static_cast<int>(rng() % 60), h = 3 + static_cast<int>(rng() % 60);
    const int ow = 1 + static_cast<int>(rng() % 40), oh = 1 + static_cast<int>(rng() % 40);
    Image8 img(w, h, 1);
    std::vector<double> ref(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = img.data[i] = static_cast<std::uint8_t>(rng());
    const auto out = resize_bilinear(img, ow, oh);
    for (int r = 0; r < oh; ++r)
      for (int c = 0; c < ow; ++c) {
        const double sx = (c + 0.5) * w / ow - 0.5, sy = (r + 0.5) * h / oh - 0.5;
        const double want = oracle::bilinear_sample(ref, w, h, sx, sy);
        EXPECT_LE(std::abs(out.at(r, c) - want), 0.5 + 1e-9);
      }
  }
}

TEST(GlobalView, EmptyImageRejected) { EXPECT_THROW(global_view(Image8()), GeometryError); }

TEST(ExtractViews, NetworkSizedInputs) {
  std::mt19937 rng(2);
  const auto prev = random_frame(224, 224, 0, rng);
  const auto cur = random_frame(224, 224, 1, rng);
  const auto d = frame_diff(prev, cur);
  const auto v = extract_views(cur, d);
  ASSERT_EQ(v.frame_patches.size(), 1u);
  ASSERT_EQ(v.diff_patches.size(), 1u);
  EXPECT_EQ(v.frame_patches[0], v.global_frame);
  EXPECT_EQ(v.diff_patches[0], v.global_diff);
  EXPECT_EQ(v.source_index, 1);
}

TEST(ExtractViews, CsiqSizedInputs) {
  std::mt19937 rng(4);
  const auto prev = random_frame(832, 480, 4, rng);
  const auto cur = random_frame(832, 480, 5, rng);
  const auto d = frame_diff(prev, cur);
  const auto v = extract_views(cur, d);
  ASSERT_EQ(v.frame_patches.size(), 28u);
  ASSERT_EQ(v.diff_patches.size(), 28u);
  const auto grid = plan_patches(832, 480);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& p = v.frame_patches[k];
    ASSERT_EQ(p.width, 224);
    ASSERT_EQ(p.height, 224);
    const auto a = grid.anchors[k];
    EXPECT_EQ(p.at(17, 33, 2), cur.rgb.at(a.y + 17, a.x + 33, 2));
    EXPECT_EQ(v.diff_patches[k].at(200, 5), d.values.at(a.y + 200, a.x + 5));
  }
  EXPECT_EQ(v.global_frame.width, 224);
  EXPECT_EQ(v.global_diff.channels, 1);
}

TEST(ExtractViews, Deterministic) {
  std::mt19937 rng(8);
  const auto prev = random_frame(300, 260, 0, rng);
  const auto cur = random_frame(300, 260, 1, rng);
  const auto d = frame_diff(prev, cur);
  const auto a = extract_views(cur, d);
  const auto b = extract_views(cur, d);
  EXPECT_EQ(a.global_frame, b.global_frame);
  EXPECT_EQ(a.global_diff, b.global_diff);
  EXPECT_EQ(a.frame_patches, b.frame_patches);
  EXPECT_EQ(a.diff_patches, b.diff_patches);
}

TEST(ExtractViews, GeometryMismatch) {
  std::mt19937 rng(3);
  const auto a = random_frame(224, 224, 0, rng);
  const auto b = random_frame(224, 224, 1, rng);
  auto d = frame_diff(a, b);
  const auto big = random_frame(300, 300, 1, rng);
  EXPECT_THROW(extract_views(big, d), GeometryError);
}

}  // namespace
}  // namespace deepstq
