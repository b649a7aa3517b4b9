#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/image.hpp"
#include "deepstq/video_io.hpp"

namespace deepstq {

inline constexpr int kNetworkInput = 224;
inline constexpr int kDefaultStride = 112;

struct PatchAnchor {
  int x = 0;
  int y = 0;
  friend bool operator==(const PatchAnchor&, const PatchAnchor&) = default;
};

struct PatchGrid {
  int patch_size = kNetworkInput;
  int stride = kDefaultStride;
  std::vector<int> x_anchors;
  std::vector<int> y_anchors;
  std::vector<PatchAnchor> anchors;  // row-major: y outer, x inner

  std::size_t size() const noexcept { return anchors.size(); }
};

// Offsets 0, stride, 2*stride, ... <= dim - patch, plus an edge-aligned
// offset at dim - patch when the stride does not land on it.
inline std::vector<int> patch_offsets(int dim, int patch, int stride) {
  std::vector<int> out;
  const int last = dim - patch;
  for (int o = 0; o <= last; o += stride) out.push_back(o);
  if (out.back() != last) out.push_back(last);
  return out;
}

inline PatchGrid plan_patches(int width, int height, int patch = kNetworkInput,
                              int stride = kDefaultStride) {
  if (stride < 1) throw InvalidArgument("plan_patches: stride must be >= 1");
  if (patch < 1) throw InvalidArgument("plan_patches: patch must be >= 1");
  if (patch > width || patch > height)
    throw GeometryError("plan_patches: patch " + std::to_string(patch) + " exceeds image " +
                        std::to_string(width) + "x" + std::to_string(height));
  PatchGrid g;
  g.patch_size = patch;
  g.stride = stride;
  g.x_anchors = patch_offsets(width, patch, stride);
  g.y_anchors = patch_offsets(height, patch, stride);
  g.anchors.reserve(g.x_anchors.size() * g.y_anchors.size());
  for (int y : g.y_anchors)
    for (int x : g.x_anchors) g.anchors.push_back({x, y});
  return g;
}

// Bilinear resize with half-pixel centres (align-corners off). Results are
// rounded half away from zero.
inline Image8 resize_bilinear(const Image8& src, int out_w, int out_h) {
  if (src.empty()) throw GeometryError("resize: empty image");
  if (out_w < 1 || out_h < 1) throw GeometryError("resize: empty target");
  Image8 out(out_w, out_h, src.channels);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;

  struct Tap {
    int i0, i1;
    double w1;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int d = 0; d < n_out; ++d) {
      double s = (d + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
      const int i0 = static_cast<int>(std::floor(s));
      const int i1 = std::min(i0 + 1, n_in - 1);
      t[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
    }
    return t;
  };
  const auto tx = taps(out_w, src.width, sx);
  const auto ty = taps(out_h, src.height, sy);

  for (int r = 0; r < out_h; ++r) {
    const Tap& a = ty[static_cast<std::size_t>(r)];
    for (int c = 0; c < out_w; ++c) {
      const Tap& b = tx[static_cast<std::size_t>(c)];
      for (int ch = 0; ch < src.channels; ++ch) {
        const double top = src.at(a.i0, b.i0, ch) * (1.0 - b.w1) + src.at(a.i0, b.i1, ch) * b.w1;
        const double bot = src.at(a.i1, b.i0, ch) * (1.0 - b.w1) + src.at(a.i1, b.i1, ch) * b.w1;
        out.at(r, c, ch) = detail::clamp_u8(top * (1.0 - a.w1) + bot * a.w1);
      }
    }
  }
  return out;
}

inline Image8 global_view(const Image8& image, int target = kNetworkInput) {
  if (image.width == target && image.height == target) return image;
  return resize_bilinear(image, target, target);
}

struct ViewConfig {
  int target = kNetworkInput;
  int patch = kNetworkInput;
  int stride = kDefaultStride;
};

// The four image views for one time step.
struct ViewSet {
  Image8 global_frame;  // RGB
  Image8 global_diff;   // gray
  std::vector<Image8> frame_patches;
  std::vector<Image8> diff_patches;
  int source_index = 0;
};

inline ViewSet extract_views(const Frame& frame, const FrameDiffMap& diff,
                             const ViewConfig& cfg = {}) {
  if (!frame.rgb.same_geometry(diff.values))
    throw GeometryError("extract_views: frame and difference map differ in geometry");
  if (diff.current != frame.index)
    throw InvalidArgument("extract_views: difference map does not end at this frame");
  ViewSet v;
  v.source_index = frame.index;
  v.global_frame = global_view(frame.rgb, cfg.target);
  v.global_diff = global_view(diff.values, cfg.target);
  const PatchGrid grid = plan_patches(frame.width(), frame.height(), cfg.patch, cfg.stride);
  v.frame_patches.reserve(grid.size());
  v.diff_patches.reserve(grid.size());
  // Patches sized differently from the network input are resized to it.
  auto fit = [&](Image8 img) { return cfg.patch == cfg.target ? img : global_view(img, cfg.target); };
  for (const auto& a : grid.anchors) {
    v.frame_patches.push_back(fit(crop(frame.rgb, a.x, a.y, cfg.patch, cfg.patch)));
    v.diff_patches.push_back(fit(crop(diff.values, a.x, a.y, cfg.patch, cfg.patch)));
  }
  return v;
}

}  // namespace deepstq
