#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/image.hpp"

namespace deepstq {

inline constexpr int kFeatureDim = 2048;

enum class Stream : int { GlobalFrame = 0, GlobalDiff = 1, LocalFrame = 2, LocalDiff = 3 };

inline constexpr std::array<Stream, 4> kAllStreams = {Stream::GlobalFrame, Stream::GlobalDiff,
                                                      Stream::LocalFrame, Stream::LocalDiff};

inline std::string_view stream_name(Stream s) {
  switch (s) {
    case Stream::GlobalFrame: return "global_frame";
    case Stream::GlobalDiff: return "global_diff";
    case Stream::LocalFrame: return "local_frame";
    case Stream::LocalDiff: return "local_diff";
  }
  return "unknown";
}

inline bool is_diff_stream(Stream s) { return s == Stream::GlobalDiff || s == Stream::LocalDiff; }

struct FeatureVector {
  std::vector<float> values;
  Stream stream = Stream::GlobalFrame;
  int source_index = 0;
};

enum class PixelKind { Rgb, Gray };

// Per-channel statistics of the reference network's training set.
inline constexpr std::array<float, 3> kChannelMean = {0.485f, 0.456f, 0.406f};
inline constexpr std::array<float, 3> kChannelStd = {0.229f, 0.224f, 0.225f};

// Planar CHW float32 network input.
struct Tensor {
  int size = 0;  // spatial side length
  std::vector<float> chw;

  float at(int ch, int r, int c) const {
    return chw[(static_cast<std::size_t>(ch) * size + r) * size + c];
  }
};

// Scales to [0,1] and normalises per channel. Gray images are replicated
// into all three channels.
template <typename T>
Tensor preprocess(const Image<T>& image, PixelKind kind, int size = 224) {
  if (image.width != size || image.height != size)
    throw GeometryError("preprocess: expected " + std::to_string(size) + "x" +
                        std::to_string(size) + " image, got " + std::to_string(image.width) +
                        "x" + std::to_string(image.height));
  const int want_channels = kind == PixelKind::Rgb ? 3 : 1;
  if (image.channels != want_channels)
    throw GeometryError("preprocess: channel count does not match pixel kind");
  Tensor t;
  t.size = size;
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  t.chw.resize(3 * plane);
  for (int ch = 0; ch < 3; ++ch) {
    const int src_ch = kind == PixelKind::Rgb ? ch : 0;
    const float mean = kChannelMean[static_cast<std::size_t>(ch)];
    const float inv_std = 1.0f / kChannelStd[static_cast<std::size_t>(ch)];
    float* dst = t.chw.data() + ch * plane;
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c)
        dst[static_cast<std::size_t>(r) * size + c] =
            (static_cast<float>(image.at(r, c, src_ch)) / 255.0f - mean) * inv_std;
  }
  return t;
}

// A pre-trained image network truncated to a feature layer. Implementations
// must be safe to call concurrently (internally serialised if needed).
class FeatureBackend {
 public:
  virtual ~FeatureBackend() = default;

  virtual std::string identity() const = 0;
  virtual int input_size() const { return 224; }
  virtual int output_dim() const = 0;

  // One output row per input tensor, same order.
  virtual std::vector<std::vector<float>> infer(std::span<const Tensor> batch) const = 0;
};

inline std::vector<FeatureVector> extract(const FeatureBackend& backend,
                                          std::span<const Tensor> batch, Stream stream,
                                          int source_index = 0) {
  std::vector<FeatureVector> out;
  if (batch.empty()) return out;
  for (const auto& t : batch)
    if (t.size != backend.input_size() ||
        t.chw.size() != 3u * static_cast<std::size_t>(t.size) * t.size)
      throw GeometryError("extract: tensor geometry does not match backend input");
  auto rows = backend.infer(batch);
  if (rows.size() != batch.size())
    throw BackendError("extract: backend returned " + std::to_string(rows.size()) +
                       " rows for " + std::to_string(batch.size()) + " inputs");
  out.reserve(rows.size());
  for (auto& row : rows) {
    if (static_cast<int>(row.size()) != backend.output_dim())
      throw BackendError("extract: backend declared dimension " +
                         std::to_string(backend.output_dim()) + " but produced " +
                         std::to_string(row.size()));
    for (float v : row)
      if (!std::isfinite(v)) throw BackendError("extract: non-finite feature value");
    out.push_back({std::move(row), stream, source_index});
  }
  return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic stand-in for the reference network: a sparse seeded random
// projection of the flattened CHW input followed by a rectifier.
//
//   h(j, t)  = splitmix64(seed + j * taps + t)
//   pos      = h mod (3 * size * size)
//   sign     = -1 if the top bit of h is set, else +1
//   out[j]   = max(0, sum_t sign * x[pos] / sqrt(taps))
//
// The formula is part of the contract: tests recompute it independently.
class StubBackend final : public FeatureBackend {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x5EED5EEDULL;
  static constexpr int kDefaultTaps = 256;

  explicit StubBackend(std::uint64_t seed = kDefaultSeed, int taps = kDefaultTaps,
                       int dim = kFeatureDim, int size = 224)
      : seed_(seed), taps_(taps), dim_(dim), size_(size) {
    if (taps < 1 || dim < 1 || size < 1) throw InvalidArgument("StubBackend: bad shape");
    const std::uint64_t n = 3ULL * static_cast<std::uint64_t>(size) * size;
    taps_table_.resize(static_cast<std::size_t>(dim) * taps);
    for (int j = 0; j < dim; ++j) {
      for (int t = 0; t < taps; ++t) {
        const std::uint64_t h =
            detail::splitmix64(seed + static_cast<std::uint64_t>(j) * taps + t);
        auto& tap = taps_table_[static_cast<std::size_t>(j) * taps + t];
        tap.pos = static_cast<std::uint32_t>(h % n);
        tap.sign = (h >> 63) ? -1.0f : 1.0f;
      }
    }
  }

  std::string identity() const override {
    return "stub-sparse-projection/v1/seed=" + std::to_string(seed_) +
           "/taps=" + std::to_string(taps_) + "/dim=" + std::to_string(dim_);
  }
  int input_size() const override { return size_; }
  int output_dim() const override { return dim_; }

  std::vector<std::vector<float>> infer(std::span<const Tensor> batch) const override {
    std::vector<std::vector<float>> out;
    out.reserve(batch.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(taps_));
    for (const auto& x : batch) {
      std::vector<float> row(static_cast<std::size_t>(dim_));
      for (int j = 0; j < dim_; ++j) {
        double acc = 0.0;
        const Tap* tp = taps_table_.data() + static_cast<std::size_t>(j) * taps_;
        for (int t = 0; t < taps_; ++t) acc += tp[t].sign * x.chw[tp[t].pos];
        row[static_cast<std::size_t>(j)] = static_cast<float>(std::max(0.0, acc * scale));
      }
      out.push_back(std::move(row));
    }
    return out;
  }

 private:
  struct Tap {
    std::uint32_t pos;
    float sign;
  };
  std::uint64_t seed_;
  int taps_;
  int dim_;
  int size_;
  std::vector<Tap> taps_table_;
};

}  // namespace deepstq
