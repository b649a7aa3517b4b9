#pragma once

// Feature extraction over a dataset: decode -> difference maps -> views ->
// backend -> stream means -> cache.

#include <array>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "deepstq/aggregate.hpp"
#include "deepstq/features.hpp"
#include "deepstq/harness/cache.hpp"
#include "deepstq/harness/manifest.hpp"
#include "deepstq/parallel.hpp"
#include "deepstq/video_io.hpp"
#include "deepstq/views.hpp"

namespace deepstq {

// View sets emitted for a clip: frames 1, 1+s, 1+2s, ... (frame 0 has no
// predecessor).
inline std::size_t count_viewsets(std::size_t frame_count, int frame_stride) {
  if (frame_stride < 1) throw InvalidArgument("frame stride must be >= 1");
  if (frame_count < 2) return 0;
  const auto s = static_cast<std::size_t>(frame_stride);
  return (frame_count - 1 + s - 1) / s;
}

struct VideoFeatures {
  std::array<std::vector<float>, 4> means;  // indexed by Stream
  std::size_t viewsets = 0;
  std::array<std::size_t, 4> vectors{};     // vectors averaged per stream
};

namespace detail {

inline void push_stream(const FeatureBackend& backend, std::span<const Image8> images, PixelKind kind,
                        Stream stream, int source_index, StreamMean& acc) {
  std::vector<Tensor> batch;
  batch.reserve(images.size());
  for (const auto& img : images) batch.push_back(preprocess(img, kind, backend.input_size()));
  for (const auto& f : extract(backend, batch, stream, source_index)) acc.add(f);
}

}  // namespace detail

inline VideoFeatures extract_video_features(const std::filesystem::path& path, int width, int height,
                                            const FeatureBackend& backend,
                                            const ExtractionConfig& cfg) {
  if (cfg.frame_stride < 1) throw InvalidArgument("frame stride must be >= 1");
  YuvReader reader(path, width, height);
  const int dim = backend.output_dim();
  std::array<StreamMean, 4> acc = {StreamMean(Stream::GlobalFrame, dim), StreamMean(Stream::GlobalDiff, dim),
                                   StreamMean(Stream::LocalFrame, dim), StreamMean(Stream::LocalDiff, dim)};
  VideoFeatures out;
  std::optional<Frame> prev;
  for (int t = 1; t < reader.frame_count(); t += cfg.frame_stride) {
    // Position the reader on frame t - 1 unless it is already held.
    if (!prev || prev->index != t - 1) {
      const int pos = prev ? prev->index + 1 : 0;
      reader.skip(t - 1 - pos);
      prev = reader.next();
    }
    auto cur = reader.next();
    if (!prev || !cur) throw IoError("unexpected end of video '" + path.string() + "'");
    const FrameDiffMap diff = frame_diff(*prev, *cur);
    const ViewSet v = extract_views(*cur, diff, cfg.views);
    detail::push_stream(backend, std::span(&v.global_frame, 1), PixelKind::Rgb, Stream::GlobalFrame, t,
                        acc[0]);
    detail::push_stream(backend, std::span(&v.global_diff, 1), PixelKind::Gray, Stream::GlobalDiff, t,
                        acc[1]);
    detail::push_stream(backend, v.frame_patches, PixelKind::Rgb, Stream::LocalFrame, t, acc[2]);
    detail::push_stream(backend, v.diff_patches, PixelKind::Gray, Stream::LocalDiff, t, acc[3]);
    ++out.viewsets;
    prev = std::move(cur);
  }
  if (out.viewsets == 0)
    throw InvalidArgument("video '" + path.string() + "' has fewer than 2 frames");
  for (std::size_t s = 0; s < 4; ++s) {
    const auto m = acc[s].mean();
    out.means[s].assign(m.begin(), m.end());
    out.vectors[s] = acc[s].count();
  }
  return out;
}

struct ExtractionFailure {
  std::string video_id;
  std::string message;
};

struct ExtractionSummary {
  std::size_t extracted = 0;
  std::size_t cached = 0;  // skipped, all four streams already cached
  std::vector<ExtractionFailure> failures;
};

// Extracts and caches the four stream means of every video. Videos whose
// streams are all cached under the current digest are skipped; decode or
// inference failures are collected and the run continues.
inline ExtractionSummary extract_all_features(const DatasetManifest& manifest,
                                              const FeatureBackend& backend, const FeatureCache& cache,
                                              const ExtractionConfig& cfg, unsigned threads = 1) {
  const Digest digest = cfg.digest();
  ExtractionSummary summary;
  std::vector<int> state(manifest.size(), 0);  // 0 extracted, 1 cached, 2 failed
  std::vector<std::string> messages(manifest.size());
  parallel_for(manifest.size(), threads, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    bool complete = true;
    for (Stream s : kAllStreams) complete = complete && cache.has(e.video_id, s, digest);
    if (complete) {
      state[i] = 1;
      return;
    }
    try {
      const auto vf = extract_video_features(e.path, e.width, e.height, backend, cfg);
      for (Stream s : kAllStreams)
        cache.write(e.video_id, s, digest, vf.means[static_cast<std::size_t>(s)]);
    } catch (const Error& ex) {
      state[i] = 2;
      messages[i] = ex.what();
    }
  });
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (state[i] == 0) ++summary.extracted;
    else if (state[i] == 1) ++summary.cached;
    else summary.failures.push_back({manifest.entries[i].video_id, messages[i]});
  }
  return summary;
}

}  // namespace deepstq
