#pragma once

#include <algorithm>
#include <bitset>
#include <initializer_list>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/features.hpp"

namespace deepstq {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Running elementwise mean of fixed-dimension vectors of one stream.
class StreamMean {
 public:
  explicit StreamMean(Stream stream, int dim = kFeatureDim)
      : stream_(stream), sums_(static_cast<std::size_t>(dim)) {}

  void add(std::span<const float> v) {
    if (v.size() != sums_.size())
      throw InvalidArgument("StreamMean: vector dimension " + std::to_string(v.size()) +
                            " != " + std::to_string(sums_.size()));
    for (std::size_t i = 0; i < v.size(); ++i) sums_[i].add(v[i]);
    ++count_;
  }

  void add(const FeatureVector& f) {
    if (f.stream != stream_) throw InvalidArgument("StreamMean: mixed streams");
    add(f.values);
  }

  Stream stream() const noexcept { return stream_; }
  std::size_t count() const noexcept { return count_; }
  int dim() const noexcept { return static_cast<int>(sums_.size()); }

  std::vector<double> mean() const {
    if (count_ == 0) throw InvalidArgument("StreamMean: no vectors accumulated");
    std::vector<double> out(sums_.size());
    const double n = static_cast<double>(count_);
    for (std::size_t i = 0; i < sums_.size(); ++i) out[i] = sums_[i].value() / n;
    return out;
  }

 private:
  Stream stream_;
  std::vector<CompensatedSum> sums_;
  std::size_t count_ = 0;
};

// Elementwise mean of a stream's vectors. For local streams the caller
// passes every patch of every frame; they are pooled in one mean.
inline std::vector<double> average_stream(std::span<const FeatureVector> features, Stream stream) {
  if (features.empty()) throw InvalidArgument("average_stream: empty list");
  StreamMean acc(stream, static_cast<int>(features.front().values.size()));
  for (const auto& f : features) acc.add(f);
  return acc.mean();
}

// Subset of the four streams; iteration order is always GlobalFrame,
// GlobalDiff, LocalFrame, LocalDiff.
class StreamMask {
 public:
  StreamMask() = default;
  StreamMask(std::initializer_list<Stream> streams) {
    for (Stream s : streams) set(s);
  }
  static StreamMask all() { return {Stream::GlobalFrame, Stream::GlobalDiff, Stream::LocalFrame, Stream::LocalDiff}; }

  void set(Stream s) { bits_.set(static_cast<std::size_t>(s)); }
  bool has(Stream s) const { return bits_.test(static_cast<std::size_t>(s)); }
  std::size_t count() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  std::vector<Stream> streams() const {
    std::vector<Stream> out;
    for (Stream s : kAllStreams)
      if (has(s)) out.push_back(s);
    return out;
  }

  // Comma-separated stream names, e.g. "global_frame,local_diff".
  std::string to_string() const {
    std::string s;
    for (Stream st : streams()) {
      if (!s.empty()) s += ',';
      s += stream_name(st);
    }
    return s;
  }

  friend bool operator==(const StreamMask&, const StreamMask&) = default;

 private:
  std::bitset<4> bits_;
};

// Accepts full names (global_frame) or short codes (gf, gd, lf, ld) and
// "all".
inline StreamMask parse_stream_mask(std::string_view text) {
  StreamMask m;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(',', pos), text.size());
    std::string_view tok = text.substr(pos, end - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok == "all") {
      m = StreamMask::all();
    } else if (tok == "gf" || tok == stream_name(Stream::GlobalFrame)) {
      m.set(Stream::GlobalFrame);
    } else if (tok == "gd" || tok == stream_name(Stream::GlobalDiff)) {
      m.set(Stream::GlobalDiff);
    } else if (tok == "lf" || tok == stream_name(Stream::LocalFrame)) {
      m.set(Stream::LocalFrame);
    } else if (tok == "ld" || tok == stream_name(Stream::LocalDiff)) {
      m.set(Stream::LocalDiff);
    } else if (!tok.empty()) {
      throw InvalidArgument("unknown stream '" + std::string(tok) + "'");
    }
    pos = end + 1;
  }
  if (m.empty()) throw InvalidArgument("stream mask is empty");
  return m;
}

struct AggregatedFeature {
  std::vector<double> values;
  std::string video_id;
  StreamMask mask;
};

// One stream's averaged vector.
struct StreamAverage {
  Stream stream = Stream::GlobalFrame;
  std::vector<double> values;
};

// Concatenates one mean per masked stream; `means` must list the masked
// streams in canonical order (GlobalFrame, GlobalDiff, LocalFrame, LocalDiff).
inline AggregatedFeature concat_streams(std::span<const StreamAverage> means, StreamMask mask,
                                        std::string video_id = {}) {
  if (mask.empty()) throw InvalidArgument("concat_streams: empty mask");
  const auto order = mask.streams();
  if (means.size() != order.size())
    throw InvalidArgument("concat_streams: " + std::to_string(means.size()) +
                          " means for " + std::to_string(order.size()) + " streams");
  const std::size_t dim = means.front().values.size();
  AggregatedFeature out;
  out.video_id = std::move(video_id);
  out.mask = mask;
  out.values.reserve(dim * means.size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (means[k].stream != order[k])
      throw InvalidArgument("concat_streams: expected " + std::string(stream_name(order[k])) +
                            " at position " + std::to_string(k) + ", got " +
                            std::string(stream_name(means[k].stream)));
    if (means[k].values.size() != dim)
      throw InvalidArgument("concat_streams: stream dimensions differ");
    for (double v : means[k].values) {
      if (!std::isfinite(v)) throw InvalidArgument("concat_streams: non-finite value");
      out.values.push_back(v);
    }
  }
  return out;
}

}  // namespace deepstq
