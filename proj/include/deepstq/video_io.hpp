#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/image.hpp"

namespace deepstq {

struct Frame {
  Image8 luma;  // 1 channel
  Image8 rgb;   // 3 channels, same geometry as luma
  int index = 0;

  int width() const noexcept { return luma.width; }
  int height() const noexcept { return luma.height; }
};

struct VideoClip {
  int width = 0;
  int height = 0;
  std::vector<Frame> frames;

  std::size_t frame_count() const noexcept { return frames.size(); }
};

// Absolute luma difference between frames `previous` and `current`
// (current == previous + 1).
struct FrameDiffMap {
  Image8 values;
  int previous = 0;
  int current = 0;
};

// Bytes per I420 frame.
inline std::size_t yuv420_frame_bytes(int width, int height) {
  return static_cast<std::size_t>(width) * height * 3 / 2;
}

inline void check_yuv420_geometry(int width, int height) {
  if (width <= 0 || height <= 0)
    throw GeometryError("YUV420 geometry must be positive, got " +
                        std::to_string(width) + "x" + std::to_string(height));
  if (width % 2 != 0 || height % 2 != 0)
    throw GeometryError("YUV420 geometry must be even, got " + std::to_string(width) +
                        "x" + std::to_string(height));
}

namespace detail {

inline std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace detail

// BT.601 full-range YCbCr -> RGB with nearest-neighbour chroma upsampling.
inline Image8 yuv420_to_rgb(std::span<const std::uint8_t> y, std::span<const std::uint8_t> u,
                            std::span<const std::uint8_t> v, int width, int height) {
  Image8 rgb(width, height, 3);
  const int cw = width / 2;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double luma = y[static_cast<std::size_t>(r) * width + c];
      const std::size_t ci = static_cast<std::size_t>(r / 2) * cw + c / 2;
      const double cb = u[ci] - 128.0;
      const double cr = v[ci] - 128.0;
      rgb.at(r, c, 0) = detail::clamp_u8(luma + 1.402 * cr);
      rgb.at(r, c, 1) = detail::clamp_u8(luma - 0.344136 * cb - 0.714136 * cr);
      rgb.at(r, c, 2) = detail::clamp_u8(luma + 1.772 * cb);
    }
  }
  return rgb;
}

// Decodes one I420 frame buffer (Y, then U, then V planes).
inline Frame decode_yuv420_frame(std::span<const std::uint8_t> buf, int width, int height,
                                 int index) {
  check_yuv420_geometry(width, height);
  if (buf.size() != yuv420_frame_bytes(width, height))
    throw GeometryError("frame buffer size does not match geometry");
  const std::size_t ny = static_cast<std::size_t>(width) * height;
  const std::size_t nc = ny / 4;
  auto y = buf.subspan(0, ny);
  auto u = buf.subspan(ny, nc);
  auto v = buf.subspan(ny + nc, nc);

  Frame f;
  f.index = index;
  f.luma = Image8(width, height, 1);
  std::copy(y.begin(), y.end(), f.luma.data.begin());
  f.rgb = yuv420_to_rgb(y, u, v, width, height);
  return f;
}

// Sequential frame reader over a headerless planar YUV420 file. The file
// size is validated up front.
class YuvReader {
 public:
  YuvReader(const std::filesystem::path& path, int width, int height)
      : path_(path), width_(width), height_(height) {
    check_yuv420_geometry(width, height);
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat '" + path.string() + "': " + ec.message());
    const auto per_frame = yuv420_frame_bytes(width, height);
    if (size == 0 || size % per_frame != 0)
      throw FileSizeError(path.string(), per_frame, size);
    frame_count_ = static_cast<int>(size / per_frame);
    in_.open(path, std::ios::binary);
    if (!in_) throw IoError("cannot open '" + path.string() + "'");
    buf_.resize(per_frame);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int frame_count() const noexcept { return frame_count_; }

  // Next frame in file order, or nullopt at end of file.
  std::optional<Frame> next() {
    if (next_index_ >= frame_count_) return std::nullopt;
    in_.read(reinterpret_cast<char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!in_) throw IoError("short read in '" + path_.string() + "'");
    return decode_yuv420_frame(buf_, width_, height_, next_index_++);
  }

  // Skips frames without colour conversion.
  void skip(int n) {
    n = std::min(n, frame_count_ - next_index_);
    if (n <= 0) return;
    in_.seekg(static_cast<std::streamoff>(buf_.size()) * n, std::ios::cur);
    next_index_ += n;
  }

 private:
  std::filesystem::path path_;
  int width_;
  int height_;
  int frame_count_ = 0;
  int next_index_ = 0;
  std::ifstream in_;
  std::vector<std::uint8_t> buf_;
};

inline VideoClip read_yuv420(const std::filesystem::path& path, int width, int height) {
  YuvReader reader(path, width, height);
  VideoClip clip;
  clip.width = width;
  clip.height = height;
  clip.frames.reserve(static_cast<std::size_t>(reader.frame_count()));
  while (auto f = reader.next()) clip.frames.push_back(std::move(*f));
  return clip;
}

// Appends one I420 frame to `out`. Planes are given as full-size Y and
// quarter-size U/V.
inline void write_yuv420_frame(std::ostream& out, std::span<const std::uint8_t> y,
                               std::span<const std::uint8_t> u,
                               std::span<const std::uint8_t> v, int width, int height) {
  check_yuv420_geometry(width, height);
  const std::size_t ny = static_cast<std::size_t>(width) * height;
  if (y.size() != ny || u.size() != ny / 4 || v.size() != ny / 4)
    throw GeometryError("plane sizes do not match geometry");
  out.write(reinterpret_cast<const char*>(y.data()), static_cast<std::streamsize>(y.size()));
  out.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(u.size()));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
  if (!out) throw IoError("write failed");
}

// |curr.luma - prev.luma| per pixel.
inline FrameDiffMap frame_diff(const Frame& prev, const Frame& curr) {
  if (!prev.luma.same_geometry(curr.luma))
    throw GeometryError("frame_diff: frames differ in geometry");
  if (prev.index + 1 != curr.index)
    throw InvalidArgument("frame_diff: frames " + std::to_string(prev.index) + " and " +
                          std::to_string(curr.index) + " are not consecutive");
  FrameDiffMap d;
  d.previous = prev.index;
  d.current = curr.index;
  d.values = Image8(curr.width(), curr.height(), 1);
  for (std::size_t i = 0; i < d.values.data.size(); ++i) {
    d.values.data[i] = static_cast<std::uint8_t>(
        std::abs(static_cast<int>(curr.luma.data[i]) - static_cast<int>(prev.luma.data[i])));
  }
  return d;
}

// All N-1 difference maps of a clip.
inline std::vector<FrameDiffMap> frame_diffs(const VideoClip& clip) {
  std::vector<FrameDiffMap> out;
  for (std::size_t i = 1; i < clip.frames.size(); ++i)
    out.push_back(frame_diff(clip.frames[i - 1], clip.frames[i]));
  return out;
}

// Display form of a difference map: value + 128, saturated. Never used as
// a feature input.
inline Image8 visualize_diff(const FrameDiffMap& diff) {
  Image8 out(diff.values.width, diff.values.height, 1);
  std::transform(diff.values.data.begin(), diff.values.data.end(), out.data.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(std::min(v + 128, 255)); });
  return out;
}

}  // namespace deepstq
