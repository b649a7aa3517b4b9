#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deepstq/error.hpp"

namespace deepstq {

// Interleaved row-major image: element (r, c, ch) lives at
// ((r * width) + c) * channels + ch.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, int ch, T fill = T{})
      : width(w), height(h), channels(ch),
        data(static_cast<std::size_t>(w) * h * ch, fill) {
    if (w < 0 || h < 0 || ch < 1) throw GeometryError("negative image geometry");
  }

  bool empty() const noexcept { return width == 0 || height == 0; }
  std::size_t index(int r, int c, int ch = 0) const noexcept {
    return (static_cast<std::size_t>(r) * width + c) * channels + ch;
  }
  T& at(int r, int c, int ch = 0) noexcept { return data[index(r, c, ch)]; }
  const T& at(int r, int c, int ch = 0) const noexcept { return data[index(r, c, ch)]; }

  bool same_geometry(const Image& o) const noexcept {
    return width == o.width && height == o.height;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

using Image8 = Image<std::uint8_t>;

// Copies the patch x..x+w, y..y+h. Caller guarantees bounds.
template <typename T>
Image<T> crop(const Image<T>& src, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || x + w > src.width || y + h > src.height)
    throw GeometryError("crop window outside image");
  Image<T> out(w, h, src.channels);
  const std::size_t row_len = static_cast<std::size_t>(w) * src.channels;
  for (int r = 0; r < h; ++r) {
    const T* from = src.data.data() + src.index(y + r, x);
    std::copy(from, from + row_len, out.data.data() + out.index(r, 0));
  }
  return out;
}

}  // namespace deepstq
