#pragma once

// Feature cache: one file per (video_id, stream) holding a stream mean.
//
//   offset 0   8 bytes   magic "DSTQFEAT"
//   offset 8   u32       format version (1)
//   offset 12  u32       reserved, 0
//   offset 16  32 bytes  SHA-256 config digest
//   offset 48  u32       dimension D
//   offset 52  D x f32   payload
//
// Integers and floats are little-endian. Files are written to a temporary
// name and renamed into place, so readers never see partial files.

#include <array>
#include <cctype>
#include <functional>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "deepstq/error.hpp"
#include "deepstq/features.hpp"
#include "deepstq/harness/digest.hpp"
#include "deepstq/views.hpp"

namespace deepstq {

inline constexpr char kCacheMagic[8] = {'D', 'S', 'T', 'Q', 'F', 'E', 'A', 'T'};
inline constexpr std::uint32_t kCacheVersion = 1;

// Everything that changes extracted features.
struct ExtractionConfig {
  std::string backend_identity;
  ViewConfig views{};
  int frame_stride = 1;  // view sets at frames 1, 1+s, 1+2s, ...

  std::string canonical() const {
    std::ostringstream s;
    s << "deepstq-features/v1;backend=" << backend_identity << ";target=" << views.target
      << ";patch=" << views.patch << ";stride=" << views.stride << ";frame_stride=" << frame_stride
      << ";norm=imagenet;diff=luma-abs;resize=bilinear-half-pixel";
    return s.str();
  }

  Digest digest() const { return sha256(canonical()); }
};

class FeatureCache {
 public:
  explicit FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create cache directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::filesystem::path path_for(const std::string& video_id, Stream stream) const {
    std::string safe;
    for (char c : video_id) {
      const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
      if (ok) {
        safe.push_back(c);
      } else {
        static constexpr char kHex[] = "0123456789abcdef";
        safe += '%';
        safe += kHex[static_cast<unsigned char>(c) >> 4];
        safe += kHex[static_cast<unsigned char>(c) & 15];
      }
    }
    return dir_ / (safe + "." + std::string(stream_name(stream)) + ".feat");
  }

  void write(const std::string& video_id, Stream stream, const Digest& digest,
             std::span<const float> values) const {
    const auto final_path = path_for(video_id, stream);
    static std::atomic<unsigned> counter{0};
    auto tmp = final_path;
    tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "_" +
           std::to_string(counter++);
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write cache file '" + tmp.string() + "'");
      const std::uint32_t version = kCacheVersion, reserved = 0;
      const auto dim = static_cast<std::uint32_t>(values.size());
      out.write(kCacheMagic, sizeof kCacheMagic);
      out.write(reinterpret_cast<const char*>(&version), 4);
      out.write(reinterpret_cast<const char*>(&reserved), 4);
      out.write(reinterpret_cast<const char*>(digest.data()), 32);
      out.write(reinterpret_cast<const char*>(&dim), 4);
      out.write(reinterpret_cast<const char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(float)));
      if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, final_path, ec);
    if (ec) throw IoError("cannot move cache file into place: " + ec.message());
  }

  // The cached vector if present and produced under `digest`; nullopt if
  // missing or stale. Corrupt files raise ParseError.
  std::optional<std::vector<float>> read(const std::string& video_id, Stream stream,
                                         const Digest& digest) const {
    const auto p = path_for(video_id, stream);
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::uint32_t version = 0, reserved = 0, dim = 0;
    Digest stored{};
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    in.read(reinterpret_cast<char*>(stored.data()), 32);
    in.read(reinterpret_cast<char*>(&dim), 4);
    if (!in || std::memcmp(magic, kCacheMagic, 8) != 0)
      throw ParseError("'" + p.string() + "' is not a feature cache file");
    if (version != kCacheVersion)
      throw ParseError("'" + p.string() + "': unsupported cache version " + std::to_string(version));
    if (stored != digest) return std::nullopt;
    std::vector<float> v(dim);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw ParseError("'" + p.string() + "': truncated payload");
    return v;
  }

  bool has(const std::string& video_id, Stream stream, const Digest& digest) const {
    try {
      return read(video_id, stream, digest).has_value();
    } catch (const ParseError&) {
      return false;
    }
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace deepstq
