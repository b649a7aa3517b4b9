#pragma once

// Synthetic YUV420 datasets with a known quality signal, for exercising the
// pipeline without a subjective-quality database.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "deepstq/harness/manifest.hpp"
#include "deepstq/video_io.hpp"

namespace deepstq {

enum class SyntheticSignal {
  NoiseLevel,   // level k adds temporally independent noise of amplitude ~k
  // Every level shows the same set of scene positions (after frame 0) in a
  // different order; level k steps 2k-1 positions per frame. The set of
  // frames is level-independent, only frame differences carry the level.
  MotionSpeed,
};

struct SyntheticSpec {
  int references = 6;
  int levels = 4;
  int width = 320;
  int height = 240;
  int frames = 16;
  double dmos_per_level = 20.0;
  double dmos_noise = 2.0;  // std of label noise
  SyntheticSignal signal = SyntheticSignal::NoiseLevel;
  std::uint64_t seed = 7;
};

namespace detail {

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller on 53-bit uniforms, independent of the library's distributions.
  auto u01 = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  const double u1 = u01(), u2 = u01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Smooth texture; references share its statistics and differ in phase.
inline double scene(int ref, double x, double y) {
  const double p1 = 1.3 * ref, p2 = 0.9 * ref + 0.4, p3 = 2.1 * ref;
  return 128.0 + 45.0 * std::sin(0.03 * x + p1) * std::cos(0.037 * y + p2) +
         20.0 * std::sin(0.11 * (x + y) + p3);
}

}  // namespace detail

// Writes one .yuv per (reference, level) into `dir` plus manifest.csv and
// returns the manifest. DMOS = dmos_per_level * level + N(0, dmos_noise).
inline DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticSpec& spec) {
  check_yuv420_geometry(spec.width, spec.height);
  if (spec.references < 1 || spec.levels < 1 || spec.frames < 2)
    throw InvalidArgument("synthetic dataset: need references >= 1, levels >= 1, frames >= 2");
  if (spec.signal == SyntheticSignal::MotionSpeed)
    for (int level = 1; level <= spec.levels; ++level)
      if (std::gcd(2 * level - 1, spec.frames) != 1)
        throw InvalidArgument("synthetic dataset: motion step " + std::to_string(2 * level - 1) +
                              " must be coprime with the frame count");
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(spec.seed);
  DatasetManifest m;
  const std::size_t ny = static_cast<std::size_t>(spec.width) * spec.height;
  std::vector<std::uint8_t> y(ny), u(ny / 4), v(ny / 4);
  for (int ref = 0; ref < spec.references; ++ref) {
    for (int level = 1; level <= spec.levels; ++level) {
      ManifestEntry e;
      e.reference_id = "ref" + std::to_string(ref);
      e.video_id = e.reference_id + "_d" + std::to_string(level);
      e.distortion = spec.signal == SyntheticSignal::NoiseLevel ? "noise" : "motion";
      e.width = spec.width;
      e.height = spec.height;
      e.fps = 30.0;
      e.path = dir / (e.video_id + ".yuv");
      e.dmos = spec.dmos_per_level * level + spec.dmos_noise * detail::gaussian(rng);

      std::ofstream out(e.path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write '" + e.path.string() + "'");
      for (int t = 0; t < spec.frames; ++t) {
        const double shift = spec.signal == SyntheticSignal::MotionSpeed
                                 ? 2.0 * ((t * (2 * level - 1)) % spec.frames)
                                 : 1.0 * t;
        const double sigma = spec.signal == SyntheticSignal::NoiseLevel ? 6.0 * level : 0.0;
        for (int r = 0; r < spec.height; ++r)
          for (int c = 0; c < spec.width; ++c) {
            double val = detail::scene(ref, c + shift, r);
            if (sigma > 0) val += sigma * detail::gaussian(rng);
            y[static_cast<std::size_t>(r) * spec.width + c] = detail::clamp_u8(val);
          }
        for (int r = 0; r < spec.height / 2; ++r)
          for (int c = 0; c < spec.width / 2; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * (spec.width / 2) + c;
            u[i] = detail::clamp_u8(128.0 + 20.0 * std::sin(0.05 * (2 * c + shift) + ref));
            v[i] = detail::clamp_u8(128.0 + 20.0 * std::cos(0.04 * 2 * r - ref));
          }
        write_yuv420_frame(out, y, u, v, spec.width, spec.height);
      }
      m.entries.push_back(std::move(e));
    }
  }
  // Paths in the file are relative to the manifest's directory.
  DatasetManifest on_disk = m;
  for (auto& e : on_disk.entries) e.path = e.path.filename();
  std::ofstream mf(dir / "manifest.csv");
  write_manifest(mf, on_disk);
  return m;
}

}  // namespace deepstq
