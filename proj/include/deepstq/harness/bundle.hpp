#pragma once

// Export bundle written next to the ONNX feature extractor:
//
//   {
//     "model": "resnet50_pool5.onnx",        // relative to the bundle file
//     "test_image": "test_image.rgb",        // raw 224x224x3 interleaved RGB bytes
//     "test_image_shape": [224, 224, 3],
//     "reference_feature": [ ... 2048 floats ... ],
//     "source": "...", "preprocessing": { "mean": [...], "std": [...] }
//   }

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepstq/error.hpp"
#include "deepstq/features.hpp"
#include "deepstq/harness/digest.hpp"

namespace deepstq {

struct ExportBundle {
  std::filesystem::path model_path;
  Image8 test_image;
  std::vector<float> reference_feature;
  nlohmann::json metadata;
};

inline ExportBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bundle '" + path.string() + "'");
  ExportBundle b;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto dir = path.parent_path();
    b.model_path = dir / j.at("model").get<std::string>();
    const auto shape = j.at("test_image_shape").get<std::vector<int>>();
    if (shape.size() != 3 || shape[2] != 3) throw ParseError("test_image_shape must be [H, W, 3]");
    const std::string bytes = read_file_bytes(dir / j.at("test_image").get<std::string>());
    b.test_image = Image8(shape[1], shape[0], 3);
    if (bytes.size() != b.test_image.data.size())
      throw ParseError("test image has " + std::to_string(bytes.size()) + " bytes, expected " +
                       std::to_string(b.test_image.data.size()));
    std::copy(bytes.begin(), bytes.end(), reinterpret_cast<char*>(b.test_image.data.data()));
    b.reference_feature = j.at("reference_feature").get<std::vector<float>>();
    b.metadata = j;
    b.metadata.erase("reference_feature");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad bundle '" + path.string() + "': " + e.what());
  }
  return b;
}

struct BundleCheck {
  int output_dim = 0;
  double max_abs_diff = 0.0;
  bool passed = false;
};

// Runs the backend on the bundle's test image and compares with the
// recorded feature elementwise.
inline BundleCheck check_bundle(const FeatureBackend& backend, const ExportBundle& b,
                                double tolerance = 1e-4, int expected_dim = kFeatureDim) {
  const Tensor t = preprocess(b.test_image, PixelKind::Rgb, backend.input_size());
  const auto rows = backend.infer(std::span(&t, 1));
  BundleCheck c;
  c.output_dim = static_cast<int>(rows.at(0).size());
  if (c.output_dim != static_cast<int>(b.reference_feature.size())) {
    c.max_abs_diff = std::numeric_limits<double>::infinity();
    return c;
  }
  for (std::size_t i = 0; i < rows[0].size(); ++i)
    c.max_abs_diff = std::max(c.max_abs_diff,
                              std::abs(static_cast<double>(rows[0][i]) - b.reference_feature[i]));
  c.passed = c.output_dim == expected_dim && c.max_abs_diff < tolerance;
  return c;
}

}  // namespace deepstq
