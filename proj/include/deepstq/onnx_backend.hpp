#pragma once

// Feature backend running an ONNX graph through OpenCV's dnn module. The
// graph takes a 1x3xSxS float32 NCHW input and yields one flattened
// feature row (2048 values for the ResNet-50 pool5 export).

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include "deepstq/error.hpp"
#include "deepstq/features.hpp"
#include "deepstq/harness/digest.hpp"

namespace deepstq {

class OnnxBackend final : public FeatureBackend {
 public:
  explicit OnnxBackend(const std::filesystem::path& model_path,
                       int expected_dim = kFeatureDim, int input_size = 224)
      : path_(model_path), dim_(expected_dim), size_(input_size) {
    if (!std::filesystem::exists(model_path))
      throw BackendError("model file '" + model_path.string() + "' not found");
    try {
      net_ = cv::dnn::readNetFromONNX(model_path.string());
    } catch (const cv::Exception& e) {
      throw BackendError("cannot load ONNX model '" + model_path.string() + "': " + e.what());
    }
    if (net_.empty()) throw BackendError("ONNX model '" + model_path.string() + "' is empty");
    net_.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net_.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
    digest_ = sha256_hex(read_file_bytes(model_path));
  }

  std::string identity() const override { return "onnx/sha256=" + digest_; }
  int input_size() const override { return size_; }
  int output_dim() const override { return dim_; }

  // Images are run one at a time so results never depend on batch
  // composition.
  std::vector<std::vector<float>> infer(std::span<const Tensor> batch) const override {
    std::vector<std::vector<float>> out;
    out.reserve(batch.size());
    std::lock_guard lock(mutex_);
    for (const auto& t : batch) {
      const int shape[] = {1, 3, t.size, t.size};
      cv::Mat blob(4, shape, CV_32F, const_cast<float*>(t.chw.data()));
      cv::Mat result;
      try {
        net_.setInput(blob);
        result = net_.forward();
      } catch (const cv::Exception& e) {
        throw BackendError(std::string("ONNX inference failed: ") + e.what());
      }
      if (!result.isContinuous()) result = result.clone();
      const auto n = static_cast<std::size_t>(result.total());
      if (static_cast<int>(n) != dim_)
        throw BackendError("ONNX model produced " + std::to_string(n) +
                           " values, expected " + std::to_string(dim_));
      const auto* p = result.ptr<float>();
      out.emplace_back(p, p + n);
    }
    return out;
  }

 private:
  std::filesystem::path path_;
  int dim_;
  int size_;
  std::string digest_;
  mutable cv::dnn::Net net_;
  mutable std::mutex mutex_;
};

}  // namespace deepstq
