#pragma once

// Model file layout (all integers little-endian):
//
//   offset 0   8 bytes  magic "DSTQSVR\0"
//   offset 8   u32      format version (1)
//   offset 12  u32      header length H in bytes
//   offset 16  H bytes  UTF-8 JSON header
//   then       float32  payload: scaler mean[dim], scaler std[dim],
//                       support vectors[n_support * dim] row-major,
//                       coefficients[n_support]
//
// The header carries kernel, C, epsilon, gamma, bias (as a double), dim,
// n_support and a free-form "metadata" object.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepstq/error.hpp"
#include "deepstq/svr.hpp"

namespace deepstq {

inline constexpr char kSvrMagic[8] = {'D', 'S', 'T', 'Q', 'S', 'V', 'R', '\0'};
inline constexpr std::uint32_t kSvrFormatVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

inline void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError("unexpected end of file");
  return v;
}

inline void put_f32(std::ostream& out, std::span<const double> v) {
  std::vector<float> f(v.begin(), v.end());
  out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
}

inline std::vector<double> get_f32(std::istream& in, std::size_t n) {
  std::vector<float> f(n);
  in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw ParseError("truncated float32 payload");
  return {f.begin(), f.end()};
}

}  // namespace detail

inline void save_model(const std::filesystem::path& path, const SvrModel& model,
                       const nlohmann::json& metadata = nlohmann::json::object()) {
  nlohmann::json h;
  h["format"] = "deepstq-svr";
  h["kernel"] = kernel_name(model.kernel);
  h["C"] = model.hyper.C;
  h["epsilon"] = model.hyper.epsilon;
  h["gamma"] = model.hyper.gamma;
  h["bias"] = model.bias;
  h["dim"] = model.dim();
  h["n_support"] = model.coef.size();
  h["metadata"] = metadata;
  const std::string header = h.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model '" + path.string() + "'");
  out.write(kSvrMagic, sizeof kSvrMagic);
  detail::put_u32(out, kSvrFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  detail::put_f32(out, model.scaler.mean);
  detail::put_f32(out, model.scaler.stddev);
  for (const auto& sv : model.support_vectors) detail::put_f32(out, sv);
  detail::put_f32(out, model.coef);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

struct LoadedModel {
  SvrModel model;
  nlohmann::json metadata;
};

inline LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kSvrMagic, sizeof magic) != 0)
    throw ParseError("'" + path.string() + "' is not a deepstq SVR model");
  const auto version = detail::get_u32(in);
  if (version != kSvrFormatVersion)
    throw ParseError("unsupported model format version " + std::to_string(version));
  const auto hlen = detail::get_u32(in);
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);
  if (!in) throw ParseError("truncated model header");

  LoadedModel lm;
  try {
    const auto h = nlohmann::json::parse(header);
    auto& m = lm.model;
    m.kernel = parse_kernel(h.at("kernel").get<std::string>());
    m.hyper = {h.at("C").get<double>(), h.at("epsilon").get<double>(), h.at("gamma").get<double>()};
    m.bias = h.at("bias").get<double>();
    const auto dim = h.at("dim").get<std::size_t>();
    const auto nsv = h.at("n_support").get<std::size_t>();
    lm.metadata = h.value("metadata", nlohmann::json::object());
    m.scaler.mean = detail::get_f32(in, dim);
    m.scaler.stddev = detail::get_f32(in, dim);
    m.support_vectors.reserve(nsv);
    for (std::size_t i = 0; i < nsv; ++i) m.support_vectors.push_back(detail::get_f32(in, dim));
    m.coef = detail::get_f32(in, nsv);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad model header: " + std::string(e.what()));
  }
  return lm;
}

}  // namespace deepstq
