#pragma once

// Dataset manifest: CSV with the header
//   video_id,path,width,height,fps,reference_id,distortion,dmos
// Relative paths resolve against the manifest's directory. Fields may be
// double-quoted.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "deepstq/error.hpp"

namespace deepstq {

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  std::string reference_id;
  std::string distortion;
  double dmos = 0.0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }

  const ManifestEntry& find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.video_id == id) return e;
    throw InvalidArgument("unknown video id '" + id + "'");
  }

  std::set<std::string> reference_ids() const {
    std::set<std::string> s;
    for (const auto& e : entries) s.insert(e.reference_id);
    return s;
  }

  std::set<std::string> distortion_types() const {
    std::set<std::string> s;
    for (const auto& e : entries) s.insert(e.distortion);
    return s;
  }
};

inline constexpr const char* kManifestHeader = "video_id,path,width,height,fps,reference_id,distortion,dmos";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

struct ManifestOptions {
  bool check_files = true;
};

inline DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                                      const ManifestOptions& opt = {}) {
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ParseError("manifest line " + std::to_string(lineno) + ": " + msg);
  };

  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line != kManifestHeader) fail(std::string("expected header '") + kManifestHeader + "'");
    have_header = true;
    break;
  }
  if (!have_header) throw ParseError("manifest is empty (missing header)");

  DatasetManifest m;
  std::unordered_map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto f = detail::split_csv_line(line);
    if (f.size() != 8) fail("expected 8 fields, got " + std::to_string(f.size()));
    for (auto& s : f) s = detail::trim(s);

    ManifestEntry e;
    e.video_id = f[0];
    if (e.video_id.empty()) fail("empty video_id");
    e.path = f[1];
    if (e.path.empty()) fail("empty path");
    if (e.path.is_relative()) e.path = base_dir / e.path;
    try {
      std::size_t used = 0;
      e.width = std::stoi(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("width");
      e.height = std::stoi(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument("height");
      e.fps = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument("fps");
      e.dmos = std::stod(f[7], &used);
      if (used != f[7].size()) throw std::invalid_argument("dmos");
    } catch (const std::exception&) {
      fail("malformed numeric field");
    }
    if (e.width <= 0 || e.height <= 0) fail("width and height must be positive");
    if (!std::isfinite(e.dmos)) fail("dmos must be finite");
    if (!std::isfinite(e.fps) || e.fps < 0) fail("fps must be finite and non-negative");
    e.reference_id = f[5];
    e.distortion = f[6];
    if (e.reference_id.empty()) fail("empty reference_id");
    if (auto [it, fresh] = seen.emplace(e.video_id, lineno); !fresh)
      fail("duplicate video_id '" + e.video_id + "' (first seen on line " +
           std::to_string(it->second) + ")");
    if (opt.check_files && !std::filesystem::exists(e.path))
      fail("video file '" + e.path.string() + "' does not exist");
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw ParseError("manifest has no entries");
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path,
                                     const ManifestOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  return parse_manifest(in, path.parent_path(), opt);
}

inline void write_manifest(std::ostream& out, const DatasetManifest& m) {
  out << kManifestHeader << '\n';
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  };
  std::ostringstream num;
  num.precision(17);
  for (const auto& e : m.entries) {
    num.str({});
    num << e.fps << ',' << field(e.reference_id) << ',' << field(e.distortion) << ',' << e.dmos;
    out << field(e.video_id) << ',' << field(e.path.string()) << ',' << e.width << ','
        << e.height << ',' << num.str() << '\n';
  }
}

}  // namespace deepstq
