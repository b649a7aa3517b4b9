#pragma once

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepstq/harness/experiment.hpp"
#include "deepstq/harness/pipeline.hpp"

namespace deepstq {

inline nlohmann::json to_json(const LogisticParams& p) {
  return {{"beta1", p.beta1}, {"beta2", p.beta2}, {"beta3", p.beta3}, {"beta4", p.beta4}, {"beta5", p.beta5}};
}

inline nlohmann::json to_json(const ExperimentResult& r, bool per_iteration = true) {
  nlohmann::json j;
  j["streams"] = r.mask.to_string();
  j["train_fraction"] = r.train_fraction;
  j["iterations"] = r.iterations.size();
  j["median_srocc"] = r.median_srocc;
  j["median_plcc"] = r.median_plcc;
  j["config_digest"] = r.config_digest;
  if (per_iteration) {
    auto& arr = j["per_iteration"] = nlohmann::json::array();
    for (const auto& it : r.iterations) {
      arr.push_back({{"iteration", it.iteration},
                     {"seed", it.seed},
                     {"srocc", it.report.srocc},
                     {"plcc", it.report.plcc},
                     {"n_train", it.n_train},
                     {"n_test", it.n_test},
                     {"C", it.hyper.C},
                     {"epsilon", it.hyper.epsilon},
                     {"gamma", it.hyper.gamma},
                     {"cv_srocc", it.cv_score},
                     {"logistic_fitted", it.report.logistic_fitted},
                     {"logistic", to_json(it.report.logistic)},
                     {"degenerate", it.degenerate}});
    }
  }
  return j;
}

inline nlohmann::json to_json(const std::vector<AblationRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    auto j = to_json(r.result, false);
    j["label"] = r.label;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::json to_json(const std::vector<SweepRow>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) arr.push_back(to_json(r.result, false));
  return arr;
}

inline nlohmann::json to_json(const ExtractionSummary& s) {
  nlohmann::json j{{"extracted", s.extracted}, {"cached", s.cached}};
  auto& f = j["failures"] = nlohmann::json::array();
  for (const auto& x : s.failures) f.push_back({{"video_id", x.video_id}, {"error", x.message}});
  return j;
}

// Pipe-delimited table with a rule under the header and padded columns.
inline std::string format_table(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) w[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < w.size(); ++c) w[c] = std::max(w[c], r[c].size());
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    out << '|';
    for (std::size_t c = 0; c < w.size(); ++c) {
      const std::string cell = c < r.size() ? r[c] : "";
      out << ' ' << std::setw(static_cast<int>(w[c])) << (c == 0 ? std::left : std::right) << cell << " |";
    }
    out << '\n';
  };
  auto rule = [&] {
    out << '+';
    for (auto x : w) out << std::string(x + 2, '-') << '+';
    out << '\n';
  };
  rule();
  line(header);
  rule();
  for (const auto& r : rows) line(r);
  rule();
  return out.str();
}

inline std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline std::string format_result_table(const std::string& method, const ExperimentResult& r) {
  return format_table({"Method", "SROCC", "PLCC"}, {{method, fmt4(r.median_srocc), fmt4(r.median_plcc)}});
}

inline std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) body.push_back({r.label, fmt4(r.result.median_srocc), fmt4(r.result.median_plcc)});
  return format_table({"Streams", "SROCC", "PLCC"}, body);
}

inline std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    char pct[16];
    std::snprintf(pct, sizeof pct, "%.0f%%", 100.0 * r.train_fraction);
    body.push_back({pct, fmt4(r.result.median_srocc), fmt4(r.result.median_plcc)});
  }
  return format_table({"Training", "SROCC", "PLCC"}, body);
}

// Whitespace-separated columns for plotting tools.
inline std::string format_sweep_data(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "# train_fraction median_srocc median_plcc\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.train_fraction << ' ' << r.result.median_srocc << ' ' << r.result.median_plcc << '\n';
  return out.str();
}

}  // namespace deepstq
