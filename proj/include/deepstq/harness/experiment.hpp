#pragma once

// Evaluation protocol: repeated seeded train/test splits, SVR regression on
// cached stream means, SROCC/PLCC per split and medians over all splits.

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "deepstq/aggregate.hpp"
#include "deepstq/harness/cache.hpp"
#include "deepstq/harness/manifest.hpp"
#include "deepstq/harness/split.hpp"
#include "deepstq/metrics.hpp"
#include "deepstq/parallel.hpp"
#include "deepstq/svr.hpp"

namespace deepstq {

inline constexpr std::uint64_t kDefaultBaseSeed = 20200101;

class IncompleteCache : public Error {
 public:
  explicit IncompleteCache(std::vector<std::string> missing)
      : Error(describe(missing)), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& m) {
    std::string s = "feature cache incomplete; missing " + std::to_string(m.size()) + " entries:";
    for (std::size_t i = 0; i < m.size() && i < 20; ++i) s += " " + m[i];
    if (m.size() > 20) s += " ...";
    return s;
  }
  std::vector<std::string> missing_;
};

// Per-video feature rows for one stream mask.
struct FeatureTable {
  StreamMask mask;
  std::unordered_map<std::string, Row> rows;

  const Row& at(const std::string& id) const { return rows.at(id); }
};

inline FeatureTable load_feature_table(const DatasetManifest& manifest, const FeatureCache& cache,
                                       const Digest& digest, StreamMask mask) {
  FeatureTable t;
  t.mask = mask;
  std::vector<std::string> missing;
  for (const auto& e : manifest.entries) {
    std::vector<StreamAverage> means;
    bool ok = true;
    for (Stream s : mask.streams()) {
      auto v = cache.read(e.video_id, s, digest);
      if (!v) {
        missing.push_back(e.video_id + "/" + std::string(stream_name(s)));
        ok = false;
        continue;
      }
      means.push_back({s, std::vector<double>(v->begin(), v->end())});
    }
    if (ok) t.rows.emplace(e.video_id, concat_streams(means, mask, e.video_id).values);
  }
  if (!missing.empty()) throw IncompleteCache(std::move(missing));
  return t;
}

struct Protocol {
  int iterations = 1000;
  double train_fraction = 0.8;
  StreamMask mask = StreamMask::all();
  std::vector<SvrHyper> grid;  // empty: default_grid() on each training set
  int folds = 5;
  KernelKind kernel = KernelKind::Rbf;
  SplitMode split_mode = SplitMode::ContentDisjoint;
  std::uint64_t base_seed = kDefaultBaseSeed;
  unsigned threads = 1;
  SolverOptions solver{};
  LogisticFitOptions logistic{};

  std::string canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "deepstq-protocol/v1;iterations=" << iterations << ";fraction=" << train_fraction
      << ";streams=" << mask.to_string() << ";folds=" << folds << ";kernel=" << kernel_name(kernel)
      << ";split=" << (split_mode == SplitMode::ContentDisjoint ? "content" : "video")
      << ";seed=" << base_seed << ";tol=" << solver.tol << ";maxit=" << solver.max_iterations
      << ";logistic5=" << logistic.linear_term << ";grid=";
    if (grid.empty()) s << "default";
    for (const auto& h : grid) s << '(' << h.C << ',' << h.epsilon << ',' << h.gamma << ')';
    return s.str();
  }
};

struct IterationResult {
  int iteration = 0;
  std::uint64_t seed = 0;
  CorrelationReport report;
  SvrHyper hyper;
  double cv_score = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  bool degenerate = false;  // constant predictions; correlations recorded as 0
};

struct ExperimentResult {
  std::vector<IterationResult> iterations;
  double median_srocc = 0.0;
  double median_plcc = 0.0;
  std::string config_digest;
  StreamMask mask;
  double train_fraction = 0.0;
};

// Lower-middle order statistic for even lengths.
inline double lower_median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of empty list");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

inline IterationResult run_iteration(const DatasetManifest& manifest, const FeatureTable& table,
                                     const Protocol& p, int iteration) {
  IterationResult r;
  r.iteration = iteration;
  r.seed = p.base_seed + static_cast<std::uint64_t>(iteration);
  const SplitSpec split = make_split(manifest, p.train_fraction, r.seed, p.split_mode);

  std::set<std::string> train_refs, test_refs;
  std::vector<Row> xtr, xte;
  std::vector<double> ytr, yte;
  std::vector<std::string> groups;
  for (const auto& id : split.train_ids) {
    const auto& e = manifest.find(id);
    train_refs.insert(e.reference_id);
    xtr.push_back(table.at(id));
    ytr.push_back(e.dmos);
    groups.push_back(e.reference_id);
  }
  for (const auto& id : split.test_ids) {
    const auto& e = manifest.find(id);
    test_refs.insert(e.reference_id);
    xte.push_back(table.at(id));
    yte.push_back(e.dmos);
  }
  if (p.split_mode == SplitMode::ContentDisjoint)
    for (const auto& ref : test_refs)
      if (train_refs.count(ref))
        throw Error("split hygiene violated: reference '" + ref + "' on both sides");
  r.n_train = xtr.size();
  r.n_test = xte.size();

  // Scaler and model selection see training rows only.
  const Scaler scaler = fit_scaler(xtr);
  const auto ztr = apply_scaler(scaler, xtr);
  const auto grid = p.grid.empty() ? default_grid(ytr, ztr.front().size()) : p.grid;
  GridSearchOptions gopt;
  gopt.folds = p.folds;
  gopt.kernel = p.kernel;
  gopt.solver = p.solver;
  const auto gs = grid_search(ztr, ytr, grid, gopt,
                              p.split_mode == SplitMode::ContentDisjoint
                                  ? std::span<const std::string>(groups)
                                  : std::span<const std::string>());
  r.hyper = gs.best;
  r.cv_score = gs.best_score;
  const SvrModel model = train_svr(ztr, ytr, gs.best, p.solver, p.kernel, &scaler);

  std::vector<double> pred;
  pred.reserve(xte.size());
  for (const auto& row : xte) pred.push_back(predict(model, row));
  try {
    r.report = evaluate_predictions(pred, yte, p.logistic);
  } catch (const UndefinedCorrelation&) {
    r.degenerate = true;
    r.report.n = pred.size();
  }
  return r;
}

inline ExperimentResult run_experiment(const DatasetManifest& manifest, const FeatureTable& table,
                                       const Protocol& p, const Digest& feature_digest = {}) {
  if (p.iterations < 1) throw InvalidArgument("run_experiment: iterations must be >= 1");
  if (!(table.mask == p.mask)) throw InvalidArgument("run_experiment: feature table mask differs from protocol");
  ExperimentResult res;
  res.mask = p.mask;
  res.train_fraction = p.train_fraction;
  res.config_digest = sha256_hex(p.canonical() + ";features=" + to_hex(feature_digest));
  res.iterations.resize(static_cast<std::size_t>(p.iterations));
  parallel_for(res.iterations.size(), p.threads, [&](std::size_t i) {
    res.iterations[i] = run_iteration(manifest, table, p, static_cast<int>(i));
  });
  std::vector<double> s, c;
  for (const auto& it : res.iterations) {
    s.push_back(it.report.srocc);
    c.push_back(it.report.plcc);
  }
  res.median_srocc = lower_median(s);
  res.median_plcc = lower_median(c);
  return res;
}

inline ExperimentResult run_experiment(const DatasetManifest& manifest, const FeatureCache& cache,
                                       const Digest& feature_digest, const Protocol& p) {
  const FeatureTable table = load_feature_table(manifest, cache, feature_digest, p.mask);
  return run_experiment(manifest, table, p, feature_digest);
}

struct AblationRow {
  std::string label;
  StreamMask mask;
  ExperimentResult result;
};

struct AblationConfig {
  std::string label;
  StreamMask mask;
};

inline std::vector<AblationConfig> ablation_configs() {
  using S = Stream;
  return {
      {"Distorted frames", {S::GlobalFrame}},
      {"Frame difference maps", {S::GlobalDiff}},
      {"Frames + difference maps", {S::GlobalFrame, S::GlobalDiff}},
      {"Frame patches", {S::LocalFrame}},
      {"Difference patches", {S::LocalDiff}},
      {"Frame patches + difference patches", {S::LocalFrame, S::LocalDiff}},
      {"All four streams", StreamMask::all()},
  };
}

inline std::vector<AblationRow> run_ablation(const DatasetManifest& manifest, const FeatureCache& cache,
                                             const Digest& feature_digest, Protocol p) {
  // Fail early, before any training, if any stream is missing.
  (void)load_feature_table(manifest, cache, feature_digest, StreamMask::all());
  std::vector<AblationRow> rows;
  for (const auto& cfg : ablation_configs()) {
    p.mask = cfg.mask;
    rows.push_back({cfg.label, cfg.mask, run_experiment(manifest, cache, feature_digest, p)});
  }
  return rows;
}

struct SweepRow {
  double train_fraction = 0.0;
  ExperimentResult result;
};

// One experiment per distinct fraction, in ascending order.
inline std::vector<SweepRow> sweep_training_fraction(const DatasetManifest& manifest,
                                                     const FeatureCache& cache,
                                                     const Digest& feature_digest,
                                                     std::vector<double> fractions, Protocol p) {
  if (fractions.empty()) throw InvalidArgument("sweep: no fractions");
  std::sort(fractions.begin(), fractions.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());
  for (double f : fractions) (void)make_split(manifest, f, p.base_seed, p.split_mode);
  const FeatureTable table = load_feature_table(manifest, cache, feature_digest, p.mask);
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    p.train_fraction = f;
    rows.push_back({f, run_experiment(manifest, table, p, feature_digest)});
  }
  return rows;
}

}  // namespace deepstq
