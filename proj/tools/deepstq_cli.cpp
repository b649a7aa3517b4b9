// deepstq command line: feature extraction, training, evaluation protocol,
// ablation and training-fraction sweep.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deepstq/deepstq.hpp"
#ifdef DEEPSTQ_HAS_ONNX
#include "deepstq/onnx_backend.hpp"
#endif

namespace {

using namespace deepstq;

struct Options {
  std::string manifest;
  std::string cache = "feature_cache";
  std::string model;
  bool stub_backend = false;
  std::uint64_t stub_seed = StubBackend::kDefaultSeed;
  int patch = kNetworkInput;
  int stride = kDefaultStride;
  int frame_stride = 1;
  unsigned threads = default_threads();

  std::uint64_t seed = kDefaultBaseSeed;
  int iterations = 1000;
  double train_fraction = 0.8;
  std::string streams = "all";
  std::string kernel = "rbf";
  int folds = 5;
  std::string split = "content";
  bool logistic_linear_term = false;
  double tol = 1e-3;

  std::string out;
  std::string svr_model;
  std::vector<double> fractions = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::string bundle;
  bool per_iteration = false;
};

std::unique_ptr<FeatureBackend> make_backend(const Options& o) {
  if (o.stub_backend) return std::make_unique<StubBackend>(o.stub_seed);
  if (o.model.empty()) throw InvalidArgument("either --model or --stub-backend is required");
#ifdef DEEPSTQ_HAS_ONNX
  return std::make_unique<OnnxBackend>(o.model);
#else
  throw BackendError("this build has no ONNX support (OpenCV dnn not found)");
#endif
}

ExtractionConfig extraction_config(const Options& o, const FeatureBackend& backend) {
  ExtractionConfig cfg;
  cfg.backend_identity = backend.identity();
  cfg.views.patch = o.patch;
  cfg.views.stride = o.stride;
  cfg.frame_stride = o.frame_stride;
  return cfg;
}

Protocol protocol(const Options& o) {
  Protocol p;
  p.iterations = o.iterations;
  p.train_fraction = o.train_fraction;
  p.mask = parse_stream_mask(o.streams);
  p.kernel = parse_kernel(o.kernel);
  p.folds = o.folds;
  if (o.split == "content") p.split_mode = SplitMode::ContentDisjoint;
  else if (o.split == "video") p.split_mode = SplitMode::VideoLevel;
  else throw InvalidArgument("--split must be 'content' or 'video'");
  p.base_seed = o.seed;
  p.threads = o.threads;
  p.solver.tol = o.tol;
  p.logistic.linear_term = o.logistic_linear_term;
  return p;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

int cmd_extract(const Options& o) {
  const auto manifest = load_manifest(o.manifest);
  const auto backend = make_backend(o);
  const FeatureCache cache(o.cache);
  const auto cfg = extraction_config(o, *backend);
  const auto summary = extract_all_features(manifest, *backend, cache, cfg, o.threads);
  std::cout << "extracted " << summary.extracted << ", cached " << summary.cached << ", failed "
            << summary.failures.size() << " (config digest " << to_hex(cfg.digest()) << ")\n";
  for (const auto& f : summary.failures) std::cerr << "  " << f.video_id << ": " << f.message << '\n';
  write_json(o.out, to_json(summary));
  return summary.failures.empty() ? 0 : 1;
}

// Trains one model on the whole manifest (grid search included).
int cmd_train(const Options& o) {
  if (o.out.empty()) throw InvalidArgument("train: --out <model file> is required");
  const auto manifest = load_manifest(o.manifest, {.check_files = false});
  const auto backend = make_backend(o);
  const FeatureCache cache(o.cache);
  const auto cfg = extraction_config(o, *backend);
  const Protocol p = protocol(o);
  const auto table = load_feature_table(manifest, cache, cfg.digest(), p.mask);

  std::vector<Row> x;
  std::vector<double> y;
  std::vector<std::string> groups;
  for (const auto& e : manifest.entries) {
    x.push_back(table.at(e.video_id));
    y.push_back(e.dmos);
    groups.push_back(e.reference_id);
  }
  const Scaler scaler = fit_scaler(x);
  const auto z = apply_scaler(scaler, x);
  GridSearchOptions g;
  g.folds = p.folds;
  g.kernel = p.kernel;
  g.solver = p.solver;
  g.threads = o.threads;
  const auto grid = p.grid.empty() ? default_grid(y, z.front().size()) : p.grid;
  const auto gs = grid_search(z, y, grid, g,
                              p.split_mode == SplitMode::ContentDisjoint ? std::span<const std::string>(groups)
                                                                         : std::span<const std::string>());
  const auto model = train_svr(z, y, gs.best, p.solver, p.kernel, &scaler);
  save_model(o.out, model,
             {{"streams", p.mask.to_string()}, {"feature_digest", to_hex(cfg.digest())},
              {"backend", backend->identity()}, {"cv_srocc", gs.best_score}});
  std::cout << "trained on " << x.size() << " videos: C=" << gs.best.C << " gamma=" << gs.best.gamma
            << " epsilon=" << gs.best.epsilon << " support vectors=" << model.coef.size()
            << " cv SROCC=" << fmt4(gs.best_score) << "\n";
  return 0;
}

int cmd_predict(const Options& o) {
  if (o.svr_model.empty()) throw InvalidArgument("predict: --svr-model is required");
  const auto loaded = load_model(o.svr_model);
  const auto manifest = load_manifest(o.manifest, {.check_files = false});
  const auto backend = make_backend(o);
  const FeatureCache cache(o.cache);
  const auto cfg = extraction_config(o, *backend);
  const auto mask = parse_stream_mask(loaded.metadata.value("streams", o.streams));
  if (loaded.metadata.contains("feature_digest") &&
      loaded.metadata["feature_digest"].get<std::string>() != to_hex(cfg.digest()))
    std::cerr << "warning: model was trained on features from a different extraction config\n";
  const auto table = load_feature_table(manifest, cache, cfg.digest(), mask);
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    const double s = predict(loaded.model, table.at(e.video_id));
    std::cout << e.video_id << ',' << s << '\n';
    scores.push_back({{"video_id", e.video_id}, {"score", s}});
  }
  write_json(o.out, scores);
  return 0;
}

int cmd_evaluate(const Options& o) {
  const auto manifest = load_manifest(o.manifest, {.check_files = false});
  const auto backend = make_backend(o);
  const FeatureCache cache(o.cache);
  const auto digest = extraction_config(o, *backend).digest();
  const auto res = run_experiment(manifest, cache, digest, protocol(o));
  std::cout << format_result_table("DeepSTQ (" + res.mask.to_string() + ")", res);
  write_json(o.out, to_json(res, o.per_iteration));
  return 0;
}

int cmd_ablate(const Options& o) {
  const auto manifest = load_manifest(o.manifest, {.check_files = false});
  const auto backend = make_backend(o);
  const FeatureCache cache(o.cache);
  const auto digest = extraction_config(o, *backend).digest();
  const auto rows = run_ablation(manifest, cache, digest, protocol(o));
  std::cout << format_ablation_table(rows);
  write_json(o.out, to_json(rows));
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto manifest = load_manifest(o.manifest, {.check_files = false});
  const auto backend = make_backend(o);
  const FeatureCache cache(o.cache);
  const auto digest = extraction_config(o, *backend).digest();
  const auto rows = sweep_training_fraction(manifest, cache, digest, o.fractions, protocol(o));
  std::cout << format_sweep_table(rows) << '\n' << format_sweep_data(rows);
  write_json(o.out, to_json(rows));
  return 0;
}

int cmd_check_model(const Options& o) {
  if (o.bundle.empty()) throw InvalidArgument("check-model: --bundle is required");
  const auto bundle = load_bundle(o.bundle);
  Options with_model = o;
  if (with_model.model.empty() && !o.stub_backend) with_model.model = bundle.model_path.string();
  const auto backend = make_backend(with_model);
  const auto c = check_bundle(*backend, bundle);
  std::cout << "output dim " << c.output_dim << ", max |diff| " << c.max_abs_diff << " -> "
            << (c.passed ? "PASS" : "FAIL") << '\n';
  return c.passed ? 0 : 1;
}

int cmd_synth(const std::string& dir, const SyntheticSpec& spec) {
  const auto m = write_synthetic_dataset(dir, spec);
  std::cout << "wrote " << m.size() << " videos and " << (std::filesystem::path(dir) / "manifest.csv").string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepstq: no-reference video quality assessment toolkit"};
  app.set_config("--config", "", "Read options from a key = value file (keys mirror long flags)");
  app.require_subcommand(1);
  Options o;

  app.add_option("--manifest", o.manifest, "Dataset manifest CSV");
  app.add_option("--cache", o.cache, "Feature cache directory")->capture_default_str();
  app.add_option("--model", o.model, "ONNX feature extractor");
  app.add_flag("--stub-backend", o.stub_backend, "Use the deterministic stub feature backend");
  app.add_option("--stub-seed", o.stub_seed, "Stub backend seed")->capture_default_str();
  app.add_option("--patch", o.patch, "Local patch size")->capture_default_str();
  app.add_option("--stride", o.stride, "Local patch stride")->capture_default_str();
  app.add_option("--frame-stride", o.frame_stride, "Use every n-th frame")->capture_default_str();
  app.add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  app.add_option("--seed", o.seed, "Base seed; iteration i uses seed + i")->capture_default_str();
  app.add_option("--iterations", o.iterations, "Random splits")->capture_default_str();
  app.add_option("--train-fraction", o.train_fraction, "Training share of the data")->capture_default_str();
  app.add_option("--streams", o.streams, "Streams: all or a list of gf,gd,lf,ld")->capture_default_str();
  app.add_option("--kernel", o.kernel, "SVR kernel: rbf or linear")->capture_default_str();
  app.add_option("--folds", o.folds, "Grid-search folds")->capture_default_str();
  app.add_option("--split", o.split, "Split mode: content or video")->capture_default_str();
  app.add_flag("--logistic-linear-term", o.logistic_linear_term, "Fit an extra linear term in the logistic map");
  app.add_option("--tol", o.tol, "SMO stopping tolerance")->capture_default_str();
  app.add_option("--out", o.out, "Output file (JSON results or model)");
  app.add_flag("--per-iteration", o.per_iteration, "Include per-iteration results in JSON");

  auto* extract = app.add_subcommand("extract", "Extract and cache stream features")->fallthrough();
  auto* train = app.add_subcommand("train", "Train an SVR on all cached videos")->fallthrough();
  auto* predict_cmd = app.add_subcommand("predict", "Score videos with a trained model")->fallthrough();
  predict_cmd->add_option("--svr-model", o.svr_model, "Model file from 'train'")->required();
  auto* evaluate = app.add_subcommand("evaluate", "Median SROCC/PLCC over random splits")->fallthrough();
  auto* ablate = app.add_subcommand("ablate", "Evaluate the seven stream combinations")->fallthrough();
  auto* sweep = app.add_subcommand("sweep", "Median performance per training fraction")->fallthrough();
  sweep->add_option("--fractions", o.fractions, "Training fractions")->delimiter(',');
  auto* check = app.add_subcommand("check-model", "Verify a feature model against its export bundle")->fallthrough();
  check->add_option("--bundle", o.bundle, "Export bundle JSON")->required();

  std::string synth_dir;
  SyntheticSpec spec;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset for trying the pipeline");
  synth->add_option("dir", synth_dir, "Output directory")->required();
  synth->add_option("--references", spec.references)->capture_default_str();
  synth->add_option("--levels", spec.levels)->capture_default_str();
  synth->add_option("--width", spec.width)->capture_default_str();
  synth->add_option("--height", spec.height)->capture_default_str();
  synth->add_option("--frames", spec.frames)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--signal", spec.signal, "noise or motion")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, SyntheticSignal>{{"noise", SyntheticSignal::NoiseLevel},
                                                 {"motion", SyntheticSignal::MotionSpeed}}));
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if ((extract->parsed() || train->parsed() || predict_cmd->parsed() || evaluate->parsed() ||
         ablate->parsed() || sweep->parsed()) &&
        o.manifest.empty())
      throw InvalidArgument("--manifest is required");
    if (extract->parsed()) return cmd_extract(o);
    if (train->parsed()) return cmd_train(o);
    if (predict_cmd->parsed()) return cmd_predict(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (ablate->parsed()) return cmd_ablate(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (check->parsed()) return cmd_check_model(o);
    if (synth->parsed()) return cmd_synth(synth_dir, spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
