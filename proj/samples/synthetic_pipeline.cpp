// Builds a small synthetic dataset, extracts stub features and runs a short
// evaluation plus the stream ablation.

#include <filesystem>
#include <iostream>

#include "deepstq/deepstq.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace deepstq;

  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "deepstq_sample";
  SyntheticSpec spec;
  const auto manifest = write_synthetic_dataset(dir / "videos", spec);

  const StubBackend backend;
  ExtractionConfig cfg;
  cfg.backend_identity = backend.identity();
  const FeatureCache cache(dir / "cache");
  const auto summary = extract_all_features(manifest, backend, cache, cfg);
  std::cout << "extracted " << summary.extracted << " videos (" << summary.cached << " cached)\n";

  Protocol p;
  p.iterations = 10;
  const auto res = run_experiment(manifest, cache, cfg.digest(), p);
  std::cout << format_result_table("All four streams", res) << '\n';
  std::cout << format_ablation_table(run_ablation(manifest, cache, cfg.digest(), p));
  return 0;
}
