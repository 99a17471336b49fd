#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "modbridge/backends/registry.hpp"
#include "modbridge/harness/aggregate.hpp"
#include "modbridge/harness/demo.hpp"
#include "modbridge/harness/experiment.hpp"
#include "modbridge/harness/manifest.hpp"
#include "modbridge/paradigms/variants.hpp"
#include "modbridge/prompts/library.hpp"

namespace fs = std::filesystem;

namespace {

mb::ModalityKind kind_option(const std::string& s) { return mb::parse_modality(s); }

fs::path results_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("MB_RESULTS_DIR"); env && *env) return env;
  return "results";
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!part.empty()) out.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Missing-modality prediction pipelines over foundation-model backends"};
  app.require_subcommand(1);

  bool variants_json = false;
  auto* variants = app.add_subcommand("variants", "List the 42 baseline variants");
  variants->add_flag("--json", variants_json, "Print as JSON");

  std::string manifest_path, data_root, kind = "image";
  double rate = 0.5;
  std::uint64_t seed = 0;
  auto* mask = app.add_subcommand("mask", "Print the missing mask for a manifest");
  mask->add_option("--manifest", manifest_path, "Line-delimited JSON manifest")->required();
  mask->add_option("--data-root", data_root, "Blob root (default: manifest directory)");
  mask->add_option("--kind", kind, "Modality to withhold")->check(CLI::IsMember({"image", "text", "audio"}));
  mask->add_option("--rate", rate, "Missing rate in [0, 1]");
  mask->add_option("--seed", seed, "Mask seed");

  std::string config_path, results_flag;
  std::vector<std::string> overrides;
  int parallel = 0;
  auto* run = app.add_subcommand("run", "Run one configured pipeline over a manifest");
  run->add_option("--manifest", manifest_path, "Line-delimited JSON manifest")->required();
  run->add_option("--data-root", data_root, "Blob root (default: manifest directory)");
  run->add_option("--config", config_path, "Config JSON")->required();
  run->add_option("--set", overrides, "Override a config key, e.g. agents.threshold=4.0");
  run->add_option("--results", results_flag, "Results root (default: $MB_RESULTS_DIR or ./results)");
  run->add_option("--parallel", parallel, "Samples processed concurrently (overrides experiment.parallel)");

  std::vector<std::string> result_files;
  std::string group_by, csv_path;
  auto* agg = app.add_subcommand("aggregate", "Grouped means over results files");
  agg->add_option("files", result_files, "results.jsonl files")->required();
  agg->add_option("--group-by", group_by, "Comma-separated record fields")
      ->default_str("pipeline_id,target_kind,missing_rate");
  agg->add_option("--csv", csv_path, "Also write CSV here");

  std::string export_dir;
  auto* exp = app.add_subcommand("export-templates", "Write every prompt template to <dir>/<id>.txt");
  exp->add_option("dir", export_dir, "Output directory")->required();

  std::string demo_out;
  std::uint64_t demo_seed = 7;
  int demo_parallel = 1;
  bool real_clock = false;
  auto* demo = app.add_subcommand("mock-demo", "End-to-end run of every paradigm on toy data with mock backends");
  demo->add_option("--out", demo_out, "Output directory (default: <results root>/mock-demo)");
  demo->add_option("--seed", demo_seed, "Mask and generation seed");
  demo->add_option("--parallel", demo_parallel, "Samples processed concurrently");
  demo->add_flag("--real-clock", real_clock, "Record real wall times instead of zeros");

  std::string toy_dir;
  std::size_t toy_count = 20;
  auto* toy = app.add_subcommand("make-toy", "Write the toy dataset");
  toy->add_option("dir", toy_dir, "Output directory")->required();
  toy->add_option("--count", toy_count, "Number of samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*variants) {
      const auto list = mb::enumerate_variants();
      if (variants_json) {
        mb::json arr = mb::json::array();
        for (const auto& v : list) {
          auto j = mb::to_json(v);
          j["id"] = v.id();
          j["name"] = mb::display_name(v);
          j["paradigm"] = std::string(mb::to_string(mb::paradigm_of(v)));
          arr.push_back(j);
        }
        std::cout << arr.dump(2) << '\n';
      } else {
        for (const auto& v : list)
          std::cout << mb::to_string(mb::paradigm_of(v)) << '\t' << mb::display_name(v) << '\t' << v.id() << '\n';
      }
    } else if (*mask) {
      const auto m = mb::load_manifest(manifest_path, data_root);
      std::cout << mb::to_json(mb::apply_missing_mask(m, kind_option(kind), rate, seed)).dump(2) << '\n';
    } else if (*run) {
      std::ifstream in(config_path);
      if (!in) throw mb::Error(mb::ErrorCode::fatal_config_error, "cannot open " + config_path);
      mb::json doc = mb::json::parse(in);
      for (const auto& o : overrides) mb::apply_override(doc, o);
      auto config = mb::config_from_json(doc);
      if (parallel > 0) config.experiment.parallel = parallel;
      const auto m = mb::load_manifest(manifest_path, data_root);
      const auto mm = mb::apply_missing_mask(m, config.experiment.target_kind, config.experiment.missing_rate,
                                             config.experiment.mask_seed);
      mb::BackendSet backends(config.backends);
      mb::RunOptions options;
      options.results_root = results_root(results_flag);
      std::cout << mb::run_experiment(m, mm, config, backends, options).string() << '\n';
    } else if (*agg) {
      std::vector<fs::path> files(result_files.begin(), result_files.end());
      const auto table = mb::aggregate(files, split_csv(group_by.empty() ? "pipeline_id,target_kind,missing_rate" : group_by));
      std::cout << table.to_text();
      if (!csv_path.empty()) std::ofstream(csv_path, std::ios::binary) << table.to_csv();
    } else if (*exp) {
      std::cout << mb::export_templates(export_dir) << " templates written to " << export_dir << '\n';
    } else if (*demo) {
      mb::DemoOptions options;
      options.root = demo_out.empty() ? results_root("") / "mock-demo" : fs::path(demo_out);
      options.seed = demo_seed;
      options.parallel = demo_parallel;
      if (real_clock) options.clock = mb::steady_clock_seconds();
      const auto report = mb::run_mock_demo(options);
      std::cout << report.table.to_text();
      std::cout << report.results.size() << " runs under " << (options.root / "runs").string() << '\n';
    } else if (*toy) {
      std::cout << mb::make_toy_dataset(toy_dir, toy_count).string() << '\n';
    }
  } catch (const mb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == mb::ErrorCode::fatal_config_error ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
