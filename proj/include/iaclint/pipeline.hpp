#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iaclint/ansible_ast.hpp"
#include "iaclint/cbow_embeddings.hpp"
#include "iaclint/cnn_classifier.hpp"
#include "iaclint/corpus_miner.hpp"
#include "iaclint/dataset_builder.hpp"
#include "iaclint/eval_metrics.hpp"

namespace iaclint::pipeline {

struct PipelineConfig {
  std::vector<std::filesystem::path> corpus_roots;
  std::optional<std::filesystem::path> metadata_file;
  std::filesystem::path work_dir = "work";
  std::filesystem::path model_dir = "models";
  std::vector<std::string> modules;  // allowlist; empty selects the top_n modules
  int top_n = 10;
  std::uint64_t split_seed = 42;
  std::uint64_t mutation_seed = 43;
  double cross_fraction = 0.5;
  embedding::EmbeddingConfig embedding;
  cnn::Hyperparams cnn;
  std::uint64_t cnn_seed = 45;
  int workers = 1;
  double threshold = 0.5;

  /// Derives every stage seed from one value.
  void set_seed(std::uint64_t seed);
  /// Applies one `key=value` setting; throws Error for unknown keys or bad values.
  void apply(const std::string& key, const std::string& value);
  void load_file(const std::filesystem::path& path);
  std::string describe() const;
};

/// Strips the `ansible.builtin.` / `ansible.legacy.` collection prefixes.
std::string canonical_module(const std::string& module_key);

struct ExtractResult {
  std::map<std::string, std::size_t> task_counts;
  std::vector<std::string> selected;  // by descending task count, then name
  std::size_t files = 0;
  std::size_t skipped_tasks = 0;
  std::size_t failed_files = 0;
};

struct ModuleDatasets {
  std::string module_key;
  std::vector<dataset::LabeledExample> train, test, eval;
  std::size_t skipped = 0;
};

struct ModuleResult {
  std::string module_key;
  bool ok = false;
  std::string error;
  metrics::MetricsReport report;
  cnn::PaddingSpec padding;
  std::string version;
};

struct Finding {
  std::string file;
  int line = 0;
  std::string task_name;
  std::string module_key;
  double p_inconsistent = 0;
  bool inconsistent = false;
  std::string model_version;
};

struct DetectResult {
  std::vector<Finding> findings;  // sorted by p_inconsistent descending
  std::vector<std::string> notes;  // skipped tasks (no model) and per-file errors
  std::size_t tasks_seen = 0;
  std::size_t file_errors = 0;
  int exit_code() const;
};

corpus::CorpusManifest run_mine(const PipelineConfig& cfg);
ExtractResult run_extract(const PipelineConfig& cfg);
std::vector<ModuleDatasets> run_mutate(const PipelineConfig& cfg);
std::vector<ModuleResult> run_train(const PipelineConfig& cfg);
std::vector<metrics::MetricsReport> run_evaluate(const PipelineConfig& cfg);
DetectResult run_detect(const PipelineConfig& cfg, const std::vector<std::filesystem::path>& playbooks,
                        const std::optional<std::filesystem::path>& report_path);

std::string format_findings(const std::vector<Finding>& findings);

/// Loaded per-module artifacts used for scoring tasks.
struct ModuleModel {
  embedding::EmbeddingModel embedding;
  cnn::CnnModel classifier;
};
ModuleModel load_module_model(const std::filesystem::path& module_dir);

/// Name/body tokens for one parsed task, as seen by the classifier.
NormalizedExample task_example(const ansible::Task& task);

}  // namespace iaclint::pipeline
