// Command-line front end: mine, extract, mutate, train, evaluate, detect.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iaclint/error.hpp"
#include "iaclint/log.hpp"
#include "iaclint/pipeline.hpp"
#include "iaclint/text_io.hpp"

namespace fs = std::filesystem;
using namespace iaclint;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string modules;
  std::string model_dir;
  std::string work_dir;
  std::vector<std::string> corpus;
  std::string metadata;
  std::optional<double> threshold;
  std::optional<int> jobs;
  std::optional<int> top_n;
  bool quiet = false;
};

pipeline::PipelineConfig make_config(const GlobalOptions& o) {
  pipeline::PipelineConfig cfg;
  if (!o.config.empty()) cfg.load_file(o.config);
  if (o.seed) cfg.set_seed(*o.seed);
  if (!o.modules.empty()) cfg.apply("modules", o.modules);
  if (!o.model_dir.empty()) cfg.model_dir = o.model_dir;
  if (!o.work_dir.empty()) cfg.work_dir = o.work_dir;
  if (!o.corpus.empty()) {
    cfg.corpus_roots.clear();
    for (const auto& c : o.corpus) cfg.corpus_roots.emplace_back(c);
  }
  if (!o.metadata.empty()) cfg.metadata_file = o.metadata;
  if (o.threshold) cfg.threshold = *o.threshold;
  if (o.jobs) cfg.workers = *o.jobs;
  if (o.top_n) cfg.top_n = *o.top_n;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Name/body inconsistency linter for Ansible tasks"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config, "key=value configuration file");
  app.add_option("--seed", opts.seed, "derive every stage seed from this value");
  app.add_option("--modules", opts.modules, "comma-separated module allowlist");
  app.add_option("--model-dir", opts.model_dir, "model repository directory");
  app.add_option("--work-dir", opts.work_dir, "directory for manifests, token files and datasets");
  app.add_option("--corpus", opts.corpus, "corpus root directory (repeatable)");
  app.add_option("--metadata", opts.metadata, "repository metadata file (CSV with header)");
  app.add_option("--threshold", opts.threshold, "p_inconsistent above which a task is reported");
  app.add_option("--jobs", opts.jobs, "worker threads for per-module training and parsing");
  app.add_option("--top", opts.top_n, "number of most used modules to keep when no allowlist is set");
  app.add_flag("--quiet", opts.quiet, "only print warnings and errors");

  auto* mine = app.add_subcommand("mine", "filter repositories and list their YAML files");
  auto* extract = app.add_subcommand("extract", "parse tasks and write per-module token files");
  auto* mutate = app.add_subcommand("mutate", "split and body-swap tasks into labeled datasets");
  auto* train = app.add_subcommand("train", "train embeddings and classifiers for every module");
  auto* evaluate = app.add_subcommand("evaluate", "score trained models on their eval split");
  auto* detect = app.add_subcommand("detect", "report name/body inconsistencies in playbooks");

  std::vector<std::string> playbooks;
  std::string report = "findings.tsv";
  detect->add_option("playbooks", playbooks, "playbook or task files")->required();
  detect->add_option("--report", report, "findings report path");

  CLI11_PARSE(app, argc, argv);
  if (opts.quiet) log::set_threshold(log::Level::kWarn);

  try {
    const auto cfg = make_config(opts);
    if (mine->parsed()) {
      const auto manifest = pipeline::run_mine(cfg);
      std::cout << manifest.repos.size() << " repositories, " << manifest.yaml_files.size() << " YAML files\n";
      std::cout << "manifest written to " << (cfg.work_dir / "manifest.json").string() << "\n";
    } else if (extract->parsed()) {
      const auto res = pipeline::run_extract(cfg);
      std::cout << "tasks per module (" << res.files << " files):\n";
      std::vector<std::pair<std::string, std::size_t>> counts(res.task_counts.begin(), res.task_counts.end());
      std::stable_sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
      for (const auto& [m, n] : counts) std::cout << "  " << m << "\t" << n << "\n";
      std::cout << "selected:";
      for (const auto& m : res.selected) std::cout << " " << m;
      std::cout << "\n";
    } else if (mutate->parsed()) {
      for (const auto& ds : pipeline::run_mutate(cfg)) {
        std::cout << ds.module_key << "\ttrain " << ds.train.size() << "\ttest " << ds.test.size() << "\teval "
                  << ds.eval.size() << "\tskipped " << ds.skipped << "\n";
      }
    } else if (train->parsed()) {
      const auto results = pipeline::run_train(cfg);
      std::vector<metrics::MetricsReport> ok;
      for (const auto& r : results) {
        if (r.ok) ok.push_back(r.report);
        else std::cerr << "module " << r.module_key << " failed: " << r.error << "\n";
      }
      if (ok.empty()) return 1;
      std::cout << metrics::render_table(ok);
    } else if (evaluate->parsed()) {
      const auto reports = pipeline::run_evaluate(cfg);
      if (reports.empty()) {
        std::cerr << "no trained models found in " << cfg.model_dir.string() << "\n";
        return 1;
      }
      std::cout << metrics::render_table(reports);
    } else if (detect->parsed()) {
      std::vector<fs::path> paths(playbooks.begin(), playbooks.end());
      const auto res = pipeline::run_detect(cfg, paths, fs::path(report));
      for (const auto& f : res.findings) {
        char p[32];
        std::snprintf(p, sizeof(p), "%.3f", f.p_inconsistent);
        std::cout << f.file << ":" << f.line << "\t" << (f.inconsistent ? "INCONSISTENT" : "ok") << "\t" << p
                  << "\t[" << f.module_key << "] " << f.task_name << "\n";
      }
      for (const auto& n : res.notes) std::cerr << n << "\n";
      return res.exit_code();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
