#include "iaclint/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "iaclint/error.hpp"
#include "iaclint/log.hpp"
#include "iaclint/text_io.hpp"
#include "iaclint/tokenizer.hpp"

namespace fs = std::filesystem;

namespace iaclint::pipeline {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  for (std::size_t t = 0; t < count; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

std::uint64_t module_seed(std::uint64_t base, const std::string& module) {
  return base ^ text::fnv1a(module);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (const auto& piece : text::split(value, ',')) {
    auto t = text::trim(piece);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

fs::path tokens_path(const PipelineConfig& cfg, const std::string& module) {
  return cfg.work_dir / "tokens" / (module + ".tsv");
}

fs::path dataset_path(const PipelineConfig& cfg, const std::string& module, dataset::SplitKind split) {
  return cfg.work_dir / "datasets" / module / (std::string(dataset::split_name(split)) + ".tsv");
}

std::vector<std::string> read_selected_modules(const PipelineConfig& cfg) {
  const auto path = cfg.work_dir / "modules.txt";
  if (!fs::exists(path)) throw Error("no extracted modules found; run `extract` first (" + path.string() + ")");
  std::vector<std::string> modules;
  for (const auto& line : text::split(text::read_file(path), '\n')) {
    auto t = text::trim(line);
    if (!t.empty()) modules.push_back(t);
  }
  return modules;
}

std::vector<NormalizedExample> read_module_tokens(const PipelineConfig& cfg, const std::string& module) {
  const auto path = tokens_path(cfg, module);
  std::vector<NormalizedExample> out;
  std::map<std::string, std::string> names;
  int ln = 0;
  for (const auto& line : text::split(text::read_file(path), '\n')) {
    ++ln;
    if (line.empty()) continue;
    ansible::TokenStream s;
    try {
      s = ansible::parse_stream_line(line);
    } catch (const Error& e) {
      throw ParseError(path.string(), ln, e.what());
    }
    if (s.origin == ansible::Origin::kName) {
      std::string joined;
      for (const auto& t : s.tokens) joined += (joined.empty() ? "" : " ") + t;
      names[s.task_id] = joined;
    } else {
      out.push_back(normalize(s, names[s.task_id], module));
    }
  }
  return out;
}

std::vector<std::vector<std::string>> joint_sequences(const std::vector<dataset::LabeledExample>& examples) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(examples.size());
  for (const auto& e : examples) seqs.push_back(dataset::joint_sequence(e.base));
  return seqs;
}

cnn::TrainingSet to_matrices(const std::vector<dataset::LabeledExample>& examples,
                             const embedding::EmbeddingModel& emb, const cnn::PaddingSpec& pad) {
  cnn::TrainingSet set;
  for (const auto& e : examples) {
    set.inputs.push_back(cnn::prepare_input(e.base, emb, pad));
    set.labels.push_back(e.label);
  }
  return set;
}

metrics::MetricsReport evaluate_split(const ModuleModel& model, const std::vector<dataset::LabeledExample>& eval,
                                      const std::string& module, std::vector<metrics::RocPoint>* roc) {
  std::vector<cnn::Prediction> preds;
  std::vector<dataset::Label> truths;
  for (const auto& e : eval) {
    preds.push_back(model.classifier.predict(cnn::prepare_input(e.base, model.embedding, model.classifier.padding),
                                             e.base.task_id));
    truths.push_back(e.label);
  }
  auto report = metrics::compute_metrics(preds, truths, module);
  if (roc && !report.auc_undefined) {
    std::vector<double> scores;
    for (const auto& p : preds) scores.push_back(p.p_inconsistent);
    *roc = metrics::roc_curve(scores, truths);
  }
  return report;
}

void write_reports(const PipelineConfig& cfg, const std::vector<metrics::MetricsReport>& reports) {
  text::write_file(cfg.model_dir / "report.txt", metrics::render_table(reports));
  text::write_file(cfg.model_dir / "report.tsv", metrics::render_tsv(reports));
}

}  // namespace

void PipelineConfig::set_seed(std::uint64_t seed) {
  split_seed = seed;
  mutation_seed = seed + 1;
  embedding.seed = seed + 2;
  cnn_seed = seed + 3;
}

void PipelineConfig::apply(const std::string& key, const std::string& value) {
  auto as_int = [&] {
    try {
      return std::stoi(value);
    } catch (const std::exception&) {
      throw Error("config key '" + key + "' expects an integer, got '" + value + "'");
    }
  };
  auto as_u64 = [&] {
    try {
      return static_cast<std::uint64_t>(std::stoull(value));
    } catch (const std::exception&) {
      throw Error("config key '" + key + "' expects an unsigned integer, got '" + value + "'");
    }
  };
  auto as_double = [&] { return text::parse_double(value); };

  if (key == "corpus_roots") {
    corpus_roots.clear();
    for (const auto& r : split_list(value)) corpus_roots.emplace_back(r);
  } else if (key == "metadata") {
    if (value.empty()) metadata_file.reset();
    else metadata_file = value;
  } else if (key == "work_dir") work_dir = value;
  else if (key == "model_dir") model_dir = value;
  else if (key == "modules") modules = split_list(value);
  else if (key == "top_n") top_n = as_int();
  else if (key == "seed") set_seed(as_u64());
  else if (key == "split_seed") split_seed = as_u64();
  else if (key == "mutation_seed") mutation_seed = as_u64();
  else if (key == "cross_fraction") cross_fraction = as_double();
  else if (key == "workers") workers = as_int();
  else if (key == "threshold") threshold = as_double();
  else if (key == "embedding.vector_size") embedding.vector_size = as_int();
  else if (key == "embedding.learning_rate") embedding.learning_rate = as_double();
  else if (key == "embedding.min_learning_rate") embedding.min_learning_rate = as_double();
  else if (key == "embedding.min_word_frequency") embedding.min_word_frequency = as_int();
  else if (key == "embedding.window") embedding.window = as_int();
  else if (key == "embedding.epochs") embedding.epochs = as_int();
  else if (key == "embedding.negative") embedding.negative = as_int();
  else if (key == "embedding.seed") embedding.seed = as_u64();
  else if (key == "cnn.conv1_filters") cnn.conv1_filters = as_int();
  else if (key == "cnn.conv1_kernel") cnn.conv1_kernel = as_int();
  else if (key == "cnn.conv1_l2") cnn.conv1_l2 = as_double();
  else if (key == "cnn.pool1") cnn.pool1 = as_int();
  else if (key == "cnn.conv2_filters") cnn.conv2_filters = as_int();
  else if (key == "cnn.conv2_kernel") cnn.conv2_kernel = as_int();
  else if (key == "cnn.conv2_l2") cnn.conv2_l2 = as_double();
  else if (key == "cnn.pool2") cnn.pool2 = as_int();
  else if (key == "cnn.dropout") cnn.dropout = as_double();
  else if (key == "cnn.dense_units") cnn.dense_units = as_int();
  else if (key == "cnn.learning_rate") cnn.learning_rate = as_double();
  else if (key == "cnn.batch_size") cnn.batch_size = as_int();
  else if (key == "cnn.epochs") cnn.epochs = as_int();
  else if (key == "cnn.seed") cnn_seed = as_u64();
  else if (key == "cnn.loss") {
    if (value == "mae") cnn.loss = cnn::LossKind::kMeanAbsoluteError;
    else if (value == "cross_entropy") cnn.loss = cnn::LossKind::kCrossEntropy;
    else throw Error("cnn.loss must be 'mae' or 'cross_entropy'");
  } else {
    throw Error("unknown config key '" + key + "'");
  }
}

void PipelineConfig::load_file(const fs::path& path) {
  int ln = 0;
  for (const auto& raw : text::split(text::read_file(path), '\n')) {
    ++ln;
    const auto line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path.string(), ln, "expected key=value");
    try {
      apply(text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(path.string(), ln, e.what());
    }
  }
}

std::string PipelineConfig::describe() const {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  kv("split_seed", std::to_string(split_seed));
  kv("mutation_seed", std::to_string(mutation_seed));
  kv("cross_fraction", text::format_double(cross_fraction));
  kv("embedding.seed", std::to_string(embedding.seed));
  kv("embedding.vector_size", std::to_string(embedding.vector_size));
  kv("embedding.learning_rate", text::format_double(embedding.learning_rate));
  kv("embedding.min_word_frequency", std::to_string(embedding.min_word_frequency));
  kv("embedding.window", std::to_string(embedding.window));
  kv("embedding.epochs", std::to_string(embedding.epochs));
  kv("embedding.negative", std::to_string(embedding.negative));
  kv("cnn.seed", std::to_string(cnn_seed));
  kv("cnn.epochs", std::to_string(cnn.epochs));
  kv("cnn.learning_rate", text::format_double(cnn.learning_rate));
  kv("cnn.loss", cnn.loss == cnn::LossKind::kCrossEntropy ? "cross_entropy" : "mae");
  return out;
}

std::string canonical_module(const std::string& module_key) {
  for (const std::string prefix : {"ansible.builtin.", "ansible.legacy."}) {
    if (module_key.rfind(prefix, 0) == 0) return module_key.substr(prefix.size());
  }
  return module_key;
}

NormalizedExample task_example(const ansible::Task& task) {
  auto stream = ansible::serialize_preorder(ansible::build_ast(task), task.id);
  return normalize(stream, task.name, canonical_module(task.module_key));
}

corpus::CorpusManifest run_mine(const PipelineConfig& cfg) {
  if (cfg.corpus_roots.empty()) throw Error("no corpus roots configured");
  corpus::CorpusManifest manifest;
  if (cfg.metadata_file) {
    corpus::MetadataFileSource source(*cfg.metadata_file);
    for (const auto& root : cfg.corpus_roots) {
      auto part = corpus::mine(source, root);
      manifest.collected_at = part.collected_at;
      manifest.repos.insert(manifest.repos.end(), part.repos.begin(), part.repos.end());
      manifest.roots.insert(manifest.roots.end(), part.roots.begin(), part.roots.end());
      manifest.yaml_files.insert(manifest.yaml_files.end(), part.yaml_files.begin(), part.yaml_files.end());
    }
  } else {
    manifest = corpus::enumerate_tasks_files(cfg.corpus_roots);
  }
  text::write_file(cfg.work_dir / "manifest.json", corpus::manifest_to_json(manifest));
  return manifest;
}

ExtractResult run_extract(const PipelineConfig& cfg) {
  const auto manifest_path = cfg.work_dir / "manifest.json";
  const auto manifest = fs::exists(manifest_path)
                            ? corpus::manifest_from_json(text::read_file(manifest_path))
                            : run_mine(cfg);

  ExtractResult result;
  result.files = manifest.yaml_files.size();
  std::vector<ansible::ParsedFile> parsed(manifest.yaml_files.size());
  std::vector<std::string> errors(manifest.yaml_files.size());
  parallel_for(manifest.yaml_files.size(), cfg.workers, [&](std::size_t i) {
    const auto& f = manifest.yaml_files[i];
    const auto display = corpus::clone_dir_name(f.repo_url) + "/" + f.path;
    try {
      parsed[i] = ansible::parse_tasks_file(corpus::resolve(manifest, f), display);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::map<std::string, std::vector<const ansible::Task*>> by_module;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (!errors[i].empty()) {
      log::warn(errors[i]);
      ++result.failed_files;
      continue;
    }
    result.skipped_tasks += parsed[i].skipped.size();
    for (const auto& t : parsed[i].tasks) by_module[canonical_module(t.module_key)].push_back(&t);
  }
  if (by_module.empty()) throw Error("no Ansible tasks found in the corpus");
  if (result.skipped_tasks) log::info(result.skipped_tasks, " task entries skipped (no unique module key)");

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (const auto& [m, tasks] : by_module) {
    result.task_counts[m] = tasks.size();
    ranked.emplace_back(m, tasks.size());
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (cfg.modules.empty()) {
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(cfg.top_n); ++i) {
      result.selected.push_back(ranked[i].first);
    }
  } else {
    for (const auto& [m, n] : ranked) {
      if (std::find(cfg.modules.begin(), cfg.modules.end(), m) != cfg.modules.end()) result.selected.push_back(m);
    }
  }

  std::string index = "task_id\tmodule\tfile\tline\tname\n";
  for (const auto& m : result.selected) {
    std::string out;
    for (const auto* t : by_module[m]) {
      const auto ex = task_example(*t);
      out += ansible::format_stream_line({t->id, ansible::Origin::kName, ex.name_tokens}) + "\n";
      out += ansible::format_stream_line({t->id, ansible::Origin::kBody, ex.body_tokens}) + "\n";
      index += t->id + "\t" + m + "\t" + t->source.file + "\t" + std::to_string(t->source.line) + "\t" +
               text::escape_token(t->name) + "\n";
    }
    text::write_file(tokens_path(cfg, m), out);
  }
  std::string selected;
  for (const auto& m : result.selected) selected += m + "\n";
  text::write_file(cfg.work_dir / "modules.txt", selected);
  text::write_file(cfg.work_dir / "tasks.tsv", index);
  return result;
}

std::vector<ModuleDatasets> run_mutate(const PipelineConfig& cfg) {
  using dataset::SplitKind;
  const auto modules = read_selected_modules(cfg);

  std::vector<dataset::Partition> partitions;
  std::vector<std::string> usable;
  for (const auto& m : modules) {
    dataset::SplitPlan plan;
    plan.seed = module_seed(cfg.split_seed, m);
    plan.module_key = m;
    try {
      partitions.push_back(dataset::split(read_module_tokens(cfg, m), plan));
      usable.push_back(m);
    } catch (const PreconditionError& e) {
      log::warn("module '", m, "' skipped: ", e.what());
    }
  }

  std::vector<ModuleDatasets> out;
  for (std::size_t mi = 0; mi < usable.size(); ++mi) {
    ModuleDatasets ds;
    ds.module_key = usable[mi];
    for (auto split : {SplitKind::kTrain, SplitKind::kTest, SplitKind::kEval}) {
      std::vector<NormalizedExample> cross;
      for (std::size_t other = 0; other < usable.size(); ++other) {
        if (other == mi) continue;
        const auto& part = partitions[other][split];
        cross.insert(cross.end(), part.begin(), part.end());
      }
      const auto& own = partitions[mi][split];
      dataset::MutationOptions opts;
      opts.seed = module_seed(cfg.mutation_seed, usable[mi]) + static_cast<std::uint64_t>(split);
      opts.cross_fraction = cfg.cross_fraction;
      auto mutated = dataset::mutate(own, own, cross, split, opts);
      ds.skipped += mutated.skipped_task_ids.size();
      dataset::write_dataset(dataset_path(cfg, usable[mi], split), mutated.examples);
      (split == SplitKind::kTrain ? ds.train : split == SplitKind::kTest ? ds.test : ds.eval) =
          std::move(mutated.examples);
    }
    out.push_back(std::move(ds));
  }
  return out;
}

std::vector<ModuleResult> run_train(const PipelineConfig& cfg) {
  std::vector<ModuleDatasets> datasets = run_mutate(cfg);
  if (datasets.empty()) throw Error("no module has enough tasks to train");

  std::vector<ModuleResult> results(datasets.size());
  parallel_for(datasets.size(), cfg.workers, [&](std::size_t i) {
    const auto& ds = datasets[i];
    auto& res = results[i];
    res.module_key = ds.module_key;
    try {
      log::info("[", ds.module_key, "] training embeddings on ", ds.train.size(), " examples");
      ModuleModel model;
      model.embedding = embedding::train_cbow(joint_sequences(ds.train), cfg.embedding, ds.module_key);
      const auto padding = cnn::compute_padding(joint_sequences(ds.train));
      log::info("[", ds.module_key, "] max_length ", padding.max_length, " (mean ", padding.mean_len, ", std ",
                padding.std_len, ", truncated ", padding.truncated_fraction, ")");
      const auto train_set = to_matrices(ds.train, model.embedding, padding);
      const auto test_set = to_matrices(ds.test, model.embedding, padding);
      model.classifier = cnn::train(train_set, test_set, cfg.cnn, padding, cfg.cnn_seed, ds.module_key);

      std::vector<metrics::RocPoint> roc;
      res.report = evaluate_split(model, ds.eval, ds.module_key, &roc);
      res.padding = padding;
      res.version = model.classifier.version();

      const auto dir = cfg.model_dir / ds.module_key;
      model.embedding.save(dir / "embedding.txt");
      model.classifier.save(dir);
      text::write_file(dir / "metrics.tsv", metrics::format_report(res.report));
      text::write_file(dir / "roc.tsv", metrics::render_roc_tsv(roc));
      text::write_file(dir / "pipeline.txt", cfg.describe());
      res.ok = true;
      log::info("[", ds.module_key, "] eval accuracy ", res.report.accuracy, " mcc ", res.report.mcc, " auc ",
                res.report.auc);
    } catch (const Error& e) {
      res.error = e.what();
      log::error("[", ds.module_key, "] ", e.what());
    }
  });

  std::vector<metrics::MetricsReport> reports;
  for (const auto& r : results) {
    if (r.ok) reports.push_back(r.report);
  }
  if (!reports.empty()) write_reports(cfg, reports);
  return results;
}

ModuleModel load_module_model(const fs::path& module_dir) {
  return {embedding::EmbeddingModel::load(module_dir / "embedding.txt"), cnn::CnnModel::load(module_dir)};
}

std::vector<metrics::MetricsReport> run_evaluate(const PipelineConfig& cfg) {
  std::vector<metrics::MetricsReport> reports;
  for (const auto& m : read_selected_modules(cfg)) {
    const auto dir = cfg.model_dir / m;
    if (!fs::exists(dir / "manifest.txt")) {
      log::warn("no trained model for module '", m, "'");
      continue;
    }
    const auto model = load_module_model(dir);
    const auto eval = dataset::read_dataset(dataset_path(cfg, m, dataset::SplitKind::kEval),
                                            dataset::SplitKind::kEval, m);
    std::vector<metrics::RocPoint> roc;
    auto report = evaluate_split(model, eval, m, &roc);
    text::write_file(dir / "metrics.tsv", metrics::format_report(report));
    text::write_file(dir / "roc.tsv", metrics::render_roc_tsv(roc));
    reports.push_back(std::move(report));
  }
  if (!reports.empty()) write_reports(cfg, reports);
  return reports;
}

int DetectResult::exit_code() const {
  const bool any = std::any_of(findings.begin(), findings.end(), [](const Finding& f) { return f.inconsistent; });
  if (any) return 2;
  return file_errors > 0 ? 1 : 0;
}

std::string format_findings(const std::vector<Finding>& findings) {
  std::string out = "file\tline\ttask_name\tmodule\tp_inconsistent\tverdict\tmodel_version\n";
  for (const auto& f : findings) {
    out += f.file + "\t" + std::to_string(f.line) + "\t" + text::escape_token(f.task_name) + "\t" + f.module_key +
           "\t" + text::format_double(f.p_inconsistent) + "\t" + (f.inconsistent ? "inconsistent" : "consistent") +
           "\t" + f.model_version + "\n";
  }
  return out;
}

DetectResult run_detect(const PipelineConfig& cfg, const std::vector<fs::path>& playbooks,
                        const std::optional<fs::path>& report_path) {
  DetectResult result;
  std::vector<ansible::ParsedFile> parsed(playbooks.size());
  std::vector<std::string> errors(playbooks.size());
  parallel_for(playbooks.size(), cfg.workers, [&](std::size_t i) {
    try {
      parsed[i] = ansible::parse_tasks_file(playbooks[i], playbooks[i].string());
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::map<std::string, std::optional<ModuleModel>> cache;
  for (std::size_t i = 0; i < playbooks.size(); ++i) {
    if (!errors[i].empty()) {
      ++result.file_errors;
      result.notes.push_back("error: " + errors[i]);
      continue;
    }
    for (const auto& task : parsed[i].tasks) {
      ++result.tasks_seen;
      const auto module = canonical_module(task.module_key);
      auto it = cache.find(module);
      if (it == cache.end()) {
        std::optional<ModuleModel> loaded;
        const auto dir = cfg.model_dir / module;
        if (fs::exists(dir / "manifest.txt")) loaded = load_module_model(dir);
        it = cache.emplace(module, std::move(loaded)).first;
      }
      if (!it->second) {
        result.notes.push_back("no-model: " + task.source.file + ":" + std::to_string(task.source.line) + " (" +
                               module + ")");
        continue;
      }
      const auto& model = *it->second;
      const auto example = task_example(task);
      const auto pred =
          model.classifier.predict(cnn::prepare_input(example, model.embedding, model.classifier.padding), task.id);
      Finding f;
      f.file = task.source.file;
      f.line = task.source.line;
      f.task_name = task.name;
      f.module_key = module;
      f.p_inconsistent = pred.p_inconsistent;
      f.inconsistent = pred.p_inconsistent > cfg.threshold;
      f.model_version = model.classifier.version();
      result.findings.push_back(std::move(f));
    }
  }
  std::stable_sort(result.findings.begin(), result.findings.end(), [](const Finding& a, const Finding& b) {
    if (a.p_inconsistent != b.p_inconsistent) return a.p_inconsistent > b.p_inconsistent;
    if (a.file != b.file) return a.file < b.file;
    return a.line < b.line;
  });
  if (report_path) text::write_file(*report_path, format_findings(result.findings));
  return result;
}

}  // namespace iaclint::pipeline
