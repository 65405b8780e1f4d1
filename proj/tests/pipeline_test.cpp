#include "iaclint/pipeline.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "iaclint/error.hpp"
#include "iaclint/text_io.hpp"
#include "test_util.hpp"

namespace iaclint::pipeline {
namespace {

using iaclint::testing::TempDir;

std::vector<std::string> apps() {
  const std::vector<std::string> bases = {"nginx", "redis", "postgres", "grafana", "consul",
                                          "vault", "haproxy", "kafka", "jenkins", "nomad",
                                          "minio", "traefik", "etcd", "datadog", "rabbitmq",
                                          "memcached", "prometheus", "elastic", "kibana", "tomcat"};
  std::vector<std::string> out;
  for (const auto* suffix : {"", "-agent", "-exporter"}) {
    for (const auto& b : bases) out.push_back(b + suffix);
  }
  return out;
}
const std::vector<std::string> kApps = apps();

// Three modules whose task names follow their bodies (several intents per
// module, as in real roles), plus a rare module.
void write_corpus(const std::filesystem::path& root) {
  std::string file, tmpl, service;
  for (std::size_t i = 0; i < kApps.size(); ++i) {
    const auto& app = kApps[i];
    const auto dash = app.find('-');
    const auto words = dash == std::string::npos ? app : app.substr(0, dash) + " " + app.substr(dash + 1);
    switch (i % 3) {
      case 0:
        file += "- name: Create " + words + " config directory\n  file:\n    dest: /etc/" + app +
                "\n    state: directory\n";
        break;
      case 1:
        file += "- name: Remove " + words + " log file\n  file:\n    path: /var/log/" + app +
                ".log\n    state: absent\n";
        break;
      default:
        file += "- name: Link " + words + " binary\n  file:\n    src: /opt/" + app + "/bin/" + app +
                "\n    dest: /usr/local/bin/" + app + "\n    state: link\n";
    }
    if (i % 2 == 0) {
      tmpl += "- name: Create " + words + " config file\n  template:\n    src: " + app +
              ".yaml.j2\n    dest: /etc/" + app + "/" + app + ".yaml\n    owner: \"{{ " + app +
              "_user }}\"\n    mode: 0640\n  notify: restart " + app + "\n";
    } else {
      tmpl += "- name: Render " + words + " unit template\n  template:\n    src: " + app +
              ".service.j2\n    dest: /etc/systemd/system/" + app + ".service\n  notify: reload systemd\n";
    }
    service += "- name: " + std::string(i % 2 ? "Restart " : "Start ") + words + " service\n  service:\n    name: " +
               app + "\n    state: " + (i % 2 ? "restarted" : "started") + "\n";
  }
  text::write_file(root / "repo/roles/a/tasks/main.yml", file);
  text::write_file(root / "repo/roles/b/tasks/main.yml", tmpl);
  text::write_file(root / "repo/roles/c/tasks/main.yml", service);
  text::write_file(root / "repo/roles/d/tasks/main.yml", "- name: Say hi\n  debug: msg=hi\n");
  text::write_file(root / "repo/roles/d/files/x.txt", "not yaml");
}

PipelineConfig config_for(const TempDir& dir) {
  PipelineConfig cfg;
  cfg.corpus_roots = {dir / "corpus"};
  cfg.work_dir = dir / "work";
  cfg.model_dir = dir / "models";
  cfg.top_n = 3;
  cfg.embedding.vector_size = 32;
  cfg.embedding.epochs = 100;
  cfg.cnn.epochs = 100;
  cfg.cnn.batch_size = 8;
  cfg.cnn.learning_rate = 0.05;
  return cfg;
}

TEST(Config, ApplyAndSeeds) {
  PipelineConfig cfg;
  cfg.apply("seed", "100");
  EXPECT_EQ(cfg.split_seed, 100u);
  EXPECT_EQ(cfg.mutation_seed, 101u);
  EXPECT_EQ(cfg.embedding.seed, 102u);
  EXPECT_EQ(cfg.cnn_seed, 103u);
  cfg.apply("cnn.loss", "cross_entropy");
  EXPECT_EQ(cfg.cnn.loss, cnn::LossKind::kCrossEntropy);
  cfg.apply("modules", "file, copy");
  EXPECT_EQ(cfg.modules, (std::vector<std::string>{"file", "copy"}));
  EXPECT_THROW(cfg.apply("no.such.key", "1"), Error);
  EXPECT_THROW(cfg.apply("cnn.epochs", "many"), Error);

  TempDir dir;
  text::write_file(dir / "c.conf", "# comment\nembedding.epochs = 7\ntop_n=4\n");
  cfg.load_file(dir / "c.conf");
  EXPECT_EQ(cfg.embedding.epochs, 7);
  EXPECT_EQ(cfg.top_n, 4);
}

TEST(Config, CanonicalModule) {
  EXPECT_EQ(canonical_module("ansible.builtin.file"), "file");
  EXPECT_EQ(canonical_module("ansible.legacy.shell"), "shell");
  EXPECT_EQ(canonical_module("community.general.ufw"), "community.general.ufw");
}

TEST(Extract, CountsAndTopSelection) {
  TempDir dir;
  write_corpus(dir / "corpus");
  const auto cfg = config_for(dir);
  const auto r = run_extract(cfg);
  EXPECT_EQ(r.files, 4u);
  EXPECT_EQ(r.task_counts.at("file"), kApps.size());
  EXPECT_EQ(r.task_counts.at("debug"), 1u);
  EXPECT_EQ(r.selected, (std::vector<std::string>{"file", "service", "template"}));
  EXPECT_TRUE(std::filesystem::exists(dir / "work/manifest.json"));
  EXPECT_EQ(text::read_file(dir / "work/modules.txt"), "file\nservice\ntemplate\n");
  const auto lines = text::split(text::read_file(dir / "work/tokens/file.tsv"), '\n');
  EXPECT_EQ(lines.size(), 2 * kApps.size() + 1);  // name + body rows, trailing newline
}

TEST(Extract, EmptyCorpusIsAnError) {
  TempDir dir;
  std::filesystem::create_directories(dir / "corpus");
  EXPECT_THROW(run_extract(config_for(dir)), Error);
}

TEST(Pipeline, TrainDetectEndToEnd) {
  TempDir dir;
  write_corpus(dir / "corpus");
  auto cfg = config_for(dir);
  run_extract(cfg);
  const auto datasets = run_mutate(cfg);
  ASSERT_EQ(datasets.size(), 3u);
  for (const auto& d : datasets) {
    EXPECT_EQ(d.train.size(), 2 * 36u);  // floor(0.6 * 60) tasks, two examples each
    EXPECT_TRUE(std::filesystem::exists(dir / ("work/datasets/" + d.module_key + "/eval.tsv")));
  }
  const auto results = run_train(cfg);
  ASSERT_EQ(results.size(), 3u);
  for (const auto& r : results) {
    EXPECT_TRUE(r.ok) << r.error;
    for (const char* f : {"embedding.txt", "weights.txt", "manifest.txt", "history.tsv", "metrics.tsv"}) {
      EXPECT_TRUE(std::filesystem::exists(cfg.model_dir / r.module_key / f)) << r.module_key << "/" << f;
    }
  }
  const auto report = text::read_file(cfg.model_dir / "report.txt");
  for (const char* row : {"Accuracy", "MCC", "AUC", "file", "service", "template"}) {
    EXPECT_NE(report.find(row), std::string::npos) << row;
  }
  EXPECT_EQ(run_evaluate(cfg).size(), 3u);

  // a template-style name on a file body
  text::write_file(dir / "check.yml",
                   "- name: Render kafka unit template\n  file:\n    dest: /etc/kafka\n    state: directory\n"
                   "- name: Create kafka config directory\n  file:\n    dest: /etc/kafka\n    state: directory\n"
                   "- name: Start kafka service\n  service:\n    name: kafka\n    state: started\n"
                   "- name: Ping all hosts\n  ping:\n");
  const auto a = run_detect(cfg, {dir / "check.yml"}, dir / "findings.tsv");
  EXPECT_EQ(a.tasks_seen, 4u);
  ASSERT_EQ(a.findings.size(), 3u);
  ASSERT_EQ(a.notes.size(), 1u);
  EXPECT_EQ(a.notes[0].rfind("no-model:", 0), 0u);
  EXPECT_EQ(a.findings[0].line, 1);
  EXPECT_EQ(a.exit_code(), a.findings[0].inconsistent ? 2 : 0);
  const auto b = run_detect(cfg, {dir / "check.yml"}, dir / "findings2.tsv");
  EXPECT_EQ(text::read_file(dir / "findings.tsv"), text::read_file(dir / "findings2.tsv"));

  const auto datadog = run_detect(cfg, {iaclint::testing::fixture("datadog_tasks.yml")}, std::nullopt);
  ASSERT_EQ(datadog.findings.size(), 2u);
  for (const auto& f : datadog.findings) EXPECT_FALSE(f.inconsistent) << f.task_name << " " << f.p_inconsistent;
  EXPECT_EQ(datadog.exit_code(), 0);
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(IACLINT_CLI) + " --quiet " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, DetectWithoutModelsAndBadFiles) {
  TempDir dir;
  text::write_file(dir / "p.yml", "- name: Ping\n  ping:\n");
  text::write_file(dir / "bad.yml", "- name: [oops\n");
  const auto models = (dir / "models").string();
  EXPECT_EQ(run_cli("--model-dir " + models + " detect " + (dir / "p.yml").string() + " --report " +
                    (dir / "f.tsv").string()),
            0);
  EXPECT_EQ(text::split(text::read_file(dir / "f.tsv"), '\n')[0],
            "file\tline\ttask_name\tmodule\tp_inconsistent\tverdict\tmodel_version");
  EXPECT_EQ(run_cli("--model-dir " + models + " detect " + (dir / "bad.yml").string() + " --report " +
                    (dir / "g.tsv").string()),
            1);
  EXPECT_NE(run_cli("no-such-command"), 0);
}

}  // namespace
}  // namespace iaclint::pipeline
