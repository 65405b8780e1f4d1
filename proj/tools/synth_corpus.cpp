// Writes a deterministic synthetic Ansible corpus: several repositories, each
// with roles whose task names describe what their bodies do, plus a
// repository metadata file covering both qualifying and rejected repos.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iaclint/corpus_miner.hpp"
#include "iaclint/random.hpp"
#include "iaclint/text_io.hpp"

namespace fs = std::filesystem;
using iaclint::Rng;

namespace {

struct App {
  std::string name;
  std::string service;
  std::string package;
  std::string user;
  std::string confdir;
  int port;
};

const std::vector<App> kApps = {
    {"nginx", "nginx", "nginx", "www-data", "/etc/nginx", 80},
    {"redis", "redis-server", "redis-server", "redis", "/etc/redis", 6379},
    {"postgresql", "postgresql", "postgresql-14", "postgres", "/etc/postgresql/14/main", 5432},
    {"datadog", "datadog-agent", "datadog-agent", "dd-agent", "/etc/datadog-agent", 8125},
    {"grafana", "grafana-server", "grafana", "grafana", "/etc/grafana", 3000},
    {"prometheus", "prometheus", "prometheus", "prometheus", "/etc/prometheus", 9090},
    {"haproxy", "haproxy", "haproxy", "haproxy", "/etc/haproxy", 8404},
    {"mysql", "mysql", "mysql-server", "mysql", "/etc/mysql", 3306},
    {"elasticsearch", "elasticsearch", "elasticsearch", "elasticsearch", "/etc/elasticsearch", 9200},
    {"docker", "docker", "docker-ce", "root", "/etc/docker", 2375},
    {"jenkins", "jenkins", "jenkins", "jenkins", "/etc/jenkins", 8080},
    {"rabbitmq", "rabbitmq-server", "rabbitmq-server", "rabbitmq", "/etc/rabbitmq", 5672},
    {"memcached", "memcached", "memcached", "memcache", "/etc/memcached", 11211},
    {"consul", "consul", "consul", "consul", "/etc/consul.d", 8500},
    {"kibana", "kibana", "kibana", "kibana", "/etc/kibana", 5601},
    {"zookeeper", "zookeeper", "zookeeperd", "zookeeper", "/etc/zookeeper", 2181},
};

struct Out {
  std::string yaml;
  void line(int indent, const std::string& s) { yaml += std::string(indent, ' ') + s + "\n"; }
};

using Writer = std::function<void(Out&, const App&, Rng&)>;

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

std::string fill(std::string s, const App& a) {
  auto replace_all = [&](const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
      s.replace(pos, from.size(), to);
    }
  };
  replace_all("{app}", a.name);
  replace_all("{App}", std::string(1, static_cast<char>(std::toupper(a.name[0]))) + a.name.substr(1));
  replace_all("{svc}", a.service);
  replace_all("{pkg}", a.package);
  replace_all("{user}", a.user);
  replace_all("{confdir}", a.confdir);
  replace_all("{port}", std::to_string(a.port));
  return s;
}

void name(Out& o, Rng& rng, const App& a, const std::vector<std::string>& variants) {
  o.line(0, "- name: " + fill(pick(variants, rng), a));
}

void extras(Out& o, Rng& rng, const App& a) {
  if (rng.bernoulli(0.15)) o.line(2, "become: yes");
  if (rng.bernoulli(0.1)) o.line(2, fill("when: {app}_enabled | bool", a));
  if (rng.bernoulli(0.1)) o.line(2, fill("tags: [{app}]", a));
}

struct Intent {
  std::string module;
  double weight;
  Writer write;
};

std::vector<Intent> intents() {
  std::vector<Intent> v;
  // file
  v.push_back({"file", 1.0, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Create {app} config directory", "Ensure {app} configuration directory exists",
                                "Create directory for {App} config", "Make sure {confdir} exists"});
                 o.line(2, "file:");
                 o.line(4, fill("path: {confdir}", a));
                 o.line(4, "state: directory");
                 if (r.bernoulli(0.6)) o.line(4, fill("owner: {user}", a));
                 o.line(4, "mode: '0755'");
                 extras(o, r, a);
               }});
  v.push_back({"file", 0.8, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Remove {app} temporary files", "Delete stale {app} pid file",
                                "Clean up old {app} install", "Remove default {app} site"});
                 if (r.bernoulli(0.5)) {
                   o.line(2, fill("file: path=/tmp/{app} state=absent", a));
                 } else {
                   o.line(2, "file:");
                   o.line(4, fill("path: /var/run/{app}/{app}.pid", a));
                   o.line(4, "state: absent");
                 }
                 extras(o, r, a);
               }});
  v.push_back({"file", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Link {app} binary into PATH", "Create symlink for {app}", "Symlink {app} executable"});
                 o.line(2, "file:");
                 o.line(4, fill("src: /opt/{app}/bin/{app}", a));
                 o.line(4, fill("dest: /usr/local/bin/{app}", a));
                 o.line(4, "state: link");
                 extras(o, r, a);
               }});
  v.push_back({"file", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Ensure {app} log file exists", "Touch {app} log file", "Create empty {app} logfile"});
                 o.line(2, "file:");
                 o.line(4, fill("path: /var/log/{app}/{app}.log", a));
                 o.line(4, "state: touch");
                 o.line(4, fill("owner: {user}", a));
                 o.line(4, "mode: '0644'");
                 extras(o, r, a);
               }});
  v.push_back({"file", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Set permissions on {app} data directory", "Fix ownership of {app} data dir",
                                "Change owner of /var/lib/{app}"});
                 o.line(2, "file:");
                 o.line(4, fill("path: /var/lib/{app}", a));
                 o.line(4, fill("owner: {user}", a));
                 o.line(4, fill("group: {user}", a));
                 o.line(4, "mode: '0750'");
                 o.line(4, "recurse: yes");
                 extras(o, r, a);
               }});
  // template
  v.push_back({"template", 1.4, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Deploy {app} configuration", "Create {app} config file", "Template {app}.conf",
                                "Configure {app}", "Write {App} main configuration file"});
                 o.line(2, "template:");
                 o.line(4, fill("src: {app}.conf.j2", a));
                 o.line(4, fill("dest: {confdir}/{app}.conf", a));
                 if (r.bernoulli(0.7)) {
                   o.line(4, fill("owner: \"{{ {app}_user }}\"", a));
                   o.line(4, fill("group: \"{{ {app}_group }}\"", a));
                 }
                 o.line(4, "mode: 0640");
                 o.line(2, fill("notify: restart {svc}", a));
                 extras(o, r, a);
               }});
  v.push_back({"template", 0.8, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Install {app} systemd unit", "Create systemd service file for {app}",
                                "Template {app} unit file"});
                 o.line(2, "template:");
                 o.line(4, fill("src: {app}.service.j2", a));
                 o.line(4, fill("dest: /etc/systemd/system/{svc}.service", a));
                 o.line(4, "mode: 0644");
                 o.line(2, "notify:");
                 o.line(4, "- reload systemd");
                 o.line(4, fill("- restart {svc}", a));
                 extras(o, r, a);
               }});
  v.push_back({"template", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Render {app} environment file", "Create /etc/default/{app}", "Set {app} environment defaults"});
                 o.line(2, fill("template: src={app}.default.j2 dest=/etc/default/{app} mode=0644", a));
                 extras(o, r, a);
               }});
  // service
  v.push_back({"service", 1.2, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Start {app} service", "Ensure {app} is running", "Enable and start {app}",
                                "Start and enable {svc}"});
                 o.line(2, "service:");
                 o.line(4, fill("name: {svc}", a));
                 o.line(4, "state: started");
                 o.line(4, "enabled: yes");
                 extras(o, r, a);
               }});
  v.push_back({"service", 0.7, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Restart {app}", "Restart {svc} service", "Bounce {app}"});
                 if (r.bernoulli(0.4)) {
                   o.line(2, fill("service: name={svc} state=restarted", a));
                 } else {
                   o.line(2, "service:");
                   o.line(4, fill("name: {svc}", a));
                   o.line(4, "state: restarted");
                 }
                 extras(o, r, a);
               }});
  v.push_back({"service", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Stop {app}", "Disable {app} service", "Stop and disable {svc}"});
                 o.line(2, "service:");
                 o.line(4, fill("name: {svc}", a));
                 o.line(4, "state: stopped");
                 o.line(4, "enabled: no");
                 extras(o, r, a);
               }});
  v.push_back({"service", 0.4, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Reload {app} configuration", "Reload {svc}"});
                 o.line(2, "service:");
                 o.line(4, fill("name: {svc}", a));
                 o.line(4, "state: reloaded");
                 extras(o, r, a);
               }});
  // copy
  v.push_back({"copy", 0.9, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Copy {app} TLS certificate", "Install {app} ssl certificate", "Upload {app} cert"});
                 o.line(2, "copy:");
                 o.line(4, fill("src: files/{app}.crt", a));
                 o.line(4, fill("dest: /etc/ssl/certs/{app}.crt", a));
                 o.line(4, "mode: '0644'");
                 extras(o, r, a);
               }});
  v.push_back({"copy", 0.8, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Upload {app} backup script", "Copy {app} backup script", "Install {app}-backup.sh"});
                 o.line(2, "copy:");
                 o.line(4, fill("src: {app}-backup.sh", a));
                 o.line(4, fill("dest: /usr/local/bin/{app}-backup.sh", a));
                 o.line(4, "mode: '0755'");
                 extras(o, r, a);
               }});
  v.push_back({"copy", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Write {app} version file", "Record installed {app} version"});
                 o.line(2, "copy:");
                 o.line(4, fill("content: \"{{ {app}_version }}\"", a));
                 o.line(4, fill("dest: {confdir}/VERSION", a));
                 extras(o, r, a);
               }});
  // shell
  v.push_back({"shell", 0.8, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Check {app} version", "Get installed {app} version", "Query {app} version"});
                 o.line(2, fill("shell: {app} --version", a));
                 o.line(2, fill("register: {app}_version_out", a));
                 o.line(2, "changed_when: false");
                 extras(o, r, a);
               }});
  v.push_back({"shell", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Run {app} database migrations", "Migrate {app} schema"});
                 o.line(2, fill("shell: ./bin/{app} migrate --noinput", a));
                 o.line(2, "args:");
                 o.line(4, fill("chdir: /opt/{app}", a));
                 extras(o, r, a);
               }});
  v.push_back({"shell", 0.6, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Download {app} release", "Fetch {app} tarball"});
                 o.line(2, fill("shell: curl -sSL https://releases.example.org/{app}/{app}.tar.gz -o /tmp/{app}.tar.gz", a));
                 o.line(2, "args:");
                 o.line(4, fill("creates: /tmp/{app}.tar.gz", a));
                 extras(o, r, a);
               }});
  v.push_back({"shell", 0.5, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Clear {app} cache", "Purge {app} cache directory"});
                 o.line(2, fill("shell: rm -rf /var/cache/{app}/*", a));
                 extras(o, r, a);
               }});
  // command
  v.push_back({"command", 0.5, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Reload systemd daemon", "Run systemctl daemon-reload"});
                 o.line(2, "command: systemctl daemon-reload");
                 extras(o, r, a);
               }});
  v.push_back({"command", 0.5, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Initialize {app} data directory", "Bootstrap {app} storage"});
                 o.line(2, fill("command: /opt/{app}/bin/{app} init --data /var/lib/{app}", a));
                 o.line(2, "args:");
                 o.line(4, fill("creates: /var/lib/{app}/.initialized", a));
                 extras(o, r, a);
               }});
  // apt
  v.push_back({"apt", 0.7, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Install {app} package", "Install {pkg}", "Ensure {app} is installed"});
                 o.line(2, "apt:");
                 o.line(4, fill("name: {pkg}", a));
                 o.line(4, "state: present");
                 if (r.bernoulli(0.5)) o.line(4, "update_cache: yes");
                 extras(o, r, a);
               }});
  v.push_back({"apt", 0.3, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Remove {app} package", "Uninstall {pkg}"});
                 o.line(2, fill("apt: name={pkg} state=absent purge=yes", a));
                 extras(o, r, a);
               }});
  // smaller modules
  v.push_back({"debug", 0.4, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Show {app} version", "Print {app} version"});
                 o.line(2, "debug:");
                 o.line(4, fill("msg: \"{{ {app}_version_out.stdout }}\"", a));
                 extras(o, r, a);
               }});
  v.push_back({"user", 0.3, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Create {app} system user", "Add {user} user"});
                 o.line(2, "user:");
                 o.line(4, fill("name: {user}", a));
                 o.line(4, "system: yes");
                 o.line(4, "shell: /usr/sbin/nologin");
                 extras(o, r, a);
               }});
  v.push_back({"lineinfile", 0.25, [](Out& o, const App& a, Rng& r) {
                 name(o, r, a, {"Set {app} listen port", "Configure {app} port"});
                 o.line(2, "lineinfile:");
                 o.line(4, fill("path: {confdir}/{app}.conf", a));
                 o.line(4, "regexp: '^port'");
                 o.line(4, fill("line: 'port {port}'", a));
                 o.line(2, fill("notify: restart {svc}", a));
                 extras(o, r, a);
               }});
  return v;
}

struct RepoPlan {
  std::string url;
  double ratio;
  int contributors;
  double commits;
  bool clone;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the bundled synthetic Ansible corpus"};
  std::string out_dir = "data";
  std::uint64_t seed = 2024;
  int repos = 8;
  int tasks_per_role = 18;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--repos", repos, "qualifying repositories to generate");
  app.add_option("--tasks-per-role", tasks_per_role, "mean tasks per role");
  CLI11_PARSE(app, argc, argv);

  Rng rng(seed);
  const auto all = intents();
  double total_weight = 0;
  for (const auto& i : all) total_weight += i.weight;
  auto draw_intent = [&]() -> const Intent& {
    double u = rng.uniform() * total_weight;
    for (const auto& i : all) {
      if ((u -= i.weight) < 0) return i;
    }
    return all.back();
  };

  std::vector<RepoPlan> plans;
  for (int i = 0; i < repos; ++i) {
    plans.push_back({"https://github.com/example-org/ansible-stack-" + std::to_string(i + 1),
                     0.2 + 0.5 * rng.uniform(), 10 + static_cast<int>(rng.below(60)), 2.0 + 20 * rng.uniform(), false});
  }
  // Rejected repositories, one per failing criterion.
  plans.push_back({"https://github.com/example-org/low-iac-ratio", 0.05, 25, 10, false});
  plans.push_back({"https://github.com/example-org/solo-project", 0.4, 3, 10, false});
  plans.push_back({"https://github.com/example-org/dormant-roles", 0.4, 25, 0.5, false});
  plans.push_back({"https://github.com/someone/ansible-stack-1-fork", 0.5, 40, 12, true});

  const fs::path root = fs::path(out_dir) / "corpus";
  std::map<std::string, int> counts;
  for (const auto& plan : plans) {
    const fs::path repo = root / iaclint::corpus::clone_dir_name(plan.url);
    const int roles = 3 + static_cast<int>(rng.below(3));
    std::string playbook = "- hosts: all\n  become: yes\n  roles:\n";
    for (int r = 0; r < roles; ++r) {
      const auto& a = kApps[rng.below(kApps.size())];
      const std::string role = a.name + (r ? "_" + std::to_string(r) : "");
      playbook += "    - " + role + "\n";
      Out tasks;
      tasks.line(0, "---");
      const int n = tasks_per_role / 2 + static_cast<int>(rng.below(tasks_per_role + 1));
      for (int t = 0; t < n; ++t) {
        // Mostly the role's own application, sometimes a dependency.
        const auto& app_for_task = rng.bernoulli(0.8) ? a : kApps[rng.below(kApps.size())];
        const auto& intent = draw_intent();
        intent.write(tasks, app_for_task, rng);
        tasks.line(0, "");
        ++counts[intent.module];
      }
      iaclint::text::write_file(repo / "roles" / role / "tasks" / "main.yml", tasks.yaml);
      Out handlers;
      handlers.line(0, "---");
      handlers.line(0, fill("- name: restart {svc}", a));
      handlers.line(2, fill("service: name={svc} state=restarted", a));
      handlers.line(0, "- name: reload systemd");
      handlers.line(2, "systemd:");
      handlers.line(4, "daemon_reload: yes");
      iaclint::text::write_file(repo / "roles" / role / "handlers" / "main.yml", handlers.yaml);
      iaclint::text::write_file(repo / "roles" / role / "defaults" / "main.yml",
                                fill("---\n{app}_enabled: true\n{app}_user: {user}\n{app}_group: {user}\n", a));
    }
    iaclint::text::write_file(repo / "site.yml", playbook);
    iaclint::text::write_file(repo / "README.md", "Synthetic Ansible repository.\n");
  }

  std::vector<iaclint::corpus::RepoRecord> records;
  for (const auto& p : plans) records.push_back({p.url, p.ratio, p.contributors, p.commits, p.clone});
  iaclint::text::write_file(fs::path(out_dir) / "repos.csv", iaclint::corpus::format_repo_metadata(records));

  int total = 0;
  for (const auto& [m, n] : counts) {
    std::cout << m << "\t" << n << "\n";
    total += n;
  }
  std::cout << "total\t" << total << " (including rejected repositories)\n";
  return 0;
}
