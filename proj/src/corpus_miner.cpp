#include "iaclint/corpus_miner.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "iaclint/error.hpp"
#include "iaclint/log.hpp"
#include "iaclint/text_io.hpp"

namespace fs = std::filesystem;

namespace iaclint::corpus {

bool satisfies(const RepoRecord& r, const RepoCriteria& c) {
  return r.iac_file_ratio >= c.min_iac_file_ratio && r.contributor_count >= c.min_contributors &&
         r.commits_per_month >= c.min_commits_per_month && !r.is_clone;
}

std::vector<RepoRecord> filter_repos(std::span<const RepoRecord> candidates,
                                     const RepoCriteria& criteria) {
  std::vector<RepoRecord> accepted;
  std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(accepted),
               [&](const RepoRecord& r) { return satisfies(r, criteria); });
  return accepted;
}

namespace {

bool parse_bool(const std::string& s, const std::string& source, int line) {
  const auto v = text::to_lower(s);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(source, line, "bad boolean '" + s + "'");
}

}  // namespace

std::vector<RepoRecord> parse_repo_metadata(const std::string& text, const std::string& source) {
  std::vector<RepoRecord> records;
  auto lines = text::split(text, '\n');
  bool header_seen = false;
  int line_no = 0;
  for (const auto& raw : lines) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (text::to_lower(line).rfind("url", 0) != 0) {
        throw ParseError(source, line_no, "missing header line");
      }
      continue;
    }
    auto fields = text::split(line, ',');
    if (fields.size() != 5) {
      throw ParseError(source, line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    for (auto& f : fields) f = text::trim(f);
    RepoRecord r;
    r.url = fields[0];
    try {
      r.iac_file_ratio = text::parse_double(fields[1]);
      r.contributor_count = std::stoi(fields[2]);
      r.commits_per_month = text::parse_double(fields[3]);
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    r.is_clone = parse_bool(fields[4], source, line_no);
    if (r.iac_file_ratio < 0 || r.iac_file_ratio > 1) {
      throw ParseError(source, line_no, "iac_file_ratio outside [0,1]");
    }
    if (r.contributor_count < 0 || r.commits_per_month < 0) {
      throw ParseError(source, line_no, "negative count");
    }
    records.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(source, 1, "missing header line");
  return records;
}

std::vector<RepoRecord> read_repo_metadata(const fs::path& path) {
  return parse_repo_metadata(text::read_file(path), path.string());
}

std::string format_repo_metadata(std::span<const RepoRecord> records) {
  std::string out = "url,iac_file_ratio,contributor_count,commits_per_month,is_clone\n";
  for (const auto& r : records) {
    out += r.url + "," + text::format_double(r.iac_file_ratio) + "," +
           std::to_string(r.contributor_count) + "," + text::format_double(r.commits_per_month) +
           "," + (r.is_clone ? "true" : "false") + "\n";
  }
  return out;
}

bool is_yaml_path(const fs::path& path) {
  const auto ext = path.extension().string();
  return ext == ".yml" || ext == ".yaml";
}

CorpusManifest enumerate_tasks_files(std::span<const fs::path> roots) {
  CorpusManifest manifest;
  manifest.collected_at = utc_timestamp();
  for (const auto& root : roots) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
      throw Error("corpus root is not a readable directory: " + root.string());
    }
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw Error("cannot read corpus root " + root.string() + ": " + ec.message());

    RepoRecord repo;
    repo.url = root.string();
    manifest.repos.push_back(repo);
    manifest.roots.push_back(root);

    std::vector<std::string> files;
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
      if (ec) {
        log::warn("skipping unreadable entry under ", root.string(), ": ", ec.message());
        ec.clear();
        continue;
      }
      const auto& entry = *it;
      if (!entry.is_regular_file(ec) || !is_yaml_path(entry.path())) continue;
      std::ifstream probe(entry.path());
      if (!probe) {
        log::warn("skipping unreadable file ", entry.path().string());
        continue;
      }
      files.push_back(fs::relative(entry.path(), root).generic_string());
    }
    std::sort(files.begin(), files.end());
    for (auto& f : files) manifest.yaml_files.push_back({repo.url, std::move(f)});
  }
  return manifest;
}

std::string manifest_to_json(const CorpusManifest& m) {
  nlohmann::ordered_json j;
  j["collected_at"] = m.collected_at;
  j["repos"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.repos.size(); ++i) {
    const auto& r = m.repos[i];
    nlohmann::ordered_json rj;
    rj["url"] = r.url;
    rj["iac_file_ratio"] = r.iac_file_ratio;
    rj["contributor_count"] = r.contributor_count;
    rj["commits_per_month"] = r.commits_per_month;
    rj["is_clone"] = r.is_clone;
    rj["root"] = i < m.roots.size() ? m.roots[i].string() : std::string();
    j["repos"].push_back(std::move(rj));
  }
  j["yaml_files"] = nlohmann::ordered_json::array();
  for (const auto& f : m.yaml_files) {
    j["yaml_files"].push_back({{"repo", f.repo_url}, {"path", f.path}});
  }
  return j.dump(2) + "\n";
}

CorpusManifest manifest_from_json(const std::string& text) {
  CorpusManifest m;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    m.collected_at = j.at("collected_at").get<std::string>();
    for (const auto& rj : j.at("repos")) {
      RepoRecord r;
      r.url = rj.at("url").get<std::string>();
      r.iac_file_ratio = rj.at("iac_file_ratio").get<double>();
      r.contributor_count = rj.at("contributor_count").get<int>();
      r.commits_per_month = rj.at("commits_per_month").get<double>();
      r.is_clone = rj.at("is_clone").get<bool>();
      m.repos.push_back(r);
      m.roots.emplace_back(rj.value("root", std::string()));
    }
    for (const auto& fj : j.at("yaml_files")) {
      m.yaml_files.push_back({fj.at("repo").get<std::string>(), fj.at("path").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed corpus manifest: ") + e.what());
  }
  return m;
}

fs::path resolve(const CorpusManifest& manifest, const ManifestFile& file) {
  for (std::size_t i = 0; i < manifest.repos.size(); ++i) {
    if (manifest.repos[i].url == file.repo_url && i < manifest.roots.size()) {
      return manifest.roots[i] / file.path;
    }
  }
  return fs::path(file.repo_url) / file.path;
}

std::string clone_dir_name(const std::string& url) {
  std::string u = url;
  while (!u.empty() && u.back() == '/') u.pop_back();
  if (u.size() > 4 && u.compare(u.size() - 4, 4, ".git") == 0) u.resize(u.size() - 4);
  auto slash = u.find_last_of('/');
  return slash == std::string::npos ? u : u.substr(slash + 1);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CorpusManifest mine(RepoSource& source, const fs::path& clones_root, const RepoCriteria& criteria) {
  const auto candidates = source.candidates();
  const auto accepted = filter_repos(candidates, criteria);
  log::info("repository filter accepted ", accepted.size(), " of ", candidates.size());

  std::vector<fs::path> roots;
  std::vector<RepoRecord> present;
  for (const auto& r : accepted) {
    auto dir = clones_root / clone_dir_name(r.url);
    if (!fs::is_directory(dir)) {
      log::warn("no local clone for ", r.url, " (expected ", dir.string(), ")");
      continue;
    }
    roots.push_back(dir);
    present.push_back(r);
  }
  auto manifest = enumerate_tasks_files(roots);
  // Replace the placeholder records with the real metadata.
  for (std::size_t i = 0; i < present.size(); ++i) {
    const auto placeholder = manifest.repos[i].url;
    for (auto& f : manifest.yaml_files) {
      if (f.repo_url == placeholder) f.repo_url = present[i].url;
    }
    manifest.repos[i] = present[i];
  }
  return manifest;
}

}  // namespace iaclint::corpus
