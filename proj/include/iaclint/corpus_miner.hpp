#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace iaclint::corpus {

/// Repository metadata used to decide whether a repository enters the corpus.
struct RepoRecord {
  std::string url;
  double iac_file_ratio = 0.0;  // .yml/.yaml files over all files
  int contributor_count = 0;
  double commits_per_month = 0.0;  // mean over repository lifetime
  bool is_clone = false;

  bool operator==(const RepoRecord&) const = default;
};

struct ManifestFile {
  std::string repo_url;
  std::string path;  // relative to the repository root

  bool operator==(const ManifestFile&) const = default;
};

struct CorpusManifest {
  std::vector<RepoRecord> repos;
  std::vector<ManifestFile> yaml_files;
  std::string collected_at;  // ISO-8601 UTC
  std::vector<std::filesystem::path> roots;  // local directory backing each repo, parallel to repos
};

/// Quality thresholds applied to candidate repositories.
struct RepoCriteria {
  double min_iac_file_ratio = 0.11;
  int min_contributors = 10;
  double min_commits_per_month = 2.0;
};

bool satisfies(const RepoRecord& record, const RepoCriteria& criteria = {});

/// Keeps the records meeting every criterion and not flagged as clones, in input order.
std::vector<RepoRecord> filter_repos(std::span<const RepoRecord> candidates,
                                     const RepoCriteria& criteria = {});

/// Parses the metadata file: header line, then
/// `url,iac_file_ratio,contributor_count,commits_per_month,is_clone` per line.
std::vector<RepoRecord> parse_repo_metadata(const std::string& text, const std::string& source_name);
std::vector<RepoRecord> read_repo_metadata(const std::filesystem::path& path);
std::string format_repo_metadata(std::span<const RepoRecord> records);

bool is_yaml_path(const std::filesystem::path& path);

/// Lists every .yml/.yaml file below the roots, sorted lexicographically by
/// (root, relative path). Throws if a root is missing or unreadable; files that
/// cannot be opened are skipped with a warning.
CorpusManifest enumerate_tasks_files(std::span<const std::filesystem::path> roots);

/// Manifest persisted as JSON.
std::string manifest_to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(const std::string& text);

/// Resolves a manifest entry back to a file on disk.
std::filesystem::path resolve(const CorpusManifest& manifest, const ManifestFile& file);

/// Directory name a local clone of `url` is expected under.
std::string clone_dir_name(const std::string& url);

std::string utc_timestamp();

/// Source of candidate repository metadata. The canonical source is a local
/// metadata file; a hosting-API client can implement the same interface.
class RepoSource {
 public:
  virtual ~RepoSource() = default;
  virtual std::vector<RepoRecord> candidates() = 0;
};

class MetadataFileSource : public RepoSource {
 public:
  explicit MetadataFileSource(std::filesystem::path path) : path_(std::move(path)) {}
  std::vector<RepoRecord> candidates() override { return read_repo_metadata(path_); }

 private:
  std::filesystem::path path_;
};

/// Filters the source's candidates and enumerates YAML files of the accepted
/// repositories' local clones found under `clones_root`.
CorpusManifest mine(RepoSource& source, const std::filesystem::path& clones_root,
                    const RepoCriteria& criteria = {});

}  // namespace iaclint::corpus
