#include "iaclint/corpus_miner.hpp"

#include <gtest/gtest.h>

#include "iaclint/error.hpp"
#include "iaclint/random.hpp"
#include "iaclint/text_io.hpp"
#include "test_util.hpp"

namespace iaclint::corpus {
namespace {

using iaclint::testing::TempDir;

RepoRecord rec(std::string url, double ratio, int contributors, double commits, bool clone) {
  return {std::move(url), ratio, contributors, commits, clone};
}

TEST(FilterRepos, AcceptsExactBoundary) {
  const std::vector<RepoRecord> in = {rec("edge", 0.11, 10, 2, false)};
  EXPECT_EQ(filter_repos(in).size(), 1u);
}

TEST(FilterRepos, CloneFlagAloneRejects) {
  const std::vector<RepoRecord> in = {rec("fork", 0.50, 100, 30, true)};
  EXPECT_TRUE(filter_repos(in).empty());
}

TEST(FilterRepos, EmptyInput) { EXPECT_TRUE(filter_repos({}).empty()); }

// Eight records each violate exactly one predicate (two per predicate, one
// barely and one clearly); the two remaining satisfy all four.
std::vector<RepoRecord> ten_records() {
  return {
      rec("r-ratio-barely", 0.1099, 50, 10, false), rec("r-ratio-low", 0.0, 50, 10, false),
      rec("r-contrib-barely", 0.5, 9, 10, false),   rec("r-contrib-low", 0.5, 0, 10, false),
      rec("ok-1", 0.11, 10, 2.0, false),            rec("r-commits-barely", 0.5, 50, 1.99, false),
      rec("r-commits-low", 0.5, 50, 0, false),      rec("r-clone-a", 0.5, 50, 10, true),
      rec("r-clone-b", 1.0, 500, 100, true),        rec("ok-2", 1.0, 200, 45.5, false),
  };
}

TEST(FilterRepos, HandEnumeratedTenRecords) {
  const auto out = filter_repos(ten_records());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].url, "ok-1");
  EXPECT_EQ(out[1].url, "ok-2");
}

TEST(FilterRepos, PropertiesOnRandomRecords) {
  Rng rng(11);
  for (int round = 0; round < 50; ++round) {
    std::vector<RepoRecord> in;
    for (int i = 0; i < 30; ++i) {
      in.push_back(rec("u" + std::to_string(i), rng.uniform(0, 0.3), static_cast<int>(rng.below(20)),
                       rng.uniform(0, 4), rng.bernoulli(0.2)));
    }
    const auto once = filter_repos(in);
    EXPECT_EQ(filter_repos(once), once);  // idempotent
    std::size_t cursor = 0;
    for (const auto& r : once) {
      EXPECT_GE(r.iac_file_ratio, 0.11);
      EXPECT_GE(r.contributor_count, 10);
      EXPECT_GE(r.commits_per_month, 2.0);
      EXPECT_FALSE(r.is_clone);
      // subset, input order preserved
      while (cursor < in.size() && !(in[cursor] == r)) ++cursor;
      ASSERT_LT(cursor, in.size());
      ++cursor;
    }
  }
}

TEST(RepoMetadata, ParsesHeaderAndRows) {
  const auto text =
      "url,iac_file_ratio,contributor_count,commits_per_month,is_clone\n"
      "https://x/a,0.25,12,3.5,false\n"
      "\n"
      "https://x/b, 0.05 , 40, 8, true\n";
  const auto rs = parse_repo_metadata(text, "meta.csv");
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0], rec("https://x/a", 0.25, 12, 3.5, false));
  EXPECT_EQ(rs[1], rec("https://x/b", 0.05, 40, 8, true));
  EXPECT_EQ(parse_repo_metadata(format_repo_metadata(rs), "round"), rs);
}

TEST(RepoMetadata, RejectsBadRows) {
  EXPECT_THROW(parse_repo_metadata("https://x/a,0.2,1,1,false\n", "m"), ParseError);
  EXPECT_THROW(parse_repo_metadata("url,r,c,m,clone\nx,1.5,1,1,false\n", "m"), ParseError);
  EXPECT_THROW(parse_repo_metadata("url,r,c,m,clone\nx,0.5,1,1\n", "m"), ParseError);
  EXPECT_THROW(parse_repo_metadata("url,r,c,m,clone\nx,0.5,1,1,maybe\n", "m"), ParseError);
}

TEST(EnumerateTasksFiles, EmptyDirectory) {
  TempDir dir;
  const std::vector<std::filesystem::path> roots = {dir.path()};
  EXPECT_TRUE(enumerate_tasks_files(roots).yaml_files.empty());
}

TEST(EnumerateTasksFiles, ExtensionFilter) {
  TempDir dir;
  text::write_file(dir / "a.yml", "- debug: msg=a\n");
  text::write_file(dir / "b.txt", "x");
  text::write_file(dir / "c.yaml", "- debug: msg=c\n");
  const std::vector<std::filesystem::path> roots = {dir.path()};
  const auto m = enumerate_tasks_files(roots);
  ASSERT_EQ(m.yaml_files.size(), 2u);
  EXPECT_EQ(m.yaml_files[0].path, "a.yml");
  EXPECT_EQ(m.yaml_files[1].path, "c.yaml");
}

TEST(EnumerateTasksFiles, NestedRolesSortedAndStable) {
  TempDir dir;
  const std::vector<std::string> files = {"roles/web/tasks/main.yml", "roles/db/tasks/main.yml",
                                          "roles/db/handlers/main.yml", "roles/web/tasks/install.yaml",
                                          "playbooks/site.yml"};
  for (const auto& f : files) text::write_file(dir / f, "---\n");
  text::write_file(dir / "roles/web/templates/nginx.conf.j2", "x");
  const std::vector<std::filesystem::path> roots = {dir.path()};
  const auto m = enumerate_tasks_files(roots);
  const std::vector<std::string> expected = {"playbooks/site.yml", "roles/db/handlers/main.yml",
                                             "roles/db/tasks/main.yml", "roles/web/tasks/install.yaml",
                                             "roles/web/tasks/main.yml"};
  std::vector<std::string> got;
  for (const auto& f : m.yaml_files) got.push_back(f.path);
  EXPECT_EQ(got, expected);
  EXPECT_EQ(enumerate_tasks_files(roots).yaml_files, m.yaml_files);
}

TEST(EnumerateTasksFiles, MissingRootIsAnError) {
  const std::vector<std::filesystem::path> roots = {"/nonexistent/iaclint/root"};
  try {
    enumerate_tasks_files(roots);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/iaclint/root"), std::string::npos);
  }
}

TEST(Manifest, JsonRoundTrip) {
  TempDir dir;
  text::write_file(dir / "x/a.yml", "---\n");
  const std::vector<std::filesystem::path> roots = {dir / "x"};
  const auto m = enumerate_tasks_files(roots);
  const auto back = manifest_from_json(manifest_to_json(m));
  EXPECT_EQ(back.yaml_files, m.yaml_files);
  EXPECT_EQ(back.repos, m.repos);
  EXPECT_EQ(back.collected_at, m.collected_at);
  EXPECT_TRUE(std::filesystem::exists(resolve(back, back.yaml_files[0])));
}

class FixedSource : public RepoSource {
 public:
  std::vector<RepoRecord> records;
  std::vector<RepoRecord> candidates() override { return records; }
};

TEST(Mine, OnlyAcceptedClonesAreEnumerated) {
  TempDir dir;
  text::write_file(dir / "good/tasks.yml", "---\n");
  text::write_file(dir / "forked/tasks.yml", "---\n");
  FixedSource src;
  src.records = {rec("https://github.com/o/good.git", 0.5, 20, 5, false),
                 rec("https://github.com/o/forked", 0.5, 20, 5, true),
                 rec("https://github.com/o/missing", 0.5, 20, 5, false)};
  const auto m = mine(src, dir.path());
  ASSERT_EQ(m.repos.size(), 1u);
  EXPECT_EQ(m.repos[0].url, "https://github.com/o/good.git");
  ASSERT_EQ(m.yaml_files.size(), 1u);
  EXPECT_EQ(m.yaml_files[0].repo_url, "https://github.com/o/good.git");
}

}  // namespace
}  // namespace iaclint::corpus
