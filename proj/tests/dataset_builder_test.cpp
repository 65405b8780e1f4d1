#include "iaclint/dataset_builder.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "iaclint/error.hpp"
#include "iaclint/text_io.hpp"
#include "test_util.hpp"

namespace iaclint::dataset {
namespace {

using iaclint::testing::TempDir;

NormalizedExample ex(const std::string& module, int i) {
  return {module + "/tasks.yml:" + std::to_string(i), module, {"step", std::to_string(i)},
          {"AnsibleTaskBody", "Module", "Name", module, "Parameter", "path", "/p/" + std::to_string(i)}};
}

std::vector<NormalizedExample> examples(const std::string& module, int n) {
  std::vector<NormalizedExample> v;
  for (int i = 0; i < n; ++i) v.push_back(ex(module, i));
  return v;
}

TEST(Split, Sizes) {
  const auto p = split(examples("file", 100), {0.6, 0.2, 0.2, 3, "file"});
  EXPECT_EQ(p.train.size(), 60u);
  EXPECT_EQ(p.test.size(), 20u);
  EXPECT_EQ(p.eval.size(), 20u);
  const auto q = split(examples("file", 5), {0.6, 0.2, 0.2, 3, "file"});
  EXPECT_EQ(q.train.size(), 3u);
  EXPECT_EQ(q.test.size(), 1u);
  EXPECT_EQ(q.eval.size(), 1u);
}

TEST(Split, PartitionIsDisjointAndComplete) {
  const auto p = split(examples("file", 37), {0.6, 0.2, 0.2, 9, "file"});
  std::set<std::string> ids;
  for (auto k : {SplitKind::kTrain, SplitKind::kTest, SplitKind::kEval}) {
    for (const auto& e : p[k]) EXPECT_TRUE(ids.insert(e.task_id).second);
  }
  EXPECT_EQ(ids.size(), 37u);
}

TEST(Split, SeedDeterminism) {
  const auto a = split(examples("file", 40), {0.6, 0.2, 0.2, 7, "file"});
  const auto b = split(examples("file", 40), {0.6, 0.2, 0.2, 7, "file"});
  const auto c = split(examples("file", 40), {0.6, 0.2, 0.2, 8, "file"});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.eval, b.eval);
  EXPECT_NE(a.train, c.train);
  EXPECT_EQ(a.train.size(), c.train.size());
  EXPECT_EQ(a.test.size(), c.test.size());
  EXPECT_EQ(a.eval.size(), c.eval.size());
}

TEST(Split, Preconditions) {
  EXPECT_THROW(split(examples("file", 4), {0.6, 0.2, 0.2, 1, "file"}), PreconditionError);
  EXPECT_THROW(split(examples("file", 10), {0.6, 0.3, 0.2, 1, "file"}), PreconditionError);
  EXPECT_THROW(split(examples("copy", 10), {0.6, 0.2, 0.2, 1, "file"}), PreconditionError);
}

TEST(Mutate, TwoTasksSwapBodies) {
  const auto v = examples("file", 2);
  const auto r = mutate(v, v, {}, SplitKind::kTrain, {1, 0.0, 10});
  ASSERT_EQ(r.examples.size(), 4u);
  EXPECT_EQ(r.examples[0].label, Label::kConsistent);
  EXPECT_EQ(r.examples[0].base, v[0]);
  EXPECT_EQ(r.examples[1].label, Label::kInconsistent);
  EXPECT_EQ(r.examples[1].base.name_tokens, v[0].name_tokens);
  EXPECT_EQ(r.examples[1].base.body_tokens, v[1].body_tokens);
  EXPECT_EQ(r.examples[1].provenance, Provenance::kSameModuleSwap);
  EXPECT_EQ(r.examples[3].base.body_tokens, v[0].body_tokens);
}

TEST(Mutate, CrossOnlyProvenance) {
  const auto v = examples("file", 10);
  const auto other = examples("copy", 10);
  const auto r = mutate(v, v, other, SplitKind::kTest, {2, 1.0, 10});
  for (std::size_t i = 1; i < r.examples.size(); i += 2) {
    EXPECT_EQ(r.examples[i].provenance, Provenance::kCrossModuleSwap);
    EXPECT_EQ(r.examples[i].donor_id.rfind("copy/", 0), 0u);
    EXPECT_EQ(r.examples[i].base.body_tokens[3], "copy");
  }
}

// Exact binomial CDF for the two-sided 99% acceptance region.
std::pair<int, int> binomial_interval(int n, double p, double alpha) {
  std::vector<double> pmf(n + 1);
  for (int k = 0; k <= n; ++k) {
    pmf[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                      k * std::log(p) + (n - k) * std::log(1 - p));
  }
  int lo = 0;
  double tail = 0;
  while (tail + pmf[lo] <= alpha / 2) tail += pmf[lo++];
  int hi = n;
  tail = 0;
  while (tail + pmf[hi] <= alpha / 2) tail += pmf[hi--];
  return {lo, hi};
}

TEST(Mutate, CrossFractionWithinBinomialInterval) {
  const auto [lo, hi] = binomial_interval(50, 0.5, 0.01);
  const auto v = examples("file", 50);
  const auto other = examples("copy", 50);
  int failures = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto r = mutate(v, v, other, SplitKind::kTrain, {seed, 0.5, 10});
    ASSERT_EQ(r.examples.size(), 100u);
    int cross = 0, consistent = 0;
    for (const auto& e : r.examples) {
      cross += e.provenance == Provenance::kCrossModuleSwap;
      consistent += e.label == Label::kConsistent;
    }
    EXPECT_EQ(consistent, 50);
    if (cross < lo || cross > hi) ++failures;
  }
  // 20 seeds at 1% each: more than two misses is very unlikely.
  EXPECT_LE(failures, 2);
}

TEST(Mutate, Preconditions) {
  const auto v = examples("file", 1);
  EXPECT_THROW(mutate(v, {}, {}, SplitKind::kTrain, {}), PreconditionError);
  EXPECT_THROW(mutate(v, v, {}, SplitKind::kTrain, {1, 0.0, 10}), PreconditionError);
  // a lone task still gets a cross-module donor
  const auto other = examples("copy", 3);
  const auto r = mutate(v, v, other, SplitKind::kTrain, {1, 0.0, 10});
  ASSERT_EQ(r.examples.size(), 2u);
  EXPECT_EQ(r.examples[1].provenance, Provenance::kCrossModuleSwap);
}

TEST(Mutate, IdenticalBodiesAreSkipped) {
  auto v = examples("file", 3);
  for (auto& e : v) e.body_tokens = v[0].body_tokens;
  const auto r = mutate(v, v, {}, SplitKind::kTrain, {1, 0.0, 10});
  EXPECT_TRUE(r.examples.empty());
  EXPECT_EQ(r.skipped_task_ids.size(), 3u);
}

TEST(Mutate, InvariantsAcrossSeeds) {
  const auto all = examples("file", 60);
  const auto other = examples("copy", 40);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto p = split(all, {0.6, 0.2, 0.2, seed, "file"});
    const auto q = split(other, {0.6, 0.2, 0.2, seed, "copy"});
    std::map<std::string, SplitKind> where;
    for (auto k : {SplitKind::kTrain, SplitKind::kTest, SplitKind::kEval}) {
      for (const auto& e : p[k]) where[e.task_id] = k;
      for (const auto& e : q[k]) where[e.task_id] = k;
    }
    for (auto k : {SplitKind::kTrain, SplitKind::kTest, SplitKind::kEval}) {
      const auto r = mutate(p[k], p[k], q[k], k, {seed, 0.5, 10});
      std::size_t pos = 0, neg = 0;
      for (const auto& e : r.examples) {
        (e.label == Label::kConsistent ? pos : neg)++;
        EXPECT_EQ(e.split, k);
        EXPECT_EQ(where.at(e.donor_id), k);  // no donor from another split
        if (e.label == Label::kInconsistent) {
          EXPECT_NE(e.donor_id, e.base.task_id);
          const auto& original = *std::find_if(p[k].begin(), p[k].end(),
                                               [&](const auto& o) { return o.task_id == e.base.task_id; });
          EXPECT_NE(e.base.body_tokens, original.body_tokens);
        }
      }
      EXPECT_EQ(pos, neg);
      EXPECT_EQ(pos, p[k].size());
    }
  }
}

TEST(Dataset, FilesAreByteIdenticalAcrossRuns) {
  TempDir dir;
  const auto v = examples("file", 20);
  const auto other = examples("copy", 20);
  const auto r1 = mutate(v, v, other, SplitKind::kTrain, {5, 0.5, 10});
  const auto r2 = mutate(v, v, other, SplitKind::kTrain, {5, 0.5, 10});
  write_dataset(dir / "a.tsv", r1.examples);
  write_dataset(dir / "b.tsv", r2.examples);
  EXPECT_EQ(text::read_file(dir / "a.tsv"), text::read_file(dir / "b.tsv"));
  const auto back = read_dataset(dir / "a.tsv", SplitKind::kTrain, "file");
  ASSERT_EQ(back.size(), r1.examples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].label, r1.examples[i].label);
    EXPECT_EQ(back[i].provenance, r1.examples[i].provenance);
    EXPECT_EQ(back[i].base.name_tokens, r1.examples[i].base.name_tokens);
    EXPECT_EQ(back[i].base.body_tokens, r1.examples[i].base.body_tokens);
  }
}

TEST(Dataset, JointSequence) {
  const NormalizedExample e{"t", "file", {"a", "b"}, {"AnsibleTaskBody", "x"}};
  EXPECT_EQ(joint_sequence(e), (std::vector<std::string>{"a", "b", "<SEP>", "AnsibleTaskBody", "x"}));
}

}  // namespace
}  // namespace iaclint::dataset
