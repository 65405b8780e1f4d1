#include "iaclint/dataset_builder.hpp"

#include <cmath>
#include <fstream>

#include "iaclint/error.hpp"
#include "iaclint/log.hpp"
#include "iaclint/random.hpp"
#include "iaclint/text_io.hpp"

namespace iaclint::dataset {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kSameModuleSwap: return "same_module_swap";
    case Provenance::kCrossModuleSwap: return "cross_module_swap";
  }
  return "?";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "original") return Provenance::kOriginal;
  if (s == "same_module_swap") return Provenance::kSameModuleSwap;
  if (s == "cross_module_swap") return Provenance::kCrossModuleSwap;
  throw Error("unknown provenance '" + std::string(s) + "'");
}

std::string_view split_name(SplitKind s) {
  switch (s) {
    case SplitKind::kTrain: return "train";
    case SplitKind::kTest: return "test";
    case SplitKind::kEval: return "eval";
  }
  return "?";
}

const std::vector<NormalizedExample>& Partition::operator[](SplitKind s) const {
  switch (s) {
    case SplitKind::kTrain: return train;
    case SplitKind::kTest: return test;
    default: return eval;
  }
}

Partition split(std::vector<NormalizedExample> examples, const SplitPlan& plan) {
  if (std::abs(plan.train + plan.test + plan.eval - 1.0) > 1e-9 || plan.train < 0 || plan.test < 0 ||
      plan.eval < 0) {
    throw PreconditionError("split ratios must be non-negative and sum to 1");
  }
  if (examples.size() < 5) {
    throw PreconditionError("module '" + plan.module_key + "' has " +
                            std::to_string(examples.size()) +
                            " examples; at least 5 are needed to populate all splits");
  }
  for (const auto& e : examples) {
    if (e.module_key != plan.module_key) {
      throw PreconditionError("example " + e.task_id + " belongs to module '" + e.module_key +
                              "', not '" + plan.module_key + "'");
    }
  }
  Rng rng(plan.seed);
  rng.shuffle(examples);

  const auto n = examples.size();
  // The epsilon keeps products like 0.6 * 5 from flooring to 2.
  const auto n_train = static_cast<std::size_t>(std::floor(plan.train * n + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(plan.test * n + 1e-9));

  Partition p;
  auto it = std::make_move_iterator(examples.begin());
  p.train.assign(it, it + n_train);
  p.test.assign(it + n_train, it + n_train + n_test);
  p.eval.assign(it + n_train + n_test, std::make_move_iterator(examples.end()));
  return p;
}

MutationResult mutate(std::span<const NormalizedExample> split_examples,
                      std::span<const NormalizedExample> same_pool,
                      std::span<const NormalizedExample> cross_pool, SplitKind split,
                      const MutationOptions& options) {
  if (same_pool.empty() && cross_pool.empty()) {
    throw PreconditionError("both donor pools are empty");
  }
  if (options.cross_fraction < 0 || options.cross_fraction > 1) {
    throw PreconditionError("cross_fraction must lie in [0,1]");
  }
  if (options.cross_fraction == 0.0 && same_pool.size() < 2 && cross_pool.empty()) {
    throw PreconditionError("same-module pool has no donor besides the task itself");
  }

  Rng rng(options.seed);
  MutationResult result;
  for (const auto& task : split_examples) {
    const LabeledExample* chosen = nullptr;
    LabeledExample swapped;
    for (int attempt = 0; attempt < options.max_redraws && !chosen; ++attempt) {
      const bool want_cross = rng.bernoulli(options.cross_fraction);
      const bool use_cross = cross_pool.empty() ? false : (want_cross || same_pool.size() < 2);
      const auto& pool = use_cross ? cross_pool : same_pool;
      const auto& donor = pool[rng.below(pool.size())];
      if (donor.task_id == task.task_id || donor.body_tokens == task.body_tokens) continue;
      swapped.base = task;
      swapped.base.body_tokens = donor.body_tokens;
      swapped.label = Label::kInconsistent;
      swapped.provenance = use_cross ? Provenance::kCrossModuleSwap : Provenance::kSameModuleSwap;
      swapped.split = split;
      swapped.donor_id = donor.task_id;
      chosen = &swapped;
    }
    if (!chosen) {
      log::warn("no donor with a different body for ", task.task_id, "; task skipped");
      result.skipped_task_ids.push_back(task.task_id);
      continue;
    }
    result.examples.push_back({task, Label::kConsistent, Provenance::kOriginal, split, task.task_id});
    result.examples.push_back(std::move(swapped));
  }
  return result;
}

std::string format_example_line(const LabeledExample& e) {
  return std::to_string(static_cast<int>(e.label)) + "\t" + std::string(provenance_name(e.provenance)) +
         "\t" + e.base.task_id + "\t" + text::join_tokens(e.base.name_tokens) + "\t" +
         text::join_tokens(e.base.body_tokens);
}

LabeledExample parse_example_line(std::string_view line, SplitKind split, std::string_view module_key) {
  auto f = text::split(line, '\t');
  if (f.size() != 5) throw Error("dataset line needs 5 tab-separated fields");
  LabeledExample e;
  if (f[0] == "0") {
    e.label = Label::kInconsistent;
  } else if (f[0] == "1") {
    e.label = Label::kConsistent;
  } else {
    throw Error("bad label '" + f[0] + "'");
  }
  e.provenance = parse_provenance(f[1]);
  e.split = split;
  e.base.task_id = f[2];
  e.base.module_key = std::string(module_key);
  e.base.name_tokens = text::split_tokens(f[3]);
  e.base.body_tokens = text::split_tokens(f[4]);
  return e;
}

void write_dataset(const std::filesystem::path& path, std::span<const LabeledExample> examples) {
  std::string out;
  for (const auto& e : examples) out += format_example_line(e) + "\n";
  text::write_file(path, out);
}

std::vector<LabeledExample> read_dataset(const std::filesystem::path& path, SplitKind split,
                                         std::string_view module_key) {
  std::vector<LabeledExample> out;
  int line_no = 0;
  for (const auto& line : text::split(text::read_file(path), '\n')) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(parse_example_line(line, split, module_key));
    } catch (const Error& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return out;
}

std::vector<std::string> joint_sequence(const NormalizedExample& e) {
  std::vector<std::string> seq;
  seq.reserve(e.name_tokens.size() + 1 + e.body_tokens.size());
  seq.insert(seq.end(), e.name_tokens.begin(), e.name_tokens.end());
  seq.emplace_back(kSeparator);
  seq.insert(seq.end(), e.body_tokens.begin(), e.body_tokens.end());
  return seq;
}

}  // namespace iaclint::dataset
