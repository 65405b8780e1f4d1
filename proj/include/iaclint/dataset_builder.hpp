#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iaclint/tokenizer.hpp"

namespace iaclint::dataset {

enum class Label : int { kInconsistent = 0, kConsistent = 1 };
enum class Provenance { kOriginal, kSameModuleSwap, kCrossModuleSwap };
enum class SplitKind { kTrain, kTest, kEval };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view s);
std::string_view split_name(SplitKind s);

struct LabeledExample {
  NormalizedExample base;
  Label label = Label::kConsistent;
  Provenance provenance = Provenance::kOriginal;
  SplitKind split = SplitKind::kTrain;
  std::string donor_id;  // task whose body was taken; equals base.task_id for originals

  bool operator==(const LabeledExample&) const = default;
};

struct SplitPlan {
  double train = 0.6;
  double test = 0.2;
  double eval = 0.2;
  std::uint64_t seed = 0;
  std::string module_key;
};

struct Partition {
  std::vector<NormalizedExample> train;
  std::vector<NormalizedExample> test;
  std::vector<NormalizedExample> eval;

  const std::vector<NormalizedExample>& operator[](SplitKind s) const;
};

/// Seeded shuffle, then cut into floor(train*n) / floor(test*n) / remainder.
/// Throws PreconditionError for fewer than 5 examples, invalid ratios, or
/// examples of another module.
Partition split(std::vector<NormalizedExample> examples, const SplitPlan& plan);

struct MutationOptions {
  std::uint64_t seed = 0;
  double cross_fraction = 0.5;
  int max_redraws = 10;
};

struct MutationResult {
  std::vector<LabeledExample> examples;  // original then swapped, per input task
  std::vector<std::string> skipped_task_ids;
};

/// Emits, per task, its original (consistent) example and one inconsistent
/// example whose body comes from a different task of the same split: from
/// `cross_pool` with probability `cross_fraction`, else from `same_pool`.
/// Donors whose body equals the original body are redrawn; after
/// `max_redraws` failures the task is skipped entirely.
MutationResult mutate(std::span<const NormalizedExample> split_examples,
                      std::span<const NormalizedExample> same_pool,
                      std::span<const NormalizedExample> cross_pool, SplitKind split,
                      const MutationOptions& options);

/// `label <TAB> provenance <TAB> task_id <TAB> name tokens <TAB> body tokens`
std::string format_example_line(const LabeledExample& e);
LabeledExample parse_example_line(std::string_view line, SplitKind split, std::string_view module_key);

void write_dataset(const std::filesystem::path& path, std::span<const LabeledExample> examples);
std::vector<LabeledExample> read_dataset(const std::filesystem::path& path, SplitKind split,
                                         std::string_view module_key);

/// Name tokens, a `<SEP>` marker, then body tokens.
inline constexpr std::string_view kSeparator = "<SEP>";
std::vector<std::string> joint_sequence(const NormalizedExample& e);

}  // namespace iaclint::dataset
