#include "iaclint/tokenizer.hpp"

#include <gtest/gtest.h>

#include "iaclint/error.hpp"
#include "iaclint/random.hpp"

namespace iaclint {
namespace {

using Tokens = std::vector<std::string>;

TEST(TokenizeName, DatadogNames) {
  EXPECT_EQ(tokenize_name("Create Datadog agent config directory"),
            (Tokens{"create", "datadog", "agent", "config", "directory"}));
  EXPECT_EQ(tokenize_name("restart datadog-agent"), (Tokens{"restart", "datadog", "agent"}));
}

TEST(TokenizeName, EmptyAndPunctuationOnly) {
  EXPECT_TRUE(tokenize_name("").empty());
  EXPECT_TRUE(tokenize_name(" -_.:/ ").empty());
}

TEST(TokenizeName, SeparatorsAndCase) {
  EXPECT_EQ(tokenize_name("Copy DataDog.YAML.j2 to /etc"), (Tokens{"copy", "datadog", "yaml", "j2", "to", "etc"}));
  EXPECT_EQ(tokenize_name("set_fact for {{ item }}"), (Tokens{"set", "fact", "for", "item"}));
  EXPECT_EQ(tokenize_name("installPackages"), Tokens{"installpackages"});
}

TEST(NormalizeBody, KindTokensKeepCase) {
  const Tokens in = {"AnsibleTaskBody", "Module", "Name", "file", "Parameter", "Dest", "/ETC/Foo"};
  EXPECT_EQ(normalize_body(in),
            (Tokens{"AnsibleTaskBody", "Module", "Name", "file", "Parameter", "dest", "/etc/foo"}));
}

TEST(NormalizeBody, MixedCaseValue) {
  EXPECT_EQ(normalize_body({"Parameter", "src", "DataDog.YAML.j2"}), (Tokens{"Parameter", "src", "datadog.yaml.j2"}));
}

TEST(Normalize, RejectsNameStream) {
  ansible::TokenStream s{"x:1", ansible::Origin::kName, {"a"}};
  EXPECT_THROW(normalize(s, "a", "file"), Error);
}

std::string random_text(Rng& rng) {
  static const std::string alphabet = "abcXYZ019 -_./{}:\"'\t";
  std::string s;
  const auto n = rng.below(40);
  for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

TEST(Normalize, PropertiesOnRandomInput) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto name = random_text(rng);
    const auto words = tokenize_name(name);
    for (const auto& w : words) {
      EXPECT_FALSE(w.empty());
      for (char c : w) EXPECT_FALSE(c >= 'A' && c <= 'Z') << name;
    }
    Tokens body;
    const auto n = rng.below(12);
    for (std::size_t k = 0; k < n; ++k) body.push_back(rng.bernoulli(0.3) ? "Parameter" : random_text(rng));
    const auto once = normalize_body(body);
    EXPECT_EQ(once.size(), body.size());
    EXPECT_EQ(normalize_body(once), once);
    ansible::TokenStream s{"id", ansible::Origin::kBody, body};
    const auto ex = normalize(s, name, "file");
    EXPECT_EQ(ex.name_tokens, words);
    EXPECT_EQ(ex.body_tokens, once);
    EXPECT_EQ(ex.task_id, "id");
  }
}

}  // namespace
}  // namespace iaclint
