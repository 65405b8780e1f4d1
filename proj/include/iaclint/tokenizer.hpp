#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "iaclint/ansible_ast.hpp"

namespace iaclint {

/// Learning unit shared by every later stage: one task's name and body tokens.
struct NormalizedExample {
  std::string task_id;
  std::string module_key;
  std::vector<std::string> name_tokens;  // lowercase words
  std::vector<std::string> body_tokens;  // AST kind tokens keep their casing

  bool operator==(const NormalizedExample&) const = default;
};

/// Splits on whitespace, punctuation, `_` and `-`; lowercases. No camelCase split.
std::vector<std::string> tokenize_name(std::string_view name);

/// Lowercases every body token except the AST kind anchors.
std::vector<std::string> normalize_body(const std::vector<std::string>& body_tokens);

NormalizedExample normalize(const ansible::TokenStream& body_stream, std::string_view name,
                            std::string_view module_key);

}  // namespace iaclint
