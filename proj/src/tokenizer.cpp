#include "iaclint/tokenizer.hpp"

#include <cctype>

#include "iaclint/error.hpp"
#include "iaclint/text_io.hpp"

namespace iaclint {

std::vector<std::string> tokenize_name(std::string_view name) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    // Bytes >= 0x80 belong to multi-byte UTF-8 letters and stay inside words.
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::vector<std::string> normalize_body(const std::vector<std::string>& body_tokens) {
  std::vector<std::string> out;
  out.reserve(body_tokens.size());
  for (const auto& tok : body_tokens) {
    out.push_back(ansible::is_kind_token(tok) ? tok : text::to_lower(tok));
  }
  return out;
}

NormalizedExample normalize(const ansible::TokenStream& body_stream, std::string_view name,
                            std::string_view module_key) {
  if (body_stream.origin != ansible::Origin::kBody) {
    throw PreconditionError("normalize expects a body token stream");
  }
  return {body_stream.task_id, std::string(module_key), tokenize_name(name),
          normalize_body(body_stream.tokens)};
}

}  // namespace iaclint
