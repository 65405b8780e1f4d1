#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iaclint::text {

/// Escapes a token so it contains no space, tab, newline or carriage return.
/// Backslash becomes `\\`, space `\s`, tab `\t`, newline `\n`, CR `\r`.
std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view escaped);

std::string join_tokens(const std::vector<std::string>& tokens);
std::vector<std::string> split_tokens(std::string_view field);

std::vector<std::string> split(std::string_view line, char delimiter);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);
double parse_double(std::string_view text);

/// 64-bit FNV-1a, used for content-derived model versions.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t value);

}  // namespace iaclint::text
