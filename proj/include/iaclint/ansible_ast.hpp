#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iaclint::ansible {

struct ParamEntry;

/// A task parameter value as written in YAML. Scalars keep their source text.
struct ParamValue {
  enum class Kind { kNull, kScalar, kSequence, kMapping };

  Kind kind = Kind::kNull;
  std::string scalar;
  std::vector<ParamValue> items;     // kSequence
  std::vector<ParamEntry> entries;   // kMapping, in source order

  static ParamValue null() { return {}; }
  static ParamValue of(std::string s) {
    ParamValue v;
    v.kind = Kind::kScalar;
    v.scalar = std::move(s);
    return v;
  }

  bool operator==(const ParamValue&) const;
};

struct ParamEntry {
  std::string key;
  ParamValue value;

  bool operator==(const ParamEntry&) const = default;
};

struct SourceLocation {
  std::string file;
  int line = 0;  // 1-based
};

struct Task {
  std::string id;  // "<file>:<line>"
  std::string name;
  std::string module_key;
  std::vector<ParamEntry> body;
  std::optional<std::string> when_clause;
  std::optional<std::string> loop_clause;
  std::vector<std::string> notify_targets;
  SourceLocation source;
};

struct ParseDiagnostic {
  SourceLocation source;
  std::string message;
};

struct ParsedFile {
  std::vector<Task> tasks;
  std::vector<ParseDiagnostic> skipped;  // tasks with zero or several module keys
};

/// Extracts every task of a playbook or task file, in document order.
/// Throws ParseError (path + line) on invalid YAML.
ParsedFile parse_tasks(std::string_view yaml_text, const std::string& source_path);
ParsedFile parse_tasks_file(const std::filesystem::path& path, const std::string& display_path);

/// True for task keywords that never name a module.
bool is_reserved_key(std::string_view key);

enum class NodeKind { kAnsibleTaskBody, kModule, kName, kParameter, kConditional, kLoop, kNotify, kValue };

std::string_view kind_name(NodeKind kind);
/// True if `token` is the spelling of one of the structural node kinds.
bool is_kind_token(std::string_view token);

struct AstNode {
  NodeKind kind = NodeKind::kValue;
  std::optional<std::string> raw;
  std::vector<AstNode> children;

  static AstNode value(std::string raw) { return {NodeKind::kValue, std::move(raw), {}}; }
  bool operator==(const AstNode&) const = default;
};

/// Root AnsibleTaskBody with children Module, [Conditional], [Loop], [Notify].
AstNode build_ast(const Task& task);

enum class Origin { kName, kBody };
std::string_view origin_name(Origin origin);
Origin parse_origin(std::string_view text);

struct TokenStream {
  std::string task_id;
  Origin origin = Origin::kBody;
  std::vector<std::string> tokens;

  bool operator==(const TokenStream&) const = default;
};

/// Pre-order depth-first walk: kind name for structural nodes, followed by
/// `raw` for Parameter nodes; `raw` alone for Value nodes.
TokenStream serialize_preorder(const AstNode& ast, std::string task_id = {});

/// `task_id <TAB> origin <TAB> space-joined escaped tokens`
std::string format_stream_line(const TokenStream& stream);
TokenStream parse_stream_line(std::string_view line);

std::size_t count_nodes(const AstNode& node, NodeKind kind);

}  // namespace iaclint::ansible
