#include "iaclint/ansible_ast.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include <yaml-cpp/yaml.h>

#include "iaclint/error.hpp"
#include "iaclint/text_io.hpp"

namespace iaclint::ansible {

bool ParamValue::operator==(const ParamValue& o) const {
  return kind == o.kind && scalar == o.scalar && items == o.items && entries == o.entries;
}

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {
    "AnsibleTaskBody", "Module", "Name", "Parameter", "Conditional", "Loop", "Notify", "Value"};

const std::unordered_set<std::string_view>& reserved_keys() {
  static const std::unordered_set<std::string_view> keys = {
      "name", "when", "loop", "loop_control", "notify", "register", "tags", "vars",
      "delegate_to", "delegate_facts", "ignore_errors", "ignore_unreachable", "changed_when",
      "failed_when", "environment", "args", "until", "retries", "delay", "no_log", "run_once",
      "listen", "check_mode", "diff", "async", "poll", "any_errors_fatal", "connection",
      "remote_user", "port", "throttle", "timeout", "debugger", "collections",
      "module_defaults"};
  return keys;
}

// Module arguments given inline as `key=value` pairs are split, except for
// modules whose argument is a free-form command line.
const std::unordered_set<std::string_view>& free_form_modules() {
  static const std::unordered_set<std::string_view> mods = {
      "shell", "command", "raw", "script", "win_shell", "win_command",
      "ansible.builtin.shell", "ansible.builtin.command", "ansible.builtin.raw",
      "ansible.builtin.script"};
  return mods;
}

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

ParamValue to_value(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Scalar:
      return ParamValue::of(node.Scalar());
    case YAML::NodeType::Sequence: {
      ParamValue v;
      v.kind = ParamValue::Kind::kSequence;
      for (const auto& item : node) v.items.push_back(to_value(item));
      return v;
    }
    case YAML::NodeType::Map: {
      ParamValue v;
      v.kind = ParamValue::Kind::kMapping;
      for (const auto& kv : node) {
        v.entries.push_back({kv.first.as<std::string>(), to_value(kv.second)});
      }
      return v;
    }
    default:
      return ParamValue::null();
  }
}

std::string render_flow(const YAML::Node& node) {
  if (node.IsScalar()) return node.Scalar();
  YAML::Emitter out;
  out.SetSeqFormat(YAML::Flow);
  out.SetMapFormat(YAML::Flow);
  out << node;
  return out.c_str();
}

// Splits `a=1 b="x y"` into (key, value) pairs; nullopt if any word is not k=v.
std::optional<std::vector<ParamEntry>> split_key_values(const std::string& s) {
  std::vector<std::string> words;
  std::string cur;
  char quote = 0;
  for (char c : s) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  if (words.empty()) return std::nullopt;
  std::vector<ParamEntry> entries;
  for (const auto& w : words) {
    auto eq = w.find('=');
    if (eq == std::string::npos || eq == 0) return std::nullopt;
    entries.push_back({w.substr(0, eq), ParamValue::of(w.substr(eq + 1))});
  }
  return entries;
}

std::vector<ParamEntry> module_arguments(const std::string& module, const YAML::Node& node) {
  std::vector<ParamEntry> body;
  switch (node.Type()) {
    case YAML::NodeType::Map:
      return to_value(node).entries;
    case YAML::NodeType::Scalar: {
      const auto& s = node.Scalar();
      if (!free_form_modules().contains(module)) {
        if (auto kv = split_key_values(s)) return *kv;
      }
      if (!s.empty()) body.push_back({"free_form", ParamValue::of(s)});
      return body;
    }
    case YAML::NodeType::Sequence:
      body.push_back({"free_form", to_value(node)});
      return body;
    default:
      return body;
  }
}

struct Extractor {
  std::string path;
  ParsedFile result;

  void task(const YAML::Node& node) {
    if (!node.IsMap()) {
      result.skipped.push_back({{path, line_of(node)}, "task entry is not a mapping"});
      return;
    }
    // Blocks are flattened into their inner tasks.
    if (node["block"]) {
      for (const char* key : {"block", "rescue", "always"}) {
        if (node[key] && node[key].IsSequence()) task_list(node[key]);
      }
      return;
    }

    Task t;
    t.source = {path, line_of(node)};
    t.id = path + ":" + std::to_string(t.source.line);
    std::vector<std::string> candidates;
    YAML::Node module_node;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (is_reserved_key(key)) continue;
      candidates.push_back(key);
      module_node = kv.second;
    }
    if (candidates.size() != 1) {
      std::string msg = candidates.empty() ? "no module key" : "several module candidates:";
      for (const auto& c : candidates) msg += " " + c;
      result.skipped.push_back({t.source, msg});
      return;
    }
    t.module_key = candidates.front();
    t.body = module_arguments(t.module_key, module_node);
    if (const auto args = node["args"]; args && args.IsMap()) {
      for (auto& e : to_value(args).entries) t.body.push_back(std::move(e));
    }

    if (const auto n = node["name"]; n && n.IsScalar()) t.name = n.Scalar();
    if (const auto w = node["when"]; w && !w.IsNull()) {
      if (w.IsSequence()) {
        std::string joined;
        for (const auto& c : w) {
          if (!joined.empty()) joined += " and ";
          joined += render_flow(c);
        }
        t.when_clause = joined;
      } else {
        t.when_clause = render_flow(w);
      }
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (key == "loop" || key.rfind("with_", 0) == 0) {
        t.loop_clause = render_flow(kv.second);
        break;
      }
    }
    if (const auto n = node["notify"]; n) {
      std::vector<std::string> targets;
      if (n.IsSequence()) {
        for (const auto& item : n) targets.push_back(render_flow(item));
      } else if (n.IsScalar()) {
        targets.push_back(n.Scalar());
      }
      for (auto& tgt : targets) {
        if (!tgt.empty() &&
            std::find(t.notify_targets.begin(), t.notify_targets.end(), tgt) == t.notify_targets.end()) {
          t.notify_targets.push_back(std::move(tgt));
        }
      }
    }
    result.tasks.push_back(std::move(t));
  }

  void task_list(const YAML::Node& seq) {
    for (const auto& item : seq) task(item);
  }

  static bool is_play(const YAML::Node& node) {
    if (!node.IsMap()) return false;
    for (const char* key : {"hosts", "tasks", "pre_tasks", "post_tasks", "handlers", "roles",
                            "import_playbook", "ansible.builtin.import_playbook"}) {
      if (node[key]) return true;
    }
    return false;
  }

  void document(const YAML::Node& doc) {
    if (!doc.IsSequence()) return;  // vars files, inventories, ...
    for (const auto& entry : doc) {
      if (is_play(entry)) {
        for (const char* key : {"pre_tasks", "tasks", "post_tasks", "handlers"}) {
          if (entry[key] && entry[key].IsSequence()) task_list(entry[key]);
        }
      } else {
        task(entry);
      }
    }
  }
};

void serialize_into(const AstNode& node, std::vector<std::string>& out) {
  if (node.kind == NodeKind::kValue) {
    if (node.raw && !node.raw->empty()) out.push_back(*node.raw);
  } else {
    out.emplace_back(kind_name(node.kind));
    if (node.kind == NodeKind::kParameter && node.raw && !node.raw->empty()) out.push_back(*node.raw);
  }
  for (const auto& child : node.children) serialize_into(child, out);
}

// Appends the Value/Parameter subtree for `value` to `parent`.
void expand_value(const ParamValue& value, AstNode& parent) {
  switch (value.kind) {
    case ParamValue::Kind::kNull:
      return;
    case ParamValue::Kind::kScalar:
      // Empty scalars carry no token.
      if (!value.scalar.empty()) parent.children.push_back(AstNode::value(value.scalar));
      return;
    case ParamValue::Kind::kSequence:
      for (const auto& item : value.items) expand_value(item, parent);
      return;
    case ParamValue::Kind::kMapping:
      for (const auto& e : value.entries) {
        AstNode p{NodeKind::kParameter, e.key, {}};
        expand_value(e.value, p);
        parent.children.push_back(std::move(p));
      }
      return;
  }
}

}  // namespace

bool is_reserved_key(std::string_view key) {
  return reserved_keys().contains(key) || key.rfind("with_", 0) == 0 || key.rfind("become", 0) == 0;
}

ParsedFile parse_tasks(std::string_view yaml_text, const std::string& source_path) {
  Extractor ex{source_path, {}};
  std::vector<YAML::Node> docs;
  try {
    docs = YAML::LoadAll(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ParseError(source_path, e.mark.line + 1, e.msg);
  }
  try {
    for (const auto& doc : docs) ex.document(doc);
  } catch (const YAML::Exception& e) {
    throw ParseError(source_path, e.mark.line + 1, e.msg);
  }
  return std::move(ex.result);
}

ParsedFile parse_tasks_file(const std::filesystem::path& path, const std::string& display_path) {
  return parse_tasks(text::read_file(path), display_path);
}

std::string_view kind_name(NodeKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

bool is_kind_token(std::string_view token) {
  return std::find(kKindNames.begin(), kKindNames.end(), token) != kKindNames.end();
}

AstNode build_ast(const Task& task) {
  AstNode root{NodeKind::kAnsibleTaskBody, std::nullopt, {}};

  AstNode module{NodeKind::kModule, std::nullopt, {}};
  module.children.push_back({NodeKind::kName, std::nullopt, {AstNode::value(task.module_key)}});
  for (const auto& entry : task.body) {
    AstNode param{NodeKind::kParameter, entry.key, {}};
    expand_value(entry.value, param);
    module.children.push_back(std::move(param));
  }
  root.children.push_back(std::move(module));

  if (task.when_clause) {
    AstNode cond{NodeKind::kConditional, std::nullopt, {}};
    if (!task.when_clause->empty()) cond.children.push_back(AstNode::value(*task.when_clause));
    root.children.push_back(std::move(cond));
  }
  if (task.loop_clause) {
    AstNode loop{NodeKind::kLoop, std::nullopt, {}};
    if (!task.loop_clause->empty()) loop.children.push_back(AstNode::value(*task.loop_clause));
    root.children.push_back(std::move(loop));
  }
  if (!task.notify_targets.empty()) {
    AstNode notify{NodeKind::kNotify, std::nullopt, {}};
    for (const auto& target : task.notify_targets) notify.children.push_back(AstNode::value(target));
    root.children.push_back(std::move(notify));
  }
  return root;
}

std::string_view origin_name(Origin origin) { return origin == Origin::kName ? "name" : "body"; }

Origin parse_origin(std::string_view text) {
  if (text == "name") return Origin::kName;
  if (text == "body") return Origin::kBody;
  throw Error("unknown token stream origin '" + std::string(text) + "'");
}

TokenStream serialize_preorder(const AstNode& ast, std::string task_id) {
  TokenStream stream{std::move(task_id), Origin::kBody, {}};
  serialize_into(ast, stream.tokens);
  return stream;
}

std::string format_stream_line(const TokenStream& s) {
  return s.task_id + "\t" + std::string(origin_name(s.origin)) + "\t" + text::join_tokens(s.tokens);
}

TokenStream parse_stream_line(std::string_view line) {
  auto fields = text::split(line, '\t');
  if (fields.size() != 3) throw Error("token line needs 3 tab-separated fields");
  return {fields[0], parse_origin(fields[1]), text::split_tokens(fields[2])};
}

std::size_t count_nodes(const AstNode& node, NodeKind kind) {
  std::size_t n = node.kind == kind ? 1 : 0;
  for (const auto& c : node.children) n += count_nodes(c, kind);
  return n;
}

}  // namespace iaclint::ansible
