#include "callmask/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "callmask/error.hpp"
#include "schema_json.hpp"

namespace callmask {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool valid_string_body(std::string_view s) {
  return s.find('\'') == std::string_view::npos && s.find('\n') == std::string_view::npos;
}

constexpr std::size_t kMaxDictDepth = 4;

}  // namespace

std::string_view kind_name(ArgKind kind) {
  switch (kind) {
    case ArgKind::String: return "string";
    case ArgKind::Integer: return "integer";
    case ArgKind::Float: return "float";
    case ArgKind::Dict: return "dict";
    case ArgKind::Boolean: return "boolean";
    case ArgKind::Enum: return "enum";
  }
  return "string";
}

std::optional<ArgKind> kind_from_word(std::string_view word) {
  if (word == "string" || word == "str") return ArgKind::String;
  if (word == "int" || word == "integer") return ArgKind::Integer;
  if (word == "float" || word == "number") return ArgKind::Float;
  if (word == "dict") return ArgKind::Dict;
  if (word == "bool" || word == "boolean") return ArgKind::Boolean;
  return std::nullopt;
}

ArgType::ArgType(ArgKind kind) : kind_(kind) {
  if (kind == ArgKind::Enum) {
    throw Error(ErrorCode::SchemaViolation, "enum types need member values; use ArgType::enumeration");
  }
}

ArgType ArgType::enumeration(std::vector<std::string> values) {
  if (values.empty()) throw Error(ErrorCode::SchemaViolation, "enum type with no members");
  auto index = std::make_shared<Trie>();
  std::set<std::string> seen;
  for (const auto& v : values) {
    if (!valid_string_body(v)) {
      throw Error(ErrorCode::SchemaViolation, "enum member may not contain a quote or newline: " + v);
    }
    if (!seen.insert(v).second) throw Error(ErrorCode::SchemaViolation, "duplicate enum member: " + v);
    index->insert("'" + v + "'");
  }
  ArgType type;
  type.kind_ = ArgKind::Enum;
  type.enum_values_ = std::move(values);
  type.enum_index_ = std::move(index);
  return type;
}

std::string ArgSpec::rendered_type_word() const {
  if (type.kind() == ArgKind::Enum) {
    std::string out = "enum[";
    for (std::size_t i = 0; i < type.enum_values().size(); ++i) {
      if (i > 0) out += ", ";
      out += "'" + type.enum_values()[i] + "'";
    }
    return out + "]";
  }
  return type_word.empty() ? std::string(kind_name(type.kind())) : type_word;
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !is_ident_start(text.front())) return false;
  return std::all_of(text.begin(), text.end(), is_ident_char);
}

void validate(const FunctionSchema& schema) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::SchemaViolation, "function '" + schema.name + "': " + why);
  };
  if (!is_identifier(schema.name)) fail("name is not an identifier");
  auto check_text = [&](std::string_view text, const std::string& what) {
    if (text.find('\n') != std::string_view::npos) fail(what + " spans several lines");
    if (text.find("'''") != std::string_view::npos || text.find("\"\"\"") != std::string_view::npos) {
      fail(what + " contains a docstring delimiter");
    }
    if (trim(text) != text) fail(what + " has surrounding whitespace");
  };
  if (schema.description.empty()) fail("description is empty");
  check_text(schema.description, "description");
  if (schema.description == "Args:") fail("description collides with the Args header");

  std::set<std::string> names;
  for (const auto& arg : schema.args) {
    if (!is_identifier(arg.name)) fail("argument name '" + arg.name + "' is not an identifier");
    if (!names.insert(arg.name).second) fail("duplicate argument '" + arg.name + "'");
    check_text(arg.description, "argument description");
    if (!arg.type_word.empty() && arg.type.kind() != ArgKind::Enum) {
      auto kind = kind_from_word(arg.type_word);
      if (!kind || *kind != arg.type.kind()) fail("type word '" + arg.type_word + "' disagrees with type");
    }
  }
}

const FunctionSchema& sentinel_schema() {
  static const FunctionSchema sentinel = [] {
    FunctionSchema s;
    s.name = std::string(kSentinelName);
    s.description = "Call this when no other provided function can be called to answer the user query.";
    ArgSpec arg;
    arg.name = "user_query";
    arg.type = ArgType(ArgKind::String);
    arg.description = "The user_query that cannot be answered by any other function calls.";
    arg.type_word = "str";
    s.args.push_back(std::move(arg));
    return s;
  }();
  return sentinel;
}

FunctionRegistry::FunctionRegistry(std::vector<FunctionSchema> functions) {
  std::set<std::string> names;
  bool has_sentinel = false;
  for (const auto& f : functions) {
    validate(f);
    if (!names.insert(f.name).second) {
      throw Error(ErrorCode::DuplicateFunctionName, "function '" + f.name + "' declared twice");
    }
    if (f.name == kSentinelName) has_sentinel = true;
  }
  if (!has_sentinel) functions.insert(functions.begin(), sentinel_schema());
  functions_ = std::move(functions);
}

const FunctionSchema* FunctionRegistry::find(std::string_view name) const {
  for (const auto& f : functions_) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::vector<std::string> FunctionRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(functions_.size());
  for (const auto& f : functions_) out.push_back(f.name);
  return out;
}

// ---------------------------------------------------------------------------
// Values

namespace {

std::string canonical_integer(std::string_view text) {
  bool negative = !text.empty() && text.front() == '-';
  if (negative) text.remove_prefix(1);
  if (text.empty() || !std::all_of(text.begin(), text.end(), is_digit)) {
    throw Error(ErrorCode::TypeMismatch, "not an integer literal: " + std::string(text));
  }
  auto first = text.find_first_not_of('0');
  std::string digits = first == std::string_view::npos ? "0" : std::string(text.substr(first));
  if (negative && digits != "0") digits.insert(digits.begin(), '-');
  return digits;
}

std::string canonical_float(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    throw Error(ErrorCode::TypeMismatch, "not a float literal: " + std::string(text));
  }
  std::string whole = canonical_integer(text.substr(0, dot));
  std::string_view frac = text.substr(dot + 1);
  if (frac.empty() || !std::all_of(frac.begin(), frac.end(), is_digit)) {
    throw Error(ErrorCode::TypeMismatch, "not a float literal: " + std::string(text));
  }
  auto last = frac.find_last_not_of('0');
  std::string frac_digits = last == std::string_view::npos ? "0" : std::string(frac.substr(0, last + 1));
  bool negative = text.front() == '-';
  if (negative && whole == "0" && frac_digits != "0") whole = "-0";
  return whole + "." + frac_digits;
}

bool dict_matches(const DictValue& dict, std::size_t depth) {
  if (depth > kMaxDictDepth) return false;
  for (const auto& entry : dict) {
    if (!valid_string_body(entry.key)) return false;
    const auto& v = entry.value.data;
    if (std::holds_alternative<EnumLiteral>(v)) return false;
    if (auto s = std::get_if<std::string>(&v); s && !valid_string_body(*s)) return false;
    if (auto d = std::get_if<DictValue>(&v); d && !dict_matches(*d, depth + 1)) return false;
  }
  return true;
}

}  // namespace

Value Value::string(std::string text) { return Value{std::move(text)}; }
Value Value::integer(std::int64_t value) { return Value{IntegerLiteral{std::to_string(value)}}; }
Value Value::integer_text(std::string_view digits) { return Value{IntegerLiteral{canonical_integer(digits)}}; }

Value Value::floating(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::TypeMismatch, "float literal must be finite");
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  std::string text(buf, res.ptr);
  if (text.find('.') == std::string::npos) text += ".0";
  return Value{FloatLiteral{canonical_float(text)}};
}

Value Value::floating_text(std::string_view digits) { return Value{FloatLiteral{canonical_float(digits)}}; }
Value Value::boolean(bool value) { return Value{value}; }
Value Value::dict(DictValue entries) { return Value{std::move(entries)}; }
Value Value::enumeration(std::string text) { return Value{EnumLiteral{std::move(text)}}; }

bool operator==(const Value& a, const Value& b) { return a.data == b.data; }
bool operator==(const DictEntry& a, const DictEntry& b) { return a.key == b.key && a.value == b.value; }

bool value_matches(const Value& value, const ArgType& type) {
  const auto& v = value.data;
  switch (type.kind()) {
    case ArgKind::String: {
      auto s = std::get_if<std::string>(&v);
      return s && valid_string_body(*s);
    }
    case ArgKind::Integer: return std::holds_alternative<IntegerLiteral>(v);
    case ArgKind::Float: return std::holds_alternative<FloatLiteral>(v);
    case ArgKind::Boolean: return std::holds_alternative<bool>(v);
    case ArgKind::Dict: {
      auto d = std::get_if<DictValue>(&v);
      return d && dict_matches(*d, 1);
    }
    case ArgKind::Enum: {
      auto e = std::get_if<EnumLiteral>(&v);
      if (!e) return false;
      const auto& members = type.enum_values();
      return std::find(members.begin(), members.end(), e->text) != members.end();
    }
  }
  return false;
}

std::string render_value(const Value& value) {
  struct Renderer {
    std::string operator()(const std::string& s) const { return "'" + s + "'"; }
    std::string operator()(const IntegerLiteral& i) const { return i.digits; }
    std::string operator()(const FloatLiteral& f) const { return f.digits; }
    std::string operator()(bool b) const { return b ? "True" : "False"; }
    std::string operator()(const EnumLiteral& e) const { return "'" + e.text + "'"; }
    std::string operator()(const DictValue& d) const {
      std::string out = "{";
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (i > 0) out += ", ";
        out += "'" + d[i].key + "': " + render_value(d[i].value);
      }
      return out + "}";
    }
  };
  return std::visit(Renderer{}, value.data);
}

// ---------------------------------------------------------------------------
// Stubs

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

[[noreturn]] void malformed(const std::string& why) { throw Error(ErrorCode::MalformedStub, why); }

std::vector<std::string> parse_enum_members(std::string_view& rest) {
  // rest points just after "enum["
  std::vector<std::string> members;
  while (true) {
    rest = trim(rest);
    if (!rest.empty() && rest.front() == ']') {
      rest.remove_prefix(1);
      return members;
    }
    if (rest.empty() || rest.front() != '\'') malformed("enum members must be single-quoted");
    auto close = rest.find('\'', 1);
    if (close == std::string_view::npos) malformed("unterminated enum member");
    members.emplace_back(rest.substr(1, close - 1));
    rest.remove_prefix(close + 1);
    rest = trim(rest);
    if (!rest.empty() && rest.front() == ',') rest.remove_prefix(1);
  }
}

ArgSpec parse_arg_line(std::string_view line) {
  // name (type): description
  std::size_t i = 0;
  while (i < line.size() && is_ident_char(line[i])) ++i;
  ArgSpec arg;
  arg.name = std::string(line.substr(0, i));
  if (!is_identifier(arg.name)) malformed("bad argument line: " + std::string(line));
  std::string_view rest = trim(line.substr(i));
  if (rest.empty() || rest.front() != '(') malformed("argument line lacks a (type): " + std::string(line));
  rest.remove_prefix(1);
  rest = trim(rest);
  if (rest.substr(0, 5) == "enum[") {
    rest.remove_prefix(5);
    auto members = parse_enum_members(rest);
    try {
      arg.type = ArgType::enumeration(std::move(members));
    } catch (const Error& e) {
      malformed(e.what());
    }
    rest = trim(rest);
    if (rest.empty() || rest.front() != ')') malformed("enum type not closed: " + std::string(line));
    rest.remove_prefix(1);
  } else {
    auto close = rest.find(')');
    if (close == std::string_view::npos) malformed("argument type not closed: " + std::string(line));
    std::string word(trim(rest.substr(0, close)));
    auto kind = kind_from_word(word);
    if (!kind) malformed("unknown type word '" + word + "'");
    arg.type = ArgType(*kind);
    arg.type_word = word;
    rest.remove_prefix(close + 1);
  }
  if (rest.empty() || rest.front() != ':') malformed("argument line lacks ':' after type: " + std::string(line));
  rest.remove_prefix(1);
  arg.description = std::string(trim(rest));
  return arg;
}

}  // namespace

FunctionSchema parse_stub(std::string_view text) {
  auto lines = split_lines(text);
  std::size_t i = 0;
  auto skip_blank = [&] {
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
  };

  skip_blank();
  if (i == lines.size()) malformed("empty stub");
  std::string_view header = trim(lines[i++]);
  if (header.substr(0, 4) != "def ") malformed("stub must start with 'def'");
  header.remove_prefix(4);
  auto open = header.find('(');
  auto close = header.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
      trim(header.substr(close + 1)) != ":") {
    malformed("malformed def header");
  }
  FunctionSchema schema;
  schema.name = std::string(trim(header.substr(0, open)));
  std::vector<std::string> params;
  {
    std::string_view list = trim(header.substr(open + 1, close - open - 1));
    while (!list.empty()) {
      auto comma = list.find(',');
      params.emplace_back(trim(list.substr(0, comma)));
      if (params.back().empty()) malformed("empty parameter in def header");
      if (comma == std::string_view::npos) break;
      list = list.substr(comma + 1);
    }
  }

  skip_blank();
  if (i == lines.size()) malformed("missing docstring");
  std::string_view opener = trim(lines[i++]);
  std::string_view delim;
  if (opener.substr(0, 3) == "'''") delim = "'''";
  else if (opener.substr(0, 3) == "\"\"\"") delim = "\"\"\"";
  else malformed("missing docstring");
  opener.remove_prefix(3);

  std::vector<std::string_view> body;
  bool closed = false;
  if (!trim(opener).empty()) {
    std::string_view first = trim(opener);
    if (first.size() >= 3 && first.substr(first.size() - 3) == delim) {
      first.remove_suffix(3);
      closed = true;
    }
    if (!trim(first).empty()) body.push_back(trim(first));
  }
  while (!closed && i < lines.size()) {
    std::string_view line = trim(lines[i++]);
    if (line.size() >= 3 && line.substr(line.size() - 3) == delim) {
      line.remove_suffix(3);
      if (!trim(line).empty()) body.push_back(trim(line));
      closed = true;
      break;
    }
    body.push_back(line);
  }
  if (!closed) malformed("unterminated docstring");
  skip_blank();
  if (i != lines.size()) malformed("unexpected text after docstring");

  std::size_t b = 0;
  std::string description;
  for (; b < body.size() && body[b] != "Args:"; ++b) {
    if (body[b].empty()) continue;
    if (!description.empty()) description += ' ';
    description += body[b];
  }
  if (description.empty()) malformed("docstring has no description");
  schema.description = std::move(description);

  bool has_args_block = b < body.size();
  if (has_args_block) {
    for (++b; b < body.size(); ++b) {
      if (body[b].empty()) continue;
      schema.args.push_back(parse_arg_line(body[b]));
    }
  } else if (!params.empty()) {
    malformed("missing Args block");
  }
  if (schema.args.size() != params.size()) malformed("def header and Args block disagree on arity");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (schema.args[k].name != params[k]) {
      malformed("Args entry '" + schema.args[k].name + "' does not match parameter '" + params[k] + "'");
    }
  }
  try {
    validate(schema);
  } catch (const Error& e) {
    malformed(e.what());
  }
  return schema;
}

std::vector<FunctionSchema> parse_stubs(std::string_view text) {
  std::vector<FunctionSchema> out;
  auto lines = split_lines(text);
  std::string current;
  for (auto line : lines) {
    if (line.substr(0, 4) == "def " && !trim(current).empty()) {
      out.push_back(parse_stub(current));
      current.clear();
    }
    current.append(line);
    current.push_back('\n');
  }
  if (!trim(current).empty()) out.push_back(parse_stub(current));
  return out;
}

std::string render_stub(const FunctionSchema& schema, DocQuote quote) {
  const char* delim = quote == DocQuote::Single ? "'''" : "\"\"\"";
  std::string out = "def " + schema.name + "(";
  for (std::size_t i = 0; i < schema.args.size(); ++i) {
    if (i > 0) out += ", ";
    out += schema.args[i].name;
  }
  out += "):\n  ";
  out += delim;
  out += "\n  " + schema.description + "\n";
  if (!schema.args.empty()) {
    out += "  Args:\n";
    for (const auto& arg : schema.args) {
      out += "    " + arg.name + " (" + arg.rendered_type_word() + "):";
      if (!arg.description.empty()) out += " " + arg.description;
      out += "\n";
    }
  }
  out += "  ";
  out += delim;
  return out;
}

// ---------------------------------------------------------------------------
// Registry documents

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void violation(const std::string& why) { throw Error(ErrorCode::SchemaViolation, why); }

std::string required_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) violation(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

// A misspelled key would otherwise drop data silently.
void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) violation("unknown key '" + key + "' in " + where);
  }
}

ArgSpec arg_from_json(const json& obj) {
  if (!obj.is_object()) violation("argument entries must be objects");
  reject_unknown_keys(obj, {"name", "type", "description", "enum_values"}, "argument");
  ArgSpec arg;
  arg.name = required_string(obj, "name");
  std::string word = required_string(obj, "type");
  if (auto it = obj.find("description"); it != obj.end()) {
    if (!it->is_string()) violation("argument description must be a string");
    arg.description = it->get<std::string>();
  }
  auto values = obj.find("enum_values");
  if (word == "enum") {
    if (values == obj.end() || !values->is_array()) violation("enum argument '" + arg.name + "' lacks enum_values");
    std::vector<std::string> members;
    for (const auto& v : *values) {
      if (!v.is_string()) violation("enum_values must be strings");
      members.push_back(v.get<std::string>());
    }
    arg.type = ArgType::enumeration(std::move(members));
  } else {
    if (values != obj.end()) violation("enum_values given for non-enum argument '" + arg.name + "'");
    auto kind = kind_from_word(word);
    if (!kind) violation("unknown type '" + word + "' for argument '" + arg.name + "'");
    arg.type = ArgType(*kind);
    arg.type_word = word;
  }
  return arg;
}

}  // namespace

namespace detail {

ordered_json schema_json(const FunctionSchema& schema) {
  ordered_json obj;
  obj["name"] = schema.name;
  obj["description"] = schema.description;
  obj["args"] = ordered_json::array();
  for (const auto& arg : schema.args) {
    ordered_json a;
    a["name"] = arg.name;
    if (arg.type.kind() == ArgKind::Enum) {
      a["type"] = "enum";
    } else {
      a["type"] = arg.type_word.empty() ? std::string(kind_name(arg.type.kind())) : arg.type_word;
    }
    a["description"] = arg.description;
    if (arg.type.kind() == ArgKind::Enum) a["enum_values"] = arg.type.enum_values();
    obj["args"].push_back(std::move(a));
  }
  return obj;
}

FunctionSchema schema_from_json_object(const nlohmann::json& obj) {
  if (!obj.is_object()) violation("function entries must be objects");
  FunctionSchema schema;
  schema.name = required_string(obj, "name");
  schema.description = required_string(obj, "description");
  reject_unknown_keys(obj, {"name", "description", "args"}, "function '" + schema.name + "'");
  if (auto it = obj.find("args"); it != obj.end()) {
    if (!it->is_array()) violation("'args' must be a list");
    for (const auto& a : *it) schema.args.push_back(arg_from_json(a));
  }
  return schema;
}

}  // namespace detail

FunctionRegistry load_registry(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    violation(std::string("registry is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) violation("registry document must be a list of functions");
  std::vector<FunctionSchema> functions;
  for (const auto& f : doc) functions.push_back(detail::schema_from_json_object(f));
  return FunctionRegistry(std::move(functions));
}

FunctionRegistry load_registry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open registry file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_registry(buf.str());
}

std::string schema_to_json(const FunctionSchema& schema) { return detail::schema_json(schema).dump(); }

std::string dump_registry(const FunctionRegistry& registry) {
  ordered_json doc = ordered_json::array();
  for (const auto& f : registry.functions()) doc.push_back(detail::schema_json(f));
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Calls

namespace {

class CallParser {
 public:
  explicit CallParser(std::string_view text) : text_(text) {}

  CallExpression parse() {
    CallExpression call;
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    call.function = std::string(text_.substr(start, pos_ - start));
    if (!is_identifier(call.function)) fail("expected a function name");
    expect('(');
    if (peek() != ')') {
      while (true) {
        call.arguments.push_back(parse_value(0));
        if (peek() == ',') {
          ++pos_;
          skip_spaces();
          continue;
        }
        break;
      }
    }
    expect(')');
    std::string_view rest = text_.substr(pos_);
    if (rest.substr(0, kEndMarker.size()) == kEndMarker) rest.remove_prefix(kEndMarker.size());
    if (!trim(rest).empty()) fail("unexpected trailing text");
    return call;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::ParseError, why + " at offset " + std::to_string(pos_));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_spaces() {
    while (peek() == ' ') ++pos_;
  }

  std::string parse_quoted() {
    expect('\'');
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '\'' && text_[pos_] != '\n') ++pos_;
    if (peek() != '\'') fail("unterminated string");
    std::string body(text_.substr(start, pos_ - start));
    ++pos_;
    return body;
  }

  Value parse_value(std::size_t depth) {
    char c = peek();
    if (c == '\'') return Value::string(parse_quoted());
    if (c == '-' || is_digit(c)) return parse_number();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return Value::boolean(true);
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return Value::boolean(false);
    }
    if (c == '{') return parse_dict(depth + 1);
    fail("expected a value");
  }

  Value parse_number() {
    std::size_t start = pos_;
    if (peek() == '-') ++pos_;
    std::size_t digits = pos_;
    while (is_digit(peek())) ++pos_;
    if (pos_ == digits) fail("expected digits");
    if (peek() != '.') return Value::integer_text(text_.substr(start, pos_ - start));
    ++pos_;
    std::size_t frac = pos_;
    while (is_digit(peek())) ++pos_;
    if (pos_ == frac) fail("expected digits after '.'");
    return Value::floating_text(text_.substr(start, pos_ - start));
  }

  Value parse_dict(std::size_t depth) {
    if (depth > kMaxDictDepth) fail("dict nesting too deep");
    expect('{');
    DictValue entries;
    if (peek() != '}') {
      while (true) {
        std::string key = parse_quoted();
        expect(':');
        skip_spaces();
        entries.push_back(DictEntry{std::move(key), parse_value(depth)});
        if (peek() == ',') {
          ++pos_;
          skip_spaces();
          continue;
        }
        break;
      }
    }
    expect('}');
    return Value::dict(std::move(entries));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

CallExpression parse_call_syntax(std::string_view text) { return CallParser(text).parse(); }

CallExpression parse_call(std::string_view text, const FunctionRegistry& registry) {
  CallExpression call = parse_call_syntax(text);
  const FunctionSchema* schema = registry.find(call.function);
  if (!schema) throw Error(ErrorCode::UnknownFunction, "no registered function named '" + call.function + "'");
  if (call.arguments.size() != schema->args.size()) {
    throw Error(ErrorCode::ArityMismatch, call.function + " takes " + std::to_string(schema->args.size()) +
                                              " arguments, got " + std::to_string(call.arguments.size()));
  }
  for (std::size_t i = 0; i < call.arguments.size(); ++i) {
    const ArgSpec& spec = schema->args[i];
    Value& value = call.arguments[i];
    if (spec.type.kind() == ArgKind::Enum) {
      if (auto s = std::get_if<std::string>(&value.data)) value = Value::enumeration(std::move(*s));
    }
    if (!value_matches(value, spec.type)) {
      throw Error(ErrorCode::TypeMismatch, "argument '" + spec.name + "' of " + call.function + " expects " +
                                               std::string(kind_name(spec.type.kind())) + ", got " +
                                               render_value(value));
    }
  }
  return call;
}

std::string render_call_body(const CallExpression& call) {
  std::string out = call.function + "(";
  for (std::size_t i = 0; i < call.arguments.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_value(call.arguments[i]);
  }
  return out + ")";
}

std::string render_call(const CallExpression& call) { return render_call_body(call) + std::string(kEndMarker); }

}  // namespace callmask
