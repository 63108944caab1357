#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "callmask/trie.hpp"

namespace callmask {

inline constexpr std::string_view kEndMarker = "<nexa_end>";
inline constexpr std::string_view kSentinelName = "no_relevant_function";

enum class ArgKind { String, Integer, Float, Dict, Boolean, Enum };

std::string_view kind_name(ArgKind kind);

/// Maps a documentation type word to its kind. Accepts the aliases found in
/// scraped API docs: str/string, int/integer, float/number, bool/boolean, dict.
std::optional<ArgKind> kind_from_word(std::string_view word);

/// Argument type. Enum types carry their member list plus a trie over the
/// quoted members ('US', 'UK', ...) that the enum matcher walks.
class ArgType {
 public:
  explicit ArgType(ArgKind kind);
  static ArgType enumeration(std::vector<std::string> values);

  ArgKind kind() const { return kind_; }
  const std::vector<std::string>& enum_values() const { return enum_values_; }
  const std::shared_ptr<const Trie>& enum_index() const { return enum_index_; }

  friend bool operator==(const ArgType& a, const ArgType& b) {
    return a.kind_ == b.kind_ && a.enum_values_ == b.enum_values_;
  }

 private:
  ArgType() = default;

  ArgKind kind_ = ArgKind::String;
  std::vector<std::string> enum_values_;
  std::shared_ptr<const Trie> enum_index_;
};

struct ArgSpec {
  std::string name;
  ArgType type{ArgKind::String};
  std::string description;
  /// Spelling used in documentation ("str", "string", ...). Presentation
  /// only; empty means the canonical kind name. Not part of equality.
  std::string type_word;

  std::string rendered_type_word() const;

  friend bool operator==(const ArgSpec& a, const ArgSpec& b) {
    return a.name == b.name && a.type == b.type && a.description == b.description;
  }
};

struct FunctionSchema {
  std::string name;
  std::string description;
  std::vector<ArgSpec> args;

  friend bool operator==(const FunctionSchema&, const FunctionSchema&) = default;
};

bool is_identifier(std::string_view text);

/// Throws Error(SchemaViolation) if the schema breaks an invariant.
void validate(const FunctionSchema& schema);

const FunctionSchema& sentinel_schema();

/// Ordered, validated set of schemas that always holds the sentinel exactly once.
class FunctionRegistry {
 public:
  /// Validates every schema; inserts the sentinel at the front when absent.
  explicit FunctionRegistry(std::vector<FunctionSchema> functions = {});

  const std::vector<FunctionSchema>& functions() const { return functions_; }
  const FunctionSchema* find(std::string_view name) const;
  std::vector<std::string> names() const;
  std::size_t size() const { return functions_.size(); }

 private:
  std::vector<FunctionSchema> functions_;
};

// ---------------------------------------------------------------------------
// Literal values

struct IntegerLiteral {
  std::string digits;  // canonical: optional '-', no leading zeros, never "-0"
  friend bool operator==(const IntegerLiteral&, const IntegerLiteral&) = default;
};

struct FloatLiteral {
  std::string digits;  // canonical "<int>.<frac>", fraction without trailing zeros
  friend bool operator==(const FloatLiteral&, const FloatLiteral&) = default;
};

struct EnumLiteral {
  std::string text;
  friend bool operator==(const EnumLiteral&, const EnumLiteral&) = default;
};

struct DictEntry;
using DictValue = std::vector<DictEntry>;

/// A typed argument literal. Numbers keep their exact decimal text, so no
/// lexeme the grammar accepts can overflow or lose precision.
struct Value {
  std::variant<std::string, IntegerLiteral, FloatLiteral, bool, DictValue, EnumLiteral> data;

  static Value string(std::string text);
  static Value integer(std::int64_t value);
  static Value integer_text(std::string_view digits);
  static Value floating(double value);
  static Value floating_text(std::string_view digits);
  static Value boolean(bool value);
  static Value dict(DictValue entries);
  static Value enumeration(std::string text);

  friend bool operator==(const Value& a, const Value& b);
};

struct DictEntry {
  std::string key;
  Value value;
  friend bool operator==(const DictEntry& a, const DictEntry& b);
};

/// True iff `value` is a legal literal for `type`.
bool value_matches(const Value& value, const ArgType& type);

std::string render_value(const Value& value);

struct CallExpression {
  std::string function;
  std::vector<Value> arguments;

  friend bool operator==(const CallExpression&, const CallExpression&) = default;
};

// ---------------------------------------------------------------------------
// Stubs and registry documents

enum class DocQuote { Single, Double };

/// Parses one Python-style stub: def header, docstring, Args block.
/// Throws Error(MalformedStub).
FunctionSchema parse_stub(std::string_view text);

/// Parses a stub file: stubs separated by blank lines.
std::vector<FunctionSchema> parse_stubs(std::string_view text);

std::string render_stub(const FunctionSchema& schema, DocQuote quote = DocQuote::Single);

/// Reads the JSON registry document (a list of function objects).
FunctionRegistry load_registry(std::string_view document);
FunctionRegistry load_registry_file(const std::string& path);

std::string schema_to_json(const FunctionSchema& schema);
std::string dump_registry(const FunctionRegistry& registry);

// ---------------------------------------------------------------------------
// Call expressions

/// Untyped call: numbers come back as IntegerLiteral/FloatLiteral by shape,
/// quoted text as std::string. Throws Error(ParseError).
CallExpression parse_call_syntax(std::string_view text);

/// Parses and type-checks a response against `registry`. The end marker is
/// optional and stripped. Throws ParseError, UnknownFunction, ArityMismatch
/// or TypeMismatch.
CallExpression parse_call(std::string_view text, const FunctionRegistry& registry);

/// Positional rendering with ", " separators, terminated by the end marker.
std::string render_call(const CallExpression& call);
std::string render_call_body(const CallExpression& call);

}  // namespace callmask
