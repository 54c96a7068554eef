// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcil/error.hpp"

namespace pcil {

enum class RealmKind { kBiological, kGeneral };

/// The theme future classes are drawn from, e.g. {"Birds", biological, "orders"}.
struct RealmSpec {
  std::string name;
  RealmKind kind = RealmKind::kBiological;
  /// Plural noun for the first-level split ("orders"; "subcategories").
  std::string subtype_noun = "orders";
  /// Singular noun for one member ("bird"). Derived from `name` when empty.
  std::string member_noun;

  void validate() const;
  std::string subtype_singular() const;
  std::string member() const;
};

nlohmann::json to_json(const RealmSpec& realm);
RealmSpec realm_from_json(const nlohmann::json& j);
RealmKind realm_kind_from_string(const std::string& s);
const char* to_string(RealmKind kind) noexcept;

struct ChatPrompt {
  std::string system;
  std::string user;

  friend bool operator==(const ChatPrompt&, const ChatPrompt&) = default;
};

/// First-stage prompt asking for the realm's subtypes. Biological realms get
/// the "List the latin names ..." prompt; general realms the 20-subcategory one.
std::string render_subtype_prompt(const RealmSpec& realm);

/// How the subtype prompt is sent: biological realms as the user message,
/// general realms as the system message with the realm name as user message.
ChatPrompt subtype_chat(const RealmSpec& realm);

/// Second-stage system prompt for one subtype; the user text is the subtype.
ChatPrompt render_description_system_prompt(const RealmSpec& realm, const std::string& subtype);

inline constexpr std::size_t kClassNameBatch = 10;

/// Known-class variant: one prompt per batch of at most ten names, in input order.
std::vector<ChatPrompt> render_class_name_system_prompt(const RealmSpec& realm,
                                                        std::span<const std::string> names);

// ---------------------------------------------------------------------------
// Structured responses

/// Column layout of the ';'-separated responses.
enum class CsvSchema {
  kBiological,  // item_id; species_latin_name; species_common_name; species_description
  kGeneral,     // item_id; item_name; item_description
  kClassName,   // item_id; species_name; species_description
};

std::size_t expected_columns(CsvSchema schema);
std::vector<std::string> column_names(CsvSchema schema);
CsvSchema description_schema(const RealmSpec& realm);

inline constexpr std::size_t kMaxDescriptionChars = 300;

struct ClassSpec {
  std::int64_t item_id = 0;
  std::optional<std::string> latin_name;
  std::optional<std::string> common_name;
  std::string description;
  std::string source_subtype;

  /// "latin (common)" when both names exist, otherwise whichever does.
  std::string display_name() const;
  /// Case-folded latin name, or common name when there is no latin name.
  std::string dedup_key() const;
  void validate() const;

  friend bool operator==(const ClassSpec&, const ClassSpec&) = default;
};

nlohmann::json to_json(const ClassSpec& spec);
ClassSpec class_spec_from_json(const nlohmann::json& j);

struct RejectedLine {
  std::size_t line_number = 0;  // 1-based within the response
  std::string text;
  std::string reason;
  std::string source_subtype;
};

struct ParseResult {
  std::vector<ClassSpec> accepted;
  std::vector<RejectedLine> rejected;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::vector<RejectedLine> rejects)
      : Error(ErrorKind::kParse, what), rejects_(std::move(rejects)) {}
  const std::vector<RejectedLine>& rejects() const noexcept { return rejects_; }

 private:
  std::vector<RejectedLine> rejects_;
};

/// Parses responses for one realm. Deduplication (keep first) spans every
/// response fed to the same parser.
class ClassSpecParser {
 public:
  explicit ClassSpecParser(CsvSchema schema) : schema_(schema) {}

  /// Never throws on bad lines; they are returned as rejects.
  ParseResult parse(std::string_view response, const std::string& subtype = {});

 private:
  CsvSchema schema_;
  std::unordered_set<std::string> seen_;
};

/// Single-response parse. Throws ParseError when nothing is accepted.
ParseResult parse_description_csv(std::string_view response, CsvSchema schema,
                                  const std::string& subtype = {});

/// Subtype names from a list-style response (numbering and bullets removed,
/// case-insensitive duplicates dropped).
std::vector<std::string> parse_subtype_list(std::string_view response);

/// ';'-separated CSV with the schema's header, one spec per line.
std::string write_class_specs_csv(std::span<const ClassSpec> specs, CsvSchema schema);
/// Reads what write_class_specs_csv produced (a header line is required).
std::vector<ClassSpec> read_class_specs_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Text-to-image prompts

enum class ImagePromptStyle { kDescription, kClassOnly };

ImagePromptStyle image_prompt_style_from_string(const std::string& s);
const char* to_string(ImagePromptStyle style) noexcept;

/// "A photograph of a {name}: {description}" or
/// "A photograph of a type of {realm name}: {name}".
std::string render_image_prompt(const ClassSpec& spec, ImagePromptStyle style,
                                const RealmSpec& realm);

}  // namespace pcil
