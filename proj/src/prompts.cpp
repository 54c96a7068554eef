// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0
#include "pcil/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "pcil/text.hpp"

namespace pcil {

// ---------------------------------------------------------------------------
// Realm

namespace {

std::string ascii_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string singular(const std::string& plural) {
  if (plural.size() > 3 && plural.ends_with("ies")) {
    return plural.substr(0, plural.size() - 3) + "y";
  }
  if (plural.size() > 1 && plural.ends_with('s') && !plural.ends_with("ss")) {
    return plural.substr(0, plural.size() - 1);
  }
  return plural;
}

std::string with_article(const std::string& noun) {
  const char c = noun.empty() ? 'x' : static_cast<char>(std::tolower(noun.front()));
  const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
  return (vowel ? "an " : "a ") + noun;
}

}  // namespace

void RealmSpec::validate() const {
  if (trim(name).empty()) fail(ErrorKind::kConfig, "realm name must not be empty");
  if (kind == RealmKind::kBiological && trim(subtype_noun).empty()) {
    fail(ErrorKind::kConfig, "biological realms need a subtype noun (e.g. 'orders')");
  }
}

std::string RealmSpec::subtype_singular() const { return singular(subtype_noun); }

std::string RealmSpec::member() const {
  return member_noun.empty() ? singular(ascii_lower(name)) : member_noun;
}

const char* to_string(RealmKind kind) noexcept {
  return kind == RealmKind::kBiological ? "biological" : "general";
}

RealmKind realm_kind_from_string(const std::string& s) {
  if (s == "biological") return RealmKind::kBiological;
  if (s == "general") return RealmKind::kGeneral;
  fail(ErrorKind::kConfig, "realm kind must be 'biological' or 'general', got '" + s + "'");
}

nlohmann::json to_json(const RealmSpec& realm) {
  return {{"name", realm.name},
          {"kind", to_string(realm.kind)},
          {"subtype_noun", realm.subtype_noun},
          {"member_noun", realm.member_noun}};
}

RealmSpec realm_from_json(const nlohmann::json& j) {
  RealmSpec r;
  try {
    r.name = j.at("name").get<std::string>();
    r.kind = realm_kind_from_string(j.value("kind", std::string("biological")));
    r.subtype_noun = j.value("subtype_noun", std::string(r.kind == RealmKind::kBiological
                                                             ? "orders"
                                                             : "subcategories"));
    r.member_noun = j.value("member_noun", std::string());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("malformed realm: ") + e.what());
  }
  r.validate();
  return r;
}

// ---------------------------------------------------------------------------
// LLM prompt templates

std::string render_subtype_prompt(const RealmSpec& realm) {
  realm.validate();
  if (realm.kind == RealmKind::kGeneral) {
    return "For each provided prompt, provide a list of 20 of the most common subcategories, "
           "ensuring every item in the list is unique. Do not use extra explanations like "
           "'Please note that this is not an exhaustive list.' If the provided prompt was "
           "already asked of you, simply repeat your previous answer for it.";
  }
  const std::string one = realm.subtype_singular();
  return "List the latin names of all scientific " + realm.subtype_noun + " of " + realm.name +
         ", ensuring every item in the list is unique. Do not use extra explanations like "
         "'Please note that this is not an exhaustive list.' If the provided scientific " +
         one + " was already asked of you, simply repeat your previous answer for it.";
}

ChatPrompt subtype_chat(const RealmSpec& realm) {
  if (realm.kind == RealmKind::kGeneral) return {render_subtype_prompt(realm), realm.name};
  return {std::string(), render_subtype_prompt(realm)};
}

ChatPrompt render_description_system_prompt(const RealmSpec& realm, const std::string& subtype) {
  realm.validate();
  if (trim(subtype).empty()) fail(ErrorKind::kConfig, "subtype must not be empty");
  std::string system;
  if (realm.kind == RealmKind::kBiological) {
    const std::string one = realm.subtype_singular();
    const std::string many = realm.subtype_noun;
    system =
        "I want you to act as an input text prompt for the generative image model called "
        "Stable Diffusion. I will give you the scientific name of " + with_article(one) +
        " of " + realm.name +
        ". Your job is to provide a numbered list of 20 unique randomly chosen *non-extinct* "
        "species from the provided " + one +
        ", and for each species give a detailed descriptions in 180 characters or less of the "
        "visual characteristics that will help to tell it from other species in a photograph. "
        "Also provide each species' latin scientific name, and if known, the common name. "
        "Provide them in csv format using ; as the separator with the following columns: "
        "item_id, species_latin_name, species_common_name, species_description. Do not use ; "
        "within any text fields. If the " + one +
        " has less than 20 species, list all the species using a shorter list. Do not list "
        "extinct species or any species from " + many +
        " different to the one I provide. Do not explain if the " + one +
        " has less than 20 species. Ensure every listed species is only listed once. Do not "
        "explain using a note of the form 'Note: The X " + one +
        " only contains these Y species.' Do not use ** in the result. If the same species "
        "was already asked of you, simply repeat your previous answer for it. Describe the "
        "visual characteristics and leave out how they sound or smell.";
  } else {
    system =
        "I want you to act as an input text prompt for the generative image model called "
        "Stable Diffusion. I will give you the name of a physical object/concept related to "
        "the theme of " + realm.name +
        ". Your job is to provide a numbered list of 20 unique randomly chosen "
        "types/kinds/examples of the object/concept, and for each species give a detailed "
        "descriptions in 180 characters or less of the visual characteristics that will help "
        "to tell it from other related items in a photograph. Provide them in csv format "
        "using ; as the separator with the following columns: item_id, item_name, "
        "item_description. Do not use ; within any text fields. If the object/concept has "
        "less than 20 unique types/kinds/examples, list all of them using a shorter list. Do "
        "not list items unrelated to the object/concept to the one I provide. Do not explain "
        "if the object/concept has less than 20 type/kind/example. Ensure every listed item "
        "is only listed once. Do not use ** in the result. If the same item was asked of "
        "you, simply repeat your previous answer for it. Describe the visual characteristics "
        "and leave out how they sound, smell, taste or feel.";
  }
  return {std::move(system), subtype};
}

std::vector<ChatPrompt> render_class_name_system_prompt(const RealmSpec& realm,
                                                        std::span<const std::string> names) {
  realm.validate();
  if (names.empty()) fail(ErrorKind::kConfig, "class-name prompt needs at least one name");
  const std::string subject = realm.kind == RealmKind::kBiological
                                  ? "the English name of ten " + realm.member() + " species"
                                  : "the names of ten types of " + realm.name;
  const std::string system =
      "I want you to act as an input text prompt for the generative image model called "
      "Stable Diffusion. I will give you a list of " + subject +
      ". Your job is to provide a detailed descriptions in 250 characters or less of the "
      "visual characteristics of each species that will help to tell it from other species "
      "in a photograph. Provide them in csv format using ; as the separator with the "
      "following columns: item_id, species_name, species_description. Use each name exactly "
      "as given. Do not use ; within any text fields. Ensure every listed species is only "
      "listed once. Do not use ** in the result. Describe the visual characteristics and "
      "leave out how they sound or smell.";
  std::vector<ChatPrompt> batches;
  for (std::size_t start = 0; start < names.size(); start += kClassNameBatch) {
    const auto end = std::min(names.size(), start + kClassNameBatch);
    std::string user;
    for (std::size_t i = start; i < end; ++i) {
      if (trim(names[i]).empty()) fail(ErrorKind::kConfig, "class names must not be empty");
      if (!user.empty()) user += '\n';
      user += names[i];
    }
    batches.push_back({system, std::move(user)});
  }
  return batches;
}

// ---------------------------------------------------------------------------
// Class specs

std::size_t expected_columns(CsvSchema schema) {
  return schema == CsvSchema::kBiological ? 4 : 3;
}

std::vector<std::string> column_names(CsvSchema schema) {
  switch (schema) {
    case CsvSchema::kBiological:
      return {"item_id", "species_latin_name", "species_common_name", "species_description"};
    case CsvSchema::kGeneral:
      return {"item_id", "item_name", "item_description"};
    case CsvSchema::kClassName:
      return {"item_id", "species_name", "species_description"};
  }
  return {};
}

CsvSchema description_schema(const RealmSpec& realm) {
  return realm.kind == RealmKind::kBiological ? CsvSchema::kBiological : CsvSchema::kGeneral;
}

std::string ClassSpec::display_name() const {
  if (latin_name && common_name) return *latin_name + " (" + *common_name + ")";
  if (latin_name) return *latin_name;
  if (common_name) return *common_name;
  return {};
}

std::string ClassSpec::dedup_key() const {
  return case_fold(latin_name ? *latin_name : common_name.value_or(std::string()));
}

void ClassSpec::validate() const {
  if (!latin_name && !common_name) fail(ErrorKind::kData, "class spec has no name");
  if (trim(description).empty()) fail(ErrorKind::kData, "class spec has an empty description");
  if (code_point_count(description) > kMaxDescriptionChars) {
    fail(ErrorKind::kData, "class description exceeds " +
                               std::to_string(kMaxDescriptionChars) + " characters");
  }
  for (const auto* field : {&description, &source_subtype}) {
    if (field->find(';') != std::string::npos) fail(ErrorKind::kData, "';' inside a field");
  }
  for (const auto* name : {&latin_name, &common_name}) {
    if (*name && (*name)->find(';') != std::string::npos) {
      fail(ErrorKind::kData, "';' inside a name");
    }
  }
}

nlohmann::json to_json(const ClassSpec& spec) {
  nlohmann::json j;
  j["item_id"] = spec.item_id;
  j["latin_name"] = spec.latin_name ? nlohmann::json(*spec.latin_name) : nlohmann::json();
  j["common_name"] = spec.common_name ? nlohmann::json(*spec.common_name) : nlohmann::json();
  j["description"] = spec.description;
  j["source_subtype"] = spec.source_subtype;
  return j;
}

ClassSpec class_spec_from_json(const nlohmann::json& j) {
  ClassSpec s;
  try {
    s.item_id = j.at("item_id").get<std::int64_t>();
    if (j.contains("latin_name") && !j["latin_name"].is_null()) {
      s.latin_name = j["latin_name"].get<std::string>();
    }
    if (j.contains("common_name") && !j["common_name"].is_null()) {
      s.common_name = j["common_name"].get<std::string>();
    }
    s.description = j.at("description").get<std::string>();
    s.source_subtype = j.value("source_subtype", std::string());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("malformed class spec: ") + e.what());
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

std::string strip_markup(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '*' && i + 1 < line.size() && line[i + 1] == '*') {
      ++i;
      continue;
    }
    out += line[i];
  }
  return out;
}

std::string unquote(std::string_view field) {
  auto f = trim(field);
  if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = trim(f.substr(1, f.size() - 2));
  return std::string(f);
}

/// Splits "12. text" / "12) text" into (12, "text"). Returns nullopt if the
/// field does not start with list numbering.
std::optional<std::pair<std::int64_t, std::string>> split_numbering(std::string_view field) {
  std::size_t i = 0;
  while (i < field.size() && std::isdigit(static_cast<unsigned char>(field[i]))) ++i;
  if (i == 0 || i > 9 || i >= field.size() || (field[i] != '.' && field[i] != ')')) {
    return std::nullopt;
  }
  std::int64_t n = 0;
  std::from_chars(field.data(), field.data() + i, n);
  return std::make_pair(n, std::string(trim(field.substr(i + 1))));
}

std::string strip_bullet(std::string_view field) {
  auto f = trim(field);
  if (!f.empty() && (f.front() == '-' || f.front() == '*')) f = trim(f.substr(1));
  if (f.starts_with("\xE2\x80\xA2")) f = trim(f.substr(3));  // U+2022 bullet
  return std::string(f);
}

std::optional<std::int64_t> parse_item_id(std::string_view field) {
  std::string f = strip_bullet(field);
  if (auto numbered = split_numbering(f); numbered && numbered->second.empty()) {
    return numbered->first;
  } else if (numbered) {
    f = numbered->second;  // "1. 1"
  }
  std::int64_t v = 0;
  const auto* end = f.data() + f.size();
  const auto [ptr, ec] = std::from_chars(f.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<std::string> name_field(const std::string& raw) {
  const auto lowered = ascii_lower(raw);
  if (raw.empty() || lowered == "n/a" || lowered == "na" || lowered == "unknown" ||
      lowered == "none" || lowered == "-" || lowered == "not known") {
    return std::nullopt;
  }
  return raw;
}

}  // namespace

ParseResult ClassSpecParser::parse(std::string_view response, const std::string& subtype) {
  ParseResult result;
  const auto lines = split_lines(response);
  const auto want = expected_columns(schema_);
  const auto header = column_names(schema_);

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string original = std::string(trim(lines[n]));
    if (original.empty()) continue;
    const auto reject = [&](std::string reason) {
      result.rejected.push_back({n + 1, original, std::move(reason), subtype});
    };

    const std::string line = strip_markup(original);
    std::vector<std::string> fields;
    for (const auto& f : split_on(line, ';')) fields.push_back(unquote(f));

    if (ascii_lower(strip_bullet(fields.front())) == header.front() ||
        ascii_lower(fields.front()) == "item id") {
      reject("header");
      continue;
    }

    std::optional<std::int64_t> item_id;
    std::size_t first_data = 1;
    if (fields.size() == want) {
      item_id = parse_item_id(fields.front());
      if (!item_id) {
        reject("item_id");
        continue;
      }
    } else if (fields.size() + 1 == want) {
      // "1. Pionus menstruus; Blue-headed Parrot; ..." with the id as list numbering
      auto numbered = split_numbering(strip_bullet(fields.front()));
      if (!numbered || numbered->second.empty()) {
        reject("column count");
        continue;
      }
      item_id = numbered->first;
      fields.front() = unquote(numbered->second);
      first_data = 0;
    } else {
      reject("column count");
      continue;
    }

    ClassSpec spec;
    spec.item_id = *item_id;
    spec.source_subtype = subtype;
    if (schema_ == CsvSchema::kBiological) {
      spec.latin_name = name_field(fields[first_data]);
      spec.common_name = name_field(fields[first_data + 1]);
      spec.description = fields[first_data + 2];
    } else {
      spec.common_name = name_field(fields[first_data]);
      spec.description = fields[first_data + 1];
    }
    if (!spec.latin_name && !spec.common_name) {
      reject("missing name");
      continue;
    }
    if (spec.description.empty()) {
      reject("empty description");
      continue;
    }
    if (code_point_count(spec.description) > kMaxDescriptionChars) {
      reject("description too long");
      continue;
    }
    if (!seen_.insert(spec.dedup_key()).second) {
      reject("duplicate");
      continue;
    }
    result.accepted.push_back(std::move(spec));
  }
  return result;
}

ParseResult parse_description_csv(std::string_view response, CsvSchema schema,
                                  const std::string& subtype) {
  if (trim(response).empty()) fail(ErrorKind::kParse, "empty LLM response");
  ClassSpecParser parser(schema);
  auto result = parser.parse(response, subtype);
  if (result.accepted.empty()) {
    throw ParseError("no class specification could be parsed from the response",
                     std::move(result.rejected));
  }
  return result;
}

std::vector<std::string> parse_subtype_list(std::string_view response) {
  std::vector<std::string> raw = split_lines(response);
  if (raw.size() == 1 && raw.front().find(',') != std::string::npos) {
    raw = split_on(raw.front(), ',');
  }
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& line : raw) {
    std::string item = strip_bullet(strip_markup(line));
    if (auto numbered = split_numbering(item)) item = numbered->second;
    item = unquote(item);
    while (!item.empty() && (item.back() == '.' || item.back() == ',')) item.pop_back();
    item = std::string(trim(item));
    if (item.empty() || item.ends_with(':') || item.starts_with("```")) continue;
    const auto lowered = ascii_lower(item);
    if (lowered.starts_with("note") || lowered.starts_with("please")) continue;
    if (seen.insert(case_fold(item)).second) out.push_back(item);
  }
  return out;
}

std::string write_class_specs_csv(std::span<const ClassSpec> specs, CsvSchema schema) {
  std::string out;
  const auto cols = column_names(schema);
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? ";" : "") + cols[c];
  out += '\n';
  for (const auto& s : specs) {
    s.validate();
    out += std::to_string(s.item_id);
    if (schema == CsvSchema::kBiological) {
      out += ";" + s.latin_name.value_or("") + ";" + s.common_name.value_or("");
    } else {
      out += ";" + s.display_name();
    }
    out += ";" + s.description + "\n";
  }
  return out;
}

std::vector<ClassSpec> read_class_specs_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) fail(ErrorKind::kFormat, "class spec CSV is empty");
  std::vector<std::string> header;
  for (const auto& f : split_on(lines.front(), ';')) header.emplace_back(trim(f));
  std::optional<CsvSchema> schema;
  for (auto candidate : {CsvSchema::kBiological, CsvSchema::kGeneral, CsvSchema::kClassName}) {
    if (column_names(candidate) == header) schema = candidate;
  }
  if (!schema) fail(ErrorKind::kFormat, "unrecognised class spec CSV header: " + lines.front());
  ClassSpecParser parser(*schema);
  auto result = parser.parse(text);
  for (const auto& r : result.rejected) {
    if (r.line_number == 1 && r.reason == "header") continue;
    fail(ErrorKind::kFormat, "class spec CSV line " + std::to_string(r.line_number) + ": " +
                                 r.reason);
  }
  return std::move(result.accepted);
}

// ---------------------------------------------------------------------------
// Image prompts

ImagePromptStyle image_prompt_style_from_string(const std::string& s) {
  if (s == "description") return ImagePromptStyle::kDescription;
  if (s == "class_only" || s == "class-only") return ImagePromptStyle::kClassOnly;
  fail(ErrorKind::kConfig, "image prompt style must be 'description' or 'class_only'");
}

const char* to_string(ImagePromptStyle style) noexcept {
  return style == ImagePromptStyle::kDescription ? "description" : "class_only";
}

std::string render_image_prompt(const ClassSpec& spec, ImagePromptStyle style,
                                const RealmSpec& realm) {
  spec.validate();
  if (style == ImagePromptStyle::kClassOnly) {
    if (trim(realm.name).empty()) {
      fail(ErrorKind::kConfig, "class-only image prompts need a realm name");
    }
    return "A photograph of a type of " + realm.name + ": " + spec.display_name();
  }
  return "A photograph of a " + spec.display_name() + ": " + spec.description;
}

}  // namespace pcil
