// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "pcil/error.hpp"
#include "pcil/prompts.hpp"

using namespace pcil;

namespace {

const RealmSpec kBirds{"Birds", RealmKind::kBiological, "orders", ""};
const RealmSpec kFood{"Food", RealmKind::kGeneral, "subcategories", ""};

constexpr const char* kPionusLine =
    "1; Pionus menstruus; Blue-headed Parrot; Medium-sized parrot with blue head, green body, "
    "and red undertail coverts.";

ClassSpec pionus() {
  return parse_description_csv(kPionusLine, CsvSchema::kBiological).accepted.at(0);
}

}  // namespace

TEST_CASE("subtype prompts reproduce the published wording") {
  CHECK(render_subtype_prompt(kBirds) ==
        "List the latin names of all scientific orders of Birds, ensuring every item in the "
        "list is unique. Do not use extra explanations like 'Please note that this is not an "
        "exhaustive list.' If the provided scientific order was already asked of you, simply "
        "repeat your previous answer for it.");
  CHECK(render_subtype_prompt(kFood) ==
        "For each provided prompt, provide a list of 20 of the most common subcategories, "
        "ensuring every item in the list is unique. Do not use extra explanations like "
        "'Please note that this is not an exhaustive list.' If the provided prompt was "
        "already asked of you, simply repeat your previous answer for it.");
  CHECK(subtype_chat(kBirds).user == render_subtype_prompt(kBirds));
  CHECK(subtype_chat(kFood).user == "Food");
  CHECK(subtype_chat(kFood).system == render_subtype_prompt(kFood));
}

TEST_CASE("biological description prompt is verbatim for an order of Birds") {
  const auto chat = render_description_system_prompt(kBirds, "Psittaciformes");
  CHECK(chat.user == "Psittaciformes");
  CHECK(chat.system ==
        "I want you to act as an input text prompt for the generative image model called "
        "Stable Diffusion. I will give you the scientific name of an order of Birds. Your job "
        "is to provide a numbered list of 20 unique randomly chosen *non-extinct* species from "
        "the provided order, and for each species give a detailed descriptions in 180 "
        "characters or less of the visual characteristics that will help to tell it from "
        "other species in a photograph. Also provide each species' latin scientific name, and "
        "if known, the common name. Provide them in csv format using ; as the separator with "
        "the following columns: item_id, species_latin_name, species_common_name, "
        "species_description. Do not use ; within any text fields. If the order has less than "
        "20 species, list all the species using a shorter list. Do not list extinct species or "
        "any species from orders different to the one I provide. Do not explain if the order "
        "has less than 20 species. Ensure every listed species is only listed once. Do not "
        "explain using a note of the form 'Note: The X order only contains these Y species.' "
        "Do not use ** in the result. If the same species was already asked of you, simply "
        "repeat your previous answer for it. Describe the visual characteristics and leave out "
        "how they sound or smell.");
  CHECK(render_description_system_prompt(kBirds, "Psittaciformes") == chat);
}

TEST_CASE("general description prompt is verbatim for Food") {
  const auto chat = render_description_system_prompt(kFood, "cheese");
  CHECK(chat.user == "cheese");
  CHECK(chat.system ==
        "I want you to act as an input text prompt for the generative image model called "
        "Stable Diffusion. I will give you the name of a physical object/concept related to "
        "the theme of Food. Your job is to provide a numbered list of 20 unique randomly "
        "chosen types/kinds/examples of the object/concept, and for each species give a "
        "detailed descriptions in 180 characters or less of the visual characteristics that "
        "will help to tell it from other related items in a photograph. Provide them in csv "
        "format using ; as the separator with the following columns: item_id, item_name, "
        "item_description. Do not use ; within any text fields. If the object/concept has less "
        "than 20 unique types/kinds/examples, list all of them using a shorter list. Do not "
        "list items unrelated to the object/concept to the one I provide. Do not explain if "
        "the object/concept has less than 20 type/kind/example. Ensure every listed item is "
        "only listed once. Do not use ** in the result. If the same item was asked of you, "
        "simply repeat your previous answer for it. Describe the visual characteristics and "
        "leave out how they sound, smell, taste or feel.");
  CHECK_THROWS_AS(render_description_system_prompt(kFood, "  "), Error);
}

TEST_CASE("class-name prompt opening and batching") {
  std::vector<std::string> names;
  for (int i = 0; i < 200; ++i) names.push_back("Bird " + std::to_string(i));
  const auto batches = render_class_name_system_prompt(kBirds, names);
  REQUIRE(batches.size() == 20);
  CHECK(batches[0].system.starts_with(
      "I want you to act as an input text prompt for the generative image model called "
      "Stable Diffusion. I will give you a list of the English name of ten bird species. Your "
      "job is to provide a detailed descriptions in 250 characters or less of the visual "
      "characteristics of each species that will help to tell it from other species in a "
      "photograph."));
  CHECK(batches[0].user == "Bird 0\nBird 1\nBird 2\nBird 3\nBird 4\nBird 5\nBird 6\nBird 7\n"
                           "Bird 8\nBird 9");
  CHECK(batches[19].user.starts_with("Bird 190\n"));
  const std::vector<std::string> seven(names.begin(), names.begin() + 7);
  REQUIRE(render_class_name_system_prompt(kBirds, seven).size() == 1);
  CHECK(render_class_name_system_prompt(kBirds, std::span(names).first(10)).size() == 1);
  CHECK_THROWS_AS(render_class_name_system_prompt(kBirds, {}), Error);
}

TEST_CASE("realm validation") {
  CHECK_THROWS_AS(render_subtype_prompt(RealmSpec{"", RealmKind::kBiological, "orders", ""}),
                  Error);
  CHECK(kBirds.member() == "bird");
  CHECK(kBirds.subtype_singular() == "order");
  CHECK(RealmSpec{"Plants", RealmKind::kBiological, "families", ""}.subtype_singular() ==
        "family");
  const auto r = realm_from_json(to_json(kFood));
  CHECK(r.name == "Food");
  CHECK(r.kind == RealmKind::kGeneral);
}

TEST_CASE("parse the Pionus example line") {
  const auto spec = pionus();
  CHECK(spec.item_id == 1);
  CHECK(spec.latin_name == "Pionus menstruus");
  CHECK(spec.common_name == "Blue-headed Parrot");
  CHECK(spec.description ==
        "Medium-sized parrot with blue head, green body, and red undertail coverts.");
}

TEST_CASE("parser tolerates numbering, markup and quotes") {
  ClassSpecParser parser(CsvSchema::kBiological);
  const auto r = parser.parse(
      "1. Ara macao; Scarlet Macaw; Red macaw.\n"
      "**2; Tyto alba; Barn Owl; Pale owl.**\n"
      "- 3) \"Bubo bubo\"; Eagle-Owl; Big owl.\n"
      "\n"
      "4; Strix aluco; N/A; Brown owl.\n");
  CHECK(r.rejected.empty());
  REQUIRE(r.accepted.size() == 4);
  CHECK(r.accepted[0].item_id == 1);
  CHECK(r.accepted[0].latin_name == "Ara macao");
  CHECK(r.accepted[1].description == "Pale owl.");
  CHECK(r.accepted[2].latin_name == "Bubo bubo");
  CHECK_FALSE(r.accepted[3].common_name.has_value());
}

TEST_CASE("parser rejects with reasons") {
  ClassSpecParser parser(CsvSchema::kBiological);
  const std::string long_desc(301, 'x');
  const auto r = parser.parse(
      std::string(kPionusLine) + "\n"
      "item_id; species_latin_name; species_common_name; species_description\n"
      "Note: this order contains only 12 species.\n"
      "x; Ara macao; Scarlet Macaw; Red.\n"
      "5; N/A; unknown; Something.\n"
      "6; Ara ararauna; Macaw;\n"
      "7; Ara chloropterus; Green-winged Macaw; " + long_desc + "\n"
      "8; PIONUS MENSTRUUS; Other; Duplicate by latin name.\n",
      "Psittaciformes");
  CHECK(r.accepted.size() == 1);
  std::vector<std::string> reasons;
  for (const auto& j : r.rejected) {
    reasons.push_back(j.reason);
    CHECK(j.source_subtype == "Psittaciformes");
  }
  CHECK(reasons == std::vector<std::string>{"header", "column count", "item_id", "missing name",
                                            "empty description", "description too long",
                                            "duplicate"});
  CHECK(r.rejected[1].line_number == 3);
}

TEST_CASE("dedup spans responses fed to one parser") {
  ClassSpecParser parser(CsvSchema::kBiological);
  CHECK(parser.parse(kPionusLine).accepted.size() == 1);
  const auto again = parser.parse(kPionusLine);
  CHECK(again.accepted.empty());
  REQUIRE(again.rejected.size() == 1);
  CHECK(again.rejected[0].reason == "duplicate");
}

TEST_CASE("zero accepted lines raise a parse error carrying every reject") {
  try {
    parse_description_csv("Note: nothing here.\nfoo", CsvSchema::kBiological);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(e.rejects().size() == 2);
  }
  CHECK_THROWS_AS(parse_description_csv("   ", CsvSchema::kBiological), Error);
}

TEST_CASE("general schema has one name column") {
  const auto r = parse_description_csv("1; Brie; Soft pale cheese with a white rind.",
                                       CsvSchema::kGeneral);
  REQUIRE(r.accepted.size() == 1);
  CHECK(r.accepted[0].common_name == "Brie");
  CHECK_FALSE(r.accepted[0].latin_name.has_value());
}

TEST_CASE("subtype list parsing") {
  CHECK(parse_subtype_list("1. Psittaciformes\n2. Strigiformes\n- piciformes\n3) Piciformes\n"
                           "Note: there are more.\nOrders:\n") ==
        std::vector<std::string>{"Psittaciformes", "Strigiformes", "piciformes"});
  CHECK(parse_subtype_list("Anseriformes, Galliformes, Anseriformes") ==
        std::vector<std::string>{"Anseriformes", "Galliformes"});
}

TEST_CASE("class spec CSV round trip") {
  ClassSpec food;
  food.item_id = 3;
  food.common_name = "Brie";
  food.description = "Soft pale cheese.";
  const std::vector<ClassSpec> birds{pionus()};
  const auto csv = write_class_specs_csv(birds, CsvSchema::kBiological);
  CHECK(csv.starts_with("item_id;species_latin_name;species_common_name;species_description\n"));
  CHECK(read_class_specs_csv(csv) == birds);
  const std::vector<ClassSpec> foods{food};
  CHECK(read_class_specs_csv(write_class_specs_csv(foods, CsvSchema::kGeneral)) == foods);
  CHECK_THROWS_AS(read_class_specs_csv("a;b\n1;x\n"), Error);
  CHECK_THROWS_AS(read_class_specs_csv("item_id;item_name;item_description\nbad line\n"), Error);
}

TEST_CASE("image prompts") {
  const auto spec = pionus();
  CHECK(render_image_prompt(spec, ImagePromptStyle::kDescription, kBirds) ==
        "A photograph of a Pionus menstruus (Blue-headed Parrot): Medium-sized parrot with "
        "blue head, green body, and red undertail coverts.");
  const RealmSpec bird{"bird", RealmKind::kBiological, "orders", ""};
  CHECK(render_image_prompt(spec, ImagePromptStyle::kClassOnly, bird) ==
        "A photograph of a type of bird: Pionus menstruus (Blue-headed Parrot)");
  ClassSpec common = spec;
  common.latin_name.reset();
  CHECK(render_image_prompt(common, ImagePromptStyle::kClassOnly, bird) ==
        "A photograph of a type of bird: Blue-headed Parrot");
  RealmSpec unnamed = bird;
  unnamed.name.clear();
  CHECK_THROWS_AS(render_image_prompt(spec, ImagePromptStyle::kClassOnly, unnamed), Error);
  CHECK(image_prompt_style_from_string("class_only") == ImagePromptStyle::kClassOnly);
  CHECK_THROWS_AS(image_prompt_style_from_string("fancy"), Error);
}
