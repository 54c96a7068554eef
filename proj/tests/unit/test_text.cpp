// Copyright 2026 The pcil Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "pcil/text.hpp"

using namespace pcil;

TEST_CASE("nfc composes combining sequences") {
  CHECK(nfc_normalize("Ka\xCC\x84ka\xCC\x84po\xCC\x84") == "K\xC4\x81k\xC4\x81p\xC5\x8D");
  CHECK(nfc_normalize("plain") == "plain");
  CHECK(code_point_count("K\xC4\x81k\xC4\x81p\xC5\x8D") == 6);
}

TEST_CASE("case folding is full folding") {
  CHECK(case_fold("Stra\xC3\x9F" "e") == "strasse");
  CHECK(case_fold("Pionus MENSTRUUS") == "pionus menstruus");
}

TEST_CASE("trim and splitting") {
  CHECK(trim("  a b \t") == "a b");
  CHECK(trim("   ").empty());
  const auto lines = split_lines("a\r\nb\n\nc");
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "a");
  CHECK(lines[2].empty());
  const auto fields = split_on("x;y;", ';');
  REQUIRE(fields.size() == 3);
  CHECK(fields[2].empty());
}

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(fnv1a64("foobar") == 0x85944171F73967E8ULL);
  CHECK(hex64(0xAF63DC4C8601EC8CULL) == "af63dc4c8601ec8c");
  CHECK(hex64(1) == "0000000000000001");
}
