#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "cxg/error.hpp"
#include "cxg/inventory.hpp"

using namespace cxg;

TEST_CASE("construction specs parse into ordered slots") {
  const auto c = parse_construction_spec("7\tpos:PRON lex:didn't pos:VERB lex:how");
  CHECK(c.id == 7);
  REQUIRE(c.slots.size() == 4);
  CHECK(c.slots[1] == SlotConstraint{SlotKind::Lex, "didn't"});
  CHECK(c.name == "PRON + didn't + VERB + how");
  CHECK(parse_construction_spec("8\tpos:AUX lex:be pos:VERB").slots.size() == 3);
  CHECK(render_name(parse_construction_spec("1\tsem:3 pos:NOUN")) == "SEM3 + NOUN");
}

TEST_CASE("bad specs report the offending column") {
  auto column_of = [](std::string_view line) -> std::size_t {
    try {
      parse_construction_spec(line);
    } catch (const SpecError& e) {
      return e.column();
    }
    return 0;
  };
  CHECK(column_of("9\tlex:hi") > 0);            // fewer than two slots
  CHECK(column_of("9\tlex:a foo:b") == 9);      // unknown prefix
  CHECK(column_of("9\tlex:a pos:VRB") == 9);    // tag outside tagset
  CHECK(column_of("9\tlex:a sem:x") == 9);      // non-numeric cluster
  CHECK(column_of("x\tlex:a lex:b") == 1);      // bad id
  CHECK(column_of("9 lex:a lex:b") > 0);        // missing tab
}

TEST_CASE("names are injective on single-slot changes") {
  const auto base = parse_construction_spec("1\tpos:PRON lex:didn't pos:VERB lex:how");
  const auto other = parse_construction_spec("2\tpos:PRON lex:did pos:VERB lex:how");
  const auto kind = parse_construction_spec("3\tpos:PRON lex:didn't pos:VERB pos:ADV");
  CHECK(base.name != other.name);
  CHECK(base.name != kind.name);
}

TEST_CASE("inventory loading") {
  std::istringstream ok("# header\n0\tpos:DET pos:NOUN\n\n5\tlex:of pos:DET\n3\tsem:1 sem:2\n");
  const auto inv = load_inventory(ok);
  CHECK(inv.size() == 3);
  CHECK(inv.uses(SlotKind::Sem));

  std::istringstream dup_seq("0\tpos:DET pos:NOUN\n1\tpos:DET pos:NOUN\n");
  try {
    load_inventory(dup_seq);
    FAIL("expected DuplicateError");
  } catch (const DuplicateError& e) {
    const std::string what = e.what();
    CHECK(what.find('0') != std::string::npos);
    CHECK(what.find('1') != std::string::npos);
  }

  std::istringstream dup_id("0\tpos:DET pos:NOUN\n0\tpos:DET pos:ADJ\n");
  CHECK_THROWS_AS(load_inventory(dup_id), ParseError);

  std::istringstream bad("0\tpos:DET pos:NOUN\n1\tlex:x\n");
  try {
    load_inventory(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("write then load is the identity on slot sequences") {
  std::istringstream in("9\tlex:a lex:b\n2\tpos:DET sem:4 lex:x\n4\tsem:0 pos:NOUN\n");
  const auto inv = load_inventory(in);
  std::ostringstream out;
  write_inventory(out, inv);
  CHECK(out.str() == "2\tpos:DET sem:4 lex:x\n4\tsem:0 pos:NOUN\n9\tlex:a lex:b\n");
  std::istringstream back(out.str());
  const auto again = load_inventory(back);
  REQUIRE(again.size() == inv.size());
  for (const auto& c : inv.constructions) {
    auto it = std::find_if(again.constructions.begin(), again.constructions.end(),
                           [&](const Construction& d) { return d.id == c.id; });
    REQUIRE(it != again.constructions.end());
    CHECK(it->slots == c.slots);
  }
  Inventory dup = inv;
  dup.constructions.push_back(inv.constructions[0]);
  dup.constructions.back().id = 100;
  CHECK_THROWS_AS(validate_inventory(dup), DuplicateError);
}
