// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/policy_xml.hpp"

#include "helpers.hpp"

#include <functional>

#include <doctest.h>

using namespace rolechain;

namespace
{
  const char* online_test_doc = R"(<SoDPrinciple org="OnlineTest">
  <MERSet type="Static" cardinality="2">
    <Role value="Reviewer"/>
    <Role value="Student"/>
  </MERSet>
  <MERSet type="Dynamic" cardinality="2">
    <Role value="Reviewer"/>
    <Role value="Editor"/>
  </MERSet>
</SoDPrinciple>
)";

  Errc code_of(const std::function<void()>& fn)
  {
    try
    {
      fn();
    }
    catch (const Error& e)
    {
      return e.code();
    }
    FAIL("expected an exception");
    return Errc::parse_error;
  }
}

TEST_CASE("the online test principle parses to two MER sets")
{
  SodParseResult result = parse_sod_xml(online_test_doc);
  CHECK(result.warnings.empty());
  CHECK(result.document.org == "OnlineTest");
  REQUIRE(result.document.mer_sets.size() == 2);

  const MerSet& stat = result.document.mer_sets[0];
  CHECK(stat.roles == std::vector<std::string>{"Reviewer", "Student"});
  CHECK(stat.cardinality == 2);
  CHECK(stat.kind == MerKind::Static);

  const MerSet& dyn = result.document.mer_sets[1];
  CHECK(dyn.roles == std::vector<std::string>{"Reviewer", "Editor"});
  CHECK(dyn.cardinality == 2);
  CHECK(dyn.kind == MerKind::Dynamic);
}

TEST_CASE("serialization is canonical and round-trips")
{
  SodParseResult parsed = parse_sod_xml(online_test_doc);
  std::string serialized = serialize_sod_xml(parsed.document);
  CHECK(serialized == online_test_doc);
  CHECK(parse_sod_xml(serialized).document == parsed.document);
}

TEST_CASE("round trip survives attribute escaping")
{
  SodPrincipleDocument doc;
  doc.org = "A&B <\"quoted\"> org";
  doc.mer_sets = {{{"R<1>", "R&2"}, 2, MerKind::Dynamic}};
  SodParseResult reparsed = parse_sod_xml(serialize_sod_xml(doc));
  CHECK(reparsed.document == doc);
}

TEST_CASE("XML declarations, comments and whitespace are tolerated")
{
  std::string text = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                     "<!-- policy for the online test -->\n"
                     "<SoDPrinciple org=\"X\">\n"
                     "  <!-- conflicting duties -->\n"
                     "  <MERSet type=\"Static\" cardinality=\"2\">\n"
                     "    <Role value=\"A\"/>\n"
                     "    <Role value=\"B\"></Role>\n"
                     "  </MERSet>\n"
                     "</SoDPrinciple>";
  SodParseResult result = parse_sod_xml(text);
  CHECK(result.document.org == "X");
  REQUIRE(result.document.mer_sets.size() == 1);
  CHECK(result.document.mer_sets[0].roles ==
        std::vector<std::string>{"A", "B"});
}

TEST_CASE("duplicate roles inside a set collapse with a warning")
{
  std::string text = "<SoDPrinciple org=\"X\">\n"
                     "  <MERSet type=\"Static\" cardinality=\"2\">\n"
                     "    <Role value=\"A\"/>\n"
                     "    <Role value=\"B\"/>\n"
                     "    <Role value=\"A\"/>\n"
                     "  </MERSet>\n"
                     "</SoDPrinciple>";
  SodParseResult result = parse_sod_xml(text);
  REQUIRE(result.warnings.size() == 1);
  CHECK(result.warnings[0].find("line 5") != std::string::npos);
  CHECK(result.warnings[0].find("\"A\"") != std::string::npos);
  CHECK(result.document.mer_sets[0].roles ==
        std::vector<std::string>{"A", "B"});
}

TEST_CASE("malformed XML reports parse errors with line numbers")
{
  auto check_parse_error = [](const std::string& text, std::size_t line) {
    try
    {
      parse_sod_xml(text);
      FAIL(("expected ParseError for: " + text));
    }
    catch (const ParseError& e)
    {
      CHECK(e.code() == Errc::parse_error);
      CHECK(e.line() == line);
    }
  };

  check_parse_error("", 1);
  check_parse_error("plain text", 1);
  check_parse_error("<SoDPrinciple org=\"X\">", 1);
  check_parse_error("<SoDPrinciple org=\"X\">\n</Wrong>", 2);
  check_parse_error("<SoDPrinciple org=\"X\" org=\"Y\"></SoDPrinciple>", 1);
  check_parse_error("<SoDPrinciple org=\"X\">&bogus;</SoDPrinciple>", 1);
  check_parse_error(
    "<SoDPrinciple org=\"X\"></SoDPrinciple>\n<Extra/>", 2);
}

TEST_CASE("schema violations are distinguished from parse errors")
{
  CHECK(
    code_of([] { parse_sod_xml("<Wrong></Wrong>"); }) ==
    Errc::schema_violation);
  CHECK(
    code_of([] {
      parse_sod_xml("<SoDPrinciple bogus=\"1\"></SoDPrinciple>");
    }) == Errc::schema_violation);
  CHECK(
    code_of([] {
      parse_sod_xml("<SoDPrinciple org=\"X\"><Other/></SoDPrinciple>");
    }) == Errc::schema_violation);
  CHECK(
    code_of([] {
      parse_sod_xml(
        "<SoDPrinciple org=\"X\">"
        "<MERSet type=\"Sometimes\" cardinality=\"2\">"
        "<Role value=\"A\"/><Role value=\"B\"/></MERSet></SoDPrinciple>");
    }) == Errc::schema_violation);
  CHECK(
    code_of([] {
      parse_sod_xml(
        "<SoDPrinciple org=\"X\">"
        "<MERSet type=\"Static\" cardinality=\"two\">"
        "<Role value=\"A\"/><Role value=\"B\"/></MERSet></SoDPrinciple>");
    }) == Errc::schema_violation);
  CHECK(
    code_of([] {
      parse_sod_xml(
        "<SoDPrinciple org=\"X\">"
        "<MERSet type=\"Static\" cardinality=\"3\">"
        "<Role value=\"A\"/><Role value=\"B\"/></MERSet></SoDPrinciple>");
    }) == Errc::schema_violation);
  CHECK(
    code_of([] {
      parse_sod_xml(
        "<SoDPrinciple org=\"X\">"
        "<MERSet type=\"Static\" cardinality=\"2\">"
        "<Role value=\"A\"/></MERSet></SoDPrinciple>");
    }) == Errc::schema_violation);
  CHECK(
    code_of([] {
      parse_sod_xml(
        "<SoDPrinciple org=\"X\">"
        "<MERSet type=\"Static\" cardinality=\"2\">"
        "<Role value=\"A\"/><Role/></MERSet></SoDPrinciple>");
    }) == Errc::schema_violation);
}

TEST_CASE("schema diagnostics carry the offending element and line")
{
  std::string text = "<SoDPrinciple org=\"X\">\n"
                     "  <MERSet type=\"Static\" cardinality=\"nope\">\n"
                     "    <Role value=\"A\"/>\n"
                     "    <Role value=\"B\"/>\n"
                     "  </MERSet>\n"
                     "</SoDPrinciple>";
  try
  {
    parse_sod_xml(text);
    FAIL("expected ParseError");
  }
  catch (const ParseError& e)
  {
    CHECK(e.code() == Errc::schema_violation);
    CHECK(e.line() == 2);
    CHECK(e.element() == "MERSet");
  }
}

TEST_CASE("array form conversion preserves the sets")
{
  SodParseResult parsed = parse_sod_xml(online_test_doc);
  std::vector<MerSet> array = to_array_form(parsed.document);
  CHECK(array == parsed.document.mer_sets);
  SodPrincipleDocument back = from_array_form(array, "OnlineTest");
  CHECK(back == parsed.document);
}
