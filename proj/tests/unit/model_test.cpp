// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/model.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace rolechain;
using nlohmann::json;

TEST_CASE("operation parsing accepts codes and long names")
{
  CHECK(parse_operation("R") == Operation::read);
  CHECK(parse_operation("W") == Operation::write);
  CHECK(parse_operation("Read") == Operation::read);
  CHECK(parse_operation("Write") == Operation::write);
  CHECK_THROWS_AS(parse_operation("r"), ParseError);
  CHECK_THROWS_AS(parse_operation("X"), ParseError);
  CHECK_THROWS_AS(parse_operation(""), ParseError);
  CHECK(operation_code(Operation::read) == 'R');
  CHECK(std::string(operation_name(Operation::write)) == "Write");
}

TEST_CASE("condition encoding is canonical")
{
  CHECK(encode_condition(Condition::none()) == "null");
  Condition window = Condition::window(
    parse_timestamp("2021-12-22 15:00:00"),
    parse_timestamp("2021-12-22 15:40:00"));
  CHECK(
    encode_condition(window) ==
    "st:2021-12-22 15:00:00,ed:2021-12-22 15:40:00");
  CHECK(decode_condition(encode_condition(window)) == window);
  CHECK(decode_condition("null") == Condition::none());
}

TEST_CASE("condition decoding tolerates whitespace after the comma only")
{
  Condition window = Condition::window(
    parse_timestamp("2021-12-22 15:00:00"),
    parse_timestamp("2021-12-22 15:40:00"));
  CHECK(
    decode_condition("st:2021-12-22 15:00:00, ed:2021-12-22 15:40:00") ==
    window);

  CHECK_THROWS_AS(decode_condition(""), ParseError);
  CHECK_THROWS_AS(decode_condition("none"), ParseError);
  CHECK_THROWS_AS(
    decode_condition("ed:2021-12-22 15:40:00,st:2021-12-22 15:00:00"),
    ParseError);
  CHECK_THROWS_AS(decode_condition("st:2021-12-22 15:00:00"), ParseError);
  CHECK_THROWS_AS(
    decode_condition("st :2021-12-22 15:00:00,ed:2021-12-22 15:40:00"),
    ParseError);
  CHECK_THROWS_AS(
    decode_condition("st:2021-12-22 15:00:00,ed:2021-12-22 15:40:00 "),
    ParseError);
}

TEST_CASE("conditions with start at or past end are invalid")
{
  CHECK_THROWS_AS(
    decode_condition("st:2021-12-22 15:40:00,ed:2021-12-22 15:40:00"),
    ParseError);
  CHECK_THROWS_AS(
    decode_condition("st:2021-12-22 15:41:00,ed:2021-12-22 15:40:00"),
    ParseError);
}

TEST_CASE("time windows include the start and exclude the end")
{
  Timestamp start = parse_timestamp("2021-12-22 15:00:00");
  Timestamp end = parse_timestamp("2021-12-22 15:40:00");
  Condition window = Condition::window(start, end);
  CHECK(!evaluate_condition(window, start - 1));
  CHECK(evaluate_condition(window, start));
  CHECK(evaluate_condition(window, end - 1));
  CHECK(!evaluate_condition(window, end));
  CHECK(!evaluate_condition(window, end + 1));
  CHECK(evaluate_condition(Condition::none(), 0));
  CHECK(evaluate_condition(Condition::none(), end + 1000000));
}

TEST_CASE("condition round trip and evaluation over random windows")
{
  test::Rng rng(7002);
  for (int i = 0; i < 500; ++i)
  {
    Timestamp start =
      std::uniform_int_distribution<Timestamp>(0, 4'000'000'000)(rng);
    Timestamp end =
      start + std::uniform_int_distribution<Timestamp>(1, 100'000)(rng);
    Condition window = Condition::window(start, end);
    CHECK(decode_condition(encode_condition(window)) == window);

    Timestamp probe = start +
      std::uniform_int_distribution<Timestamp>(-50'000, 150'000)(rng);
    CHECK(
      evaluate_condition(window, probe) == (probe >= start && probe < end));
  }
}

TEST_CASE("permission atoms expand one operation each")
{
  Permission p{
    "Answer1-DB",
    {Operation::read, Operation::write},
    Condition::none()};
  PermissionAtomSet atoms = atoms_of({p});
  REQUIRE(atoms.size() == 2);
  CHECK(atoms.count({"Answer1-DB", Operation::read, "null"}) == 1);
  CHECK(atoms.count({"Answer1-DB", Operation::write, "null"}) == 1);

  // Duplicate object entries collapse into the same atoms.
  PermissionAtomSet again = atoms_of({p, p});
  CHECK(again == atoms);
}

TEST_CASE("MER set validation")
{
  CHECK_NOTHROW(validate_mer_set({{"A", "B"}, 2, MerKind::Static}));
  CHECK_NOTHROW(validate_mer_set({{"A", "B", "C"}, 3, MerKind::Dynamic}));
  CHECK_THROWS_AS(validate_mer_set({{"A"}, 2, MerKind::Static}), Error);
  CHECK_THROWS_AS(validate_mer_set({{"A", "A"}, 2, MerKind::Static}), Error);
  CHECK_THROWS_AS(validate_mer_set({{"A", ""}, 2, MerKind::Static}), Error);
  CHECK_THROWS_AS(validate_mer_set({{"A", "B"}, 1, MerKind::Static}), Error);
  CHECK_THROWS_AS(validate_mer_set({{"A", "B"}, 3, MerKind::Static}), Error);
}

TEST_CASE("MER set JSON uses the compact field names")
{
  MerSet set{{"Reviewer", "Student"}, 2, MerKind::Static};
  json j = set;
  CHECK(j == json{
    {"roles", {"Reviewer", "Student"}},
    {"k", 2},
    {"kind", "Static"}});
  CHECK(j.get<MerSet>() == set);
}

TEST_CASE("decision JSON carries the reason only when denied")
{
  json allowed = Decision::allow();
  CHECK(allowed == json{{"result", "Allowed"}});
  json denied = Decision::deny(DenialReason::SsodViolation);
  CHECK(denied == json{{"result", "Denied"}, {"reason", "SsodViolation"}});
  CHECK(denied.get<Decision>() == Decision::deny(DenialReason::SsodViolation));
}

TEST_CASE("audit events round trip through JSON")
{
  AccessRequestEvent event{
    "pk1",
    "2021-12-22 15:10:00",
    "Answer1-DB",
    "Student",
    "Write",
    Decision::deny(DenialReason::ConditionUnsatisfied)};
  json j = event;
  CHECK(j.value("result", "") == "Denied");
  CHECK(j.value("reason", "") == "ConditionUnsatisfied");
  CHECK(j.get<AccessRequestEvent>() == event);

  RoleRequestEvent role_event{
    "pk2", "2021-12-22 15:11:00", "Student", Decision::allow()};
  json k = role_event;
  CHECK(k.value("result", "") == "Allowed");
  CHECK(!k.contains("reason"));
  CHECK(k.get<RoleRequestEvent>() == role_event);
}

TEST_CASE("role JSON round trip")
{
  Role role{
    "Student",
    2400,
    {"Helper"},
    {{"Problem1-DB", {Operation::read}, Condition::none()},
     {"Answer1-DB",
      {Operation::write},
      Condition::window(
        parse_timestamp("2021-12-22 15:00:00"),
        parse_timestamp("2021-12-22 15:40:00"))}}};
  json j = role;
  CHECK(j.get<Role>() == role);
}
