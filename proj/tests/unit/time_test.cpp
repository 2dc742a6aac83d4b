// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/errors.hpp"
#include "rolechain/time.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace rolechain;

TEST_CASE("timestamp formatting")
{
  CHECK(format_timestamp(0) == "1970-01-01 00:00:00");
  CHECK(format_timestamp(1640185200) == "2021-12-22 15:00:00");
  CHECK(format_timestamp(951827696) == "2000-02-29 12:34:56");
}

TEST_CASE("timestamp parsing accepts the canonical shape only")
{
  CHECK(parse_timestamp("1970-01-01 00:00:00") == 0);
  CHECK(parse_timestamp("2021-12-22 15:00:00") == 1640185200);

  CHECK_THROWS_AS(parse_timestamp(""), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-22"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-22T15:00:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-22 15:00:00 "), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-22 15:00:0x"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-13-01 00:00:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-00-01 00:00:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-32 00:00:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-22 24:00:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-22 15:60:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-12-22 15:00:61"), ParseError);
}

TEST_CASE("timestamp parsing rejects nonexistent calendar dates")
{
  CHECK_THROWS_AS(parse_timestamp("2021-02-29 00:00:00"), ParseError);
  CHECK_THROWS_AS(parse_timestamp("2021-04-31 00:00:00"), ParseError);
  CHECK(parse_timestamp("2020-02-29 00:00:00") == 1582934400);
}

TEST_CASE("timestamp round trip over random instants")
{
  test::Rng rng(7001);
  for (int i = 0; i < 2000; ++i)
  {
    Timestamp t = std::uniform_int_distribution<Timestamp>(
      0, Timestamp{1} << 33)(rng);
    std::string text = format_timestamp(t);
    CHECK(text.size() == 19);
    CHECK(parse_timestamp(text) == t);
  }
}

TEST_CASE("simulated clock")
{
  SimulatedClock clock(100);
  CHECK(clock.now() == 100);
  clock.advance(50);
  CHECK(clock.now() == 150);
  clock.set(10);
  CHECK(clock.now() == 10);
}
