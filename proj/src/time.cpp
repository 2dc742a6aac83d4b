// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/time.hpp"

#include "rolechain/errors.hpp"

#include <cstdio>
#include <ctime>

namespace rolechain
{
  std::string format_timestamp(Timestamp t)
  {
    std::time_t tt = static_cast<std::time_t>(t);
    std::tm tm{};
    if (gmtime_r(&tt, &tm) == nullptr)
      throw Error(Errc::invalid_argument, "timestamp out of range");
    char buf[64]; // large enough for any year gmtime_r can produce
    std::snprintf(
      buf,
      sizeof(buf),
      "%04d-%02d-%02d %02d:%02d:%02d",
      tm.tm_year + 1900,
      tm.tm_mon + 1,
      tm.tm_mday,
      tm.tm_hour,
      tm.tm_min,
      tm.tm_sec);
    return buf;
  }

  Timestamp parse_timestamp(const std::string& text)
  {
    auto fail = [&](const char* why) -> Timestamp {
      throw ParseError(
        Errc::parse_error,
        std::string("invalid timestamp \"") + text + "\": " + why);
    };

    if (text.size() != 19)
      return fail("expected YYYY-MM-DD HH:MM:SS");
    static const char* shape = "dddd-dd-dd dd:dd:dd";
    for (std::size_t i = 0; i < 19; ++i)
    {
      if (shape[i] == 'd')
      {
        if (text[i] < '0' || text[i] > '9')
          return fail("expected digit");
      }
      else if (text[i] != shape[i])
      {
        return fail("expected separator");
      }
    }

    auto num = [&](std::size_t pos, std::size_t len) {
      int v = 0;
      for (std::size_t i = 0; i < len; ++i)
        v = v * 10 + (text[pos + i] - '0');
      return v;
    };

    std::tm tm{};
    tm.tm_year = num(0, 4) - 1900;
    tm.tm_mon = num(5, 2) - 1;
    tm.tm_mday = num(8, 2);
    tm.tm_hour = num(11, 2);
    tm.tm_min = num(14, 2);
    tm.tm_sec = num(17, 2);

    if (tm.tm_mon < 0 || tm.tm_mon > 11)
      return fail("month out of range");
    if (tm.tm_mday < 1 || tm.tm_mday > 31)
      return fail("day out of range");
    if (tm.tm_hour > 23 || tm.tm_min > 59 || tm.tm_sec > 59)
      return fail("time out of range");

    std::tm probe = tm;
    std::time_t t = timegm(&probe);
    if (t == static_cast<std::time_t>(-1))
      return fail("unrepresentable");
    // timegm normalizes; a changed day means the input named a date that
    // does not exist (e.g. February 30th).
    if (probe.tm_mday != tm.tm_mday || probe.tm_mon != tm.tm_mon)
      return fail("no such calendar date");
    return static_cast<Timestamp>(t);
  }

  Timestamp SystemClock::now() const
  {
    return static_cast<Timestamp>(std::time(nullptr));
  }

  SimulatedClock::SimulatedClock(Timestamp start) : current_(start) {}

  Timestamp SimulatedClock::now() const
  {
    return current_.load(std::memory_order_relaxed);
  }

  void SimulatedClock::set(Timestamp t)
  {
    current_.store(t, std::memory_order_relaxed);
  }

  void SimulatedClock::advance(Duration seconds)
  {
    current_.fetch_add(seconds, std::memory_order_relaxed);
  }
}
