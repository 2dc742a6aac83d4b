// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

namespace rolechain
{
  // Seconds since the Unix epoch, UTC. All policy semantics run at second
  // resolution; sub-second precision is never stored.
  using Timestamp = std::int64_t;
  using Duration = std::int64_t;

  // Format as "YYYY-MM-DD HH:MM:SS" (UTC).
  std::string format_timestamp(Timestamp t);

  // Parse "YYYY-MM-DD HH:MM:SS" (UTC). Throws ParseError on any deviation
  // from that exact shape or on out-of-range fields.
  Timestamp parse_timestamp(const std::string& text);

  class Clock
  {
  public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
  };

  class SystemClock final : public Clock
  {
  public:
    Timestamp now() const override;
  };

  // Deterministic clock for tests and simulations. Thread safe.
  class SimulatedClock final : public Clock
  {
  public:
    explicit SimulatedClock(Timestamp start = 0);
    Timestamp now() const override;
    void set(Timestamp t);
    void advance(Duration seconds);

  private:
    std::atomic<Timestamp> current_;
  };

  using ClockPtr = std::shared_ptr<Clock>;
}
