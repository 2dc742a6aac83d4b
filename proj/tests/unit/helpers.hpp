// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/time.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <unistd.h>

namespace rolechain::test
{
  inline std::shared_ptr<SimulatedClock> make_clock(
    const std::string& at = "2021-12-22 09:00:00")
  {
    return std::make_shared<SimulatedClock>(parse_timestamp(at));
  }

  // Unique scratch file under the system temp dir, removed on destruction.
  class TempFile
  {
  public:
    explicit TempFile(const std::string& tag)
    {
      static std::atomic<unsigned> counter{0};
      path_ = std::filesystem::temp_directory_path() /
        ("rolechain_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
         std::to_string(counter.fetch_add(1)));
      std::filesystem::remove(path_);
    }

    ~TempFile()
    {
      std::error_code ec;
      std::filesystem::remove(path_, ec);
    }

    const std::filesystem::path& path() const
    {
      return path_;
    }

  private:
    std::filesystem::path path_;
  };

  using Rng = std::mt19937;

  inline int pick(Rng& rng, int lo, int hi) // inclusive bounds
  {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  }

  inline bool chance(Rng& rng, double p)
  {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  }
}
