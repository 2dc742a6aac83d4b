// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rolechain
{
  enum class Errc
  {
    unauthorized_caller,
    unknown_role,
    duplicate_role,
    already_assigned,
    not_assigned,
    invalid_permission,
    invalid_valid_period,
    invalid_argument,
    delegator_lacks_role,
    self_delegation,
    sod_violation,
    cycle_detected,
    encoding_error,
    chain_corrupt,
    ledger_closed,
    parse_error,
    schema_violation,
    io_error,
    config_error,
  };

  const char* to_string(Errc code);

  class Error : public std::runtime_error
  {
  public:
    Error(Errc code, const std::string& message);
    Errc code() const { return code_; }

  private:
    Errc code_;
  };

  // Parse failure in XML, condition strings or timestamps. Lines are
  // 1-based; line 0 means "not line-addressable" (e.g. a bare timestamp).
  class ParseError : public Error
  {
  public:
    ParseError(Errc code,
               const std::string& message,
               std::size_t line = 0,
               const std::string& element = "");
    std::size_t line() const { return line_; }
    const std::string& element() const { return element_; }

  private:
    std::size_t line_;
    std::string element_;
  };

  // Ledger integrity failure, carrying the first offending sequence number.
  class ChainCorruptError : public Error
  {
  public:
    ChainCorruptError(const std::string& message, std::uint64_t first_bad_seq);
    std::uint64_t first_bad_seq() const { return first_bad_seq_; }

  private:
    std::uint64_t first_bad_seq_;
  };
}
