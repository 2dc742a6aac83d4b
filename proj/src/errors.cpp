// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/errors.hpp"

namespace rolechain
{
  const char* to_string(Errc code)
  {
    switch (code)
    {
      case Errc::unauthorized_caller:
        return "unauthorized-caller";
      case Errc::unknown_role:
        return "unknown-role";
      case Errc::duplicate_role:
        return "duplicate-role";
      case Errc::already_assigned:
        return "already-assigned";
      case Errc::not_assigned:
        return "not-assigned";
      case Errc::invalid_permission:
        return "invalid-permission";
      case Errc::invalid_valid_period:
        return "invalid-valid-period";
      case Errc::invalid_argument:
        return "invalid-argument";
      case Errc::delegator_lacks_role:
        return "delegator-lacks-role";
      case Errc::self_delegation:
        return "self-delegation";
      case Errc::sod_violation:
        return "sod-violation";
      case Errc::cycle_detected:
        return "cycle-detected";
      case Errc::encoding_error:
        return "encoding-error";
      case Errc::chain_corrupt:
        return "chain-corrupt";
      case Errc::ledger_closed:
        return "ledger-closed";
      case Errc::parse_error:
        return "parse-error";
      case Errc::schema_violation:
        return "schema-violation";
      case Errc::io_error:
        return "io-error";
      case Errc::config_error:
        return "config-error";
    }
    return "unknown";
  }

  Error::Error(Errc code, const std::string& message) :
    std::runtime_error(message),
    code_(code)
  {}

  ParseError::ParseError(
    Errc code,
    const std::string& message,
    std::size_t line,
    const std::string& element) :
    Error(
      code,
      line == 0 ? message : "line " + std::to_string(line) + ": " + message),
    line_(line),
    element_(element)
  {}

  ChainCorruptError::ChainCorruptError(
    const std::string& message, std::uint64_t first_bad_seq) :
    Error(
      Errc::chain_corrupt,
      message + " (first bad seq " + std::to_string(first_bad_seq) + ")"),
    first_bad_seq_(first_bad_seq)
  {}
}
