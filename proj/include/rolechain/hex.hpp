// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/errors.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rolechain
{
  inline std::string to_hex(const std::uint8_t* data, std::size_t size)
  {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(size * 2);
    for (std::size_t i = 0; i < size; ++i)
    {
      out.push_back(digits[data[i] >> 4]);
      out.push_back(digits[data[i] & 0x0f]);
    }
    return out;
  }

  template <typename Container>
  std::string to_hex(const Container& c)
  {
    return to_hex(
      reinterpret_cast<const std::uint8_t*>(c.data()), std::size(c));
  }

  inline int hex_nibble(char c)
  {
    if (c >= '0' && c <= '9')
      return c - '0';
    if (c >= 'a' && c <= 'f')
      return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
      return c - 'A' + 10;
    return -1;
  }

  inline std::vector<std::uint8_t> from_hex(const std::string& text)
  {
    if (text.size() % 2 != 0)
      throw Error(Errc::encoding_error, "hex string has odd length");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2)
    {
      int hi = hex_nibble(text[i]);
      int lo = hex_nibble(text[i + 1]);
      if (hi < 0 || lo < 0)
        throw Error(Errc::encoding_error, "invalid hex digit");
      out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
  }

  inline bool is_hex(const std::string& text)
  {
    for (char c : text)
      if (hex_nibble(c) < 0)
        return false;
    return text.size() % 2 == 0;
  }
}
