// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/time.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rolechain
{
  // Ed25519 keys, hex encoded. The 32-byte public key doubles as the user
  // identifier everywhere in the system.
  struct KeyPair
  {
    std::string public_key_hex; // 64 hex chars
    std::string secret_key_hex; // 128 hex chars
  };

  KeyPair generate_keypair();
  KeyPair keypair_from_seed(const std::array<std::uint8_t, 32>& seed);

  // True iff the string is a plausible user id: 64 lowercase-insensitive
  // hex characters.
  bool is_pubkey_hex(const std::string& text);

  std::string sign_hex(
    const std::string& secret_key_hex, const void* message, std::size_t size);

  // False for malformed keys or signatures as well as for verification
  // failures; never throws.
  bool verify_signature(
    const std::string& public_key_hex,
    const void* message,
    std::size_t size,
    const std::string& signature_hex);

  // Single-use challenges for proof of key ownership. A challenge is
  // consumed by its first verification attempt, successful or not, so a
  // captured (challenge, signature) pair cannot be replayed.
  class ChallengeStore
  {
  public:
    static constexpr Duration default_ttl_seconds = 60;
    static constexpr std::size_t nonce_bytes = 32;

    explicit ChallengeStore(
      ClockPtr clock, Duration ttl_seconds = default_ttl_seconds);

    struct Issued
    {
      std::string challenge_id;
      std::string nonce_hex;
    };

    Issued issue();

    enum class VerifyStatus
    {
      ok,
      unknown, // never issued, already consumed, or swept
      expired,
      bad_signature
    };

    // Looks up and consumes the challenge, then checks the signature over
    // the nonce bytes against the given public key.
    VerifyStatus verify_and_consume(
      const std::string& challenge_id,
      const std::string& public_key_hex,
      const std::string& signature_hex);

    Duration ttl_seconds() const
    {
      return ttl_;
    }

    std::size_t pending() const;

  private:
    struct Entry
    {
      std::vector<std::uint8_t> nonce;
      Timestamp issued_at;
    };

    void sweep_expired_locked(Timestamp now);

    ClockPtr clock_;
    Duration ttl_;
    mutable std::mutex mu_;
    std::map<std::string, Entry> entries_;
  };
}
