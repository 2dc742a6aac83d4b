// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/auth.hpp"

#include "rolechain/errors.hpp"
#include "rolechain/hex.hpp"

#include <sodium.h>

namespace rolechain
{
  namespace
  {
    void init_sodium()
    {
      static const int rc = sodium_init();
      if (rc < 0)
        throw Error(Errc::io_error, "libsodium initialization failed");
    }
  }

  KeyPair generate_keypair()
  {
    init_sodium();
    unsigned char pk[crypto_sign_PUBLICKEYBYTES];
    unsigned char sk[crypto_sign_SECRETKEYBYTES];
    crypto_sign_keypair(pk, sk);
    return {to_hex(pk, sizeof(pk)), to_hex(sk, sizeof(sk))};
  }

  KeyPair keypair_from_seed(const std::array<std::uint8_t, 32>& seed)
  {
    init_sodium();
    static_assert(crypto_sign_SEEDBYTES == 32);
    unsigned char pk[crypto_sign_PUBLICKEYBYTES];
    unsigned char sk[crypto_sign_SECRETKEYBYTES];
    crypto_sign_seed_keypair(pk, sk, seed.data());
    return {to_hex(pk, sizeof(pk)), to_hex(sk, sizeof(sk))};
  }

  bool is_pubkey_hex(const std::string& text)
  {
    return text.size() == crypto_sign_PUBLICKEYBYTES * 2 && is_hex(text);
  }

  std::string sign_hex(
    const std::string& secret_key_hex, const void* message, std::size_t size)
  {
    init_sodium();
    std::vector<std::uint8_t> sk;
    try
    {
      sk = from_hex(secret_key_hex);
    }
    catch (const Error&)
    {
      throw Error(Errc::invalid_argument, "malformed secret key");
    }
    if (sk.size() != crypto_sign_SECRETKEYBYTES)
      throw Error(Errc::invalid_argument, "malformed secret key");

    unsigned char sig[crypto_sign_BYTES];
    crypto_sign_detached(
      sig,
      nullptr,
      static_cast<const unsigned char*>(message),
      size,
      sk.data());
    return to_hex(sig, sizeof(sig));
  }

  bool verify_signature(
    const std::string& public_key_hex,
    const void* message,
    std::size_t size,
    const std::string& signature_hex)
  {
    init_sodium();
    std::vector<std::uint8_t> pk, sig;
    try
    {
      pk = from_hex(public_key_hex);
      sig = from_hex(signature_hex);
    }
    catch (const Error&)
    {
      return false;
    }
    if (
      pk.size() != crypto_sign_PUBLICKEYBYTES ||
      sig.size() != crypto_sign_BYTES)
      return false;
    return crypto_sign_verify_detached(
             sig.data(),
             static_cast<const unsigned char*>(message),
             size,
             pk.data()) == 0;
  }

  ChallengeStore::ChallengeStore(ClockPtr clock, Duration ttl_seconds) :
    clock_(std::move(clock)),
    ttl_(ttl_seconds)
  {
    if (!clock_)
      throw Error(Errc::config_error, "challenge store needs a clock");
    if (ttl_ <= 0)
      throw Error(Errc::config_error, "challenge ttl must be positive");
    init_sodium();
  }

  ChallengeStore::Issued ChallengeStore::issue()
  {
    unsigned char id[16];
    randombytes_buf(id, sizeof(id));
    std::vector<std::uint8_t> nonce(nonce_bytes);
    randombytes_buf(nonce.data(), nonce.size());

    Issued issued{to_hex(id, sizeof(id)), to_hex(nonce)};
    Timestamp now = clock_->now();

    std::lock_guard<std::mutex> guard(mu_);
    if (entries_.size() >= 4096)
      sweep_expired_locked(now);
    entries_[issued.challenge_id] = {std::move(nonce), now};
    return issued;
  }

  ChallengeStore::VerifyStatus ChallengeStore::verify_and_consume(
    const std::string& challenge_id,
    const std::string& public_key_hex,
    const std::string& signature_hex)
  {
    Entry entry;
    {
      std::lock_guard<std::mutex> guard(mu_);
      auto it = entries_.find(challenge_id);
      if (it == entries_.end())
        return VerifyStatus::unknown;
      entry = std::move(it->second);
      entries_.erase(it);
    }

    if (clock_->now() >= entry.issued_at + ttl_)
      return VerifyStatus::expired;
    if (!verify_signature(
          public_key_hex, entry.nonce.data(), entry.nonce.size(),
          signature_hex))
      return VerifyStatus::bad_signature;
    return VerifyStatus::ok;
  }

  std::size_t ChallengeStore::pending() const
  {
    std::lock_guard<std::mutex> guard(mu_);
    return entries_.size();
  }

  void ChallengeStore::sweep_expired_locked(Timestamp now)
  {
    for (auto it = entries_.begin(); it != entries_.end();)
    {
      if (now >= it->second.issued_at + ttl_)
        it = entries_.erase(it);
      else
        ++it;
    }
  }
}
