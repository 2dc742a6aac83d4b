// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/errors.hpp"
#include "rolechain/time.hpp"

#include <array>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace rolechain
{
  using Digest = std::array<std::uint8_t, 32>;

  Digest sha256(const void* data, std::size_t size);
  std::string digest_hex(const Digest& d);

  // One committed transaction. The payload is the exact byte string that
  // was hashed and persisted; for transactions produced by this codebase it
  // is a compact JSON object with sorted keys.
  struct LedgerTransaction
  {
    std::uint64_t seq = 0;
    Timestamp timestamp = 0;
    std::string invoker;
    std::string method;
    std::string payload;
    Digest prev_hash{};
    Digest tx_hash{};
  };

  void to_json(nlohmann::json& j, const LedgerTransaction& tx);

  struct VerificationReport
  {
    bool ok = false;
    std::optional<std::uint64_t> first_bad_seq;
    std::uint64_t tx_count = 0;
    std::string message;
  };

  struct HistoryFilter
  {
    std::optional<std::string> invoker;
    std::optional<std::string> method;
    std::optional<std::string> subject_pubkey;
    std::optional<Timestamp> from_time;
    std::optional<Timestamp> to_time;
  };

  struct LedgerOptions
  {
    // 0 flushes synchronously inside append(). A positive value batches
    // disk flushes: each transaction becomes durable no later than this
    // many milliseconds after submission, and wait_durable() blocks until
    // then. This mirrors the ordering/batch interval of a permissioned
    // blockchain and bounds the cost of flushing under bursts.
    int commit_interval_ms = 0;
    bool fsync_on_flush = false;
  };

  // Append-only hash-chained transaction log with a derived key-value
  // world state. Thread safe. Either purely in-memory (tests) or backed by
  // a single file.
  class Ledger
  {
  public:
    explicit Ledger(ClockPtr clock, LedgerOptions options = {});
    ~Ledger();

    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    // Loads (or creates) a ledger file. A partial trailing frame, as left
    // by a crash mid-write, is truncated away and reported through
    // open_warnings(). Any other integrity failure throws
    // ChainCorruptError naming the first bad sequence number.
    static std::unique_ptr<Ledger> open_file(
      const std::filesystem::path& path,
      ClockPtr clock,
      LedgerOptions options = {});

    struct AppendResult
    {
      std::uint64_t seq;
      Digest tx_hash;
    };

    // Validates, chains and applies the transaction, then persists it.
    // With a commit interval configured the call returns as soon as the
    // transaction is staged; call wait_durable() before acknowledging it
    // to a client. The payload must be a JSON object; its optional
    // "writes" array drives the world state:
    //   {"key": "...", "value": <json>} upserts, {"key": "...",
    //   "delete": true} removes.
    AppendResult append(
      const std::string& invoker,
      const std::string& method,
      const nlohmann::json& payload);

    // Same, but takes the payload as raw bytes and stores them verbatim.
    // Throws Error(encoding_error) if they are not a JSON object or the
    // writes are malformed.
    AppendResult append_raw(
      const std::string& invoker,
      const std::string& method,
      const std::string& payload_bytes);

    // Blocks until the given transaction has been flushed to disk (no-op
    // for in-memory ledgers and with commit_interval_ms == 0).
    void wait_durable(std::uint64_t seq);

    std::uint64_t size() const;
    LedgerTransaction transaction(std::uint64_t seq) const;
    std::vector<LedgerTransaction> transactions() const;
    std::vector<LedgerTransaction> query_history(const HistoryFilter& f) const;

    std::optional<nlohmann::json> state_get(const std::string& key) const;
    std::map<std::string, nlohmann::json> state_snapshot() const;

    // Rebuilds the world state by folding every stored payload's writes,
    // ignoring the live map. Deterministic for a given transaction list.
    std::map<std::string, nlohmann::json> replay() const;

    // Recomputes the hash chain over the in-memory transactions.
    VerificationReport verify_chain() const;
    static VerificationReport verify_transactions(
      const std::vector<LedgerTransaction>& txs);

    const std::vector<std::string>& open_warnings() const;

    // Flushes everything pending and stops accepting appends.
    void close();

  private:
    struct PendingFlush
    {
      std::uint64_t seq;
      std::string bytes;
      std::chrono::steady_clock::time_point deadline;
    };

    AppendResult append_locked(
      const std::string& invoker,
      const std::string& method,
      std::string payload_bytes,
      const nlohmann::json& payload);
    void persist(std::uint64_t seq, std::string frame);
    void flusher_main();
    void write_file(const std::string& bytes);

    ClockPtr clock_;
    LedgerOptions options_;
    int fd_ = -1;

    mutable std::mutex state_mu_;
    std::vector<LedgerTransaction> txs_;
    std::map<std::string, nlohmann::json> state_;
    Digest last_hash_{};
    bool closed_ = false;
    std::vector<std::string> open_warnings_;

    std::mutex flush_mu_;
    std::condition_variable flush_cv_;
    std::condition_variable durable_cv_;
    std::deque<PendingFlush> pending_;
    std::uint64_t durable_seq_ = 0; // seq + 1 of the last flushed tx
    bool stop_flusher_ = false;
    std::thread flusher_;
  };

  // Strict structural and cryptographic audit of a ledger file. Never
  // modifies the file; a partial trailing frame counts as corruption.
  VerificationReport verify_ledger_file(const std::filesystem::path& path);
}
