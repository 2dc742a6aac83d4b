// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/ledger.hpp"

#include "rolechain/hex.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fcntl.h>
#include <sodium.h>
#include <unistd.h>

namespace rolechain
{
  namespace
  {
    constexpr char ledger_magic[] = {'R', 'B', 'S', 'L', '1'};
    constexpr std::size_t magic_size = sizeof(ledger_magic);

    void init_sodium()
    {
      static const int rc = sodium_init();
      if (rc < 0)
        throw Error(Errc::io_error, "libsodium initialization failed");
    }

    void put_u32(std::string& out, std::uint32_t v)
    {
      out.push_back(static_cast<char>((v >> 24) & 0xff));
      out.push_back(static_cast<char>((v >> 16) & 0xff));
      out.push_back(static_cast<char>((v >> 8) & 0xff));
      out.push_back(static_cast<char>(v & 0xff));
    }

    void put_u64(std::string& out, std::uint64_t v)
    {
      for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<char>((v >> shift) & 0xff));
    }

    void put_field(std::string& out, const void* data, std::size_t size)
    {
      put_u32(out, static_cast<std::uint32_t>(size));
      out.append(static_cast<const char*>(data), size);
    }

    void put_field(std::string& out, const std::string& s)
    {
      put_field(out, s.data(), s.size());
    }

    struct Reader
    {
      const std::uint8_t* p;
      std::size_t size;
      std::size_t off = 0;

      std::uint32_t u32()
      {
        if (size - off < 4)
          throw Error(Errc::encoding_error, "record truncated");
        std::uint32_t v = (std::uint32_t(p[off]) << 24) |
          (std::uint32_t(p[off + 1]) << 16) |
          (std::uint32_t(p[off + 2]) << 8) | std::uint32_t(p[off + 3]);
        off += 4;
        return v;
      }

      std::string field()
      {
        std::uint32_t len = u32();
        if (size - off < len)
          throw Error(Errc::encoding_error, "field overruns record");
        std::string out(reinterpret_cast<const char*>(p + off), len);
        off += len;
        return out;
      }
    };

    std::uint64_t u64_of(const std::string& field)
    {
      if (field.size() != 8)
        throw Error(Errc::encoding_error, "expected 8-byte integer field");
      std::uint64_t v = 0;
      for (unsigned char c : field)
        v = (v << 8) | c;
      return v;
    }

    std::string u64_field(std::uint64_t v)
    {
      std::string s;
      put_u64(s, v);
      return s;
    }

    Digest compute_tx_hash(const LedgerTransaction& tx)
    {
      std::string input(tx.prev_hash.begin(), tx.prev_hash.end());
      put_field(input, u64_field(tx.seq));
      put_field(input, u64_field(static_cast<std::uint64_t>(tx.timestamp)));
      put_field(input, tx.invoker);
      put_field(input, tx.method);
      put_field(input, tx.payload);
      return sha256(input.data(), input.size());
    }

    std::string encode_record(const LedgerTransaction& tx)
    {
      std::string r;
      put_field(r, u64_field(tx.seq));
      put_field(r, u64_field(static_cast<std::uint64_t>(tx.timestamp)));
      put_field(r, tx.invoker);
      put_field(r, tx.method);
      put_field(r, tx.payload);
      put_field(r, tx.prev_hash.data(), tx.prev_hash.size());
      put_field(r, tx.tx_hash.data(), tx.tx_hash.size());
      return r;
    }

    std::string frame_of(const std::string& record)
    {
      std::string f;
      put_u32(f, static_cast<std::uint32_t>(record.size()));
      f += record;
      return f;
    }

    LedgerTransaction decode_record(const std::uint8_t* data, std::size_t size)
    {
      Reader r{data, size};
      LedgerTransaction tx;
      tx.seq = u64_of(r.field());
      tx.timestamp = static_cast<Timestamp>(u64_of(r.field()));
      tx.invoker = r.field();
      tx.method = r.field();
      tx.payload = r.field();
      std::string prev = r.field();
      std::string hash = r.field();
      if (prev.size() != tx.prev_hash.size() ||
          hash.size() != tx.tx_hash.size())
        throw Error(Errc::encoding_error, "bad digest length");
      std::memcpy(tx.prev_hash.data(), prev.data(), prev.size());
      std::memcpy(tx.tx_hash.data(), hash.data(), hash.size());
      if (r.off != size)
        throw Error(Errc::encoding_error, "trailing bytes in record");
      return tx;
    }

    void validate_payload(const nlohmann::json& payload)
    {
      if (!payload.is_object())
        throw Error(Errc::encoding_error, "payload must be a JSON object");
      auto it = payload.find("writes");
      if (it == payload.end())
        return;
      if (!it->is_array())
        throw Error(Errc::encoding_error, "payload writes must be an array");
      for (const auto& w : *it)
      {
        if (!w.is_object() || !w.contains("key") || !w.at("key").is_string())
          throw Error(
            Errc::encoding_error, "write entry needs a string \"key\"");
        bool erase = w.value("delete", false);
        if (!erase && !w.contains("value"))
          throw Error(
            Errc::encoding_error,
            "write entry needs \"value\" or \"delete\": true");
      }
    }

    void apply_writes(
      std::map<std::string, nlohmann::json>& state,
      const nlohmann::json& payload)
    {
      auto it = payload.find("writes");
      if (it == payload.end())
        return;
      for (const auto& w : *it)
      {
        const std::string key = w.at("key").get<std::string>();
        if (w.value("delete", false))
          state.erase(key);
        else
          state[key] = w.at("value");
      }
    }
  }

  Digest sha256(const void* data, std::size_t size)
  {
    init_sodium();
    Digest d;
    crypto_hash_sha256(
      d.data(), static_cast<const unsigned char*>(data), size);
    return d;
  }

  std::string digest_hex(const Digest& d)
  {
    return to_hex(d.data(), d.size());
  }

  void to_json(nlohmann::json& j, const LedgerTransaction& tx)
  {
    nlohmann::json payload =
      nlohmann::json::parse(tx.payload, nullptr, false);
    j = nlohmann::json{
      {"seq", tx.seq},
      {"timestamp", format_timestamp(tx.timestamp)},
      {"invoker", tx.invoker},
      {"method", tx.method},
      {"payload", payload.is_discarded() ? nlohmann::json(tx.payload) : payload},
      {"prev_hash", digest_hex(tx.prev_hash)},
      {"tx_hash", digest_hex(tx.tx_hash)}};
  }

  Ledger::Ledger(ClockPtr clock, LedgerOptions options) :
    clock_(std::move(clock)),
    options_(options)
  {
    if (!clock_)
      throw Error(Errc::config_error, "ledger needs a clock");
  }

  Ledger::~Ledger()
  {
    try
    {
      close();
    }
    catch (...)
    {
    }
  }

  std::unique_ptr<Ledger> Ledger::open_file(
    const std::filesystem::path& path, ClockPtr clock, LedgerOptions options)
  {
    std::unique_ptr<Ledger> ledger(new Ledger(std::move(clock), options));

    int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND, 0644);
    if (fd < 0)
      throw Error(
        Errc::io_error,
        "cannot open ledger file " + path.string() + ": " +
          std::strerror(errno));
    ledger->fd_ = fd;

    std::string buf;
    {
      char chunk[65536];
      ssize_t n;
      off_t pos = 0;
      while ((n = ::pread(fd, chunk, sizeof(chunk), pos)) > 0)
      {
        buf.append(chunk, static_cast<std::size_t>(n));
        pos += n;
      }
      if (n < 0)
        throw Error(Errc::io_error, "cannot read ledger file");
    }

    if (buf.empty())
    {
      ledger->write_file(std::string(ledger_magic, magic_size));
      if (options.fsync_on_flush)
        ::fsync(fd);
    }
    else
    {
      if (
        buf.size() < magic_size ||
        std::memcmp(buf.data(), ledger_magic, magic_size) != 0)
        throw ChainCorruptError("ledger file has a bad magic header", 0);

      std::size_t off = magic_size;
      std::uint64_t index = 0;
      while (off < buf.size())
      {
        bool partial = false;
        std::uint32_t len = 0;
        if (buf.size() - off < 4)
        {
          partial = true;
        }
        else
        {
          len = (std::uint32_t(std::uint8_t(buf[off])) << 24) |
            (std::uint32_t(std::uint8_t(buf[off + 1])) << 16) |
            (std::uint32_t(std::uint8_t(buf[off + 2])) << 8) |
            std::uint32_t(std::uint8_t(buf[off + 3]));
          if (buf.size() - off - 4 < len)
            partial = true;
        }
        if (partial)
        {
          // A crash mid-append leaves exactly this shape. Drop it.
          if (::ftruncate(fd, static_cast<off_t>(off)) != 0)
            throw Error(Errc::io_error, "cannot truncate partial frame");
          ledger->open_warnings_.push_back(
            "dropped partial trailing frame at transaction " +
            std::to_string(index));
          break;
        }

        LedgerTransaction tx;
        try
        {
          tx = decode_record(
            reinterpret_cast<const std::uint8_t*>(buf.data()) + off + 4, len);
        }
        catch (const Error& e)
        {
          throw ChainCorruptError(
            std::string("undecodable record: ") + e.what(), index);
        }

        if (tx.seq != index)
          throw ChainCorruptError("sequence number mismatch", index);
        if (tx.prev_hash != ledger->last_hash_)
          throw ChainCorruptError("hash chain broken", index);
        if (compute_tx_hash(tx) != tx.tx_hash)
          throw ChainCorruptError("transaction hash mismatch", index);

        nlohmann::json payload =
          nlohmann::json::parse(tx.payload, nullptr, false);
        if (payload.is_discarded())
          throw ChainCorruptError("payload is not valid JSON", index);
        try
        {
          validate_payload(payload);
        }
        catch (const Error& e)
        {
          throw ChainCorruptError(e.what(), index);
        }
        apply_writes(ledger->state_, payload);

        ledger->last_hash_ = tx.tx_hash;
        ledger->txs_.push_back(std::move(tx));
        off += 4 + len;
        ++index;
      }
    }

    ledger->durable_seq_ = ledger->txs_.size();
    if (options.commit_interval_ms > 0)
      ledger->flusher_ = std::thread(&Ledger::flusher_main, ledger.get());
    return ledger;
  }

  Ledger::AppendResult Ledger::append(
    const std::string& invoker,
    const std::string& method,
    const nlohmann::json& payload)
  {
    validate_payload(payload);
    std::string bytes = payload.dump();
    std::lock_guard<std::mutex> guard(state_mu_);
    return append_locked(invoker, method, std::move(bytes), payload);
  }

  Ledger::AppendResult Ledger::append_raw(
    const std::string& invoker,
    const std::string& method,
    const std::string& payload_bytes)
  {
    nlohmann::json payload =
      nlohmann::json::parse(payload_bytes, nullptr, false);
    if (payload.is_discarded())
      throw Error(Errc::encoding_error, "payload is not valid JSON");
    validate_payload(payload);
    std::lock_guard<std::mutex> guard(state_mu_);
    return append_locked(invoker, method, payload_bytes, payload);
  }

  Ledger::AppendResult Ledger::append_locked(
    const std::string& invoker,
    const std::string& method,
    std::string payload_bytes,
    const nlohmann::json& payload)
  {
    if (closed_)
      throw Error(Errc::ledger_closed, "ledger is closed");
    if (invoker.empty() || method.empty())
      throw Error(Errc::encoding_error, "invoker and method are required");

    LedgerTransaction tx;
    tx.seq = txs_.size();
    tx.timestamp = clock_->now();
    tx.invoker = invoker;
    tx.method = method;
    tx.payload = std::move(payload_bytes);
    tx.prev_hash = last_hash_;
    tx.tx_hash = compute_tx_hash(tx);

    apply_writes(state_, payload);
    last_hash_ = tx.tx_hash;
    std::string frame = frame_of(encode_record(tx));
    AppendResult result{tx.seq, tx.tx_hash};
    txs_.push_back(std::move(tx));
    persist(result.seq, std::move(frame));
    return result;
  }

  void Ledger::persist(std::uint64_t seq, std::string frame)
  {
    if (fd_ < 0)
    {
      std::lock_guard<std::mutex> guard(flush_mu_);
      durable_seq_ = seq + 1;
      return;
    }
    if (options_.commit_interval_ms <= 0)
    {
      write_file(frame);
      if (options_.fsync_on_flush)
        ::fsync(fd_);
      std::lock_guard<std::mutex> guard(flush_mu_);
      durable_seq_ = seq + 1;
      durable_cv_.notify_all();
      return;
    }
    {
      std::lock_guard<std::mutex> guard(flush_mu_);
      pending_.push_back(
        {seq,
         std::move(frame),
         std::chrono::steady_clock::now() +
           std::chrono::milliseconds(options_.commit_interval_ms)});
    }
    flush_cv_.notify_one();
  }

  void Ledger::wait_durable(std::uint64_t seq)
  {
    std::unique_lock<std::mutex> lk(flush_mu_);
    durable_cv_.wait(lk, [&] { return durable_seq_ > seq; });
  }

  void Ledger::flusher_main()
  {
    std::unique_lock<std::mutex> lk(flush_mu_);
    for (;;)
    {
      if (pending_.empty())
      {
        if (stop_flusher_)
          return;
        flush_cv_.wait(
          lk, [&] { return stop_flusher_ || !pending_.empty(); });
        continue;
      }
      if (!stop_flusher_)
      {
        auto deadline = pending_.front().deadline;
        flush_cv_.wait_until(lk, deadline, [&] { return stop_flusher_; });
      }

      auto now = std::chrono::steady_clock::now();
      std::string batch;
      std::uint64_t last = 0;
      bool any = false;
      while (!pending_.empty() &&
             (stop_flusher_ || pending_.front().deadline <= now))
      {
        batch += pending_.front().bytes;
        last = pending_.front().seq;
        pending_.pop_front();
        any = true;
      }
      if (!any)
        continue;

      lk.unlock();
      write_file(batch);
      if (options_.fsync_on_flush)
        ::fsync(fd_);
      lk.lock();
      durable_seq_ = last + 1;
      durable_cv_.notify_all();
    }
  }

  void Ledger::write_file(const std::string& bytes)
  {
    std::size_t off = 0;
    while (off < bytes.size())
    {
      ssize_t n = ::write(fd_, bytes.data() + off, bytes.size() - off);
      if (n < 0)
      {
        if (errno == EINTR)
          continue;
        throw Error(
          Errc::io_error,
          std::string("ledger write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::uint64_t Ledger::size() const
  {
    std::lock_guard<std::mutex> guard(state_mu_);
    return txs_.size();
  }

  LedgerTransaction Ledger::transaction(std::uint64_t seq) const
  {
    std::lock_guard<std::mutex> guard(state_mu_);
    if (seq >= txs_.size())
      throw Error(
        Errc::invalid_argument, "no transaction " + std::to_string(seq));
    return txs_[seq];
  }

  std::vector<LedgerTransaction> Ledger::transactions() const
  {
    std::lock_guard<std::mutex> guard(state_mu_);
    return txs_;
  }

  std::vector<LedgerTransaction> Ledger::query_history(
    const HistoryFilter& f) const
  {
    std::lock_guard<std::mutex> guard(state_mu_);
    std::vector<LedgerTransaction> out;
    for (const auto& tx : txs_)
    {
      if (f.invoker && tx.invoker != *f.invoker)
        continue;
      if (f.method && tx.method != *f.method)
        continue;
      if (f.from_time && tx.timestamp < *f.from_time)
        continue;
      if (f.to_time && tx.timestamp > *f.to_time)
        continue;
      if (f.subject_pubkey)
      {
        nlohmann::json payload =
          nlohmann::json::parse(tx.payload, nullptr, false);
        if (payload.is_discarded() || !payload.contains("args"))
          continue;
        const auto& args = payload.at("args");
        auto matches = [&](const char* field) {
          return args.contains(field) && args.at(field).is_string() &&
            args.at(field).get<std::string>() == *f.subject_pubkey;
        };
        if (
          !matches("user_pubkey") && !matches("delegator_pubkey") &&
          !matches("delegate_pubkey"))
          continue;
      }
      out.push_back(tx);
    }
    return out;
  }

  std::optional<nlohmann::json> Ledger::state_get(const std::string& key) const
  {
    std::lock_guard<std::mutex> guard(state_mu_);
    auto it = state_.find(key);
    if (it == state_.end())
      return std::nullopt;
    return it->second;
  }

  std::map<std::string, nlohmann::json> Ledger::state_snapshot() const
  {
    std::lock_guard<std::mutex> guard(state_mu_);
    return state_;
  }

  std::map<std::string, nlohmann::json> Ledger::replay() const
  {
    std::lock_guard<std::mutex> guard(state_mu_);
    std::map<std::string, nlohmann::json> state;
    for (const auto& tx : txs_)
    {
      nlohmann::json payload =
        nlohmann::json::parse(tx.payload, nullptr, false);
      if (payload.is_discarded())
        throw Error(
          Errc::chain_corrupt,
          "transaction " + std::to_string(tx.seq) + " payload is not JSON");
      apply_writes(state, payload);
    }
    return state;
  }

  VerificationReport Ledger::verify_chain() const
  {
    std::vector<LedgerTransaction> copy;
    {
      std::lock_guard<std::mutex> guard(state_mu_);
      copy = txs_;
    }
    return verify_transactions(copy);
  }

  VerificationReport Ledger::verify_transactions(
    const std::vector<LedgerTransaction>& txs)
  {
    VerificationReport report;
    report.tx_count = txs.size();
    Digest last{};
    for (std::size_t i = 0; i < txs.size(); ++i)
    {
      const auto& tx = txs[i];
      auto fail = [&](const std::string& why) {
        report.ok = false;
        report.first_bad_seq = i;
        report.message =
          "transaction " + std::to_string(i) + ": " + why;
        return report;
      };
      if (tx.seq != i)
        return fail("sequence number mismatch");
      if (tx.prev_hash != last)
        return fail("previous-hash link broken");
      if (compute_tx_hash(tx) != tx.tx_hash)
        return fail("hash mismatch");
      last = tx.tx_hash;
    }
    report.ok = true;
    report.message = "ok";
    return report;
  }

  const std::vector<std::string>& Ledger::open_warnings() const
  {
    return open_warnings_;
  }

  void Ledger::close()
  {
    {
      std::lock_guard<std::mutex> guard(state_mu_);
      if (closed_)
        return;
      closed_ = true;
    }
    if (flusher_.joinable())
    {
      {
        std::lock_guard<std::mutex> guard(flush_mu_);
        stop_flusher_ = true;
      }
      flush_cv_.notify_all();
      flusher_.join();
    }
    if (fd_ >= 0)
    {
      ::fsync(fd_);
      ::close(fd_);
      fd_ = -1;
    }
  }

  VerificationReport verify_ledger_file(const std::filesystem::path& path)
  {
    VerificationReport report;

    std::string buf;
    {
      int fd = ::open(path.c_str(), O_RDONLY);
      if (fd < 0)
      {
        report.ok = false;
        report.message =
          "cannot open " + path.string() + ": " + std::strerror(errno);
        return report;
      }
      char chunk[65536];
      ssize_t n;
      off_t pos = 0;
      while ((n = ::pread(fd, chunk, sizeof(chunk), pos)) > 0)
      {
        buf.append(chunk, static_cast<std::size_t>(n));
        pos += n;
      }
      ::close(fd);
      if (n < 0)
      {
        report.ok = false;
        report.message = "cannot read " + path.string();
        return report;
      }
    }

    auto fail = [&](std::uint64_t index, const std::string& why) {
      report.ok = false;
      report.first_bad_seq = index;
      report.message = "transaction " + std::to_string(index) + ": " + why;
      return report;
    };

    if (
      buf.size() < magic_size ||
      std::memcmp(buf.data(), ledger_magic, magic_size) != 0)
      return fail(0, "bad magic header");

    std::size_t off = magic_size;
    std::uint64_t index = 0;
    Digest last{};
    while (off < buf.size())
    {
      if (buf.size() - off < 4)
        return fail(index, "file ends inside a frame header");
      std::uint32_t len = (std::uint32_t(std::uint8_t(buf[off])) << 24) |
        (std::uint32_t(std::uint8_t(buf[off + 1])) << 16) |
        (std::uint32_t(std::uint8_t(buf[off + 2])) << 8) |
        std::uint32_t(std::uint8_t(buf[off + 3]));
      if (buf.size() - off - 4 < len)
        return fail(index, "file ends inside a frame");

      LedgerTransaction tx;
      try
      {
        tx = decode_record(
          reinterpret_cast<const std::uint8_t*>(buf.data()) + off + 4, len);
      }
      catch (const Error& e)
      {
        return fail(index, std::string("undecodable record: ") + e.what());
      }
      if (tx.seq != index)
        return fail(index, "sequence number mismatch");
      if (tx.prev_hash != last)
        return fail(index, "previous-hash link broken");
      if (compute_tx_hash(tx) != tx.tx_hash)
        return fail(index, "hash mismatch");
      nlohmann::json payload =
        nlohmann::json::parse(tx.payload, nullptr, false);
      if (payload.is_discarded())
        return fail(index, "payload is not valid JSON");

      last = tx.tx_hash;
      off += 4 + len;
      ++index;
    }

    report.ok = true;
    report.tx_count = index;
    report.message = "ok";
    return report;
  }
}
