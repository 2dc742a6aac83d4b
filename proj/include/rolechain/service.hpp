// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/engine.hpp"
#include "rolechain/ledger.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

namespace httplib
{
  class Server;
  struct Request;
  struct Response;
}

namespace rolechain
{
  struct ServiceConfig
  {
    enum class ClockMode
    {
      real_time,
      simulated
    };

    std::string listen_host = "127.0.0.1";
    int listen_port = 0; // 0 picks an ephemeral port
    std::filesystem::path ledger_path;
    std::string admin_token;
    std::string csp_token;
    ClockMode clock_mode = ClockMode::real_time;
    std::string clock_start; // required in simulated mode
    int commit_interval_ms = 0;
    bool fsync_on_flush = false;
    int worker_threads = 64;
    Duration challenge_ttl_seconds = ChallengeStore::default_ttl_seconds;

    static ServiceConfig from_json(const nlohmann::json& j);
    static ServiceConfig from_file(const std::filesystem::path& path);
  };

  // HTTP facade over the engine. The service itself plays the CSP role:
  // user-facing endpoints carry no bearer token, while /admin/* requires
  // the admin token (revocation also accepts the CSP token).
  class Service
  {
  public:
    explicit Service(ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds and serves on a background thread. Throws on bind failure.
    void start();
    void stop();

    int port() const
    {
      return port_;
    }

    std::string base_url() const;

    Engine& engine()
    {
      return *engine_;
    }

    Ledger& ledger()
    {
      return *ledger_;
    }

    // Non-null only in simulated clock mode.
    SimulatedClock* simulated_clock()
    {
      return sim_clock_;
    }

    const ServiceConfig& config() const
    {
      return config_;
    }

  private:
    void register_routes();
    bool bearer_token_is(
      const httplib::Request& req, const std::string& expected) const;
    void require_admin(const httplib::Request& req) const;
    void require_admin_or_csp(const httplib::Request& req) const;

    ServiceConfig config_;
    ClockPtr clock_;
    SimulatedClock* sim_clock_ = nullptr;
    std::unique_ptr<Ledger> ledger_;
    std::unique_ptr<Engine> engine_;
    std::unique_ptr<httplib::Server> server_;
    std::thread server_thread_;
    int port_ = 0;
    bool started_ = false;
  };
}
