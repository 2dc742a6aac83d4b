// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/service.hpp"

#include "rolechain/policy_xml.hpp"

#include <chrono>
#include <fstream>
#include <httplib.h>
#include <iostream>
#include <sodium.h>

namespace rolechain
{
  namespace
  {
    // Handler-level failure with a specific HTTP status.
    struct HttpError
    {
      int status;
      std::string code;
      std::string message;
    };

    void respond_json(
      httplib::Response& res, int status, const nlohmann::json& body)
    {
      res.status = status;
      res.set_content(body.dump(), "application/json");
    }

    void respond_error(
      httplib::Response& res,
      int status,
      const std::string& code,
      const std::string& message)
    {
      respond_json(
        res, status, {{"error", {{"code", code}, {"message", message}}}});
    }

    int status_of(Errc code)
    {
      switch (code)
      {
        case Errc::unauthorized_caller:
          return 403;
        case Errc::unknown_role:
        case Errc::invalid_permission:
        case Errc::invalid_valid_period:
        case Errc::invalid_argument:
        case Errc::encoding_error:
        case Errc::parse_error:
        case Errc::schema_violation:
          return 400;
        case Errc::duplicate_role:
        case Errc::already_assigned:
        case Errc::not_assigned:
        case Errc::delegator_lacks_role:
        case Errc::self_delegation:
        case Errc::sod_violation:
          return 409;
        default:
          return 500;
      }
    }

    nlohmann::json body_of(const httplib::Request& req)
    {
      if (req.body.empty())
        return nlohmann::json::object();
      nlohmann::json j = nlohmann::json::parse(req.body, nullptr, false);
      if (j.is_discarded() || !j.is_object())
        throw HttpError{400, "bad-request", "body must be a JSON object"};
      return j;
    }

    std::string require_string(const nlohmann::json& j, const char* field)
    {
      if (!j.contains(field) || !j.at(field).is_string())
        throw HttpError{
          400,
          "bad-request",
          std::string("missing string field \"") + field + "\""};
      return j.at(field).get<std::string>();
    }

    nlohmann::json decision_response(const DecisionOutcome& outcome)
    {
      nlohmann::json j = outcome.decision;
      j["tx_id"] = outcome.event_tx.tx_hash_hex;
      j["tx_seq"] = outcome.event_tx.seq;
      if (outcome.op_tx)
        j["op_tx_id"] = outcome.op_tx->tx_hash_hex;
      return j;
    }

    bool tokens_equal(const std::string& a, const std::string& b)
    {
      if (a.size() != b.size() || a.empty())
        return false;
      return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
    }
  }

  ServiceConfig ServiceConfig::from_json(const nlohmann::json& j)
  {
    ServiceConfig c;
    try
    {
      c.listen_host = j.value("listen_host", c.listen_host);
      c.listen_port = j.value("listen_port", c.listen_port);
      if (!j.contains("ledger_path"))
        throw Error(Errc::config_error, "config needs \"ledger_path\"");
      c.ledger_path = j.at("ledger_path").get<std::string>();
      c.admin_token = j.value("admin_token", "");
      c.csp_token = j.value("csp_token", "");
      if (c.admin_token.empty() || c.csp_token.empty())
        throw Error(
          Errc::config_error,
          "config needs non-empty \"admin_token\" and \"csp_token\"");

      if (j.contains("clock"))
      {
        const auto& clock = j.at("clock");
        std::string mode = clock.value("mode", "real");
        if (mode == "real")
        {
          c.clock_mode = ClockMode::real_time;
        }
        else if (mode == "simulated")
        {
          c.clock_mode = ClockMode::simulated;
          if (!clock.contains("start"))
            throw Error(
              Errc::config_error,
              "simulated clock needs a \"start\" timestamp");
          c.clock_start = clock.at("start").get<std::string>();
          parse_timestamp(c.clock_start);
        }
        else
        {
          throw Error(
            Errc::config_error, "clock mode must be \"real\" or \"simulated\"");
        }
      }

      c.commit_interval_ms = j.value("commit_interval_ms", 0);
      if (c.commit_interval_ms < 0)
        throw Error(
          Errc::config_error, "commit_interval_ms must be >= 0");
      c.fsync_on_flush = j.value("fsync_on_flush", false);
      c.worker_threads = j.value("worker_threads", c.worker_threads);
      if (c.worker_threads < 1)
        throw Error(Errc::config_error, "worker_threads must be >= 1");
      c.challenge_ttl_seconds =
        j.value("challenge_ttl_seconds", c.challenge_ttl_seconds);
      if (c.challenge_ttl_seconds <= 0)
        throw Error(
          Errc::config_error, "challenge_ttl_seconds must be positive");
    }
    catch (const nlohmann::json::exception& e)
    {
      throw Error(
        Errc::config_error, std::string("malformed config: ") + e.what());
    }
    return c;
  }

  ServiceConfig ServiceConfig::from_file(const std::filesystem::path& path)
  {
    std::ifstream in(path);
    if (!in)
      throw Error(
        Errc::config_error, "cannot open config file " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
      throw Error(
        Errc::config_error, "config file is not valid JSON: " + path.string());
    return from_json(j);
  }

  Service::Service(ServiceConfig config) : config_(std::move(config))
  {
    if (config_.clock_mode == ServiceConfig::ClockMode::simulated)
    {
      auto sim = std::make_shared<SimulatedClock>(
        parse_timestamp(config_.clock_start));
      sim_clock_ = sim.get();
      clock_ = sim;
    }
    else
    {
      clock_ = std::make_shared<SystemClock>();
    }

    ledger_ = Ledger::open_file(
      config_.ledger_path,
      clock_,
      {config_.commit_interval_ms, config_.fsync_on_flush});
    for (const auto& w : ledger_->open_warnings())
      std::cerr << "ledger: " << w << std::endl;

    engine_ = std::make_unique<Engine>(
      *ledger_, clock_, config_.challenge_ttl_seconds);

    server_ = std::make_unique<httplib::Server>();
    int workers = config_.worker_threads;
    server_->new_task_queue = [workers] {
      return new httplib::ThreadPool(static_cast<std::size_t>(workers));
    };
    register_routes();
  }

  Service::~Service()
  {
    try
    {
      stop();
    }
    catch (...)
    {
    }
  }

  std::string Service::base_url() const
  {
    return "http://" + config_.listen_host + ":" + std::to_string(port_);
  }

  void Service::start()
  {
    if (started_)
      return;
    if (config_.listen_port == 0)
    {
      port_ = server_->bind_to_any_port(config_.listen_host);
      if (port_ <= 0)
        throw Error(
          Errc::io_error, "cannot bind to " + config_.listen_host);
    }
    else
    {
      if (!server_->bind_to_port(config_.listen_host, config_.listen_port))
        throw Error(
          Errc::io_error,
          "cannot bind to " + config_.listen_host + ":" +
            std::to_string(config_.listen_port));
      port_ = config_.listen_port;
    }

    server_thread_ = std::thread([this] { server_->listen_after_bind(); });
    for (int i = 0; i < 200 && !server_->is_running(); ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    if (!server_->is_running())
      throw Error(Errc::io_error, "server failed to start");
    started_ = true;
  }

  void Service::stop()
  {
    if (server_ && server_->is_running())
      server_->stop();
    if (server_thread_.joinable())
      server_thread_.join();
    if (ledger_)
      ledger_->close();
    started_ = false;
  }

  bool Service::bearer_token_is(
    const httplib::Request& req, const std::string& expected) const
  {
    std::string header = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (header.rfind(prefix, 0) != 0)
      return false;
    return tokens_equal(header.substr(prefix.size()), expected);
  }

  void Service::require_admin(const httplib::Request& req) const
  {
    if (!bearer_token_is(req, config_.admin_token))
      throw HttpError{401, "unauthorized", "admin token required"};
  }

  void Service::require_admin_or_csp(const httplib::Request& req) const
  {
    if (
      !bearer_token_is(req, config_.admin_token) &&
      !bearer_token_is(req, config_.csp_token))
      throw HttpError{401, "unauthorized", "admin or CSP token required"};
  }

  void Service::register_routes()
  {
    auto wrap = [](auto fn) {
      return [fn](const httplib::Request& req, httplib::Response& res) {
        try
        {
          fn(req, res);
        }
        catch (const HttpError& e)
        {
          respond_error(res, e.status, e.code, e.message);
        }
        catch (const Error& e)
        {
          respond_error(res, status_of(e.code()), to_string(e.code()), e.what());
        }
        catch (const nlohmann::json::exception& e)
        {
          respond_error(res, 400, "bad-request", e.what());
        }
        catch (const std::exception& e)
        {
          respond_error(res, 500, "internal", e.what());
        }
      };
    };

    server_->Post(
      "/admin/roles",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        require_admin(req);
        nlohmann::json body = body_of(req);
        std::string role_id = require_string(body, "role_id");
        if (!body.contains("valid_period") ||
            !body.at("valid_period").is_number_integer())
          throw HttpError{
            400, "bad-request", "missing integer field \"valid_period\""};
        Duration valid_period = body.at("valid_period").get<Duration>();
        std::vector<Permission> permissions;
        if (body.contains("permissions"))
          permissions =
            body.at("permissions").get<std::vector<Permission>>();
        TxRef tx = engine_->set_role_configuration(
          CallerIdentity::admin(), role_id, permissions, valid_period);
        respond_json(
          res,
          200,
          {{"role_id", role_id}, {"tx_id", tx.tx_hash_hex}, {"tx_seq", tx.seq}});
      }));

    server_->Post(
      "/admin/sod",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        require_admin(req);
        std::string content_type = req.get_header_value("Content-Type");
        nlohmann::json violations = nlohmann::json::array();
        nlohmann::json tx_ids = nlohmann::json::array();
        nlohmann::json warnings = nlohmann::json::array();
        nlohmann::json sets = nlohmann::json::array();

        if (content_type.find("xml") != std::string::npos)
        {
          SodParseResult parsed = parse_sod_xml(req.body);
          for (const auto& w : parsed.warnings)
            warnings.push_back(w);
          for (const auto& set : parsed.document.mer_sets)
          {
            SetSodResult r =
              engine_->set_sod_constraint(CallerIdentity::admin(), set);
            tx_ids.push_back(r.tx.tx_hash_hex);
            for (const auto& v : r.violations)
              violations.push_back(v);
            sets.push_back(set);
          }
          respond_json(
            res,
            200,
            {{"org", parsed.document.org},
             {"sets", sets},
             {"tx_ids", tx_ids},
             {"violations", violations},
             {"warnings", warnings}});
        }
        else
        {
          MerSet set = body_of(req).get<MerSet>();
          SetSodResult r =
            engine_->set_sod_constraint(CallerIdentity::admin(), set);
          respond_json(
            res,
            200,
            {{"set", set},
             {"tx_id", r.tx.tx_hash_hex},
             {"tx_seq", r.tx.seq},
             {"violations", r.violations}});
        }
      }));

    server_->Post(
      "/admin/normalize",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        require_admin(req);
        NormalizeOutcome outcome =
          engine_->normalize_role_hierarchy(CallerIdentity::admin());
        nlohmann::json children = nlohmann::json::object();
        for (const auto& [id, kids] : outcome.children)
          children[id] = kids;
        respond_json(
          res,
          200,
          {{"children", children},
           {"warnings", outcome.warnings},
           {"tx_id", outcome.tx.tx_hash_hex},
           {"tx_seq", outcome.tx.seq}});
      }));

    server_->Post(
      "/admin/revoke",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        require_admin_or_csp(req);
        nlohmann::json body = body_of(req);
        CallerIdentity caller = bearer_token_is(req, config_.admin_token) ?
          CallerIdentity::admin() :
          CallerIdentity::csp();
        TxRef tx = engine_->role_revocation(
          caller,
          require_string(body, "user_pubkey"),
          require_string(body, "role_id"));
        respond_json(
          res, 200, {{"tx_id", tx.tx_hash_hex}, {"tx_seq", tx.seq}});
      }));

    server_->Post(
      "/admin/delegate",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        require_admin(req);
        nlohmann::json body = body_of(req);
        Timestamp expires_at =
          parse_timestamp(require_string(body, "expires_at"));
        TxRef tx = engine_->set_delegation(
          CallerIdentity::admin(),
          require_string(body, "delegator_pubkey"),
          require_string(body, "delegate_pubkey"),
          require_string(body, "role_id"),
          expires_at);
        respond_json(
          res, 200, {{"tx_id", tx.tx_hash_hex}, {"tx_seq", tx.seq}});
      }));

    server_->Post(
      R"(/admin/users/([^/]+)/roles)",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        require_admin(req);
        std::string pubkey = req.matches[1];
        nlohmann::json body = body_of(req);
        DecisionOutcome outcome = engine_->request_role_for_user(
          CallerIdentity::admin(), pubkey, require_string(body, "role_id"));
        respond_json(res, 200, decision_response(outcome));
      }));

    server_->Post(
      "/sessions/activate",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body = body_of(req);
        DecisionOutcome outcome = engine_->activate_role(
          CallerIdentity::csp(),
          require_string(body, "user_pubkey"),
          require_string(body, "role_id"));
        respond_json(res, 200, decision_response(outcome));
      }));

    server_->Post(
      "/access/challenge",
      wrap([this](const httplib::Request&, httplib::Response& res) {
        ChallengeStore::Issued issued = engine_->issue_challenge();
        respond_json(
          res,
          200,
          {{"challenge_id", issued.challenge_id},
           {"nonce", issued.nonce_hex},
           {"ttl_seconds", config_.challenge_ttl_seconds}});
      }));

    server_->Post(
      "/access/decide",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body = body_of(req);
        Operation op = parse_operation(require_string(body, "operation"));
        ChallengeProof proof{
          require_string(body, "challenge_id"),
          require_string(body, "signature")};
        DecisionOutcome outcome = engine_->request_access_to_res(
          CallerIdentity::csp(),
          require_string(body, "user_pubkey"),
          require_string(body, "role_id"),
          require_string(body, "object_id"),
          op,
          proof);
        respond_json(res, 200, decision_response(outcome));
      }));

    server_->Get(
      "/ledger/verify",
      wrap([this](const httplib::Request&, httplib::Response& res) {
        VerificationReport report = ledger_->verify_chain();
        nlohmann::json j{
          {"ok", report.ok},
          {"tx_count", report.tx_count},
          {"message", report.message}};
        if (report.first_bad_seq)
          j["first_bad_seq"] = *report.first_bad_seq;
        respond_json(res, 200, j);
      }));

    server_->Get(
      "/history",
      wrap([this](const httplib::Request& req, httplib::Response& res) {
        HistoryFilter filter;
        if (req.has_param("invoker"))
          filter.invoker = req.get_param_value("invoker");
        if (req.has_param("method"))
          filter.method = req.get_param_value("method");
        if (req.has_param("subject"))
          filter.subject_pubkey = req.get_param_value("subject");
        if (req.has_param("from"))
          filter.from_time = parse_timestamp(req.get_param_value("from"));
        if (req.has_param("to"))
          filter.to_time = parse_timestamp(req.get_param_value("to"));
        std::vector<LedgerTransaction> txs = ledger_->query_history(filter);
        respond_json(
          res, 200, {{"transactions", txs}, {"count", txs.size()}});
      }));

    server_->Get(
      "/healthz",
      wrap([this](const httplib::Request&, httplib::Response& res) {
        respond_json(
          res,
          200,
          {{"status", "ok"},
           {"time", format_timestamp(clock_->now())},
           {"tx_count", ledger_->size()}});
      }));

    if (config_.clock_mode == ServiceConfig::ClockMode::simulated)
    {
      server_->Post(
        "/testclock/advance",
        wrap([this](const httplib::Request& req, httplib::Response& res) {
          nlohmann::json body = body_of(req);
          if (body.contains("to"))
          {
            sim_clock_->set(
              parse_timestamp(body.at("to").get<std::string>()));
          }
          else
          {
            if (!body.contains("seconds") ||
                !body.at("seconds").is_number_integer())
              throw HttpError{
                400, "bad-request", "need \"seconds\" or \"to\""};
            Duration seconds = body.at("seconds").get<Duration>();
            if (seconds < 0)
              throw HttpError{
                400, "bad-request", "\"seconds\" must be >= 0"};
            sim_clock_->advance(seconds);
          }
          respond_json(
            res, 200, {{"time", format_timestamp(clock_->now())}});
        }));
    }
  }
}
