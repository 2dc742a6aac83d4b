// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/auth.hpp"
#include "rolechain/bench.hpp"
#include "rolechain/client.hpp"
#include "rolechain/fixture.hpp"
#include "rolechain/hex.hpp"
#include "rolechain/ledger.hpp"
#include "rolechain/model.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace
{
  using nlohmann::json;
  using namespace rolechain;

  std::unique_ptr<ApiClient> connect(
    const std::string& url, const std::string& token)
  {
    auto api = std::make_unique<ApiClient>(url);
    if (!token.empty())
      api->set_token(token);
    return api;
  }

  void print_json(const json& j)
  {
    std::cout << j.dump(2) << "\n";
  }

  json expect_ok(const ApiResponse& r)
  {
    if (!r.ok())
    {
      std::cerr << "error: HTTP " << r.status << "\n"
                << r.body.dump(2) << "\n";
      std::exit(1);
    }
    return r.body;
  }

  std::string slurp(const std::string& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw Error(Errc::io_error, "cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  }

  // "object:ops[:condition]", e.g. "Answer1-DB:W:st:...,ed:...". Only the
  // first two colons delimit fields; the condition may contain colons.
  Permission parse_permission_arg(const std::string& arg)
  {
    auto first = arg.find(':');
    if (first == std::string::npos || first == 0)
      throw Error(
        Errc::invalid_argument,
        "permission must look like object:ops[:condition]");
    auto second = arg.find(':', first + 1);
    Permission p;
    p.object_id = arg.substr(0, first);
    std::string ops = second == std::string::npos ?
      arg.substr(first + 1) :
      arg.substr(first + 1, second - first - 1);
    if (ops.empty())
      throw Error(Errc::invalid_argument, "permission lists no operations");
    for (char c : ops)
      p.operations.insert(parse_operation(std::string(1, c)));
    if (second != std::string::npos)
      p.condition = decode_condition(arg.substr(second + 1));
    return p;
  }
}

int main(int argc, char** argv)
{
  CLI::App app{"rolechain: RBAC policy service client"};
  app.require_subcommand(1);
  app.fallthrough(); // lets --url/--token follow a subcommand

  std::string url = "http://127.0.0.1:8080";
  std::string token;
  app.add_option("--url", url, "service base URL")->envname("ROLECHAIN_URL");
  app.add_option("--token", token, "bearer token for privileged calls")
    ->envname("ROLECHAIN_TOKEN");

  // keygen
  auto* keygen = app.add_subcommand("keygen", "generate a signing key pair");
  std::string seed_hex;
  keygen->add_option("--seed", seed_hex, "64-char hex seed (deterministic)");

  // role add
  auto* role = app.add_subcommand("role", "role administration");
  role->require_subcommand(1);
  auto* role_add = role->add_subcommand("add", "register roles");
  std::string role_file, role_id;
  long long valid_period = 0;
  std::vector<std::string> permission_args;
  role_add->add_option("--file", role_file, "JSON file with a role array");
  role_add->add_option("--id", role_id, "role id");
  role_add->add_option(
    "--valid-period", valid_period, "grant lifetime in seconds");
  role_add->add_option(
    "--permission",
    permission_args,
    "object:ops[:condition], repeatable (ops from {R,W})");

  // sod set
  auto* sod = app.add_subcommand("sod", "separation-of-duty constraints");
  sod->require_subcommand(1);
  auto* sod_set = sod->add_subcommand("set", "install MER sets");
  std::string sod_xml_file;
  std::vector<std::string> sod_roles;
  int sod_cardinality = 2;
  std::string sod_kind = "Static";
  sod_set->add_option("--xml", sod_xml_file, "SoD principle XML file");
  sod_set->add_option("--role", sod_roles, "member role, repeatable");
  sod_set->add_option("--cardinality", sod_cardinality, "threshold k");
  sod_set->add_option("--kind", sod_kind, "Static or Dynamic");

  // normalize
  auto* normalize =
    app.add_subcommand("normalize", "rebuild the role hierarchy");

  // grant
  auto* grant = app.add_subcommand("grant", "request a role for a user");
  std::string grant_user, grant_role;
  grant->add_option("--user", grant_user, "user public key")->required();
  grant->add_option("--role", grant_role, "role id")->required();

  // revoke
  auto* revoke = app.add_subcommand("revoke", "revoke a user's role");
  std::string revoke_user, revoke_role;
  revoke->add_option("--user", revoke_user, "user public key")->required();
  revoke->add_option("--role", revoke_role, "role id")->required();

  // delegate
  auto* delegate = app.add_subcommand("delegate", "delegate a role");
  std::string deleg_from, deleg_to, deleg_role, deleg_expires;
  delegate->add_option("--delegator", deleg_from, "delegator public key")
    ->required();
  delegate->add_option("--delegate", deleg_to, "delegate public key")
    ->required();
  delegate->add_option("--role", deleg_role, "role id")->required();
  delegate
    ->add_option(
      "--expires", deleg_expires, "expiry, \"YYYY-MM-DD HH:MM:SS\" UTC")
    ->required();

  // activate
  auto* activate = app.add_subcommand("activate", "activate a role");
  std::string act_user, act_role;
  activate->add_option("--user", act_user, "user public key")->required();
  activate->add_option("--role", act_role, "role id")->required();

  // access
  auto* access =
    app.add_subcommand("access", "request access to an object");
  std::string acc_public, acc_secret, acc_role, acc_object, acc_op;
  access->add_option("--public", acc_public, "user public key")->required();
  access->add_option("--secret", acc_secret, "user secret key")->required();
  access->add_option("--role", acc_role, "role id")->required();
  access->add_option("--object", acc_object, "object id")->required();
  access->add_option("--operation", acc_op, "R or W")->required();

  // verify / verify-file
  auto* verify =
    app.add_subcommand("verify", "verify the service's chain integrity");
  auto* verify_file =
    app.add_subcommand("verify-file", "audit a ledger file offline");
  std::string ledger_path;
  verify_file->add_option("path", ledger_path, "ledger file")->required();

  // history
  auto* history = app.add_subcommand("history", "query the transaction log");
  std::string h_invoker, h_method, h_subject, h_from, h_to;
  history->add_option("--invoker", h_invoker, "filter by invoker");
  history->add_option("--method", h_method, "filter by method");
  history->add_option("--subject", h_subject, "filter by subject key");
  history->add_option("--from", h_from, "inclusive lower time bound");
  history->add_option("--to", h_to, "inclusive upper time bound");

  // fixture
  auto* fixture =
    app.add_subcommand("fixture", "apply a scenario fixture file");
  std::string fixture_path;
  bool fixture_cohorts = false;
  fixture->add_option("path", fixture_path, "fixture JSON file")->required();
  fixture->add_flag(
    "--cohorts",
    fixture_cohorts,
    "also create cohort users and print their keys");

  // bench
  auto* bench = app.add_subcommand("bench", "performance experiments");
  bench->require_subcommand(1);
  std::string bench_json_out;
  bench->add_option("--json-out", bench_json_out, "write the report here");

  auto* bench_users =
    bench->add_subcommand("users", "decision latency vs user count");
  UserScalingOptions user_opts;
  bench_users->add_option("--classes", user_opts.classes, "batch count");
  bench_users->add_option(
    "--users-per-class", user_opts.users_per_class, "batch size step");
  bench_users->add_option(
    "--repetitions", user_opts.repetitions, "timed rounds per batch");
  bench_users->add_option("--role", user_opts.role_id, "role to exercise");
  bench_users->add_option("--object", user_opts.object_id, "object id");
  bench_users->add_option("--operation", user_opts.operation, "R or W");

  auto* bench_sod =
    bench->add_subcommand("sod", "DSoD denial latency vs conflict count");
  SodScalingOptions sod_opts;
  bench_sod->add_option("--users", sod_opts.total_users, "user pool size");
  bench_sod->add_option("--step", sod_opts.step, "conflict count step");
  bench_sod->add_option(
    "--repetitions", sod_opts.repetitions, "timed rounds per step");
  bench_sod->add_option("--held-role", sod_opts.held_role, "activated role");
  bench_sod->add_option(
    "--conflicting-role", sod_opts.conflicting_role, "role to deny");

  // health
  auto* health = app.add_subcommand("health", "service liveness check");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (keygen->parsed())
    {
      KeyPair keys;
      if (seed_hex.empty())
        keys = generate_keypair();
      else
      {
        std::vector<uint8_t> seed = from_hex(seed_hex);
        if (seed.size() != 32)
          throw Error(Errc::invalid_argument, "seed must be 32 bytes");
        std::array<uint8_t, 32> fixed{};
        std::copy(seed.begin(), seed.end(), fixed.begin());
        keys = keypair_from_seed(fixed);
      }
      print_json(
        {{"public_key", keys.public_key_hex},
         {"secret_key", keys.secret_key_hex}});
      return 0;
    }

    if (verify_file->parsed())
    {
      VerificationReport report = verify_ledger_file(ledger_path);
      json j{
        {"ok", report.ok},
        {"tx_count", report.tx_count},
        {"message", report.message}};
      if (report.first_bad_seq)
        j["first_bad_seq"] = *report.first_bad_seq;
      print_json(j);
      return report.ok ? 0 : 1;
    }

    auto api = connect(url, token);

    if (role_add->parsed())
    {
      json out = json::array();
      if (!role_file.empty())
      {
        json roles = json::parse(slurp(role_file));
        for (const auto& r : roles)
          out.push_back(expect_ok(api->post("/admin/roles", r)));
      }
      else
      {
        if (role_id.empty() || valid_period <= 0)
        {
          std::cerr << "error: need --file, or --id and --valid-period\n";
          return 1;
        }
        std::vector<Permission> permissions;
        for (const auto& arg : permission_args)
          permissions.push_back(parse_permission_arg(arg));
        out.push_back(expect_ok(api->post(
          "/admin/roles",
          {{"role_id", role_id},
           {"valid_period", valid_period},
           {"permissions", permissions}})));
      }
      print_json(out);
    }
    else if (sod_set->parsed())
    {
      if (!sod_xml_file.empty())
        print_json(
          expect_ok(api->post_xml("/admin/sod", slurp(sod_xml_file))));
      else
      {
        if (sod_roles.size() < 2)
        {
          std::cerr << "error: need --xml, or at least two --role\n";
          return 1;
        }
        MerSet set{sod_roles, sod_cardinality, mer_kind_from_string(sod_kind)};
        print_json(expect_ok(api->post("/admin/sod", set)));
      }
    }
    else if (normalize->parsed())
      print_json(expect_ok(api->post("/admin/normalize", json::object())));
    else if (grant->parsed())
      print_json(expect_ok(api->post(
        "/admin/users/" + grant_user + "/roles", {{"role_id", grant_role}})));
    else if (revoke->parsed())
      print_json(expect_ok(api->post(
        "/admin/revoke",
        {{"user_pubkey", revoke_user}, {"role_id", revoke_role}})));
    else if (delegate->parsed())
      print_json(expect_ok(api->post(
        "/admin/delegate",
        {{"delegator_pubkey", deleg_from},
         {"delegate_pubkey", deleg_to},
         {"role_id", deleg_role},
         {"expires_at", deleg_expires}})));
    else if (activate->parsed())
      print_json(expect_ok(api->post(
        "/sessions/activate",
        {{"user_pubkey", act_user}, {"role_id", act_role}})));
    else if (access->parsed())
    {
      KeyPair keys{acc_public, acc_secret};
      ApiResponse r = api->request_access(keys, acc_role, acc_object, acc_op);
      print_json(expect_ok(r));
      return r.body.value("result", "") == "Allowed" ? 0 : 2;
    }
    else if (verify->parsed())
    {
      json report = expect_ok(api->get("/ledger/verify"));
      print_json(report);
      return report.value("ok", false) ? 0 : 1;
    }
    else if (history->parsed())
    {
      std::string query;
      auto add = [&query](const char* key, const std::string& value) {
        if (value.empty())
          return;
        query += query.empty() ? '?' : '&';
        query += key;
        query += '=';
        for (char c : value)
          if (c == ' ')
            query += "%20";
          else
            query += c;
      };
      add("invoker", h_invoker);
      add("method", h_method);
      add("subject", h_subject);
      add("from", h_from);
      add("to", h_to);
      print_json(expect_ok(api->get("/history" + query)));
    }
    else if (fixture->parsed())
    {
      ScenarioFixture f = load_fixture(fixture_path);
      json out{
        {"org", f.org},
        {"roles", json::array()},
        {"sets", json::array()},
        {"violations", json::array()}};
      for (const auto& r : f.roles)
        out["roles"].push_back(expect_ok(api->post("/admin/roles", r)));
      for (const auto& set : f.mer_sets)
      {
        json reply = expect_ok(api->post("/admin/sod", set));
        out["sets"].push_back(reply);
        for (const auto& v : reply.value("violations", json::array()))
          out["violations"].push_back(v);
      }
      if (fixture_cohorts)
      {
        out["cohorts"] = json::array();
        for (const auto& cohort : f.cohorts)
        {
          json entry{
            {"role_id", cohort.role_id}, {"users", json::array()}};
          for (int i = 0; i < cohort.user_count; ++i)
          {
            KeyPair keys = generate_keypair();
            json reply = expect_ok(api->post(
              "/admin/users/" + keys.public_key_hex + "/roles",
              {{"role_id", cohort.role_id}}));
            if (reply.value("result", "") != "Allowed")
            {
              std::cerr << "error: cohort grant denied: " << reply.dump(2)
                        << "\n";
              return 1;
            }
            entry["users"].push_back(
              {{"public_key", keys.public_key_hex},
               {"secret_key", keys.secret_key_hex}});
          }
          out["cohorts"].push_back(entry);
        }
      }
      print_json(out);
    }
    else if (bench_users->parsed() || bench_sod->parsed())
    {
      if (token.empty())
      {
        std::cerr << "error: benchmarks need --token (admin)\n";
        return 1;
      }
      std::string host = "127.0.0.1";
      int port = 8080;
      auto scheme_end = url.find("//");
      std::string rest =
        scheme_end == std::string::npos ? url : url.substr(scheme_end + 2);
      auto colon = rest.rfind(':');
      if (colon != std::string::npos)
      {
        host = rest.substr(0, colon);
        port = std::stoi(rest.substr(colon + 1));
      }
      else if (!rest.empty())
        host = rest;

      BenchReport report = bench_users->parsed() ?
        bench_user_scaling(host, port, token, user_opts) :
        bench_sod_scaling(host, port, token, sod_opts);
      std::cout << report.to_table();
      if (!bench_json_out.empty())
      {
        std::ofstream out(bench_json_out);
        out << report.to_json().dump(2) << "\n";
      }
    }
    else if (health->parsed())
      print_json(expect_ok(api->get("/healthz")));
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
