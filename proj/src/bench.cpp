// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/bench.hpp"

#include "rolechain/auth.hpp"
#include "rolechain/client.hpp"
#include "rolechain/errors.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

namespace rolechain
{
  namespace
  {
    using SteadyClock = std::chrono::steady_clock;

    double ms_between(
      SteadyClock::time_point a, SteadyClock::time_point b)
    {
      return std::chrono::duration<double, std::milli>(b - a).count();
    }

    [[noreturn]] void bench_abort(const std::string& message)
    {
      throw Error(Errc::invalid_argument, "benchmark aborted: " + message);
    }

    // Runs fn(i) for i in [0, n) across up to `workers` threads and
    // rethrows the first failure.
    void parallel_for(
      int n, int workers, const std::function<void(int)>& fn)
    {
      std::atomic<int> next{0};
      std::atomic<bool> failed{false};
      std::mutex error_mu;
      std::string error;

      auto body = [&] {
        for (;;)
        {
          int i = next.fetch_add(1);
          if (i >= n || failed.load())
            return;
          try
          {
            fn(i);
          }
          catch (const std::exception& e)
          {
            failed.store(true);
            std::lock_guard<std::mutex> guard(error_mu);
            if (error.empty())
              error = e.what();
            return;
          }
        }
      };

      int thread_count = std::min(n, workers);
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(thread_count));
      for (int t = 0; t < thread_count; ++t)
        threads.emplace_back(body);
      for (auto& t : threads)
        t.join();
      if (failed.load())
        bench_abort(error);
    }

    // Measures `repetitions` rounds of n concurrent calls to fn(i), with
    // one untimed warmup round. Threads and their HTTP clients persist
    // across rounds; each round is released by a barrier and timed from
    // release to the completion of the slowest call.
    std::vector<double> timed_rounds(
      int n, int repetitions, const std::function<void(int)>& fn)
    {
      std::barrier sync(n + 1);
      std::atomic<bool> failed{false};
      std::mutex error_mu;
      std::string error;
      int total_rounds = repetitions + 1; // first is warmup

      auto body = [&](int i) {
        for (int round = 0; round < total_rounds; ++round)
        {
          sync.arrive_and_wait();
          if (!failed.load())
          {
            try
            {
              fn(i);
            }
            catch (const std::exception& e)
            {
              failed.store(true);
              std::lock_guard<std::mutex> guard(error_mu);
              if (error.empty())
                error = e.what();
            }
          }
          sync.arrive_and_wait();
        }
      };

      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        threads.emplace_back(body, i);

      std::vector<double> totals;
      for (int round = 0; round < total_rounds; ++round)
      {
        sync.arrive_and_wait();
        auto t0 = SteadyClock::now();
        sync.arrive_and_wait();
        auto t1 = SteadyClock::now();
        if (round > 0)
          totals.push_back(ms_between(t0, t1));
      }
      for (auto& t : threads)
        t.join();
      if (failed.load())
        bench_abort(error);
      return totals;
    }

    double mean_of(const std::vector<double>& xs)
    {
      double sum = 0;
      for (double x : xs)
        sum += x;
      return xs.empty() ? 0 : sum / static_cast<double>(xs.size());
    }

    void expect_allowed(const ApiResponse& r, const std::string& what)
    {
      if (!r.ok())
        bench_abort(what + " failed with HTTP " + std::to_string(r.status) +
                    ": " + r.body.dump());
      if (r.body.value("result", "") != "Allowed")
        bench_abort(what + " was not allowed: " + r.body.dump());
    }
  }

  LinearFit linear_fit(const std::vector<std::pair<double, double>>& points)
  {
    LinearFit fit;
    const double n = static_cast<double>(points.size());
    if (points.size() < 2)
      return fit;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : points)
    {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0)
      return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    double mean_y = sy / n;
    double ss_tot = 0, ss_res = 0;
    for (const auto& [x, y] : points)
    {
      double predicted = fit.slope * x + fit.intercept;
      ss_tot += (y - mean_y) * (y - mean_y);
      ss_res += (y - predicted) * (y - predicted);
    }
    fit.r2 = ss_tot == 0 ? (ss_res == 0 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
    return fit;
  }

  nlohmann::json BenchReport::to_json() const
  {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& row : rows)
      rows_json.push_back(
        {{"n", row.n},
         {"total_ms", row.total_ms},
         {"mean_ms", row.mean_ms}});
    nlohmann::json j{{"name", name}, {"rows", rows_json}};
    if (fit)
      j["fit"] = {
        {"slope", fit->slope},
        {"intercept", fit->intercept},
        {"r2", fit->r2}};
    if (max_min_ratio)
      j["max_min_ratio"] = *max_min_ratio;
    if (!metadata.is_null())
      j["metadata"] = metadata;
    return j;
  }

  std::string BenchReport::to_table() const
  {
    std::string out = name + "\n";
    out += "      n    total_ms     mean_ms\n";
    char line[96];
    for (const auto& row : rows)
    {
      std::snprintf(
        line,
        sizeof(line),
        "%7d %11.2f %11.3f\n",
        row.n,
        row.total_ms,
        row.mean_ms);
      out += line;
    }
    if (fit)
    {
      std::snprintf(
        line,
        sizeof(line),
        "fit: slope %.3f ms/req, intercept %.2f ms, r2 %.4f\n",
        fit->slope,
        fit->intercept,
        fit->r2);
      out += line;
    }
    if (max_min_ratio)
    {
      std::snprintf(
        line, sizeof(line), "max/min total ratio: %.3f\n", *max_min_ratio);
      out += line;
    }
    return out;
  }

  BenchReport bench_user_scaling(
    const std::string& host,
    int port,
    const std::string& admin_token,
    const UserScalingOptions& options)
  {
    if (options.classes < 1 || options.users_per_class < 1 ||
        options.repetitions < 1)
      bench_abort("user scaling options must be positive");

    BenchReport report;
    report.name = "user-scaling";
    report.metadata = {
      {"classes", options.classes},
      {"users_per_class", options.users_per_class},
      {"repetitions", options.repetitions},
      {"role_id", options.role_id},
      {"object_id", options.object_id},
      {"operation", options.operation}};

    for (int c = 1; c <= options.classes; ++c)
    {
      int n = c * options.users_per_class;

      std::vector<KeyPair> keys(static_cast<std::size_t>(n));
      for (auto& k : keys)
        k = generate_keypair();

      parallel_for(n, 32, [&](int i) {
        ApiClient admin(host, port);
        admin.set_token(admin_token);
        ApiResponse r = admin.post(
          "/admin/users/" + keys[static_cast<std::size_t>(i)].public_key_hex +
            "/roles",
          {{"role_id", options.role_id}});
        expect_allowed(r, "grant");
      });

      std::vector<std::unique_ptr<ApiClient>> clients;
      clients.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        clients.push_back(std::make_unique<ApiClient>(host, port));

      std::vector<double> totals =
        timed_rounds(n, options.repetitions, [&](int i) {
          auto idx = static_cast<std::size_t>(i);
          ApiResponse r = clients[idx]->request_access(
            keys[idx],
            options.role_id,
            options.object_id,
            options.operation);
          expect_allowed(r, "access");
        });

      double total = mean_of(totals);
      report.rows.push_back({n, total, total / n});
    }

    std::vector<std::pair<double, double>> points;
    for (const auto& row : report.rows)
      points.emplace_back(row.n, row.total_ms);
    report.fit = linear_fit(points);
    return report;
  }

  BenchReport bench_sod_scaling(
    const std::string& host,
    int port,
    const std::string& admin_token,
    const SodScalingOptions& options)
  {
    if (options.total_users < 1 || options.step < 1 ||
        options.step > options.total_users || options.repetitions < 1)
      bench_abort("sod scaling options must be positive");

    BenchReport report;
    report.name = "sod-scaling";
    report.metadata = {
      {"total_users", options.total_users},
      {"step", options.step},
      {"repetitions", options.repetitions},
      {"held_role", options.held_role},
      {"conflicting_role", options.conflicting_role}};

    int n = options.total_users;
    std::vector<KeyPair> keys(static_cast<std::size_t>(n));
    for (auto& k : keys)
      k = generate_keypair();

    parallel_for(n, 32, [&](int i) {
      auto idx = static_cast<std::size_t>(i);
      ApiClient client(host, port);
      client.set_token(admin_token);
      ApiResponse r = client.post(
        "/admin/users/" + keys[idx].public_key_hex + "/roles",
        {{"role_id", options.held_role}});
      expect_allowed(r, "grant of held role");
      r = client.post(
        "/admin/users/" + keys[idx].public_key_hex + "/roles",
        {{"role_id", options.conflicting_role}});
      expect_allowed(r, "grant of conflicting role");
      r = client.post(
        "/sessions/activate",
        {{"user_pubkey", keys[idx].public_key_hex},
         {"role_id", options.held_role}});
      expect_allowed(r, "activation of held role");
    });

    for (int k = options.step; k <= n; k += options.step)
    {
      std::vector<std::unique_ptr<ApiClient>> clients;
      clients.reserve(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i)
        clients.push_back(std::make_unique<ApiClient>(host, port));

      std::vector<double> totals =
        timed_rounds(k, options.repetitions, [&](int i) {
          auto idx = static_cast<std::size_t>(i);
          ApiResponse r = clients[idx]->post(
            "/sessions/activate",
            {{"user_pubkey", keys[idx].public_key_hex},
             {"role_id", options.conflicting_role}});
          if (!r.ok())
            bench_abort(
              "conflicting activation failed with HTTP " +
              std::to_string(r.status) + ": " + r.body.dump());
          if (r.body.value("result", "") != "Denied" ||
              r.body.value("reason", "") != "DsodViolation")
            bench_abort(
              "conflicting activation was not denied as DsodViolation: " +
              r.body.dump());
        });

      double total = mean_of(totals);
      report.rows.push_back({k, total, total / k});
    }

    double max_total = 0, min_total = 0;
    for (const auto& row : report.rows)
    {
      max_total = std::max(max_total, row.total_ms);
      min_total = min_total == 0 ? row.total_ms :
                                   std::min(min_total, row.total_ms);
    }
    report.max_min_ratio = min_total > 0 ? max_total / min_total : 0;
    return report;
  }
}
