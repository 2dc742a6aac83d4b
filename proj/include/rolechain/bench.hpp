// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rolechain
{
  struct BenchRow
  {
    int n = 0;          // batch size (users or conflicting activations)
    double total_ms = 0; // mean wall time per batch over all repetitions
    double mean_ms = 0;  // total_ms / n
  };

  struct LinearFit
  {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
  };

  LinearFit linear_fit(const std::vector<std::pair<double, double>>& points);

  struct BenchReport
  {
    std::string name;
    std::vector<BenchRow> rows;
    std::optional<LinearFit> fit;
    std::optional<double> max_min_ratio;
    nlohmann::json metadata;

    nlohmann::json to_json() const;
    std::string to_table() const;
  };

  struct UserScalingOptions
  {
    int classes = 7;
    int users_per_class = 30;
    int repetitions = 10;
    std::string role_id = "Student";
    std::string object_id = "Answer1-DB";
    std::string operation = "W";
  };

  // Grants `role_id` to n fresh users for n in {users_per_class, ...,
  // classes * users_per_class}, then measures the wall time for all n to
  // complete a full challenge-sign-decide access request concurrently.
  // Every decision must come back Allowed; anything else aborts. Assumes
  // the scenario roles are already registered with the service.
  BenchReport bench_user_scaling(
    const std::string& host,
    int port,
    const std::string& admin_token,
    const UserScalingOptions& options = {});

  struct SodScalingOptions
  {
    int total_users = 100;
    int step = 10;
    int repetitions = 10;
    std::string held_role = "Reviewer1";
    std::string conflicting_role = "Editor";
  };

  // Gives total_users both roles, activates held_role for each, then for
  // k in {step, 2*step, ..., total_users} measures the wall time for k
  // concurrent activations of conflicting_role. Every one of them must be
  // denied with DsodViolation; anything else aborts.
  BenchReport bench_sod_scaling(
    const std::string& host,
    int port,
    const std::string& admin_token,
    const SodScalingOptions& options = {});
}
