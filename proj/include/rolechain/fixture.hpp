// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/engine.hpp"
#include "rolechain/model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rolechain
{
  struct FixtureCohort
  {
    std::string role_id;
    int user_count = 0;
  };

  // A declarative scenario: roles, SoD constraints and user cohorts, as
  // loaded from a JSON file.
  struct ScenarioFixture
  {
    std::string org;
    std::vector<std::string> objects;
    std::vector<Role> roles;
    std::vector<MerSet> mer_sets;
    std::vector<FixtureCohort> cohorts;
  };

  ScenarioFixture fixture_from_json(const nlohmann::json& j);
  ScenarioFixture load_fixture(const std::filesystem::path& path);

  struct FixtureApplyResult
  {
    int roles_added = 0;
    int sets_added = 0;
    std::vector<SodViolation> violations;
  };

  // Registers every role and MER set with the engine, in file order.
  FixtureApplyResult apply_fixture(
    Engine& engine, const ScenarioFixture& fixture);
}
