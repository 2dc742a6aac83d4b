// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/fixture.hpp"

#include <fstream>
#include <set>

namespace rolechain
{
  ScenarioFixture fixture_from_json(const nlohmann::json& j)
  {
    ScenarioFixture f;
    try
    {
      f.org = j.value("org", "");
      if (j.contains("objects"))
        f.objects = j.at("objects").get<std::vector<std::string>>();
      for (const auto& r : j.at("roles"))
      {
        Role role;
        role.role_id = r.at("role_id").get<std::string>();
        role.valid_period = r.at("valid_period").get<Duration>();
        if (r.contains("permissions"))
          role.permissions =
            r.at("permissions").get<std::vector<Permission>>();
        f.roles.push_back(std::move(role));
      }
      if (j.contains("mer_sets"))
        f.mer_sets = j.at("mer_sets").get<std::vector<MerSet>>();
      if (j.contains("cohorts"))
        for (const auto& c : j.at("cohorts"))
          f.cohorts.push_back(
            {c.at("role_id").get<std::string>(),
             c.at("user_count").get<int>()});
    }
    catch (const nlohmann::json::exception& e)
    {
      throw Error(
        Errc::schema_violation,
        std::string("malformed fixture: ") + e.what());
    }

    std::set<std::string> role_ids;
    for (const auto& r : f.roles)
      if (!role_ids.insert(r.role_id).second)
        throw Error(
          Errc::schema_violation,
          "fixture lists role \"" + r.role_id + "\" twice");
    std::set<std::string> known_objects(f.objects.begin(), f.objects.end());
    if (!known_objects.empty())
      for (const auto& r : f.roles)
        for (const auto& p : r.permissions)
          if (!known_objects.count(p.object_id))
            throw Error(
              Errc::schema_violation,
              "role \"" + r.role_id + "\" references unlisted object \"" +
                p.object_id + "\"");
    for (const auto& set : f.mer_sets)
    {
      validate_mer_set(set);
      for (const auto& role : set.roles)
        if (!role_ids.count(role))
          throw Error(
            Errc::schema_violation,
            "MER set references unknown role \"" + role + "\"");
    }
    for (const auto& c : f.cohorts)
    {
      if (!role_ids.count(c.role_id))
        throw Error(
          Errc::schema_violation,
          "cohort references unknown role \"" + c.role_id + "\"");
      if (c.user_count <= 0)
        throw Error(
          Errc::schema_violation, "cohort user_count must be positive");
    }
    return f;
  }

  ScenarioFixture load_fixture(const std::filesystem::path& path)
  {
    std::ifstream in(path);
    if (!in)
      throw Error(
        Errc::io_error, "cannot open fixture file " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
      throw Error(
        Errc::parse_error, "fixture file is not valid JSON: " + path.string());
    return fixture_from_json(j);
  }

  FixtureApplyResult apply_fixture(
    Engine& engine, const ScenarioFixture& fixture)
  {
    FixtureApplyResult result;
    for (const auto& role : fixture.roles)
    {
      engine.set_role_configuration(
        CallerIdentity::admin(),
        role.role_id,
        role.permissions,
        role.valid_period);
      ++result.roles_added;
    }
    for (const auto& set : fixture.mer_sets)
    {
      SetSodResult r =
        engine.set_sod_constraint(CallerIdentity::admin(), set);
      result.violations.insert(
        result.violations.end(),
        r.violations.begin(),
        r.violations.end());
      ++result.sets_added;
    }
    return result;
  }
}
