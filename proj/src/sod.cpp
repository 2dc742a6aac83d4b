// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/sod.hpp"

namespace rolechain
{
  namespace
  {
    SodDecision check(
      MerKind kind,
      const std::set<std::string>& held,
      const std::string& candidate,
      const std::vector<MerSet>& sets,
      const std::set<std::string>& known_roles)
    {
      for (std::size_t i = 0; i < sets.size(); ++i)
      {
        const MerSet& m = sets[i];
        if (m.kind != kind)
          continue;
        std::size_t overlap = 0;
        bool candidate_member = false;
        for (const auto& role : m.roles)
        {
          if (!known_roles.count(role))
            throw Error(
              Errc::unknown_role,
              "MER set references unknown role \"" + role + "\"");
          if (role == candidate)
            candidate_member = true;
          else if (held.count(role))
            ++overlap;
        }
        if (candidate_member)
          ++overlap;
        if (overlap >= static_cast<std::size_t>(m.cardinality))
          return {false, i};
      }
      return {true, std::nullopt};
    }
  }

  SodDecision check_ssod(
    const std::set<std::string>& assigned,
    const std::string& candidate,
    const std::vector<MerSet>& sets,
    const std::set<std::string>& known_roles)
  {
    return check(MerKind::Static, assigned, candidate, sets, known_roles);
  }

  SodDecision check_dsod(
    const std::set<std::string>& active,
    const std::string& candidate,
    const std::vector<MerSet>& sets,
    const std::set<std::string>& known_roles)
  {
    return check(MerKind::Dynamic, active, candidate, sets, known_roles);
  }

  std::vector<SodViolation> assert_policy_consistency(
    const std::map<std::string, std::set<std::string>>& assignments,
    const std::map<std::string, std::set<std::string>>& active_sessions,
    const std::vector<MerSet>& sets)
  {
    std::vector<SodViolation> out;
    auto scan = [&](
                  SodViolation::Scope scope,
                  const std::map<std::string, std::set<std::string>>& held,
                  MerKind kind) {
      for (const auto& [user, roles] : held)
      {
        for (std::size_t i = 0; i < sets.size(); ++i)
        {
          const MerSet& m = sets[i];
          if (m.kind != kind)
            continue;
          std::size_t overlap = 0;
          for (const auto& role : m.roles)
            if (roles.count(role))
              ++overlap;
          if (overlap >= static_cast<std::size_t>(m.cardinality))
            out.push_back({scope, user, i, m});
        }
      }
    };
    scan(SodViolation::Scope::assignment, assignments, MerKind::Static);
    scan(SodViolation::Scope::session, active_sessions, MerKind::Dynamic);
    return out;
  }

  void to_json(nlohmann::json& j, const SodViolation& v)
  {
    j = nlohmann::json{
      {"scope",
       v.scope == SodViolation::Scope::assignment ? "assignment" : "session"},
      {"user_pubkey", v.user_pubkey},
      {"mer_index", v.mer_index},
      {"set", v.set}};
  }
}
