// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/model.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rolechain
{
  struct SodDecision
  {
    bool allowed = true;
    // Index into the supplied MER set list, set when denied.
    std::optional<std::size_t> violating_index;
  };

  // Static separation of duty, checked at grant time: adding `candidate`
  // to `assigned` is denied iff for some static set M,
  // |(assigned ∪ {candidate}) ∩ M.roles| >= M.cardinality.
  // Dynamic sets are ignored here. Every role listed by a considered set
  // must appear in `known_roles`, otherwise Error(unknown_role).
  SodDecision check_ssod(
    const std::set<std::string>& assigned,
    const std::string& candidate,
    const std::vector<MerSet>& sets,
    const std::set<std::string>& known_roles);

  // Dynamic separation of duty, checked at activation time, same rule over
  // the dynamic sets and the set of active roles.
  SodDecision check_dsod(
    const std::set<std::string>& active,
    const std::string& candidate,
    const std::vector<MerSet>& sets,
    const std::set<std::string>& known_roles);

  struct SodViolation
  {
    enum class Scope
    {
      assignment,
      session
    };

    Scope scope;
    std::string user_pubkey;
    std::size_t mer_index;
    MerSet set;
  };

  // Audits existing assignments and sessions against the full MER list and
  // reports every (user, set) pair already at or over threshold. Used when
  // a new constraint is introduced over data that predates it.
  std::vector<SodViolation> assert_policy_consistency(
    const std::map<std::string, std::set<std::string>>& assignments,
    const std::map<std::string, std::set<std::string>>& active_sessions,
    const std::vector<MerSet>& sets);

  void to_json(nlohmann::json& j, const SodViolation& v);
}
