// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/sod.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace rolechain;

namespace
{
  const std::set<std::string> all_roles = {"A", "B", "C", "D", "E", "F"};

  // Oracle: literal threshold rule, |(held ∪ {candidate}) ∩ M| >= k.
  bool oracle_denies(
    const std::set<std::string>& held,
    const std::string& candidate,
    const MerSet& m)
  {
    std::set<std::string> combined = held;
    combined.insert(candidate);
    int overlap = 0;
    for (const auto& r : m.roles)
      if (combined.count(r))
        ++overlap;
    return overlap >= m.cardinality;
  }
}

TEST_CASE("SSoD denies the second role of a static pair")
{
  std::vector<MerSet> sets = {{{"A", "B"}, 2, MerKind::Static}};
  SodDecision d = check_ssod({"A"}, "B", sets, all_roles);
  CHECK(!d.allowed);
  CHECK(d.violating_index == 0);
  CHECK(check_ssod({"A"}, "C", sets, all_roles).allowed);
  CHECK(check_ssod({}, "B", sets, all_roles).allowed);
}

TEST_CASE("the threshold rule counts existing violations too")
{
  // Both conflicting roles are already held; the candidate is unrelated,
  // but the set is at threshold, so the literal rule still denies.
  std::vector<MerSet> sets = {{{"A", "B"}, 2, MerKind::Static}};
  SodDecision d = check_ssod({"A", "B"}, "C", sets, all_roles);
  CHECK(!d.allowed);
  CHECK(d.violating_index == 0);
}

TEST_CASE("re-adding a held role does not double count")
{
  std::vector<MerSet> sets = {{{"A", "B"}, 2, MerKind::Static}};
  CHECK(check_ssod({"A"}, "A", sets, all_roles).allowed);
}

TEST_CASE("cardinality three allows pairs and denies triples")
{
  std::vector<MerSet> sets = {{{"A", "B", "C"}, 3, MerKind::Static}};
  CHECK(check_ssod({"A"}, "B", sets, all_roles).allowed);
  CHECK(!check_ssod({"A", "B"}, "C", sets, all_roles).allowed);
}

TEST_CASE("kinds are checked by the matching function only")
{
  std::vector<MerSet> sets = {
    {{"A", "B"}, 2, MerKind::Static}, {{"C", "D"}, 2, MerKind::Dynamic}};
  CHECK(check_ssod({"C"}, "D", sets, all_roles).allowed);
  CHECK(!check_ssod({"A"}, "B", sets, all_roles).allowed);
  CHECK(check_dsod({"A"}, "B", sets, all_roles).allowed);
  SodDecision d = check_dsod({"C"}, "D", sets, all_roles);
  CHECK(!d.allowed);
  CHECK(d.violating_index == 1);
}

TEST_CASE("sets naming unknown roles are rejected")
{
  std::vector<MerSet> sets = {{{"A", "Nobody"}, 2, MerKind::Static}};
  CHECK_THROWS_AS(check_ssod({"A"}, "B", sets, all_roles), Error);
  try
  {
    check_ssod({"A"}, "B", sets, all_roles);
  }
  catch (const Error& e)
  {
    CHECK(e.code() == Errc::unknown_role);
  }
  // Dynamic sets are out of scope for SSoD and vice versa, including
  // their role validation.
  std::vector<MerSet> dynamic_only = {{{"A", "Nobody"}, 2, MerKind::Dynamic}};
  CHECK_NOTHROW(check_ssod({"A"}, "B", dynamic_only, all_roles));
  CHECK_THROWS_AS(check_dsod({"A"}, "B", dynamic_only, all_roles), Error);
}

TEST_CASE("SSoD and DSoD agree with the oracle on random states")
{
  test::Rng rng(7005);
  std::vector<std::string> roles(all_roles.begin(), all_roles.end());

  for (int iter = 0; iter < 1500; ++iter)
  {
    std::set<std::string> held;
    for (const auto& r : roles)
      if (test::chance(rng, 0.4))
        held.insert(r);
    std::string candidate =
      roles[static_cast<std::size_t>(test::pick(rng, 0, 5))];

    std::vector<MerSet> sets;
    int set_count = test::pick(rng, 1, 4);
    for (int s = 0; s < set_count; ++s)
    {
      std::set<std::string> members;
      int target = test::pick(rng, 2, 4);
      while (static_cast<int>(members.size()) < target)
        members.insert(
          roles[static_cast<std::size_t>(test::pick(rng, 0, 5))]);
      MerSet set;
      set.roles.assign(members.begin(), members.end());
      set.cardinality =
        std::min<int>(test::pick(rng, 2, 3), static_cast<int>(members.size()));
      set.kind = test::chance(rng, 0.5) ? MerKind::Static : MerKind::Dynamic;
      sets.push_back(set);
    }

    bool expect_ssod_denied = false;
    bool expect_dsod_denied = false;
    for (const auto& m : sets)
    {
      if (m.kind == MerKind::Static && oracle_denies(held, candidate, m))
        expect_ssod_denied = true;
      if (m.kind == MerKind::Dynamic && oracle_denies(held, candidate, m))
        expect_dsod_denied = true;
    }

    SodDecision ssod = check_ssod(held, candidate, sets, all_roles);
    SodDecision dsod = check_dsod(held, candidate, sets, all_roles);
    CHECK(ssod.allowed == !expect_ssod_denied);
    CHECK(dsod.allowed == !expect_dsod_denied);
    if (!ssod.allowed)
    {
      REQUIRE(ssod.violating_index.has_value());
      const MerSet& m = sets[*ssod.violating_index];
      CHECK(m.kind == MerKind::Static);
      CHECK(oracle_denies(held, candidate, m));
    }
    if (!dsod.allowed)
    {
      REQUIRE(dsod.violating_index.has_value());
      const MerSet& m = sets[*dsod.violating_index];
      CHECK(m.kind == MerKind::Dynamic);
      CHECK(oracle_denies(held, candidate, m));
    }
  }
}

TEST_CASE("policy audits report users already at threshold")
{
  std::vector<MerSet> sets = {
    {{"A", "B"}, 2, MerKind::Static}, {{"A", "C"}, 2, MerKind::Dynamic}};

  std::map<std::string, std::set<std::string>> assignments = {
    {"u1", {"A", "B"}}, // static violation
    {"u2", {"A", "C"}}, // fine statically; the dynamic set ignores grants
    {"u3", {"B"}}};
  std::map<std::string, std::set<std::string>> sessions = {
    {"u2", {"A", "C"}}, // dynamic violation
    {"u3", {"A", "B"}}}; // static sets ignore sessions

  auto violations = assert_policy_consistency(assignments, sessions, sets);
  REQUIRE(violations.size() == 2);

  bool saw_static = false, saw_dynamic = false;
  for (const auto& v : violations)
  {
    if (v.scope == SodViolation::Scope::assignment)
    {
      saw_static = true;
      CHECK(v.user_pubkey == "u1");
      CHECK(v.mer_index == 0);
    }
    else
    {
      saw_dynamic = true;
      CHECK(v.user_pubkey == "u2");
      CHECK(v.mer_index == 1);
    }
  }
  CHECK(saw_static);
  CHECK(saw_dynamic);
}
