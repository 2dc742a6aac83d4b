// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/hierarchy.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace rolechain;

namespace
{
  PermissionAtom atom(const std::string& object, Operation op)
  {
    return {object, op, "null"};
  }

  // Oracle inclusion: direct membership arithmetic, no std::includes.
  RoleGraph oracle_inclusion(
    const std::map<std::string, PermissionAtomSet>& atoms)
  {
    RoleGraph g;
    for (const auto& [id, _] : atoms)
      g.vertices.insert(id);
    for (const auto& [a, sa] : atoms)
      for (const auto& [b, sb] : atoms)
      {
        if (a == b || sa.size() <= sb.size())
          continue;
        bool superset = true;
        for (const auto& x : sb)
          if (!sa.count(x))
          {
            superset = false;
            break;
          }
        if (superset)
          g.edges.insert({a, b});
      }
    return g;
  }

  bool has_path(
    const RoleGraph& g,
    const std::string& from,
    const std::string& to,
    const std::pair<std::string, std::string>& skip)
  {
    std::set<std::string> seen{from};
    std::vector<std::string> queue{from};
    while (!queue.empty())
    {
      std::string v = queue.back();
      queue.pop_back();
      for (const auto& e : g.edges)
      {
        if (e.first != v || e == skip)
          continue;
        if (e.second == to)
          return true;
        if (seen.insert(e.second).second)
          queue.push_back(e.second);
      }
    }
    return false;
  }

  // Oracle reduction: an edge is redundant iff the rest of the graph
  // still connects its endpoints.
  RoleGraph oracle_reduce(const RoleGraph& g)
  {
    RoleGraph out;
    out.vertices = g.vertices;
    for (const auto& e : g.edges)
      if (!has_path(g, e.first, e.second, e))
        out.edges.insert(e);
    return out;
  }

  std::map<std::string, std::set<std::string>> children_of(const RoleGraph& g)
  {
    std::map<std::string, std::set<std::string>> children;
    for (const auto& v : g.vertices)
      children[v];
    for (const auto& [from, to] : g.edges)
      children[from].insert(to);
    return children;
  }

  std::set<std::pair<std::string, std::string>> closure_of(const RoleGraph& g)
  {
    std::set<std::pair<std::string, std::string>> closure;
    for (const auto& u : g.vertices)
      for (const auto& v : g.vertices)
        if (u != v && has_path(g, u, v, {"", ""}))
          closure.insert({u, v});
    return closure;
  }
}

TEST_CASE("inclusion graph orders strict supersets only")
{
  std::map<std::string, PermissionAtomSet> atoms;
  atoms["Senior"] = {
    atom("A", Operation::read),
    atom("A", Operation::write),
    atom("B", Operation::read)};
  atoms["Junior"] = {atom("A", Operation::read)};
  atoms["Peer"] = {atom("B", Operation::write)};

  InclusionGraph inc = inclusion_graph(atoms);
  CHECK(inc.warnings.empty());
  CHECK(
    inc.graph.edges ==
    std::set<std::pair<std::string, std::string>>{{"Senior", "Junior"}});
}

TEST_CASE("identical non-empty permission sets warn and stay unordered")
{
  std::map<std::string, PermissionAtomSet> atoms;
  atoms["Twin1"] = {atom("A", Operation::read)};
  atoms["Twin2"] = {atom("A", Operation::read)};
  atoms["Empty1"] = {};
  atoms["Empty2"] = {};

  InclusionGraph inc = inclusion_graph(atoms);
  REQUIRE(inc.warnings.size() == 1);
  CHECK(inc.warnings[0].find("Twin1") != std::string::npos);
  CHECK(inc.warnings[0].find("Twin2") != std::string::npos);
  // The twins dominate the empty roles but not each other.
  CHECK(inc.graph.edges.count({"Twin1", "Twin2"}) == 0);
  CHECK(inc.graph.edges.count({"Twin2", "Twin1"}) == 0);
  CHECK(inc.graph.edges.count({"Twin1", "Empty1"}) == 1);
  CHECK(inc.graph.edges.count({"Empty1", "Empty2"}) == 0);
}

TEST_CASE("transitive reduction drops implied edges")
{
  RoleGraph g;
  g.vertices = {"a", "b", "c", "d"};
  g.edges = {{"a", "b"}, {"b", "c"}, {"a", "c"}, {"a", "d"}, {"c", "d"}};
  RoleGraph reduced = transitive_reduction(g);
  CHECK(
    reduced.edges ==
    std::set<std::pair<std::string, std::string>>{
      {"a", "b"}, {"b", "c"}, {"c", "d"}});
}

TEST_CASE("diamonds keep both shoulders")
{
  RoleGraph g;
  g.vertices = {"top", "l", "r", "bottom"};
  g.edges = {
    {"top", "l"}, {"top", "r"}, {"l", "bottom"}, {"r", "bottom"},
    {"top", "bottom"}};
  RoleGraph reduced = transitive_reduction(g);
  CHECK(
    reduced.edges ==
    std::set<std::pair<std::string, std::string>>{
      {"top", "l"}, {"top", "r"}, {"l", "bottom"}, {"r", "bottom"}});
}

TEST_CASE("cycles are rejected")
{
  RoleGraph g;
  g.vertices = {"a", "b", "c"};
  g.edges = {{"a", "b"}, {"b", "c"}, {"c", "a"}};
  CHECK_THROWS_AS(transitive_reduction(g), Error);
  try
  {
    transitive_reduction(g);
  }
  catch (const Error& e)
  {
    CHECK(e.code() == Errc::cycle_detected);
  }
}

TEST_CASE("normalization matches the oracle on random permission sets")
{
  test::Rng rng(7003);
  const std::vector<PermissionAtom> universe = [] {
    std::vector<PermissionAtom> u;
    for (char c = 'A'; c <= 'E'; ++c)
      for (Operation op : {Operation::read, Operation::write})
        u.push_back(atom(std::string(1, c), op));
    return u;
  }();

  for (int iter = 0; iter < 300; ++iter)
  {
    std::map<std::string, PermissionAtomSet> atoms;
    int role_count = test::pick(rng, 2, 8);
    for (int r = 0; r < role_count; ++r)
    {
      PermissionAtomSet set;
      int size = test::pick(rng, 0, 6);
      for (int k = 0; k < size; ++k)
        set.insert(universe[static_cast<std::size_t>(
          test::pick(rng, 0, static_cast<int>(universe.size()) - 1))]);
      atoms["r" + std::to_string(r)] = set;
    }

    NormalizationResult got = normalize_role_hierarchy(atoms);
    RoleGraph inclusion = oracle_inclusion(atoms);
    RoleGraph reduced = oracle_reduce(inclusion);
    CHECK(got.children == children_of(reduced));
    // Reduction preserves reachability.
    CHECK(closure_of(reduced) == closure_of(inclusion));
  }
}

TEST_CASE("normalization matches the oracle on random DAG-derived sets")
{
  test::Rng rng(7004);
  for (int iter = 0; iter < 200; ++iter)
  {
    int role_count = test::pick(rng, 2, 8);
    // Roles indexed in topological order; later roles are juniors.
    std::vector<PermissionAtomSet> sets(
      static_cast<std::size_t>(role_count));
    for (int i = role_count - 1; i >= 0; --i)
    {
      auto idx = static_cast<std::size_t>(i);
      for (int j = i + 1; j < role_count; ++j)
        if (test::chance(rng, 0.35))
        {
          const auto& junior = sets[static_cast<std::size_t>(j)];
          sets[idx].insert(junior.begin(), junior.end());
        }
      int extra = test::pick(rng, 0, 2);
      for (int k = 0; k < extra; ++k)
        sets[idx].insert(atom(
          "O" + std::to_string(test::pick(rng, 0, 11)),
          test::chance(rng, 0.5) ? Operation::read : Operation::write));
    }

    std::map<std::string, PermissionAtomSet> atoms;
    for (int i = 0; i < role_count; ++i)
      atoms["r" + std::to_string(i)] = sets[static_cast<std::size_t>(i)];

    NormalizationResult got = normalize_role_hierarchy(atoms);
    CHECK(got.children == children_of(oracle_reduce(oracle_inclusion(atoms))));
  }
}

TEST_CASE("effective permissions accumulate through the hierarchy")
{
  std::map<std::string, Role> roles;
  roles["Top"] = {"Top", 3600, {"Mid"}, {{"T", {Operation::read}, {}}}};
  roles["Mid"] = {"Mid", 3600, {"Leaf", "Ghost"}, {{"M", {Operation::write}, {}}}};
  roles["Leaf"] = {"Leaf", 3600, {}, {{"L", {Operation::read}, {}}}};

  PermissionAtomSet top = effective_permissions("Top", roles);
  CHECK(top.size() == 3);
  CHECK(top.count(atom("T", Operation::read)) == 1);
  CHECK(top.count(atom("M", Operation::write)) == 1);
  CHECK(top.count(atom("L", Operation::read)) == 1);

  PermissionAtomSet leaf = effective_permissions("Leaf", roles);
  CHECK(leaf.size() == 1);

  CHECK_THROWS_AS(effective_permissions("Nobody", roles), Error);
}
