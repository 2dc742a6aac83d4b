// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/hierarchy.hpp"

#include <algorithm>
#include <functional>

namespace rolechain
{
  namespace
  {
    bool strict_superset(
      const PermissionAtomSet& a, const PermissionAtomSet& b)
    {
      if (a.size() <= b.size())
        return false;
      return std::includes(a.begin(), a.end(), b.begin(), b.end());
    }
  }

  InclusionGraph inclusion_graph(
    const std::map<std::string, PermissionAtomSet>& role_atoms)
  {
    InclusionGraph result;
    for (const auto& [id, _] : role_atoms)
      result.graph.vertices.insert(id);

    for (const auto& [a, atoms_a] : role_atoms)
    {
      for (const auto& [b, atoms_b] : role_atoms)
      {
        if (a == b)
          continue;
        if (strict_superset(atoms_a, atoms_b))
          result.graph.edges.insert({a, b});
        else if (a < b && !atoms_a.empty() && atoms_a == atoms_b)
          result.warnings.push_back(
            "roles \"" + a + "\" and \"" + b +
            "\" have identical permissions and cannot be ordered");
      }
    }
    return result;
  }

  RoleGraph transitive_reduction(const RoleGraph& g)
  {
    // Adjacency and reachability.
    std::map<std::string, std::set<std::string>> succ;
    for (const auto& v : g.vertices)
      succ[v];
    for (const auto& [from, to] : g.edges)
    {
      if (!g.vertices.count(from) || !g.vertices.count(to))
        throw Error(
          Errc::invalid_argument, "edge references unknown vertex");
      succ[from].insert(to);
    }

    // Depth-first reachability with cycle detection (colors: 0 white,
    // 1 on stack, 2 done).
    std::map<std::string, int> color;
    std::map<std::string, std::set<std::string>> reach;
    std::function<void(const std::string&)> visit =
      [&](const std::string& v) {
        color[v] = 1;
        for (const auto& w : succ[v])
        {
          if (color[w] == 1)
            throw Error(
              Errc::cycle_detected,
              "role hierarchy contains a cycle through \"" + w + "\"");
          if (color[w] == 0)
            visit(w);
          reach[v].insert(w);
          reach[v].insert(reach[w].begin(), reach[w].end());
        }
        color[v] = 2;
      };
    for (const auto& v : g.vertices)
      if (color[v] == 0)
        visit(v);

    // An edge u -> v is redundant iff some other successor of u already
    // reaches v.
    RoleGraph out;
    out.vertices = g.vertices;
    for (const auto& [u, v] : g.edges)
    {
      bool redundant = false;
      for (const auto& w : succ[u])
      {
        if (w != v && reach[w].count(v))
        {
          redundant = true;
          break;
        }
      }
      if (!redundant)
        out.edges.insert({u, v});
    }
    return out;
  }

  NormalizationResult normalize_role_hierarchy(
    const std::map<std::string, PermissionAtomSet>& role_atoms)
  {
    NormalizationResult result;
    InclusionGraph inc = inclusion_graph(role_atoms);
    result.warnings = inc.warnings;
    RoleGraph reduced = transitive_reduction(inc.graph);
    for (const auto& v : reduced.vertices)
      result.children[v];
    for (const auto& [from, to] : reduced.edges)
      result.children[from].insert(to);
    return result;
  }

  PermissionAtomSet effective_permissions(
    const std::string& role_id, const std::map<std::string, Role>& roles)
  {
    if (!roles.count(role_id))
      throw Error(Errc::unknown_role, "unknown role \"" + role_id + "\"");

    PermissionAtomSet out;
    std::set<std::string> seen;
    std::function<void(const std::string&)> visit =
      [&](const std::string& id) {
        if (!seen.insert(id).second)
          return;
        auto it = roles.find(id);
        if (it == roles.end())
          return;
        PermissionAtomSet own = atoms_of(it->second.permissions);
        out.insert(own.begin(), own.end());
        for (const auto& child : it->second.child_roles)
          visit(child);
      };
    visit(role_id);
    return out;
  }
}
