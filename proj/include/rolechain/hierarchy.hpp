// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/model.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace rolechain
{
  // Directed graph over role ids; an edge (parent, child) means the parent
  // dominates the child.
  struct RoleGraph
  {
    std::set<std::string> vertices;
    std::set<std::pair<std::string, std::string>> edges;

    bool operator==(const RoleGraph&) const = default;
  };

  struct InclusionGraph
  {
    RoleGraph graph;
    std::vector<std::string> warnings;
  };

  // Builds the permission-inclusion graph: edge A -> B iff A's atom set is
  // a strict superset of B's. Roles with identical non-empty atom sets get
  // no edge in either direction and produce a warning, since a hierarchy
  // cannot order them.
  InclusionGraph inclusion_graph(
    const std::map<std::string, PermissionAtomSet>& role_atoms);

  // Transitive reduction of a DAG: drops every edge implied by a longer
  // path. Unique for acyclic inputs. Throws Error(cycle_detected) if the
  // input has a cycle.
  RoleGraph transitive_reduction(const RoleGraph& g);

  struct NormalizationResult
  {
    // Minimal child sets per role; every role id appears as a key.
    std::map<std::string, std::set<std::string>> children;
    std::vector<std::string> warnings;
  };

  // Full pipeline: inclusion graph, then transitive reduction.
  NormalizationResult normalize_role_hierarchy(
    const std::map<std::string, PermissionAtomSet>& role_atoms);

  // Union of a role's own atoms and those of all transitive children.
  // Throws Error(unknown_role) for an unknown id; unknown child references
  // are ignored (they cannot contribute permissions).
  PermissionAtomSet effective_permissions(
    const std::string& role_id, const std::map<std::string, Role>& roles);
}
