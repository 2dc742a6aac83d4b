// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/errors.hpp"
#include "rolechain/time.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace rolechain
{
  enum class Operation
  {
    read,
    write
  };

  // Single-letter code used in permission encodings ("R" / "W").
  char operation_code(Operation op);

  // Long form used in audit events ("Read" / "Write").
  const char* operation_name(Operation op);

  // Accepts "R", "W", "Read" or "Write". Throws ParseError otherwise.
  Operation parse_operation(const std::string& text);

  // A permission condition. Time windows include the start instant and
  // exclude the end instant: the condition holds iff start <= now < end.
  struct Condition
  {
    enum class Kind
    {
      null,
      time_window
    };

    Kind kind = Kind::null;
    Timestamp start = 0;
    Timestamp end = 0;

    static Condition none();
    static Condition window(Timestamp start, Timestamp end);

    bool operator==(const Condition&) const = default;
  };

  bool evaluate_condition(const Condition& c, Timestamp now);

  // Canonical encoding: "null" or "st:<ts>,ed:<ts>" with no spaces around
  // the comma. The decoder additionally tolerates whitespace after the
  // comma, but nothing else: reordered or truncated fields are errors.
  std::string encode_condition(const Condition& c);
  Condition decode_condition(const std::string& text);

  struct Permission
  {
    std::string object_id;
    std::set<Operation> operations;
    Condition condition;

    bool operator==(const Permission&) const = default;
  };

  // Unit of permission comparison: one object, one operation, one
  // canonically encoded condition. Two permission lists are equivalent iff
  // they expand to the same atom set.
  struct PermissionAtom
  {
    std::string object_id;
    Operation op;
    std::string condition;

    auto operator<=>(const PermissionAtom&) const = default;
  };

  using PermissionAtomSet = std::set<PermissionAtom>;

  PermissionAtomSet atoms_of(const std::vector<Permission>& permissions);

  struct Role
  {
    std::string role_id;
    Duration valid_period = 0; // seconds a grant of this role stays valid
    std::set<std::string> child_roles;
    std::vector<Permission> permissions;

    bool operator==(const Role&) const = default;
  };

  enum class MerKind
  {
    Static,
    Dynamic
  };

  const char* to_string(MerKind kind);
  MerKind mer_kind_from_string(const std::string& text);

  // Mutually exclusive role set: at most k-1 of the listed roles may be
  // held together (statically) or activated together (dynamically).
  struct MerSet
  {
    std::vector<std::string> roles;
    int cardinality = 2;
    MerKind kind = MerKind::Static;

    bool operator==(const MerSet&) const = default;
  };

  // Throws Error(schema_violation) on duplicate or empty role ids, fewer
  // than two roles, or cardinality outside [2, roles.size()].
  void validate_mer_set(const MerSet& set);

  struct RoleGrant
  {
    std::string role_id;
    Timestamp granted_at = 0;

    bool operator==(const RoleGrant&) const = default;
  };

  struct DelegationRecord
  {
    std::string delegator_pubkey;
    std::string delegate_pubkey;
    std::string role_id;
    Timestamp expires_at = 0;
    bool revoked = false;

    bool operator==(const DelegationRecord&) const = default;
  };

  struct ActiveRole
  {
    std::string role_id;
    Timestamp activated_at = 0;

    bool operator==(const ActiveRole&) const = default;
  };

  struct Session
  {
    std::string user_pubkey;
    std::vector<ActiveRole> active_roles;

    bool has_active(const std::string& role_id) const;
    bool operator==(const Session&) const = default;
  };

  enum class DenialReason
  {
    NotAssigned,
    OwnershipFailed,
    RoleExpired,
    SsodViolation,
    DsodViolation,
    PermissionMissing,
    ConditionUnsatisfied
  };

  const char* to_string(DenialReason reason);
  DenialReason denial_reason_from_string(const std::string& text);

  struct Decision
  {
    bool allowed = false;
    std::optional<DenialReason> reason;

    static Decision allow();
    static Decision deny(DenialReason reason);

    bool operator==(const Decision&) const = default;
  };

  // Audit record for a role request. Times are canonical timestamp
  // strings; user keys are opaque identifiers and never validated here so
  // that externally produced records round-trip exactly.
  struct RoleRequestEvent
  {
    std::string user_pubkey;
    std::string request_time;
    std::string required_role;
    Decision result;

    bool operator==(const RoleRequestEvent&) const = default;
  };

  struct AccessRequestEvent
  {
    std::string user_pubkey;
    std::string request_time;
    std::string object_id;
    std::string required_role;
    std::string required_operation;
    Decision result;

    bool operator==(const AccessRequestEvent&) const = default;
  };

  // JSON encodings. Field names are part of the wire and storage format.
  void to_json(nlohmann::json& j, const Condition& c);
  void from_json(const nlohmann::json& j, Condition& c);
  void to_json(nlohmann::json& j, const Permission& p);
  void from_json(const nlohmann::json& j, Permission& p);
  void to_json(nlohmann::json& j, const Role& r);
  void from_json(const nlohmann::json& j, Role& r);
  void to_json(nlohmann::json& j, const MerSet& m);
  void from_json(const nlohmann::json& j, MerSet& m);
  void to_json(nlohmann::json& j, const RoleGrant& g);
  void from_json(const nlohmann::json& j, RoleGrant& g);
  void to_json(nlohmann::json& j, const DelegationRecord& d);
  void from_json(const nlohmann::json& j, DelegationRecord& d);
  void to_json(nlohmann::json& j, const Session& s);
  void from_json(const nlohmann::json& j, Session& s);
  void to_json(nlohmann::json& j, const Decision& d);
  void from_json(const nlohmann::json& j, Decision& d);
  void to_json(nlohmann::json& j, const RoleRequestEvent& e);
  void from_json(const nlohmann::json& j, RoleRequestEvent& e);
  void to_json(nlohmann::json& j, const AccessRequestEvent& e);
  void from_json(const nlohmann::json& j, AccessRequestEvent& e);
}
