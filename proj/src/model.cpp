// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/model.hpp"

#include <algorithm>

namespace rolechain
{
  char operation_code(Operation op)
  {
    return op == Operation::read ? 'R' : 'W';
  }

  const char* operation_name(Operation op)
  {
    return op == Operation::read ? "Read" : "Write";
  }

  Operation parse_operation(const std::string& text)
  {
    if (text == "R" || text == "Read")
      return Operation::read;
    if (text == "W" || text == "Write")
      return Operation::write;
    throw ParseError(
      Errc::parse_error, "unknown operation \"" + text + "\"");
  }

  Condition Condition::none()
  {
    return {};
  }

  Condition Condition::window(Timestamp start, Timestamp end)
  {
    Condition c;
    c.kind = Kind::time_window;
    c.start = start;
    c.end = end;
    return c;
  }

  bool evaluate_condition(const Condition& c, Timestamp now)
  {
    if (c.kind == Condition::Kind::null)
      return true;
    return now >= c.start && now < c.end;
  }

  std::string encode_condition(const Condition& c)
  {
    if (c.kind == Condition::Kind::null)
      return "null";
    return "st:" + format_timestamp(c.start) + ",ed:" + format_timestamp(c.end);
  }

  Condition decode_condition(const std::string& text)
  {
    if (text == "null")
      return Condition::none();

    auto fail = [&](const char* why) -> Condition {
      throw ParseError(
        Errc::parse_error,
        std::string("invalid condition \"") + text + "\": " + why);
    };

    // "st:<19-char ts>,<optional spaces>ed:<19-char ts>"
    if (text.rfind("st:", 0) != 0)
      return fail("expected \"null\" or \"st:...\"");
    std::size_t pos = 3;
    if (text.size() < pos + 19)
      return fail("truncated start timestamp");
    std::string start_text = text.substr(pos, 19);
    pos += 19;
    if (pos >= text.size() || text[pos] != ',')
      return fail("expected ',' after start timestamp");
    ++pos;
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
      ++pos;
    if (text.compare(pos, 3, "ed:") != 0)
      return fail("expected \"ed:\" after start timestamp");
    pos += 3;
    if (text.size() < pos + 19)
      return fail("truncated end timestamp");
    std::string end_text = text.substr(pos, 19);
    pos += 19;
    if (pos != text.size())
      return fail("trailing characters");

    Timestamp start = parse_timestamp(start_text);
    Timestamp end = parse_timestamp(end_text);
    if (start >= end)
      return fail("start must precede end");
    return Condition::window(start, end);
  }

  PermissionAtomSet atoms_of(const std::vector<Permission>& permissions)
  {
    PermissionAtomSet atoms;
    for (const auto& p : permissions)
    {
      std::string cond = encode_condition(p.condition);
      for (Operation op : p.operations)
        atoms.insert({p.object_id, op, cond});
    }
    return atoms;
  }

  const char* to_string(MerKind kind)
  {
    return kind == MerKind::Static ? "Static" : "Dynamic";
  }

  MerKind mer_kind_from_string(const std::string& text)
  {
    if (text == "Static")
      return MerKind::Static;
    if (text == "Dynamic")
      return MerKind::Dynamic;
    throw ParseError(
      Errc::schema_violation, "unknown MER set kind \"" + text + "\"");
  }

  void validate_mer_set(const MerSet& set)
  {
    if (set.roles.size() < 2)
      throw Error(
        Errc::schema_violation, "MER set needs at least two roles");
    std::set<std::string> seen;
    for (const auto& r : set.roles)
    {
      if (r.empty())
        throw Error(Errc::schema_violation, "MER set contains empty role id");
      if (!seen.insert(r).second)
        throw Error(
          Errc::schema_violation, "MER set lists role \"" + r + "\" twice");
    }
    if (set.cardinality < 2 ||
        static_cast<std::size_t>(set.cardinality) > set.roles.size())
      throw Error(
        Errc::schema_violation,
        "MER set cardinality " + std::to_string(set.cardinality) +
          " outside [2, " + std::to_string(set.roles.size()) + "]");
  }

  bool Session::has_active(const std::string& role_id) const
  {
    return std::any_of(
      active_roles.begin(), active_roles.end(), [&](const ActiveRole& a) {
        return a.role_id == role_id;
      });
  }

  const char* to_string(DenialReason reason)
  {
    switch (reason)
    {
      case DenialReason::NotAssigned:
        return "NotAssigned";
      case DenialReason::OwnershipFailed:
        return "OwnershipFailed";
      case DenialReason::RoleExpired:
        return "RoleExpired";
      case DenialReason::SsodViolation:
        return "SsodViolation";
      case DenialReason::DsodViolation:
        return "DsodViolation";
      case DenialReason::PermissionMissing:
        return "PermissionMissing";
      case DenialReason::ConditionUnsatisfied:
        return "ConditionUnsatisfied";
    }
    return "Unknown";
  }

  DenialReason denial_reason_from_string(const std::string& text)
  {
    static const std::map<std::string, DenialReason> table = {
      {"NotAssigned", DenialReason::NotAssigned},
      {"OwnershipFailed", DenialReason::OwnershipFailed},
      {"RoleExpired", DenialReason::RoleExpired},
      {"SsodViolation", DenialReason::SsodViolation},
      {"DsodViolation", DenialReason::DsodViolation},
      {"PermissionMissing", DenialReason::PermissionMissing},
      {"ConditionUnsatisfied", DenialReason::ConditionUnsatisfied}};
    auto it = table.find(text);
    if (it == table.end())
      throw ParseError(
        Errc::parse_error, "unknown denial reason \"" + text + "\"");
    return it->second;
  }

  Decision Decision::allow()
  {
    return {true, std::nullopt};
  }

  Decision Decision::deny(DenialReason reason)
  {
    return {false, reason};
  }

  void to_json(nlohmann::json& j, const Condition& c)
  {
    j = encode_condition(c);
  }

  void from_json(const nlohmann::json& j, Condition& c)
  {
    c = decode_condition(j.get<std::string>());
  }

  void to_json(nlohmann::json& j, const Permission& p)
  {
    nlohmann::json ops = nlohmann::json::array();
    for (Operation op : p.operations)
      ops.push_back(std::string(1, operation_code(op)));
    j = nlohmann::json{
      {"object_id", p.object_id},
      {"operations", ops},
      {"condition", encode_condition(p.condition)}};
  }

  void from_json(const nlohmann::json& j, Permission& p)
  {
    p.object_id = j.at("object_id").get<std::string>();
    p.operations.clear();
    for (const auto& op : j.at("operations"))
      p.operations.insert(parse_operation(op.get<std::string>()));
    // An absent condition means "null" (unconditional).
    p.condition = j.contains("condition") ?
      decode_condition(j.at("condition").get<std::string>()) :
      Condition::none();
  }

  void to_json(nlohmann::json& j, const Role& r)
  {
    j = nlohmann::json{
      {"role_id", r.role_id},
      {"valid_period", r.valid_period},
      {"child_roles", r.child_roles},
      {"permissions", r.permissions}};
  }

  void from_json(const nlohmann::json& j, Role& r)
  {
    r.role_id = j.at("role_id").get<std::string>();
    r.valid_period = j.at("valid_period").get<Duration>();
    r.child_roles.clear();
    if (j.contains("child_roles"))
      r.child_roles = j.at("child_roles").get<std::set<std::string>>();
    r.permissions.clear();
    if (j.contains("permissions"))
      r.permissions = j.at("permissions").get<std::vector<Permission>>();
  }

  void to_json(nlohmann::json& j, const MerSet& m)
  {
    j = nlohmann::json{
      {"roles", m.roles}, {"k", m.cardinality}, {"kind", to_string(m.kind)}};
  }

  void from_json(const nlohmann::json& j, MerSet& m)
  {
    m.roles = j.at("roles").get<std::vector<std::string>>();
    m.cardinality = j.at("k").get<int>();
    m.kind = mer_kind_from_string(j.at("kind").get<std::string>());
  }

  void to_json(nlohmann::json& j, const RoleGrant& g)
  {
    j = nlohmann::json{
      {"role_id", g.role_id}, {"granted_at", format_timestamp(g.granted_at)}};
  }

  void from_json(const nlohmann::json& j, RoleGrant& g)
  {
    g.role_id = j.at("role_id").get<std::string>();
    g.granted_at = parse_timestamp(j.at("granted_at").get<std::string>());
  }

  void to_json(nlohmann::json& j, const DelegationRecord& d)
  {
    j = nlohmann::json{
      {"delegator_pubkey", d.delegator_pubkey},
      {"delegate_pubkey", d.delegate_pubkey},
      {"role_id", d.role_id},
      {"expires_at", format_timestamp(d.expires_at)},
      {"revoked", d.revoked}};
  }

  void from_json(const nlohmann::json& j, DelegationRecord& d)
  {
    d.delegator_pubkey = j.at("delegator_pubkey").get<std::string>();
    d.delegate_pubkey = j.at("delegate_pubkey").get<std::string>();
    d.role_id = j.at("role_id").get<std::string>();
    d.expires_at = parse_timestamp(j.at("expires_at").get<std::string>());
    d.revoked = j.value("revoked", false);
  }

  void to_json(nlohmann::json& j, const Session& s)
  {
    nlohmann::json actives = nlohmann::json::array();
    for (const auto& a : s.active_roles)
      actives.push_back(
        {{"role_id", a.role_id},
         {"activated_at", format_timestamp(a.activated_at)}});
    j = nlohmann::json{
      {"user_pubkey", s.user_pubkey}, {"active_roles", actives}};
  }

  void from_json(const nlohmann::json& j, Session& s)
  {
    s.user_pubkey = j.at("user_pubkey").get<std::string>();
    s.active_roles.clear();
    for (const auto& a : j.at("active_roles"))
      s.active_roles.push_back(
        {a.at("role_id").get<std::string>(),
         parse_timestamp(a.at("activated_at").get<std::string>())});
  }

  void to_json(nlohmann::json& j, const Decision& d)
  {
    j = nlohmann::json{{"result", d.allowed ? "Allowed" : "Denied"}};
    if (!d.allowed && d.reason)
      j["reason"] = to_string(*d.reason);
  }

  void from_json(const nlohmann::json& j, Decision& d)
  {
    std::string result = j.at("result").get<std::string>();
    if (result == "Allowed")
    {
      d = Decision::allow();
    }
    else if (result == "Denied")
    {
      d.allowed = false;
      d.reason.reset();
      if (j.contains("reason"))
        d.reason = denial_reason_from_string(j.at("reason").get<std::string>());
    }
    else
    {
      throw ParseError(
        Errc::parse_error, "unknown decision result \"" + result + "\"");
    }
  }

  void to_json(nlohmann::json& j, const RoleRequestEvent& e)
  {
    j = nlohmann::json{
      {"user_pubkey", e.user_pubkey},
      {"request_time", e.request_time},
      {"required_role", e.required_role}};
    nlohmann::json result;
    to_json(result, e.result);
    j["result"] = result.at("result");
    if (result.contains("reason"))
      j["reason"] = result.at("reason");
  }

  void from_json(const nlohmann::json& j, RoleRequestEvent& e)
  {
    e.user_pubkey = j.at("user_pubkey").get<std::string>();
    e.request_time = j.at("request_time").get<std::string>();
    e.required_role = j.at("required_role").get<std::string>();
    from_json(j, e.result);
  }

  void to_json(nlohmann::json& j, const AccessRequestEvent& e)
  {
    j = nlohmann::json{
      {"user_pubkey", e.user_pubkey},
      {"request_time", e.request_time},
      {"object_id", e.object_id},
      {"required_role", e.required_role},
      {"required_operation", e.required_operation}};
    nlohmann::json result;
    to_json(result, e.result);
    j["result"] = result.at("result");
    if (result.contains("reason"))
      j["reason"] = result.at("reason");
  }

  void from_json(const nlohmann::json& j, AccessRequestEvent& e)
  {
    e.user_pubkey = j.at("user_pubkey").get<std::string>();
    e.request_time = j.at("request_time").get<std::string>();
    e.object_id = j.at("object_id").get<std::string>();
    e.required_role = j.at("required_role").get<std::string>();
    e.required_operation = j.at("required_operation").get<std::string>();
    from_json(j, e.result);
  }
}
