// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/engine.hpp"

#include <algorithm>

namespace rolechain
{
  namespace
  {
    constexpr const char* assign_prefix = "assign/";
    constexpr const char* role_prefix = "role/";
    constexpr const char* mer_prefix = "mer/";
    constexpr const char* deleg_prefix = "deleg/";
    constexpr const char* session_prefix = "session/";

    nlohmann::json write_entry(const std::string& key, nlohmann::json value)
    {
      return nlohmann::json{{"key", key}, {"value", std::move(value)}};
    }

    nlohmann::json delete_entry(const std::string& key)
    {
      return nlohmann::json{{"key", key}, {"delete", true}};
    }

    bool parse_index(
      const std::string& key, const char* prefix, std::size_t& index)
    {
      std::string_view k(key);
      std::string_view p(prefix);
      if (k.substr(0, p.size()) != p)
        return false;
      std::string suffix(k.substr(p.size()));
      if (suffix.empty())
        return false;
      try
      {
        std::size_t consumed = 0;
        index = std::stoull(suffix, &consumed);
        return consumed == suffix.size();
      }
      catch (const std::exception&)
      {
        return false;
      }
    }

    void validate_pubkey(const std::string& pubkey, const char* what)
    {
      if (!is_pubkey_hex(pubkey))
        throw Error(
          Errc::invalid_argument,
          std::string(what) + " must be a 64-character hex public key");
    }
  }

  Engine::Engine(Ledger& ledger, ClockPtr clock, Duration challenge_ttl) :
    ledger_(ledger),
    clock_(std::move(clock)),
    challenges_(clock_, challenge_ttl)
  {
    if (!clock_)
      throw Error(Errc::config_error, "engine needs a clock");
    if (ledger_.size() == 0)
      write_genesis();
    else
      load_state();
  }

  void Engine::write_genesis()
  {
    nlohmann::json payload{
      {"args",
       {{"hash_algorithm", "SHA-256"},
        {"signature_scheme", "Ed25519"},
        {"challenge_ttl_seconds", challenges_.ttl_seconds()},
        {"nonce_bytes", ChallengeStore::nonce_bytes}}},
      {"writes",
       {write_entry("config/hash_algorithm", "SHA-256"),
        write_entry("config/signature_scheme", "Ed25519"),
        write_entry("config/challenge_ttl_seconds", challenges_.ttl_seconds()),
        write_entry(
          "config/nonce_bytes",
          static_cast<std::uint64_t>(ChallengeStore::nonce_bytes))}}};
    auto r = ledger_.append("system", "Genesis", payload);
    ledger_.wait_durable(r.seq);
  }

  void Engine::load_state()
  {
    auto snapshot = ledger_.state_snapshot();
    std::map<std::size_t, MerSet> mer_by_index;
    std::map<std::size_t, DelegationRecord> deleg_by_index;

    for (const auto& [key, value] : snapshot)
    {
      std::size_t index = 0;
      if (key.rfind(role_prefix, 0) == 0)
      {
        Role role = value.get<Role>();
        roles_[role.role_id] = std::move(role);
      }
      else if (parse_index(key, mer_prefix, index))
      {
        mer_by_index[index] = value.get<MerSet>();
      }
      else if (key.rfind(assign_prefix, 0) == 0)
      {
        assignments_[key.substr(std::string(assign_prefix).size())] =
          value.get<std::vector<RoleGrant>>();
      }
      else if (parse_index(key, deleg_prefix, index))
      {
        deleg_by_index[index] = value.get<DelegationRecord>();
      }
      else if (key.rfind(session_prefix, 0) == 0)
      {
        Session s = value.get<Session>();
        sessions_[s.user_pubkey] = std::move(s);
      }
    }

    for (auto& [index, set] : mer_by_index)
    {
      if (index != mer_sets_.size())
        throw Error(
          Errc::chain_corrupt, "MER set indices are not dense");
      mer_sets_.push_back(std::move(set));
    }
    for (auto& [index, record] : deleg_by_index)
    {
      if (index != delegations_.size())
        throw Error(
          Errc::chain_corrupt, "delegation indices are not dense");
      delegations_.push_back(std::move(record));
    }
  }

  void Engine::require_admin(const CallerIdentity& caller) const
  {
    if (caller.kind != CallerIdentity::Kind::admin)
      throw Error(
        Errc::unauthorized_caller, "method restricted to administrators");
  }

  void Engine::require_csp(const CallerIdentity& caller) const
  {
    if (caller.kind != CallerIdentity::Kind::csp)
      throw Error(
        Errc::unauthorized_caller,
        "method restricted to the credential service provider");
  }

  std::set<std::string> Engine::known_role_ids_locked() const
  {
    std::set<std::string> out;
    for (const auto& [id, _] : roles_)
      out.insert(id);
    return out;
  }

  const RoleGrant* Engine::find_grant_locked(
    const std::string& user_pubkey, const std::string& role_id) const
  {
    auto it = assignments_.find(user_pubkey);
    if (it == assignments_.end())
      return nullptr;
    for (const auto& grant : it->second)
      if (grant.role_id == role_id)
        return &grant;
    return nullptr;
  }

  bool Engine::grant_expired_locked(
    const RoleGrant& grant, Timestamp now) const
  {
    auto it = roles_.find(grant.role_id);
    if (it == roles_.end())
      return true;
    return now >= grant.granted_at + it->second.valid_period;
  }

  std::set<std::string> Engine::held_roles_locked(
    const std::string& user_pubkey, Timestamp now) const
  {
    std::set<std::string> held;
    auto it = assignments_.find(user_pubkey);
    if (it != assignments_.end())
      for (const auto& grant : it->second)
        if (!grant_expired_locked(grant, now))
          held.insert(grant.role_id);
    for (const auto& d : delegations_)
    {
      if (d.delegate_pubkey != user_pubkey || d.revoked)
        continue;
      if (now >= d.expires_at)
        continue;
      if (find_grant_locked(d.delegator_pubkey, d.role_id) == nullptr)
        continue;
      held.insert(d.role_id);
    }
    return held;
  }

  std::set<std::string> Engine::active_roles_locked(
    const std::string& user_pubkey) const
  {
    std::set<std::string> out;
    auto it = sessions_.find(user_pubkey);
    if (it != sessions_.end())
      for (const auto& a : it->second.active_roles)
        out.insert(a.role_id);
    return out;
  }

  nlohmann::json Engine::assignment_value_locked(
    const std::string& user_pubkey) const
  {
    auto it = assignments_.find(user_pubkey);
    if (it == assignments_.end())
      return nlohmann::json::array();
    return nlohmann::json(it->second);
  }

  nlohmann::json Engine::session_value_locked(
    const std::string& user_pubkey) const
  {
    auto it = sessions_.find(user_pubkey);
    if (it == sessions_.end())
      return nlohmann::json(Session{user_pubkey, {}});
    return nlohmann::json(it->second);
  }

  TxRef Engine::append_tx_locked(
    const CallerIdentity& caller,
    const std::string& method,
    nlohmann::json payload)
  {
    auto r = ledger_.append(caller.invoker_string(), method, payload);
    last_seq_ = r.seq;
    return {r.seq, digest_hex(r.tx_hash)};
  }

  TxRef Engine::append_role_event_locked(
    const CallerIdentity& caller, const RoleRequestEvent& event)
  {
    nlohmann::json payload{{"args", event}};
    return append_tx_locked(caller, "AppendReqRoleHistoryEntity", payload);
  }

  TxRef Engine::append_access_event_locked(
    const CallerIdentity& caller, const AccessRequestEvent& event)
  {
    nlohmann::json payload{{"args", event}};
    return append_tx_locked(caller, "AppendReqHistoryEntity", payload);
  }

  TxRef Engine::set_role_configuration(
    const CallerIdentity& caller,
    const std::string& role_id,
    const std::vector<Permission>& permissions,
    Duration valid_period_seconds)
  {
    require_admin(caller);
    if (role_id.empty())
      throw Error(Errc::invalid_argument, "role id must not be empty");
    if (valid_period_seconds <= 0)
      throw Error(
        Errc::invalid_valid_period, "valid period must be positive seconds");
    for (const auto& p : permissions)
    {
      if (p.object_id.empty())
        throw Error(
          Errc::invalid_permission, "permission object id must not be empty");
      if (p.operations.empty())
        throw Error(
          Errc::invalid_permission,
          "permission needs at least one operation");
      if (
        p.condition.kind == Condition::Kind::time_window &&
        p.condition.start >= p.condition.end)
        throw Error(
          Errc::invalid_permission, "condition window start must precede end");
    }

    TxRef tx;
    {
      std::lock_guard<std::mutex> guard(mu_);
      if (roles_.count(role_id))
        throw Error(
          Errc::duplicate_role, "role \"" + role_id + "\" already exists");

      Role role{role_id, valid_period_seconds, {}, permissions};
      nlohmann::json payload{
        {"args",
         {{"role_id", role_id},
          {"valid_period", valid_period_seconds},
          {"permissions", permissions}}},
        {"writes", {write_entry(role_prefix + role_id, role)}}};
      tx = append_tx_locked(caller, "SetRoleConfiguration", payload);
      roles_[role_id] = std::move(role);
    }
    ledger_.wait_durable(tx.seq);
    return tx;
  }

  SetSodResult Engine::set_sod_constraint(
    const CallerIdentity& caller, const MerSet& set)
  {
    require_admin(caller);
    validate_mer_set(set);

    SetSodResult result;
    {
      std::lock_guard<std::mutex> guard(mu_);
      auto known = known_role_ids_locked();
      for (const auto& role : set.roles)
        if (!known.count(role))
          throw Error(
            Errc::unknown_role,
            "MER set references unknown role \"" + role + "\"");

      std::map<std::string, std::set<std::string>> assigned, active;
      for (const auto& [user, grants] : assignments_)
        for (const auto& g : grants)
          assigned[user].insert(g.role_id);
      for (const auto& [user, session] : sessions_)
        for (const auto& a : session.active_roles)
          active[user].insert(a.role_id);

      std::size_t index = mer_sets_.size();
      result.violations =
        assert_policy_consistency(assigned, active, {set});
      for (auto& v : result.violations)
        v.mer_index = index;

      nlohmann::json payload{
        {"args", {{"set", set}}},
        {"result", {{"violations", result.violations}}},
        {"writes",
         {write_entry(mer_prefix + std::to_string(index), set)}}};
      result.tx = append_tx_locked(caller, "SetSoDConstraint", payload);
      mer_sets_.push_back(set);
    }
    ledger_.wait_durable(result.tx.seq);
    return result;
  }

  NormalizeOutcome Engine::normalize_role_hierarchy(
    const CallerIdentity& caller)
  {
    require_admin(caller);

    NormalizeOutcome outcome;
    {
      std::lock_guard<std::mutex> guard(mu_);
      std::map<std::string, PermissionAtomSet> role_atoms;
      for (const auto& [id, role] : roles_)
        role_atoms[id] = atoms_of(role.permissions);

      NormalizationResult normalized =
        rolechain::normalize_role_hierarchy(role_atoms);
      outcome.children = normalized.children;
      outcome.warnings = normalized.warnings;

      nlohmann::json children_json = nlohmann::json::object();
      for (const auto& [id, kids] : outcome.children)
        children_json[id] = kids;

      nlohmann::json writes = nlohmann::json::array();
      for (auto& [id, role] : roles_)
      {
        role.child_roles = outcome.children.at(id);
        writes.push_back(write_entry(role_prefix + id, role));
      }
      nlohmann::json payload{
        {"args", nlohmann::json::object()},
        {"result",
         {{"children", children_json}, {"warnings", outcome.warnings}}},
        {"writes", writes}};
      outcome.tx =
        append_tx_locked(caller, "NormalizeRoleHierarchy", payload);
    }
    ledger_.wait_durable(outcome.tx.seq);
    return outcome;
  }

  TxRef Engine::revoke_locked(
    const CallerIdentity& caller,
    const std::string& user_pubkey,
    const std::string& role_id)
  {
    auto it = assignments_.find(user_pubkey);
    bool found = false;
    if (it != assignments_.end())
    {
      auto& grants = it->second;
      auto g = std::find_if(
        grants.begin(), grants.end(), [&](const RoleGrant& grant) {
          return grant.role_id == role_id;
        });
      if (g != grants.end())
      {
        grants.erase(g);
        found = true;
      }
    }
    if (!found)
      throw Error(
        Errc::not_assigned,
        "user does not hold role \"" + role_id + "\"");

    nlohmann::json writes = nlohmann::json::array();
    if (it->second.empty())
    {
      assignments_.erase(it);
      writes.push_back(delete_entry(assign_prefix + user_pubkey));
    }
    else
    {
      writes.push_back(
        write_entry(assign_prefix + user_pubkey, it->second));
    }

    auto s = sessions_.find(user_pubkey);
    if (s != sessions_.end() && s->second.has_active(role_id))
    {
      auto& actives = s->second.active_roles;
      actives.erase(
        std::remove_if(
          actives.begin(),
          actives.end(),
          [&](const ActiveRole& a) { return a.role_id == role_id; }),
        actives.end());
      if (actives.empty())
      {
        sessions_.erase(s);
        writes.push_back(delete_entry(session_prefix + user_pubkey));
      }
      else
      {
        writes.push_back(
          write_entry(session_prefix + user_pubkey, s->second));
      }
    }

    for (std::size_t i = 0; i < delegations_.size(); ++i)
    {
      auto& d = delegations_[i];
      if (d.delegator_pubkey == user_pubkey && d.role_id == role_id &&
          !d.revoked)
      {
        d.revoked = true;
        writes.push_back(
          write_entry(deleg_prefix + std::to_string(i), d));
      }
    }

    nlohmann::json payload{
      {"args", {{"user_pubkey", user_pubkey}, {"role_id", role_id}}},
      {"writes", writes}};
    return append_tx_locked(caller, "RoleRevocation", payload);
  }

  TxRef Engine::role_revocation(
    const CallerIdentity& caller,
    const std::string& user_pubkey,
    const std::string& role_id)
  {
    // Either an administrator or the CSP (for automatic expiry) may revoke.
    validate_pubkey(user_pubkey, "user_pubkey");

    TxRef tx;
    {
      std::lock_guard<std::mutex> guard(mu_);
      if (!roles_.count(role_id))
        throw Error(
          Errc::unknown_role, "unknown role \"" + role_id + "\"");
      tx = revoke_locked(caller, user_pubkey, role_id);
    }
    ledger_.wait_durable(tx.seq);
    return tx;
  }

  TxRef Engine::set_delegation(
    const CallerIdentity& caller,
    const std::string& delegator_pubkey,
    const std::string& delegate_pubkey,
    const std::string& role_id,
    Timestamp expires_at)
  {
    require_admin(caller);
    validate_pubkey(delegator_pubkey, "delegator_pubkey");
    validate_pubkey(delegate_pubkey, "delegate_pubkey");
    if (delegator_pubkey == delegate_pubkey)
      throw Error(
        Errc::self_delegation, "delegator and delegate must differ");

    TxRef tx;
    {
      std::lock_guard<std::mutex> guard(mu_);
      Timestamp now = clock_->now();
      if (expires_at <= now)
        throw Error(
          Errc::invalid_argument, "delegation expiry must lie in the future");
      if (!roles_.count(role_id))
        throw Error(Errc::unknown_role, "unknown role \"" + role_id + "\"");

      const RoleGrant* grant = find_grant_locked(delegator_pubkey, role_id);
      if (grant == nullptr)
        throw Error(
          Errc::delegator_lacks_role,
          "delegator does not hold role \"" + role_id + "\"");
      if (grant_expired_locked(*grant, now))
        throw Error(
          Errc::delegator_lacks_role,
          "delegator's grant of role \"" + role_id + "\" has expired");

      for (const auto& d : delegations_)
        if (
          d.delegator_pubkey == delegator_pubkey &&
          d.delegate_pubkey == delegate_pubkey && d.role_id == role_id &&
          !d.revoked && now < d.expires_at)
          throw Error(
            Errc::already_assigned, "an equivalent delegation is active");

      auto held = held_roles_locked(delegate_pubkey, now);
      SodDecision sod =
        check_ssod(held, role_id, mer_sets_, known_role_ids_locked());
      if (!sod.allowed)
        throw Error(
          Errc::sod_violation,
          "delegating \"" + role_id +
            "\" would violate static separation-of-duty set " +
            std::to_string(*sod.violating_index));

      DelegationRecord record{
        delegator_pubkey, delegate_pubkey, role_id, expires_at, false};
      std::size_t index = delegations_.size();
      nlohmann::json payload{
        {"args",
         {{"delegator_pubkey", delegator_pubkey},
          {"delegate_pubkey", delegate_pubkey},
          {"role_id", role_id},
          {"expires_at", format_timestamp(expires_at)}}},
        {"writes",
         {write_entry(deleg_prefix + std::to_string(index), record)}}};
      tx = append_tx_locked(caller, "SetDelegation", payload);
      delegations_.push_back(std::move(record));
    }
    ledger_.wait_durable(tx.seq);
    return tx;
  }

  DecisionOutcome Engine::request_role_for_user(
    const CallerIdentity& caller,
    const std::string& user_pubkey,
    const std::string& required_role)
  {
    require_admin(caller);
    validate_pubkey(user_pubkey, "user_pubkey");

    DecisionOutcome outcome;
    std::uint64_t last = 0;
    {
      std::lock_guard<std::mutex> guard(mu_);
      if (!roles_.count(required_role))
        throw Error(
          Errc::unknown_role, "unknown role \"" + required_role + "\"");

      Timestamp now = clock_->now();
      const RoleGrant* existing = find_grant_locked(user_pubkey, required_role);
      if (existing != nullptr && !grant_expired_locked(*existing, now))
        throw Error(
          Errc::already_assigned,
          "user already holds role \"" + required_role + "\"");

      auto held = held_roles_locked(user_pubkey, now);
      SodDecision sod =
        check_ssod(held, required_role, mer_sets_, known_role_ids_locked());
      outcome.decision = sod.allowed ?
        Decision::allow() :
        Decision::deny(DenialReason::SsodViolation);

      RoleRequestEvent event{
        user_pubkey, format_timestamp(now), required_role, outcome.decision};
      outcome.event_tx = append_role_event_locked(caller, event);
      last = outcome.event_tx.seq;

      if (outcome.decision.allowed)
      {
        auto& grants = assignments_[user_pubkey];
        bool replaced = false;
        for (auto& g : grants)
        {
          if (g.role_id == required_role)
          {
            g.granted_at = now;
            replaced = true;
            break;
          }
        }
        if (!replaced)
          grants.push_back({required_role, now});

        nlohmann::json payload{
          {"args",
           {{"user_pubkey", user_pubkey}, {"required_role", required_role}}},
          {"writes",
           {write_entry(assign_prefix + user_pubkey, grants)}}};
        outcome.op_tx =
          append_tx_locked(caller, "RequestRoleForUser", payload);
        last = outcome.op_tx->seq;
      }
    }
    ledger_.wait_durable(last);
    return outcome;
  }

  DecisionOutcome Engine::activate_role(
    const CallerIdentity& caller,
    const std::string& user_pubkey,
    const std::string& role_id)
  {
    require_csp(caller);
    validate_pubkey(user_pubkey, "user_pubkey");

    DecisionOutcome outcome;
    std::uint64_t last = 0;
    {
      std::lock_guard<std::mutex> guard(mu_);
      if (!roles_.count(role_id))
        throw Error(Errc::unknown_role, "unknown role \"" + role_id + "\"");

      Timestamp now = clock_->now();
      const RoleGrant* grant = find_grant_locked(user_pubkey, role_id);
      std::vector<const DelegationRecord*> live_delegations;
      for (const auto& d : delegations_)
        if (
          d.delegate_pubkey == user_pubkey && d.role_id == role_id &&
          !d.revoked && now < d.expires_at &&
          find_grant_locked(d.delegator_pubkey, d.role_id) != nullptr)
          live_delegations.push_back(&d);

      Decision decision = Decision::allow();
      bool write_session = false;
      std::optional<std::string> revoke_target;

      if (grant == nullptr && live_delegations.empty())
      {
        decision = Decision::deny(DenialReason::NotAssigned);
      }
      else if (grant != nullptr)
      {
        if (grant_expired_locked(*grant, now))
        {
          decision = Decision::deny(DenialReason::RoleExpired);
          revoke_target = user_pubkey;
        }
      }
      else
      {
        bool any_live_cap = false;
        for (const auto* d : live_delegations)
        {
          const RoleGrant* source =
            find_grant_locked(d->delegator_pubkey, d->role_id);
          if (source && !grant_expired_locked(*source, now))
            any_live_cap = true;
        }
        if (!any_live_cap)
        {
          decision = Decision::deny(DenialReason::RoleExpired);
          revoke_target = live_delegations.front()->delegator_pubkey;
        }
      }

      if (decision.allowed)
      {
        auto active = active_roles_locked(user_pubkey);
        if (!active.count(role_id))
        {
          SodDecision sod =
            check_dsod(active, role_id, mer_sets_, known_role_ids_locked());
          if (!sod.allowed)
            decision = Decision::deny(DenialReason::DsodViolation);
          else
            write_session = true;
        }
      }

      nlohmann::json payload{
        {"args", {{"user_pubkey", user_pubkey}, {"role_id", role_id}}},
        {"result", decision}};
      if (write_session)
      {
        auto& session = sessions_[user_pubkey];
        session.user_pubkey = user_pubkey;
        session.active_roles.push_back({role_id, now});
        payload["writes"] = nlohmann::json::array(
          {write_entry(session_prefix + user_pubkey, session)});
      }
      outcome.decision = decision;
      outcome.event_tx = append_tx_locked(caller, "ActivateRole", payload);
      last = outcome.event_tx.seq;

      if (revoke_target)
        last = revoke_locked(caller, *revoke_target, role_id).seq;
    }
    ledger_.wait_durable(last);
    return outcome;
  }

  DecisionOutcome Engine::request_access_to_res(
    const CallerIdentity& caller,
    const std::string& user_pubkey,
    const std::string& role_id,
    const std::string& object_id,
    Operation operation,
    const ChallengeProof& proof)
  {
    require_csp(caller);
    validate_pubkey(user_pubkey, "user_pubkey");
    if (object_id.empty())
      throw Error(Errc::invalid_argument, "object id must not be empty");

    DecisionOutcome outcome;
    std::uint64_t last = 0;
    {
      std::lock_guard<std::mutex> guard(mu_);
      if (!roles_.count(role_id))
        throw Error(Errc::unknown_role, "unknown role \"" + role_id + "\"");

      Timestamp now = clock_->now();
      const RoleGrant* grant = find_grant_locked(user_pubkey, role_id);
      std::vector<const DelegationRecord*> live_delegations;
      for (const auto& d : delegations_)
        if (
          d.delegate_pubkey == user_pubkey && d.role_id == role_id &&
          !d.revoked && now < d.expires_at &&
          find_grant_locked(d.delegator_pubkey, d.role_id) != nullptr)
          live_delegations.push_back(&d);

      Decision decision = Decision::allow();
      bool write_session = false;
      std::optional<std::string> revoke_target;

      // 1. The user must hold the role, directly or by delegation.
      if (grant == nullptr && live_delegations.empty())
      {
        decision = Decision::deny(DenialReason::NotAssigned);
      }

      // 2. Proof of key ownership.
      if (decision.allowed)
      {
        auto status = challenges_.verify_and_consume(
          proof.challenge_id, user_pubkey, proof.signature_hex);
        if (status != ChallengeStore::VerifyStatus::ok)
          decision = Decision::deny(DenialReason::OwnershipFailed);
      }

      // 3. Grant validity. A direct grant expires valid_period seconds
      //    after it was made; a delegated role is capped by the
      //    delegator's own grant.
      if (decision.allowed)
      {
        if (grant != nullptr)
        {
          if (grant_expired_locked(*grant, now))
          {
            decision = Decision::deny(DenialReason::RoleExpired);
            revoke_target = user_pubkey;
          }
        }
        else
        {
          bool any_live_cap = false;
          for (const auto* d : live_delegations)
          {
            const RoleGrant* source =
              find_grant_locked(d->delegator_pubkey, d->role_id);
            if (source && !grant_expired_locked(*source, now))
              any_live_cap = true;
          }
          if (!any_live_cap)
          {
            decision = Decision::deny(DenialReason::RoleExpired);
            revoke_target = live_delegations.front()->delegator_pubkey;
          }
        }
      }

      // 4. The role must be active in the session, or activatable now
      //    under dynamic separation of duty.
      if (decision.allowed)
      {
        auto active = active_roles_locked(user_pubkey);
        if (!active.count(role_id))
        {
          SodDecision sod =
            check_dsod(active, role_id, mer_sets_, known_role_ids_locked());
          if (!sod.allowed)
            decision = Decision::deny(DenialReason::DsodViolation);
          else
            write_session = true;
        }
      }

      // 5. The role's effective permissions must cover the object and
      //    operation, and 6. some covering permission's condition must
      //    hold now.
      if (decision.allowed)
      {
        PermissionAtomSet atoms =
          rolechain::effective_permissions(role_id, roles_);
        bool object_match = false;
        bool condition_match = false;
        for (const auto& atom : atoms)
        {
          if (atom.object_id != object_id || atom.op != operation)
            continue;
          object_match = true;
          if (evaluate_condition(decode_condition(atom.condition), now))
          {
            condition_match = true;
            break;
          }
        }
        if (!object_match)
          decision = Decision::deny(DenialReason::PermissionMissing);
        else if (!condition_match)
          decision = Decision::deny(DenialReason::ConditionUnsatisfied);
      }

      AccessRequestEvent event{
        user_pubkey,
        format_timestamp(now),
        object_id,
        role_id,
        operation_name(operation),
        decision};
      outcome.decision = decision;
      outcome.event_tx = append_access_event_locked(caller, event);
      last = outcome.event_tx.seq;

      if (revoke_target)
        last = revoke_locked(caller, *revoke_target, role_id).seq;

      if (decision.allowed)
      {
        nlohmann::json payload{
          {"args",
           {{"user_pubkey", user_pubkey},
            {"role_id", role_id},
            {"object_id", object_id},
            {"operation", operation_name(operation)}}},
          {"result", decision}};
        if (write_session)
        {
          auto& session = sessions_[user_pubkey];
          session.user_pubkey = user_pubkey;
          session.active_roles.push_back({role_id, now});
          payload["writes"] = nlohmann::json::array(
            {write_entry(session_prefix + user_pubkey, session)});
        }
        outcome.op_tx =
          append_tx_locked(caller, "RequestAccessToRes", payload);
        last = outcome.op_tx->seq;
      }
    }
    ledger_.wait_durable(last);
    return outcome;
  }

  TxRef Engine::append_req_role_history_entity(
    const CallerIdentity& caller, const RoleRequestEvent& event)
  {
    if (event.user_pubkey.empty() || event.required_role.empty() ||
        event.request_time.empty())
      throw Error(
        Errc::invalid_argument,
        "role request events need user_pubkey, request_time and "
        "required_role");
    TxRef tx;
    {
      std::lock_guard<std::mutex> guard(mu_);
      tx = append_role_event_locked(caller, event);
    }
    ledger_.wait_durable(tx.seq);
    return tx;
  }

  TxRef Engine::append_req_history_entity(
    const CallerIdentity& caller, const AccessRequestEvent& event)
  {
    require_csp(caller);
    if (event.user_pubkey.empty() || event.required_role.empty() ||
        event.request_time.empty() || event.object_id.empty() ||
        event.required_operation.empty())
      throw Error(
        Errc::invalid_argument,
        "access request events need user_pubkey, request_time, object_id, "
        "required_role and required_operation");
    TxRef tx;
    {
      std::lock_guard<std::mutex> guard(mu_);
      tx = append_access_event_locked(caller, event);
    }
    ledger_.wait_durable(tx.seq);
    return tx;
  }

  ChallengeStore::Issued Engine::issue_challenge()
  {
    return challenges_.issue();
  }

  std::map<std::string, Role> Engine::roles() const
  {
    std::lock_guard<std::mutex> guard(mu_);
    return roles_;
  }

  std::vector<MerSet> Engine::mer_sets() const
  {
    std::lock_guard<std::mutex> guard(mu_);
    return mer_sets_;
  }

  std::map<std::string, std::vector<RoleGrant>> Engine::assignments() const
  {
    std::lock_guard<std::mutex> guard(mu_);
    return assignments_;
  }

  std::vector<DelegationRecord> Engine::delegations() const
  {
    std::lock_guard<std::mutex> guard(mu_);
    return delegations_;
  }

  std::map<std::string, Session> Engine::sessions() const
  {
    std::lock_guard<std::mutex> guard(mu_);
    return sessions_;
  }

  PermissionAtomSet Engine::effective_permissions_of(
    const std::string& role_id) const
  {
    std::lock_guard<std::mutex> guard(mu_);
    return rolechain::effective_permissions(role_id, roles_);
  }

  std::map<std::string, std::vector<RoleGrant>>
  Engine::assignments_from_events() const
  {
    std::map<std::string, std::vector<RoleGrant>> out;
    for (const auto& tx : ledger_.transactions())
    {
      nlohmann::json payload =
        nlohmann::json::parse(tx.payload, nullptr, false);
      if (payload.is_discarded() || !payload.contains("args"))
        continue;
      const auto& args = payload.at("args");
      if (tx.method == "RequestRoleForUser")
      {
        std::string user = args.at("user_pubkey").get<std::string>();
        std::string role = args.at("required_role").get<std::string>();
        auto& grants = out[user];
        bool replaced = false;
        for (auto& g : grants)
        {
          if (g.role_id == role)
          {
            g.granted_at = tx.timestamp;
            replaced = true;
            break;
          }
        }
        if (!replaced)
          grants.push_back({role, tx.timestamp});
      }
      else if (tx.method == "RoleRevocation")
      {
        std::string user = args.at("user_pubkey").get<std::string>();
        std::string role = args.at("role_id").get<std::string>();
        auto it = out.find(user);
        if (it == out.end())
          continue;
        auto& grants = it->second;
        grants.erase(
          std::remove_if(
            grants.begin(),
            grants.end(),
            [&](const RoleGrant& g) { return g.role_id == role; }),
          grants.end());
        if (grants.empty())
          out.erase(it);
      }
    }
    return out;
  }

  std::vector<SodViolation> Engine::policy_violations() const
  {
    std::lock_guard<std::mutex> guard(mu_);
    std::map<std::string, std::set<std::string>> assigned, active;
    for (const auto& [user, grants] : assignments_)
      for (const auto& g : grants)
        assigned[user].insert(g.role_id);
    for (const auto& [user, session] : sessions_)
      for (const auto& a : session.active_roles)
        active[user].insert(a.role_id);
    return assert_policy_consistency(assigned, active, mer_sets_);
  }
}
