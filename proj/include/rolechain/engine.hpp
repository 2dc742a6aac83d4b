// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/auth.hpp"
#include "rolechain/hierarchy.hpp"
#include "rolechain/ledger.hpp"
#include "rolechain/model.hpp"
#include "rolechain/sod.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rolechain
{
  // Who is invoking a chaincode method. Administrators manage policy; the
  // credential service provider (CSP) mediates user-facing requests after
  // authenticating them. End users never invoke methods directly.
  struct CallerIdentity
  {
    enum class Kind
    {
      admin,
      csp
    };

    Kind kind = Kind::admin;

    static CallerIdentity admin()
    {
      return {Kind::admin};
    }

    static CallerIdentity csp()
    {
      return {Kind::csp};
    }

    const char* invoker_string() const
    {
      return kind == Kind::admin ? "admin" : "csp";
    }
  };

  struct TxRef
  {
    std::uint64_t seq = 0;
    std::string tx_hash_hex;
  };

  struct SetSodResult
  {
    TxRef tx;
    std::vector<SodViolation> violations;
  };

  struct NormalizeOutcome
  {
    TxRef tx;
    std::map<std::string, std::set<std::string>> children;
    std::vector<std::string> warnings;
  };

  // Outcome of a decision-producing method. event_tx records the decision;
  // op_tx is present when an Allowed decision also committed an operation
  // transaction.
  struct DecisionOutcome
  {
    Decision decision;
    TxRef event_tx;
    std::optional<TxRef> op_tx;
  };

  struct ChallengeProof
  {
    std::string challenge_id;
    std::string signature_hex;
  };

  // The policy engine: all chaincode methods over one ledger. Mutations
  // are serialized by an internal mutex; each method appends its
  // transactions and returns only after they are durable.
  class Engine
  {
  public:
    Engine(
      Ledger& ledger,
      ClockPtr clock,
      Duration challenge_ttl_seconds = ChallengeStore::default_ttl_seconds);

    // --- administration -------------------------------------------------

    TxRef set_role_configuration(
      const CallerIdentity& caller,
      const std::string& role_id,
      const std::vector<Permission>& permissions,
      Duration valid_period_seconds);

    SetSodResult set_sod_constraint(
      const CallerIdentity& caller, const MerSet& set);

    NormalizeOutcome normalize_role_hierarchy(const CallerIdentity& caller);

    TxRef role_revocation(
      const CallerIdentity& caller,
      const std::string& user_pubkey,
      const std::string& role_id);

    TxRef set_delegation(
      const CallerIdentity& caller,
      const std::string& delegator_pubkey,
      const std::string& delegate_pubkey,
      const std::string& role_id,
      Timestamp expires_at);

    // --- user-facing decisions (invoked by the CSP) ----------------------

    DecisionOutcome request_role_for_user(
      const CallerIdentity& caller,
      const std::string& user_pubkey,
      const std::string& required_role);

    DecisionOutcome activate_role(
      const CallerIdentity& caller,
      const std::string& user_pubkey,
      const std::string& role_id);

    DecisionOutcome request_access_to_res(
      const CallerIdentity& caller,
      const std::string& user_pubkey,
      const std::string& role_id,
      const std::string& object_id,
      Operation operation,
      const ChallengeProof& proof);

    // --- audit ingestion --------------------------------------------------

    TxRef append_req_role_history_entity(
      const CallerIdentity& caller, const RoleRequestEvent& event);

    TxRef append_req_history_entity(
      const CallerIdentity& caller, const AccessRequestEvent& event);

    // --- challenges -------------------------------------------------------

    ChallengeStore::Issued issue_challenge();

    // --- views (copies, taken under the engine lock) ---------------------

    std::map<std::string, Role> roles() const;
    std::vector<MerSet> mer_sets() const;
    std::map<std::string, std::vector<RoleGrant>> assignments() const;
    std::vector<DelegationRecord> delegations() const;
    std::map<std::string, Session> sessions() const;
    PermissionAtomSet effective_permissions_of(const std::string& role_id) const;

    // Rebuilds the assignment map purely from RequestRoleForUser and
    // RoleRevocation transactions, ignoring the world state.
    std::map<std::string, std::vector<RoleGrant>> assignments_from_events()
      const;

    // Audits current assignments and sessions against all MER sets.
    std::vector<SodViolation> policy_violations() const;

    const Ledger& ledger() const
    {
      return ledger_;
    }

  private:
    void require_admin(const CallerIdentity& caller) const;
    void require_csp(const CallerIdentity& caller) const;

    void load_state();
    void write_genesis();

    std::set<std::string> known_role_ids_locked() const;
    const RoleGrant* find_grant_locked(
      const std::string& user_pubkey, const std::string& role_id) const;
    bool grant_expired_locked(const RoleGrant& grant, Timestamp now) const;
    std::set<std::string> held_roles_locked(
      const std::string& user_pubkey, Timestamp now) const;
    std::set<std::string> active_roles_locked(
      const std::string& user_pubkey) const;

    nlohmann::json assignment_value_locked(const std::string& user_pubkey)
      const;
    nlohmann::json session_value_locked(const std::string& user_pubkey) const;

    TxRef append_tx_locked(
      const CallerIdentity& caller,
      const std::string& method,
      nlohmann::json payload);
    TxRef append_role_event_locked(
      const CallerIdentity& caller, const RoleRequestEvent& event);
    TxRef append_access_event_locked(
      const CallerIdentity& caller, const AccessRequestEvent& event);
    TxRef revoke_locked(
      const CallerIdentity& caller,
      const std::string& user_pubkey,
      const std::string& role_id);

    Ledger& ledger_;
    ClockPtr clock_;
    ChallengeStore challenges_;

    mutable std::mutex mu_;
    std::map<std::string, Role> roles_;
    std::vector<MerSet> mer_sets_;
    std::map<std::string, std::vector<RoleGrant>> assignments_;
    std::vector<DelegationRecord> delegations_;
    std::map<std::string, Session> sessions_;
    std::uint64_t last_seq_ = 0;
  };
}
