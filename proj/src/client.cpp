// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/client.hpp"

#include "rolechain/errors.hpp"
#include "rolechain/hex.hpp"

#include <httplib.h>

namespace rolechain
{
  namespace
  {
    ApiResponse to_response(const httplib::Result& result)
    {
      if (!result)
        throw Error(
          Errc::io_error,
          "request failed: " + httplib::to_string(result.error()));
      ApiResponse r;
      r.status = result->status;
      if (!result->body.empty())
      {
        r.body = nlohmann::json::parse(result->body, nullptr, false);
        if (r.body.is_discarded())
          r.body = nlohmann::json{{"raw", result->body}};
      }
      return r;
    }
  }

  ApiClient::ApiClient(const std::string& host, int port) :
    http_(std::make_unique<httplib::Client>(host, port))
  {
    http_->set_connection_timeout(10, 0);
    http_->set_read_timeout(120, 0);
    http_->set_write_timeout(30, 0);
  }

  ApiClient::ApiClient(const std::string& base_url) :
    http_(std::make_unique<httplib::Client>(base_url))
  {
    http_->set_connection_timeout(10, 0);
    http_->set_read_timeout(120, 0);
    http_->set_write_timeout(30, 0);
  }

  ApiClient::~ApiClient() = default;

  void ApiClient::set_token(const std::string& token)
  {
    token_ = token;
  }

  ApiResponse ApiClient::get(const std::string& path)
  {
    httplib::Headers headers;
    if (!token_.empty())
      headers.emplace("Authorization", "Bearer " + token_);
    return to_response(http_->Get(path, headers));
  }

  ApiResponse ApiClient::post(
    const std::string& path, const nlohmann::json& body)
  {
    httplib::Headers headers;
    if (!token_.empty())
      headers.emplace("Authorization", "Bearer " + token_);
    return to_response(
      http_->Post(path, headers, body.dump(), "application/json"));
  }

  ApiResponse ApiClient::post_xml(
    const std::string& path, const std::string& xml)
  {
    httplib::Headers headers;
    if (!token_.empty())
      headers.emplace("Authorization", "Bearer " + token_);
    return to_response(http_->Post(path, headers, xml, "application/xml"));
  }

  ApiResponse ApiClient::request_access(
    const KeyPair& keys,
    const std::string& role_id,
    const std::string& object_id,
    const std::string& operation)
  {
    ApiResponse challenge = post("/access/challenge", nlohmann::json::object());
    if (!challenge.ok())
      return challenge;
    std::string challenge_id =
      challenge.body.at("challenge_id").get<std::string>();
    std::vector<std::uint8_t> nonce =
      from_hex(challenge.body.at("nonce").get<std::string>());
    std::string signature =
      sign_hex(keys.secret_key_hex, nonce.data(), nonce.size());
    return post(
      "/access/decide",
      {{"user_pubkey", keys.public_key_hex},
       {"role_id", role_id},
       {"object_id", object_id},
       {"operation", operation},
       {"challenge_id", challenge_id},
       {"signature", signature}});
  }
}
