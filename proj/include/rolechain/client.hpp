// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "rolechain/auth.hpp"

#include <memory>
#include <string>

#include <json.hpp>

namespace httplib
{
  class Client;
}

namespace rolechain
{
  struct ApiResponse
  {
    int status = 0;
    nlohmann::json body;

    bool ok() const
    {
      return status >= 200 && status < 300;
    }
  };

  // Thin JSON-over-HTTP client for the service. Throws Error(io_error) on
  // transport failures; HTTP-level errors come back as ApiResponse.
  class ApiClient
  {
  public:
    ApiClient(const std::string& host, int port);
    explicit ApiClient(const std::string& base_url);
    ~ApiClient();

    ApiClient(const ApiClient&) = delete;
    ApiClient& operator=(const ApiClient&) = delete;

    void set_token(const std::string& token);

    ApiResponse get(const std::string& path);
    ApiResponse post(const std::string& path, const nlohmann::json& body);
    ApiResponse post_xml(const std::string& path, const std::string& xml);

    // Full challenge-response access request: fetch a challenge, sign its
    // nonce with the key pair, submit the decision request.
    ApiResponse request_access(
      const KeyPair& keys,
      const std::string& role_id,
      const std::string& object_id,
      const std::string& operation);

  private:
    std::unique_ptr<httplib::Client> http_;
    std::string token_;
  };
}
