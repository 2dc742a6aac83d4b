// Copyright (c) the rolechain authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "rolechain/service.hpp"

#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

int main(int argc, char** argv)
{
  CLI::App app{"rolechaind: RBAC policy service"};
  std::string config_path;
  bool check_only = false;
  app.add_option("--config", config_path, "service configuration file")
    ->required();
  app.add_flag(
    "--check", check_only, "validate the configuration and exit");
  CLI11_PARSE(app, argc, argv);

  try
  {
    rolechain::ServiceConfig config =
      rolechain::ServiceConfig::from_file(config_path);
    if (check_only)
    {
      std::cout << "configuration ok\n";
      return 0;
    }

    // Block termination signals before any thread exists so that every
    // thread inherits the mask and only sigwait below observes them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    rolechain::Service service(std::move(config));
    service.start();
    std::cout << "listening on " << service.base_url() << "\n"
              << "ledger at " << service.config().ledger_path.string()
              << " (" << service.ledger().size() << " transactions)\n";
    std::cout.flush();

    int signal = 0;
    sigwait(&signals, &signal);
    std::cout << "shutting down on signal " << signal << "\n";
    service.stop();
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
