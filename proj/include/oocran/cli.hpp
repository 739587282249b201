#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "oocran/http.hpp"

namespace oocran {

using CliTransport = std::function<HttpResult(const std::string& method, const std::string& path,
                                              const std::string& body, const std::string& idempotency_key)>;

/// Runs one command line (without argv[0]). `transport` replaces the HTTP
/// client when set. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            CliTransport transport = nullptr);

/// Adapts a Service to the CLI transport, skipping the socket.
CliTransport in_process_transport(Service& service);

}  // namespace oocran
