#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <httplib.h>

namespace reldisc::detail {

/// "https://host:port/prefix" split into what httplib::Client wants and the
/// path prefix to prepend to every request.
struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // "" or "/prefix" without trailing slash
};

Endpoint parse_endpoint(std::string_view url);

std::unique_ptr<httplib::Client> make_client(const Endpoint& ep, std::chrono::milliseconds timeout);

}  // namespace reldisc::detail
