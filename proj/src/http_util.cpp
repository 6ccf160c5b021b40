#include "http_util.hpp"

#include "reldisc/error.hpp"

namespace reldisc::detail {

Endpoint parse_endpoint(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw ValidationError("endpoint must be an absolute URL: " + std::string(url));
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ValidationError("unsupported URL scheme: " + std::string(url));
    const auto host_start = scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    Endpoint ep;
    if (path_start == std::string_view::npos) {
        ep.origin = std::string(url);
    } else {
        ep.origin = std::string(url.substr(0, path_start));
        ep.path = std::string(url.substr(path_start));
        while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
    }
    if (ep.origin.size() == host_start) throw ValidationError("endpoint has no host: " + std::string(url));
    return ep;
}

std::unique_ptr<httplib::Client> make_client(const Endpoint& ep, std::chrono::milliseconds timeout) {
    auto client = std::make_unique<httplib::Client>(ep.origin);
    if (!client->is_valid()) throw ValidationError("invalid endpoint " + ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client->set_connection_timeout(secs.count(), usecs.count());
    client->set_read_timeout(secs.count(), usecs.count());
    client->set_write_timeout(secs.count(), usecs.count());
    return client;
}

}  // namespace reldisc::detail
