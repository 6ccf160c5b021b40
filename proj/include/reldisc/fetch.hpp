#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reldisc/corpus.hpp"
#include "reldisc/error.hpp"

namespace reldisc {

// Each failure mode of the discussions client is its own type so callers can
// react (re-authenticate, wait, retry) without parsing messages.
class FetchError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class AuthError : public FetchError {
public:
    using FetchError::FetchError;
};

class RateLimitError : public FetchError {
public:
    RateLimitError(const std::string& what, std::optional<std::chrono::seconds> retry_after)
        : FetchError(what), retry_after_(retry_after) {}

    /// How long the host asked us to wait, when it said.
    std::optional<std::chrono::seconds> retry_after() const { return retry_after_; }

private:
    std::optional<std::chrono::seconds> retry_after_;
};

class TimeoutError : public FetchError {
public:
    using FetchError::FetchError;
};

class NetworkError : public FetchError {
public:
    using FetchError::FetchError;
};

/// The host answered, but not with usable data (unexpected status, GraphQL
/// errors, malformed payload, unknown repository).
class HostError : public FetchError {
public:
    using FetchError::FetchError;
};

struct FetchOptions {
    std::string endpoint = "https://api.github.com/graphql";
    int page_size = 50;  // 1..100
    std::chrono::milliseconds timeout{30000};
    /// Project slug stamped on every record; defaults to the lowercased
    /// repository name.
    std::optional<std::string> project;
};

/// Pulls every discussion of `repo` ("owner/name") through the GraphQL
/// discussions connection, oldest first, one page at a time. Either the full
/// list is returned or an error is thrown; partial results are discarded.
std::vector<Discussion> fetch_discussions(std::string_view repo, std::string_view token,
                                          const FetchOptions& options = {});

}  // namespace reldisc
