#include "reldisc/fetch.hpp"

#include <json.hpp>

#include "http_util.hpp"
#include "text_util.hpp"

namespace reldisc {

using nlohmann::json;

namespace {

constexpr const char* kDiscussionsQuery =
    "query($owner: String!, $name: String!, $first: Int!, $after: String) {"
    " repository(owner: $owner, name: $name) {"
    " discussions(first: $first, after: $after, orderBy: {field: CREATED_AT, direction: ASC}) {"
    " pageInfo { hasNextPage endCursor }"
    " nodes { number title body createdAt url author { login } category { slug } }"
    " } } }";

std::optional<std::chrono::seconds> retry_after_of(const httplib::Response& res) {
    if (res.has_header("Retry-After")) {
        try {
            return std::chrono::seconds(std::stoll(res.get_header_value("Retry-After")));
        } catch (const std::exception&) {
        }
    }
    if (res.has_header("X-RateLimit-Reset")) {
        try {
            const auto reset = std::chrono::seconds(std::stoll(res.get_header_value("X-RateLimit-Reset")));
            const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch());
            return reset > now ? reset - now : std::chrono::seconds(0);
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

[[noreturn]] void raise_transport(httplib::Error err, const std::string& where) {
    const auto msg = where + ": " + httplib::to_string(err);
    switch (err) {
        case httplib::Error::ConnectionTimeout:
        case httplib::Error::Read:
            throw TimeoutError(msg);
        default:
            throw NetworkError(msg);
    }
}

void check_status(const httplib::Response& res) {
    if (res.status == 200) return;
    const auto status = std::to_string(res.status);
    const bool exhausted = res.has_header("X-RateLimit-Remaining") &&
                           res.get_header_value("X-RateLimit-Remaining") == "0";
    if (res.status == 429 || (res.status == 403 && (exhausted || res.has_header("Retry-After")))) {
        throw RateLimitError("rate limited (HTTP " + status + ")", retry_after_of(res));
    }
    if (res.status == 401 || res.status == 403) throw AuthError("authentication failed (HTTP " + status + ")");
    throw HostError("unexpected HTTP status " + status);
}

void check_graphql_errors(const json& body, const httplib::Response& res) {
    const auto errors = body.find("errors");
    if (errors == body.end() || !errors->is_array() || errors->empty()) return;
    const auto& first = (*errors)[0];
    const auto type = first.value("type", std::string{});
    const auto message = first.value("message", std::string{"GraphQL error"});
    if (type == "RATE_LIMITED") throw RateLimitError(message, retry_after_of(res));
    if (type == "FORBIDDEN" || type == "UNAUTHORIZED") throw AuthError(message);
    throw HostError(message);
}

Discussion to_discussion(const json& node, const std::string& project) {
    Discussion d;
    d.id = node.at("number").get<DiscussionId>();
    d.project = project;
    const auto& category = node.at("category");
    d.category = category.is_object() ? category.value("slug", std::string{}) : std::string{};
    const auto& author = node.at("author");
    // Deleted accounts come back as null.
    d.author = author.is_object() ? author.value("login", std::string{"ghost"}) : std::string{"ghost"};
    d.created_at = parse_timestamp(node.at("createdAt").get<std::string>());
    d.title = node.at("title").get<std::string>();
    d.body = node.at("body").is_string() ? node.at("body").get<std::string>() : std::string{};
    if (node.contains("url") && node.at("url").is_string()) d.url = node.at("url").get<std::string>();
    validate(d);
    return d;
}

}  // namespace

std::vector<Discussion> fetch_discussions(std::string_view repo, std::string_view token, const FetchOptions& options) {
    const auto slash = repo.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == repo.size() ||
        repo.find('/', slash + 1) != std::string_view::npos) {
        throw ValidationError("repository must look like OWNER/NAME, got '" + std::string(repo) + "'");
    }
    if (options.page_size < 1 || options.page_size > 100) throw ValidationError("page_size must be in [1, 100]");
    if (token.empty()) throw AuthError("no access token supplied");

    const std::string owner(repo.substr(0, slash));
    const std::string name(repo.substr(slash + 1));
    const std::string project = options.project.value_or(detail::ascii_lower(name));

    const auto endpoint = detail::parse_endpoint(options.endpoint);
    auto client = detail::make_client(endpoint, options.timeout);
    const std::string path = endpoint.path.empty() ? "/" : endpoint.path;
    const httplib::Headers headers = {
        {"Authorization", "bearer " + std::string(token)},
        {"Accept", "application/vnd.github+json"},
        {"User-Agent", "reldisc"},
    };

    std::vector<Discussion> out;
    std::optional<std::string> cursor;
    while (true) {
        json variables = {{"owner", owner}, {"name", name}, {"first", options.page_size}};
        variables["after"] = cursor ? json(*cursor) : json(nullptr);
        const json request = {{"query", kDiscussionsQuery}, {"variables", variables}};

        auto res = client->Post(path, headers, request.dump(), "application/json");
        if (!res) raise_transport(res.error(), "POST " + options.endpoint);
        check_status(*res);

        json body;
        try {
            body = json::parse(res->body);
        } catch (const json::exception& e) {
            throw HostError(std::string("malformed response: ") + e.what());
        }
        check_graphql_errors(body, *res);

        try {
            const auto& repository = body.at("data").at("repository");
            if (repository.is_null()) throw HostError("repository " + std::string(repo) + " not found");
            const auto& connection = repository.at("discussions");
            for (const auto& node : connection.at("nodes")) {
                if (node.is_null()) continue;
                out.push_back(to_discussion(node, project));
            }
            const auto& page = connection.at("pageInfo");
            if (!page.at("hasNextPage").get<bool>()) break;
            const auto& end = page.at("endCursor");
            if (!end.is_string()) throw HostError("hasNextPage set without an endCursor");
            cursor = end.get<std::string>();
        } catch (const json::exception& e) {
            throw HostError(std::string("unexpected response shape: ") + e.what());
        } catch (const ValidationError& e) {
            throw HostError(std::string("invalid discussion in response: ") + e.what());
        }
    }
    return out;
}

}  // namespace reldisc
