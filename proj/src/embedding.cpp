#include "reldisc/embedding.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "http_util.hpp"
#include "lexicon.hpp"

namespace reldisc {

using nlohmann::json;

double l2_norm(const EmbeddingVector& v) {
    double sum = 0.0;
    for (const double x : v.values) sum += x * x;
    return std::sqrt(sum);
}

void ProviderConfig::validate() const {
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (parallelism < 1) throw ValidationError("parallelism must be >= 1");
    if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
    if (kind == Kind::Hash && dim < 8) throw ValidationError("hash provider needs dim >= 8");
    if (kind == Kind::Http) {
        if (endpoint.empty()) throw ValidationError("http provider needs an endpoint");
        detail::parse_endpoint(endpoint);
    }
}

std::string to_string(ProviderConfig::Kind kind) { return kind == ProviderConfig::Kind::Hash ? "hash" : "http"; }

ProviderConfig::Kind parse_provider_kind(std::string_view text) {
    if (text == "hash") return ProviderConfig::Kind::Hash;
    if (text == "http") return ProviderConfig::Kind::Http;
    throw ValidationError("unknown provider '" + std::string(text) + "' (expected hash or http)");
}

// ---------------------------------------------------------------------------
// hash provider

namespace {

constexpr std::uint64_t kHashSeed = 0x5deece66dULL;

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t token_hash(std::string_view token) { return mix64(detail::fnv1a64(token) ^ kHashSeed); }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
    if (dim < 8) throw ValidationError("hash_embed needs dim >= 8");
    EmbeddingVector v{std::vector<double>(dim, 0.0)};
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && is_space(text[pos])) ++pos;
        auto end = pos;
        while (end < text.size() && !is_space(text[end])) ++end;
        if (end > pos) {
            const auto h = token_hash(text.substr(pos, end - pos));
            const double sign = (h >> 63) ? 1.0 : -1.0;
            v.values[h % dim] += sign;
        }
        pos = end;
    }
    const double norm = l2_norm(v);
    if (norm == 0.0) throw InvariantError("hash_embed produced a zero vector (empty document reached the embedder)");
    for (auto& x : v.values) x /= norm;
    return v;
}

// ---------------------------------------------------------------------------
// http provider

namespace {

bool transient_status(int status) { return status == 429 || status >= 500; }

std::vector<EmbeddingVector> parse_embed_response(const std::string& body, std::size_t expected) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ProviderProtocolError(std::string("embedding response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("vectors") || !j["dim"].is_number_integer() ||
        !j["vectors"].is_array()) {
        throw ProviderProtocolError("embedding response must be {\"dim\": int, \"vectors\": [[...]]}");
    }
    const auto dim = j["dim"].get<long long>();
    if (dim <= 0) throw ProviderProtocolError("embedding response has non-positive dim");
    const auto& vectors = j["vectors"];
    if (vectors.size() != expected) {
        throw ProviderProtocolError("embedding response has " + std::to_string(vectors.size()) + " vectors for " +
                                    std::to_string(expected) + " texts");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(expected);
    for (const auto& row : vectors) {
        if (!row.is_array()) throw ProviderProtocolError("embedding row is not an array");
        if (row.size() != static_cast<std::size_t>(dim)) {
            throw DimensionMismatchError("embedding row of length " + std::to_string(row.size()) +
                                         " but dim is " + std::to_string(dim));
        }
        EmbeddingVector v;
        v.values.reserve(row.size());
        for (const auto& x : row) {
            if (x.is_null()) throw NonFiniteEmbeddingError("embedding contains a null/NaN entry");
            if (!x.is_number()) throw ProviderProtocolError("embedding entry is not a number");
            const double value = x.get<double>();
            if (!std::isfinite(value)) throw NonFiniteEmbeddingError("embedding contains a non-finite entry");
            v.values.push_back(value);
        }
        if (l2_norm(v) == 0.0) throw ProviderProtocolError("embedding has zero norm");
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<EmbeddingVector> post_batch(httplib::Client& client, const std::string& path,
                                        const ProviderConfig& provider, const std::vector<std::string>& texts) {
    const std::string body = json{{"texts", texts}}.dump();
    auto delay = provider.backoff;
    for (int attempt = 1;; ++attempt) {
        const bool last = attempt >= provider.max_attempts;
        auto res = client.Post(path, body, "application/json");
        if (!res) {
            if (last) {
                throw ProviderConnectionError("embedding endpoint " + provider.endpoint + ": " +
                                              httplib::to_string(res.error()));
            }
        } else if (res->status == 200) {
            return parse_embed_response(res->body, texts.size());
        } else if (last || !transient_status(res->status)) {
            throw ProviderStatusError("embedding endpoint returned HTTP " + std::to_string(res->status), res->status);
        }
        std::this_thread::sleep_for(delay);
        delay *= 2;
    }
}

std::vector<EmbeddingVector> embed_http(const ProviderConfig& provider, const std::vector<std::string>& texts) {
    // Identical texts are sent once so equal inputs always get equal vectors.
    std::vector<std::string> unique;
    std::vector<std::size_t> slot(texts.size());
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto [it, inserted] = index.emplace(texts[i], unique.size());
        if (inserted) unique.push_back(texts[i]);
        slot[i] = it->second;
    }

    const auto endpoint = detail::parse_endpoint(provider.endpoint);
    const auto path = endpoint.path + "/embed";
    const std::size_t batches = (unique.size() + provider.batch_size - 1) / provider.batch_size;
    std::vector<std::vector<EmbeddingVector>> results(batches);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        try {
            auto client = detail::make_client(endpoint, provider.timeout);
            for (auto b = next++; b < batches; b = next++) {
                const auto begin = b * provider.batch_size;
                const auto end = std::min(unique.size(), begin + provider.batch_size);
                std::vector<std::string> chunk(unique.begin() + begin, unique.begin() + end);
                results[b] = post_batch(*client, path, provider, chunk);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = batches;
        }
    };

    const auto threads = std::min(provider.parallelism, std::max<std::size_t>(batches, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::optional<std::size_t> dim;
    for (const auto& batch : results) {
        for (const auto& v : batch) {
            if (dim && *dim != v.dim()) {
                throw DimensionMismatchError("embedding dim changed between batches (" + std::to_string(*dim) +
                                             " vs " + std::to_string(v.dim()) + ")");
            }
            dim = v.dim();
        }
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto s : slot) out.push_back(results[s / provider.batch_size][s % provider.batch_size]);
    return out;
}

}  // namespace

std::vector<EmbeddingVector> embed_texts(const ProviderConfig& provider, const std::vector<std::string>& texts) {
    provider.validate();
    if (texts.empty()) return {};
    if (provider.kind == ProviderConfig::Kind::Http) return embed_http(provider, texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, provider.dim));
    return out;
}

std::vector<EmbeddingVector> embed_batch(const ProviderConfig& provider, const std::vector<PreparedDoc>& docs) {
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) {
        if (d.text.empty()) throw ValidationError("document " + std::to_string(d.discussion_id) + " has empty text");
        texts.push_back(d.text);
    }
    return embed_texts(provider, texts);
}

}  // namespace reldisc
