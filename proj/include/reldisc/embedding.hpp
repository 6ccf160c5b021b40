#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "reldisc/error.hpp"
#include "reldisc/preprocess.hpp"

namespace reldisc {

/// Dense document vector. Every vector handed out by a provider has finite
/// entries and a strictly positive norm.
struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

double l2_norm(const EmbeddingVector& v);

struct ProviderConfig {
    enum class Kind { Hash, Http };

    Kind kind = Kind::Hash;
    std::size_t dim = 768;  // hash provider only
    std::string endpoint;   // http provider: base URL, "/embed" is appended
    std::size_t batch_size = 32;
    std::size_t parallelism = 1;  // in-flight batches per endpoint
    int max_attempts = 3;
    std::chrono::milliseconds backoff{200};  // doubled after each failed attempt
    std::chrono::milliseconds timeout{60000};

    /// Throws ValidationError on out-of-range settings.
    void validate() const;

    bool operator==(const ProviderConfig&) const = default;
};

std::string to_string(ProviderConfig::Kind kind);
ProviderConfig::Kind parse_provider_kind(std::string_view text);

// http provider failures, one type per cause.
class EmbeddingError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class ProviderConnectionError : public EmbeddingError {
public:
    using EmbeddingError::EmbeddingError;
};

class ProviderStatusError : public EmbeddingError {
public:
    ProviderStatusError(const std::string& what, int status) : EmbeddingError(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

class DimensionMismatchError : public EmbeddingError {
public:
    using EmbeddingError::EmbeddingError;
};

class NonFiniteEmbeddingError : public EmbeddingError {
public:
    using EmbeddingError::EmbeddingError;
};

/// Response was not the documented JSON shape.
class ProviderProtocolError : public EmbeddingError {
public:
    using EmbeddingError::EmbeddingError;
};

/// Signed feature hashing of whitespace tokens into `dim` buckets followed
/// by L2 normalization. Order-insensitive and deterministic across
/// platforms; it tracks vocabulary overlap only and carries no semantics.
/// Throws ValidationError if dim < 8 and InvariantError if the accumulated
/// vector is zero (empty text).
EmbeddingVector hash_embed(std::string_view text, std::size_t dim);

/// One vector per text, in input order.
std::vector<EmbeddingVector> embed_texts(const ProviderConfig& provider, const std::vector<std::string>& texts);

std::vector<EmbeddingVector> embed_batch(const ProviderConfig& provider, const std::vector<PreparedDoc>& docs);

}  // namespace reldisc
