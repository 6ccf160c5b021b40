#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "reldisc/embedding.hpp"
#include "reldisc/preprocess.hpp"

namespace reldisc {

/// Similarity of one unordered pair. The master is the older post; on equal
/// timestamps the smaller id is the master.
struct SimilarityRecord {
    DiscussionId master_id = 0;
    DiscussionId target_id = 0;
    double value = 0.0;

    bool operator==(const SimilarityRecord&) const = default;
};

/// dot(a, b) / (|a| |b|), clamped into [-1, 1] to absorb rounding.
/// Throws ValidationError on a dimension mismatch or a zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// All n(n-1)/2 pair similarities, sorted by (master_id, target_id).
/// `docs` and `vectors` are positionally aligned and ids must be unique.
/// The result does not depend on `threads`.
std::vector<SimilarityRecord> pairwise(const std::vector<PreparedDoc>& docs,
                                       const std::vector<EmbeddingVector>& vectors, unsigned threads = 1);

/// Similarity file: CSV, header "master_id,target_id,value", values with 17
/// significant digits so they read back bit-identical.
void write_similarity_csv(std::ostream& out, const std::vector<SimilarityRecord>& records);
std::vector<SimilarityRecord> read_similarity_csv(std::istream& in);
void save_similarity_file(const std::filesystem::path& path, const std::vector<SimilarityRecord>& records);
std::vector<SimilarityRecord> load_similarity_file(const std::filesystem::path& path);

/// "%.17g"
std::string format_exact(double value);

}  // namespace reldisc
