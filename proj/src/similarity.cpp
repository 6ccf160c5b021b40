#include "reldisc/similarity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <thread>
#include <tuple>

#include "atomic_file.hpp"
#include "reldisc/error.hpp"
#include "text_util.hpp"

namespace reldisc {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("cosine of vectors with different dims (" + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()) + ")");
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    const double norms = l2_norm(a) * l2_norm(b);
    if (!(norms > 0.0)) throw ValidationError("cosine of a zero vector");
    return std::clamp(dot / norms, -1.0, 1.0);
}

std::vector<SimilarityRecord> pairwise(const std::vector<PreparedDoc>& docs,
                                       const std::vector<EmbeddingVector>& vectors, unsigned threads) {
    if (docs.size() != vectors.size()) {
        throw ValidationError("pairwise: " + std::to_string(docs.size()) + " documents but " +
                              std::to_string(vectors.size()) + " vectors");
    }
    {
        std::set<DiscussionId> ids;
        for (const auto& d : docs) {
            if (!ids.insert(d.discussion_id).second) {
                throw ValidationError("pairwise: discussion id " + std::to_string(d.discussion_id) +
                                      " appears twice (filter by project first)");
            }
        }
    }

    const std::size_t n = docs.size();
    std::vector<SimilarityRecord> out(n < 2 ? 0 : n * (n - 1) / 2);
    // Row i of the upper triangle starts at i*n - i(i+1)/2.
    auto fill_row = [&](std::size_t i) {
        std::size_t k = i * n - i * (i + 1) / 2;
        for (std::size_t j = i + 1; j < n; ++j, ++k) {
            const auto& a = docs[i];
            const auto& b = docs[j];
            const bool a_first = a.created_at < b.created_at ||
                                 (a.created_at == b.created_at && a.discussion_id < b.discussion_id);
            const double value = cosine(vectors[i], vectors[j]);
            out[k] = a_first ? SimilarityRecord{a.discussion_id, b.discussion_id, value}
                             : SimilarityRecord{b.discussion_id, a.discussion_id, value};
        }
    };

    if (threads <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fill_row(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < n; i += threads) fill_row(i);
            });
        }
    }

    std::sort(out.begin(), out.end(), [](const SimilarityRecord& x, const SimilarityRecord& y) {
        return std::tie(x.master_id, x.target_id) < std::tie(y.master_id, y.target_id);
    });
    return out;
}

std::string format_exact(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_similarity_csv(std::ostream& out, const std::vector<SimilarityRecord>& records) {
    out << "master_id,target_id,value\n";
    for (const auto& r : records) out << r.master_id << ',' << r.target_id << ',' << format_exact(r.value) << '\n';
}

namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* what) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ParseError(line, std::string("bad ") + what + " '" + std::string(field) + "'");
    return value;
}

}  // namespace

std::vector<SimilarityRecord> read_similarity_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing similarity header");
    ++line_no;
    if (detail::trim(line) != "master_id,target_id,value") throw ParseError(1, "unexpected similarity header");
    std::vector<SimilarityRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = detail::trim(line);
        if (row.empty()) continue;
        const auto c1 = row.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
        if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected three columns");
        }
        SimilarityRecord r;
        r.master_id = parse_field<DiscussionId>(row.substr(0, c1), line_no, "master_id");
        r.target_id = parse_field<DiscussionId>(row.substr(c1 + 1, c2 - c1 - 1), line_no, "target_id");
        r.value = parse_field<double>(row.substr(c2 + 1), line_no, "value");
        if (!std::isfinite(r.value)) throw ParseError(line_no, "non-finite similarity");
        out.push_back(r);
    }
    return out;
}

void save_similarity_file(const std::filesystem::path& path, const std::vector<SimilarityRecord>& records) {
    detail::write_atomically(path, [&](std::ostream& out) { write_similarity_csv(out, records); });
}

std::vector<SimilarityRecord> load_similarity_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open similarity file " + path.string());
    return read_similarity_csv(in);
}

}  // namespace reldisc
