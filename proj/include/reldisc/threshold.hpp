#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reldisc/corpus.hpp"
#include "reldisc/similarity.hpp"

namespace reldisc {

/// Identity of an unordered pair, stored in master/target order.
struct PairKey {
    DiscussionId master_id = 0;
    DiscussionId target_id = 0;

    auto operator<=>(const PairKey&) const = default;
};

/// Summary of the top-K distribution S and the local threshold derived
/// from it (the upper inner fence Q3 + 1.5 IQR).
struct ThresholdStats {
    std::size_t k = 0;
    std::size_t size_s = 0;
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double t_related = 0.0;

    /// IQR of zero: the fence collapses onto Q3.
    bool degenerate() const { return iqr == 0.0; }
    bool operator==(const ThresholdStats&) const = default;
};

inline constexpr double kFenceMultiplier = 1.5;

struct CandidatePair {
    DiscussionId master_id = 0;
    DiscussionId target_id = 0;
    double value = 0.0;
    std::string master_title;
    std::string target_title;
    std::optional<std::string> master_url;
    std::optional<std::string> target_url;

    PairKey key() const { return {master_id, target_id}; }
    bool operator==(const CandidatePair&) const = default;
};

/// Union over every discussion (master or target role alike) of its k best
/// partners, ranked by value descending then partner id ascending, with
/// symmetric picks merged. Sorted by key.
std::vector<PairKey> top_k(const std::vector<SimilarityRecord>& records, std::size_t k);

/// Values of the top_k pairs, ascending. Throws ValidationError when
/// `records` is empty or k is 0.
std::vector<double> build_s(const std::vector<SimilarityRecord>& records, std::size_t k);

/// Linear interpolation between closest ranks on an ascending sequence:
/// r = q (m - 1) / 100, x[floor r] + frac(r) (x[floor r + 1] - x[floor r]).
double percentile(std::span<const double> sorted_values, double q);

/// Quartiles, IQR and fence of `s` (any order). k is left at 0.
ThresholdStats local_threshold(std::span<const double> s);

/// build_s followed by local_threshold, with k filled in.
ThresholdStats compute_threshold(const std::vector<SimilarityRecord>& records, std::size_t k);

/// Every record at or above the fence, enriched from `corpus` and sorted by
/// value descending, then key. Scans all records, not only the top-K
/// support. Throws IntegrityError if a record id is missing from `corpus`.
std::vector<CandidatePair> select_candidates(const std::vector<SimilarityRecord>& records,
                                             const ThresholdStats& stats, const std::vector<Discussion>& corpus);

}  // namespace reldisc
