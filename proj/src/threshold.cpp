#include "reldisc/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "reldisc/error.hpp"

namespace reldisc {

namespace {

struct Pick {
    double value;
    DiscussionId partner;
    std::size_t record;
};

// Strict "a ranks ahead of b".
bool ranks_ahead(const Pick& a, const Pick& b) {
    return a.value > b.value || (a.value == b.value && a.partner < b.partner);
}

std::vector<std::size_t> top_k_records(const std::vector<SimilarityRecord>& records, std::size_t k) {
    if (k == 0) throw ValidationError("k must be >= 1");
    // Bounded heap per discussion; with ranks_ahead as the ordering the heap
    // front is the weakest pick kept so far.
    std::unordered_map<DiscussionId, std::vector<Pick>> best;
    auto offer = [&](DiscussionId node, const Pick& pick) {
        auto& heap = best[node];
        if (heap.size() < k) {
            heap.push_back(pick);
            std::push_heap(heap.begin(), heap.end(), ranks_ahead);
        } else if (ranks_ahead(pick, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), ranks_ahead);
            heap.back() = pick;
            std::push_heap(heap.begin(), heap.end(), ranks_ahead);
        }
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        offer(r.master_id, {r.value, r.target_id, i});
        offer(r.target_id, {r.value, r.master_id, i});
    }
    std::vector<std::size_t> picked;
    for (const auto& [node, heap] : best) {
        for (const auto& p : heap) picked.push_back(p.record);
    }
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    return picked;
}

}  // namespace

std::vector<PairKey> top_k(const std::vector<SimilarityRecord>& records, std::size_t k) {
    std::vector<PairKey> keys;
    for (const auto i : top_k_records(records, k)) keys.push_back({records[i].master_id, records[i].target_id});
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

std::vector<double> build_s(const std::vector<SimilarityRecord>& records, std::size_t k) {
    if (records.empty()) throw ValidationError("similarity distribution is empty (fewer than two documents)");
    std::vector<double> s;
    for (const auto i : top_k_records(records, k)) s.push_back(records[i].value);
    std::sort(s.begin(), s.end());
    return s;
}

double percentile(std::span<const double> x, double q) {
    if (x.empty()) throw ValidationError("percentile of an empty sequence");
    if (!(q >= 0.0 && q <= 100.0)) throw ValidationError("percentile rank must be in [0, 100]");
    if (!std::is_sorted(x.begin(), x.end())) throw ValidationError("percentile input must be sorted ascending");
    const double r = q * static_cast<double>(x.size() - 1) / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(r));
    if (lo + 1 >= x.size()) return x[x.size() - 1];
    const double frac = r - static_cast<double>(lo);
    if (frac == 0.0) return x[lo];
    return x[lo] + frac * (x[lo + 1] - x[lo]);
}

ThresholdStats local_threshold(std::span<const double> s) {
    if (s.empty()) throw ValidationError("similarity distribution is empty");
    std::vector<double> sorted(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    ThresholdStats stats;
    stats.size_s = sorted.size();
    stats.q1 = percentile(sorted, 25.0);
    stats.q2 = percentile(sorted, 50.0);
    stats.q3 = percentile(sorted, 75.0);
    stats.iqr = stats.q3 - stats.q1;
    stats.t_related = stats.q3 + kFenceMultiplier * stats.iqr;
    return stats;
}

ThresholdStats compute_threshold(const std::vector<SimilarityRecord>& records, std::size_t k) {
    const auto s = build_s(records, k);
    auto stats = local_threshold(s);
    stats.k = k;
    return stats;
}

std::vector<CandidatePair> select_candidates(const std::vector<SimilarityRecord>& records,
                                             const ThresholdStats& stats, const std::vector<Discussion>& corpus) {
    std::unordered_map<DiscussionId, const Discussion*> by_id;
    for (const auto& d : corpus) {
        if (!by_id.emplace(d.id, &d).second) {
            throw ValidationError("corpus holds discussion id " + std::to_string(d.id) + " more than once");
        }
    }
    auto lookup = [&](DiscussionId id) -> const Discussion& {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw IntegrityError("similarity record references unknown discussion " + std::to_string(id));
        return *it->second;
    };

    std::vector<CandidatePair> out;
    for (const auto& r : records) {
        if (!(r.value >= stats.t_related)) continue;
        const auto& master = lookup(r.master_id);
        const auto& target = lookup(r.target_id);
        out.push_back({r.master_id, r.target_id, r.value, master.title, target.title, master.url, target.url});
    }
    std::sort(out.begin(), out.end(), [](const CandidatePair& a, const CandidatePair& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.key() < b.key();
    });
    return out;
}

}  // namespace reldisc
