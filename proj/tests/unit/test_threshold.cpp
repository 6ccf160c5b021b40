#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "reldisc/threshold.hpp"
#include "test_support.hpp"

using namespace reldisc;

namespace {

const std::vector<SimilarityRecord> kFour = {
    {1, 2, 0.9}, {1, 3, 0.5}, {1, 4, 0.1}, {2, 3, 0.4}, {2, 4, 0.3}, {3, 4, 0.2},
};

std::vector<Discussion> corpus_for(std::initializer_list<DiscussionId> ids) {
    std::vector<Discussion> out;
    for (const auto id : ids) out.push_back(testing::make_discussion(id, "title " + std::to_string(id)));
    return out;
}

std::vector<SimilarityRecord> random_records(std::mt19937_64& rng, std::size_t n, int levels) {
    std::uniform_int_distribution<int> v(0, levels);
    std::vector<double> values;
    for (std::size_t i = 0; i < n * (n - 1) / 2; ++i) values.push_back(v(rng) / static_cast<double>(levels));
    return testing::records_from_values(n, values);
}

}  // namespace

TEST_CASE("percentile by linear interpolation between closest ranks") {
    const std::vector<double> x = {1, 2, 3, 4};
    CHECK(percentile(x, 0) == 1);
    CHECK(percentile(x, 25) == 1.75);
    CHECK(percentile(x, 50) == 2.5);
    CHECK(percentile(x, 75) == 3.25);
    CHECK(percentile(x, 100) == 4);
    CHECK(percentile(std::vector<double>{7}, 25) == 7);
    CHECK(percentile(std::vector<double>{1, 3}, 50) == 2);
    CHECK_THROWS_AS(percentile(std::vector<double>{}, 50), ValidationError);
    CHECK_THROWS_AS(percentile(std::vector<double>{2, 1}, 50), ValidationError);
    CHECK_THROWS_AS(percentile(x, 101), ValidationError);
    CHECK_THROWS_AS(percentile(x, -1), ValidationError);
}

TEST_CASE("local threshold is the upper inner fence") {
    const std::vector<double> s = {0.4, 0.535, 0.6, 0.665, 0.7};
    const auto st = local_threshold(s);
    CHECK(st.q1 == 0.535);
    CHECK(st.q3 == 0.665);
    CHECK(st.iqr == doctest::Approx(0.13));
    CHECK(st.t_related == doctest::Approx(0.86));
    CHECK(std::abs(st.t_related - 0.8592) < 0.01);
    CHECK(st.size_s == 5);
    CHECK(local_threshold(std::vector<double>{0.7, 0.4, 0.665, 0.6, 0.535}) == st);
    CHECK_THROWS_AS(local_threshold(std::vector<double>{}), ValidationError);

    const auto flat = local_threshold(std::vector<double>{0.5, 0.5, 0.5});
    CHECK(flat.degenerate());
    CHECK(flat.t_related == 0.5);
}

TEST_CASE("top-K distribution on a hand-worked four-node graph") {
    CHECK(top_k(kFour, 1) == std::vector<PairKey>{{1, 2}, {1, 3}, {2, 4}});
    const auto k1 = compute_threshold(kFour, 1);
    CHECK(k1.size_s == 3);
    CHECK(k1.q1 == doctest::Approx(0.4));
    CHECK(k1.q3 == doctest::Approx(0.7));
    CHECK(k1.t_related == doctest::Approx(1.15));

    CHECK(build_s(kFour, 2) == std::vector<double>{0.2, 0.3, 0.4, 0.5, 0.9});
    const auto k2 = compute_threshold(kFour, 2);
    CHECK(k2.k == 2);
    CHECK(k2.t_related == doctest::Approx(0.8));
    const auto r = select_candidates(kFour, k2, corpus_for({1, 2, 3, 4}));
    REQUIRE(r.size() == 1);
    CHECK(r[0].key() == PairKey{1, 2});
    CHECK(r[0].master_title == "title 1");
    CHECK(r[0].target_url == "https://forum.example/proj/2");

    CHECK(build_s(kFour, 3).size() == 6);
    CHECK(build_s(kFour, 50).size() == 6);
    CHECK_THROWS_AS(build_s(kFour, 0), ValidationError);
    CHECK_THROWS_AS(build_s({}, 5), ValidationError);
}

TEST_CASE("ties at the K-th rank break by smaller partner id") {
    const std::vector<SimilarityRecord> recs = {{1, 3, 0.5}, {1, 2, 0.5}, {2, 3, 0.1}};
    // Node 1 keeps partner 2; node 2 keeps 1; node 3 keeps 1.
    CHECK(top_k(recs, 1) == std::vector<PairKey>{{1, 2}, {1, 3}});
    std::vector<SimilarityRecord> shuffled = {{2, 3, 0.1}, {1, 2, 0.5}, {1, 3, 0.5}};
    CHECK(top_k(shuffled, 1) == top_k(recs, 1));
}

TEST_CASE("candidates at exactly the threshold are included and sorted") {
    ThresholdStats st;
    st.t_related = 0.5;
    const std::vector<SimilarityRecord> recs = {{1, 2, 0.5}, {1, 3, 0.7}, {2, 3, 0.4999999}, {1, 4, 0.7}, {3, 4, 0.9}};
    const auto r = select_candidates(recs, st, corpus_for({1, 2, 3, 4}));
    std::vector<PairKey> keys;
    for (const auto& c : r) keys.push_back(c.key());
    CHECK(keys == std::vector<PairKey>{{3, 4}, {1, 3}, {1, 4}, {1, 2}});
    CHECK_THROWS_AS(select_candidates(recs, st, corpus_for({1, 2, 3})), IntegrityError);
    auto dup = corpus_for({1, 2, 3, 4});
    dup.push_back(dup.front());
    CHECK_THROWS_AS(select_candidates(recs, st, dup), ValidationError);
}

TEST_CASE("top-K agrees with the naive per-node sort") {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 300; ++round) {
        const std::size_t n = 2 + round % 20;
        const auto recs = random_records(rng, n, round % 2 ? 5 : 1000);
        for (const std::size_t k : {1u, 2u, 5u, 10u}) {
            const auto naive = testing::naive::detect(recs, k);
            std::vector<PairKey> expected;
            for (const auto& [m, t] : naive.s_pairs) expected.push_back({m, t});
            std::sort(expected.begin(), expected.end());
            REQUIRE(top_k(recs, k) == expected);
            REQUIRE(build_s(recs, k) == naive.s);
        }
    }
}

TEST_CASE("S size bounds, monotonicity in K, and saturation") {
    std::mt19937_64 rng(4);
    for (int round = 0; round < 100; ++round) {
        const std::size_t n = 2 + round % 25;
        const auto recs = random_records(rng, n, 7);
        std::set<PairKey> previous;
        for (std::size_t k = 1; k <= n; ++k) {
            const auto s = top_k(recs, k);
            const auto kk = std::min(k, n - 1);
            CHECK(s.size() <= n * kk);
            CHECK(2 * s.size() >= n * kk);
            const std::set<PairKey> current(s.begin(), s.end());
            CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
            previous = current;
        }
        CHECK(previous.size() == recs.size());
    }
}

TEST_CASE("R(K1) is contained in R(K2) whenever T(K2) <= T(K1)") {
    std::mt19937_64 rng(8);
    int exercised = 0;
    for (int round = 0; round < 600; ++round) {
        const std::size_t n = 4 + round % 20;
        const auto recs = random_records(rng, n, 1000);
        const auto corpus = [&] {
            std::vector<Discussion> c;
            for (std::size_t i = 1; i <= n; ++i) c.push_back(testing::make_discussion(static_cast<DiscussionId>(i), "t"));
            return c;
        }();
        const auto t5 = compute_threshold(recs, 5);
        const auto t10 = compute_threshold(recs, 10);
        if (t10.t_related > t5.t_related) continue;
        ++exercised;
        const auto r5 = select_candidates(recs, t5, corpus);
        const auto r10 = select_candidates(recs, t10, corpus);
        std::set<PairKey> big;
        for (const auto& c : r10) big.insert(c.key());
        for (const auto& c : r5) CHECK(big.count(c.key()) == 1);
    }
    CHECK(exercised > 100);
}
