#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "reldisc/review_server.hpp"
#include "test_support.hpp"

using namespace reldisc;
using nlohmann::json;

namespace {

CandidateReport synthetic_report(std::size_t n) {
    CandidateReport r;
    r.tool_version = tool_version();
    r.created_at = "2021-01-01T00:00:00Z";
    r.config.category = "ALL";
    r.config.k = 5;
    r.config.provider = "hash";
    r.config.dim = 768;
    r.threshold_stats = {5, 3 * n, 0.1, 0.2, 0.3, 0.2, 0.6};
    for (std::size_t i = 1; i <= n; ++i) {
        CandidatePair c;
        c.master_id = static_cast<DiscussionId>(i);
        c.target_id = static_cast<DiscussionId>(i + 100);
        c.value = 0.99 - 0.001 * static_cast<double>(i);
        c.master_title = "m" + std::to_string(i);
        c.target_title = "t" + std::to_string(i);
        r.candidates.push_back(c);
    }
    return r;
}

Judgment judge(DiscussionId m, DiscussionId t, Label l, const std::string& who, int second = 0) {
    Judgment j;
    j.master_id = m;
    j.target_id = t;
    j.label = l;
    j.evaluator = who;
    j.judged_at = parse_timestamp("2022-03-01T00:00:00Z") + std::chrono::seconds(second);
    return j;
}

std::string post_body(DiscussionId m, DiscussionId t, const std::string& label, const std::string& who) {
    return json{{"master_id", m}, {"target_id", t}, {"label", label}, {"evaluator", who}}.dump();
}

}  // namespace

TEST_CASE("session pagination") {
    testing::TempDir dir;
    ReviewSession s(synthetic_report(4), dir / "j.csv");
    CHECK(std::filesystem::exists(dir / "j.csv"));
    CHECK(load_judgments(dir / "j.csv").empty());

    const auto first = s.candidates(1, 3);
    CHECK(first.total == 4);
    REQUIRE(first.items.size() == 3);
    CHECK(first.items[0].pair.master_id == 1);
    CHECK(s.candidates(2, 3).items.size() == 1);
    CHECK(s.candidates(99, 3).items.empty());
    CHECK(s.candidates(1, 100).items.size() == 4);
    CHECK_THROWS_AS(s.candidates(0, 3), ValidationError);
    CHECK_THROWS_AS(s.candidates(1, 0), ValidationError);

    s.post_judgment(judge(1, 101, Label::R, "alice"));
    s.post_judgment(judge(3, 103, Label::N, "bob"));
    const auto open = s.candidates(1, 10, true);
    CHECK(open.total == 2);
    CHECK(open.items[0].pair.master_id == 2);
    CHECK(open.items[1].pair.master_id == 4);
    CHECK(s.candidates(1, 10, true, std::string("alice")).total == 3);
    const auto labeled = s.candidates(1, 1).items.at(0);
    CHECK(labeled.labels.at("alice") == Label::R);
    CHECK(labeled.consensus == Label::R);
}

TEST_CASE("posting judgments updates metrics") {
    testing::TempDir dir;
    ReviewSession s(synthetic_report(4), dir / "j.csv");
    auto ack = s.post_judgment(judge(1, 101, Label::N, "alice"));
    CHECK(ack.store_rows == 1);
    CHECK(ack.metrics.true_positives == 0);
    s.post_judgment(judge(2, 102, Label::R, "alice"));
    s.post_judgment(judge(3, 103, Label::D, "alice"));
    ack = s.post_judgment(judge(104, 4, Label::R, "alice"));
    CHECK(ack.judgment.master_id == 4);
    CHECK(ack.metrics.value() == 0.75);
    CHECK(format_percent(ack.metrics.value()) == "75.00");

    ack = s.post_judgment(judge(1, 101, Label::D, "alice", 60));
    CHECK(ack.store_rows == 5);
    CHECK(ack.metrics.value() == 1.0);
    CHECK(load_judgments(dir / "j.csv").size() == 5);

    CHECK_THROWS_AS(s.post_judgment(judge(1, 102, Label::R, "alice")), UnknownPairError);
    CHECK_THROWS_AS(s.post_judgment(judge(1, 101, Label::R, "")), ValidationError);
    CHECK(s.judgments().size() == 5);
}

TEST_CASE("metrics match offline evaluation") {
    testing::TempDir dir;
    const auto report = synthetic_report(34);
    ReviewSession s(report, dir / "j.csv");
    for (DiscussionId i = 1; i <= 34; ++i) {
        s.post_judgment(judge(i, i + 100, i <= 3 ? Label::N : Label::R, "alice"));
    }
    CHECK(format_percent(s.metrics().value()) == "91.17");
    const auto offline = precision(report.keys(), load_judgments(dir / "j.csv"));
    CHECK(metrics_json(s.metrics()) == metrics_json(offline));

    testing::TempDir empty;
    ReviewSession fresh(report, empty / "j.csv", Denominator::JudgedOnly);
    CHECK_FALSE(fresh.metrics().precision.has_value());
    CHECK(fresh.metrics(Denominator::AllCandidates).value() == 0.0);
}

TEST_CASE("external edits to the judgment file are picked up") {
    testing::TempDir dir;
    ReviewSession s(synthetic_report(2), dir / "j.csv");
    CHECK(s.metrics().true_positives == 0);
    append_judgment(dir / "j.csv", judge(1, 101, Label::D, "carol"));
    CHECK(s.metrics().true_positives == 1);
    append_judgment(dir / "j.csv", judge(2, 102, Label::R, "carol"));
    CHECK(s.metrics().value() == 1.0);
    CHECK(s.judgments().size() == 2);

    testing::write_file(dir / "bad.csv", std::string(kJudgmentHeader) + "\n7,8,R,a,,2022-01-01T00:00:00Z\n");
    CHECK_THROWS_AS(ReviewSession(synthetic_report(2), dir / "bad.csv"), UnknownPairError);
}

TEST_CASE("concurrent posts are all stored") {
    testing::TempDir dir;
    ReviewSession s(synthetic_report(10), dir / "j.csv");
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&s, t] {
            for (DiscussionId i = 1; i <= 10; ++i) s.post_judgment(judge(i, i + 100, Label::R, "e" + std::to_string(t)));
        });
    }
    for (auto& t : threads) t.join();
    CHECK(load_judgments(dir / "j.csv").size() == 40);
    CHECK(s.metrics().value() == 1.0);
    CHECK(s.metrics().label_counts.r == 40);
}

TEST_CASE("HTTP endpoints") {
    testing::TempDir dir;
    ReviewSession session(synthetic_report(4), dir / "j.csv");
    ReviewServer server(session);
    const int port = server.start(0);
    httplib::Client client("127.0.0.1", port);

    auto res = client.Get("/api/v1/candidates?page=1&page_size=2");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto page = json::parse(res->body);
    CHECK(page["total"] == 4);
    CHECK(page["items"].size() == 2);
    CHECK(page["items"][0]["master_id"] == 1);
    CHECK(page["items"][0]["consensus"].is_null());
    CHECK(json::parse(client.Get("/api/v1/candidates?page=99")->body)["items"].empty());
    CHECK(client.Get("/api/v1/candidates?page=0")->status == 400);
    CHECK(client.Get("/api/v1/candidates?page=x")->status == 400);

    res = client.Post("/api/v1/judgments", post_body(1, 101, "N", "alice"), "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    for (DiscussionId i = 2; i <= 4; ++i) {
        CHECK(client.Post("/api/v1/judgments", post_body(i, i + 100, "R", "alice"), "application/json")->status == 201);
    }
    auto metrics = json::parse(client.Get("/api/v1/metrics")->body);
    CHECK(metrics["precision"] == 0.75);
    CHECK(metrics["precision_percent"] == "75.00");
    CHECK(client.Get("/api/v1/metrics")->body == metrics_json(precision(session.report().keys(), load_judgments(dir / "j.csv"))) + "\n");
    CHECK(client.Get("/api/v1/metrics?denominator=judged")->status == 200);
    CHECK(client.Get("/api/v1/metrics?denominator=bogus")->status == 400);

    CHECK(client.Post("/api/v1/judgments", post_body(1, 101, "X", "alice"), "application/json")->status == 400);
    CHECK(client.Post("/api/v1/judgments", post_body(1, 999, "R", "alice"), "application/json")->status == 404);
    CHECK(client.Post("/api/v1/judgments", "{nope", "application/json")->status == 400);
    CHECK(client.Post("/api/v1/judgments", R"({"master_id":1,"target_id":101,"label":"R"})", "application/json")->status == 400);
    CHECK(load_judgments(dir / "j.csv").size() == 4);

    auto meta = json::parse(client.Get("/api/v1/report/meta")->body);
    CHECK(meta["candidate_count"] == 4);
    CHECK(meta["judgment_rows"] == 4);
    CHECK(meta["evaluators"]["alice"]["judged"] == 4);
    CHECK(meta["evaluators"]["alice"]["remaining"] == 0);
    server.stop();
}

TEST_CASE("token protects the API") {
    testing::TempDir dir;
    ReviewSession session(synthetic_report(2), dir / "j.csv");
    ServerOptions options;
    options.token = "s3cret";
    ReviewServer server(session, options);
    const int port = server.start(0);
    httplib::Client client("127.0.0.1", port);
    CHECK(client.Get("/api/v1/metrics")->status == 401);
    CHECK(client.Get("/api/v1/metrics", {{"X-Review-Token", "wrong"}})->status == 401);
    CHECK(client.Get("/api/v1/metrics", {{"X-Review-Token", "s3cret"}})->status == 200);
    CHECK(client.Post("/api/v1/judgments", post_body(1, 101, "R", "a"), "application/json")->status == 401);
    CHECK(load_judgments(dir / "j.csv").empty());
}
