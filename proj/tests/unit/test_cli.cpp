#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <sys/wait.h>

#include "reldisc/evaluation.hpp"
#include "reldisc/report.hpp"
#include "test_support.hpp"

namespace {

struct Result {
    int code = -1;
    std::string out;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Result cli(const std::string& args, const testing::TempDir& dir, const std::string& env = "") {
    const auto out = dir / "stdout.txt";
    const std::string cmd = env + " " + quote(RELDISC_CLI) + " " + args + " > " + quote(out.string()) + " 2> " +
                            quote((dir / "stderr.txt").string());
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testing::read_file(out);
    return r;
}

std::string run_args(const std::filesystem::path& corpus, const std::filesystem::path& out,
                     const std::string& extra = "", const std::string& provider = "hash") {
    return "run --corpus " + quote(corpus.string()) + " --project gatsby --category all --k 5 --provider " + provider +
           " --out " + quote(out.string()) + " " + extra;
}

}  // namespace

TEST_CASE("run writes deterministic outputs") {
    testing::TempDir dir;
    const auto corpus = testing::data_path("planted_30.jsonl");
    REQUIRE(cli(run_args(corpus, dir / "r.json"), dir).code == 0);
    const auto report = testing::read_file(dir / "r.json");
    const auto sim = testing::read_file(dir / "r.similarity.csv");
    REQUIRE(cli(run_args(corpus, dir / "r.json", "--threads 3"), dir).code == 0);
    CHECK(testing::read_file(dir / "r.json") == report);
    CHECK(testing::read_file(dir / "r.similarity.csv") == sim);
    CHECK(reldisc::load_report(dir / "r.json").candidates.size() == 4);
    CHECK(cli(run_args(corpus, dir / "d.json", "--dim 64"), dir).code == 0);
    CHECK(reldisc::load_report(dir / "d.json").config.dim == 64);
}

TEST_CASE("exit codes") {
    testing::TempDir dir;
    const auto corpus = testing::data_path("planted_30.jsonl");
    CHECK(cli("", dir).code == 2);
    CHECK(cli("bogus", dir).code == 2);
    CHECK(cli("--help", dir).code == 0);
    CHECK(cli(run_args(corpus, dir / "twice.json", "--provider hash"), dir).code == 2);
    CHECK(cli("run --corpus x --out y", dir).code == 2);
    CHECK(cli(run_args(corpus, dir / "a.json", "", "magic"), dir).code == 2);
    CHECK(cli("run --corpus " + quote(corpus.string()) +
                  " --project gatsby --category all --k 0 --provider hash --out " + quote((dir / "k.json").string()),
              dir)
              .code == 2);
    CHECK(cli("run --corpus " + quote(corpus.string()) +
                  " --project nope --category all --k 5 --provider hash --out " + quote((dir / "n.json").string()),
              dir)
              .code == 2);
    CHECK(cli(run_args(dir / "missing.jsonl", dir / "m.json"), dir).code == 3);
    CHECK(cli(run_args(corpus, dir / "h.json", "--endpoint http://127.0.0.1:1", "http"), dir).code == 4);
    CHECK(cli(run_args(corpus, dir / "h2.json", "", "http"), dir).code == 2);

    CHECK(cli("fetch --repo gatsbyjs/gatsby --out " + quote((dir / "f.jsonl").string()), dir, "env -u RD_TOKEN").code ==
          2);
    CHECK(cli("fetch --repo nonsense --out " + quote((dir / "f.jsonl").string()), dir, "RD_TOKEN=x").code == 2);
    CHECK(cli("fetch --repo a/b --endpoint http://127.0.0.1:1/graphql --out " + quote((dir / "f.jsonl").string()), dir,
              "RD_TOKEN=x")
              .code == 4);
    CHECK_FALSE(std::filesystem::exists(dir / "f.jsonl"));
}

TEST_CASE("evaluate prints the shared metrics document") {
    testing::TempDir dir;
    REQUIRE(cli(run_args(testing::data_path("planted_30.jsonl"), dir / "r.json"), dir).code == 0);
    const auto report = reldisc::load_report(dir / "r.json");
    const auto keys = report.keys();
    std::vector<reldisc::Judgment> js;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        reldisc::Judgment j;
        j.master_id = keys[i].master_id;
        j.target_id = keys[i].target_id;
        j.label = i == 0 ? reldisc::Label::N : reldisc::Label::D;
        j.evaluator = "alice";
        j.judged_at = reldisc::parse_timestamp("2022-05-05T10:00:00Z");
        js.push_back(j);
    }
    std::ofstream(dir / "j.csv") << "";
    for (const auto& j : js) reldisc::append_judgment(dir / "j.csv", j);

    const auto args = "evaluate --report " + quote((dir / "r.json").string()) + " --judgments " +
                      quote((dir / "j.csv").string());
    auto r = cli(args, dir);
    CHECK(r.code == 0);
    CHECK(r.out == reldisc::metrics_json(reldisc::precision(keys, js)) + "\n");
    CHECK(r.out.find("\"precision_percent\": \"75.00\"") != std::string::npos);
    CHECK(cli(args + " --denominator judged", dir).code == 0);
    CHECK(cli(args + " --denominator some", dir).code == 2);

    std::ofstream(dir / "empty.csv") << reldisc::kJudgmentHeader << "\n";
    r = cli("evaluate --report " + quote((dir / "r.json").string()) + " --judgments " +
                quote((dir / "empty.csv").string()) + " --denominator judged",
            dir);
    CHECK(r.code == 2);
    CHECK(r.out.find("\"precision\": \"undefined\"") != std::string::npos);
    CHECK(cli("evaluate --report " + quote((dir / "r.json").string()) + " --judgments " +
                  quote((dir / "none.csv").string()),
              dir)
              .code == 3);

    // The served metrics endpoint answers with the same bytes.
    const std::string pidfile = (dir / "pid").string();
    const std::string serve = quote(RELDISC_CLI) + " serve --port 0 --report " + quote((dir / "r.json").string()) +
                              " --judgments " + quote((dir / "j.csv").string()) + " > " +
                              quote((dir / "serve.txt").string()) + " 2>&1 & echo $! > " + quote(pidfile);
    REQUIRE(std::system(serve.c_str()) == 0);
    int port = 0;
    for (int i = 0; i < 100 && port == 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        const auto text = testing::read_file(dir / "serve.txt");
        if (const auto pos = text.rfind(':'); text.find("serving") != std::string::npos && pos != std::string::npos)
            port = std::atoi(text.c_str() + pos + 1);
    }
    const int pid = std::stoi(testing::read_file(pidfile));
    REQUIRE(port > 0);
    httplib::Client client("127.0.0.1", port);
    const auto res = client.Get("/api/v1/metrics");
    kill(pid, SIGTERM);
    REQUIRE(res);
    CHECK(res->body == cli(args, dir).out);
}

TEST_CASE("matrix command") {
    testing::TempDir dir;
    const auto corpus = testing::data_path("planted_30.jsonl").string();
    testing::write_file(dir / "spec.json", "[{\"corpus\": \"" + corpus + "\", \"k\": 5, \"out\": \"k5.json\"}," +
                                               "{\"corpus\": \"" + corpus + "\", \"k\": 10, \"out\": \"k10.json\"}]");
    auto r = cli("matrix --spec " + quote((dir / "spec.json").string()), dir);
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "k5.json"));
    CHECK(std::filesystem::exists(dir / "k10.json"));
    CHECK(r.out.find("ok") == 0);

    testing::write_file(dir / "bad.json", "[{\"corpus\": \"" + corpus + "\", \"k\": 5, \"out\": \"b5.json\"}," +
                                              "{\"corpus\": \"nope.jsonl\", \"k\": 5, \"out\": \"b6.json\"}]");
    r = cli("matrix --spec " + quote((dir / "bad.json").string()), dir);
    CHECK(r.code == 3);
    CHECK(std::filesystem::exists(dir / "b5.json"));
    CHECK(r.out.find("error") != std::string::npos);
    CHECK(cli("matrix --spec " + quote((dir / "none.json").string()), dir).code == 3);
}
