// reldisc: related-discussion detection from the command line.
//
//   reldisc run      --corpus PATH --project P --category C --k INT --provider hash|http --out PATH
//   reldisc fetch    --repo OWNER/NAME --out PATH          (token in RD_TOKEN)
//   reldisc evaluate --report PATH --judgments PATH [--denominator all|judged]
//   reldisc serve    --report PATH --judgments PATH --port INT
//   reldisc matrix   --spec PATH
//
// Exit status: 0 success, 2 validation error, 3 I/O error, 4 provider error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "reldisc/corpus.hpp"
#include "reldisc/error.hpp"
#include "reldisc/evaluation.hpp"
#include "reldisc/fetch.hpp"
#include "reldisc/report.hpp"
#include "reldisc/review_server.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

int do_run(const reldisc::RunConfig& config) {
    const auto report = reldisc::run(config);
    const auto& s = report.threshold_stats;
    std::cout << "candidates " << report.candidates.size() << "  |S| " << s.size_s << "  Q1 "
              << reldisc::format_fixed4(s.q1) << "  Q3 " << reldisc::format_fixed4(s.q3) << "  T_related "
              << reldisc::format_fixed4(s.t_related) << '\n'
              << "report " << config.output_path.string() << '\n';
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int do_fetch(const std::string& repo, const std::filesystem::path& out, reldisc::FetchOptions options) {
    const char* token = std::getenv("RD_TOKEN");
    if (!token || !*token) throw reldisc::ValidationError("RD_TOKEN is not set");
    const auto corpus = reldisc::fetch_discussions(repo, token, options);
    reldisc::save_corpus(out, corpus);
    std::cout << "fetched " << corpus.size() << " discussions into " << out.string() << '\n';
    return 0;
}

int do_evaluate(const std::filesystem::path& report_path, const std::filesystem::path& judgments_path,
                const std::string& denominator) {
    const auto report = reldisc::load_report(report_path);
    const auto judgments = reldisc::load_judgments(judgments_path);
    const auto metrics = reldisc::precision(report.keys(), judgments, reldisc::parse_denominator(denominator));
    std::cout << reldisc::metrics_json(metrics) << '\n';
    if (!metrics.precision) {
        std::cerr << "reldisc: precision is undefined: no pairs in the denominator\n";
        return 2;
    }
    return 0;
}

int do_serve(const std::filesystem::path& report_path, const std::filesystem::path& judgments_path, int port,
             const std::string& denominator, reldisc::ServerOptions options) {
    reldisc::ReviewSession session(reldisc::load_report(report_path), judgments_path,
                                   reldisc::parse_denominator(denominator));
    reldisc::ReviewServer server(session, options);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const int bound = server.start(port);
    std::cout << "serving " << report_path.string() << " on http://" << options.host << ':' << bound << '\n'
              << std::flush;
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return 0;
}

int do_matrix(const std::filesystem::path& spec) {
    const auto outcomes = reldisc::run_matrix(reldisc::load_matrix_spec(spec));
    int status = 0;
    for (const auto& o : outcomes) {
        if (o.report) {
            std::cout << "ok    " << o.config.output_path.string() << "  candidates " << o.report->candidates.size()
                      << "  T_related " << reldisc::format_fixed4(o.report->threshold_stats.t_related) << '\n';
        } else {
            std::cout << "error " << o.config.output_path.string() << "  " << o.error << '\n';
            if (status == 0) status = o.exit_code;
        }
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Related-discussion detection over forum corpora"};
    app.set_version_flag("--version", reldisc::tool_version());
    app.require_subcommand(1);

    reldisc::RunConfig config;
    std::string project, provider = "hash";
    std::size_t dim = config.provider.dim;
    auto* run = app.add_subcommand("run", "Detect candidate pairs for one configuration group");
    run->add_option("--corpus", config.corpus_path, "Corpus JSONL")->required();
    run->add_option("--project", project, "Project filter")->required();
    run->add_option("--category", config.category, "qa, ideas, all, or a raw category label")->required();
    run->add_option("--k", config.k, "Neighbours per discussion in S")->required()->check(CLI::PositiveNumber);
    run->add_option("--provider", provider, "Embedding provider")
        ->required()
        ->check(CLI::IsMember({"hash", "http"}));
    run->add_option("--dim", dim, "Hash embedding dimension")->check(CLI::PositiveNumber);
    run->add_option("--endpoint", config.provider.endpoint, "Embedding service base URL");
    run->add_option("--out", config.output_path, "Report JSON path")->required();
    run->add_option("--threads", config.threads, "Worker threads for pairwise scoring")->check(CLI::PositiveNumber);

    std::string repo;
    std::filesystem::path fetch_out;
    reldisc::FetchOptions fetch_options;
    std::string fetch_project;
    auto* fetch = app.add_subcommand("fetch", "Download a repository's discussions as a JSONL corpus");
    fetch->add_option("--repo", repo, "OWNER/NAME")->required();
    fetch->add_option("--out", fetch_out, "Corpus JSONL to write")->required();
    fetch->add_option("--project", fetch_project, "Project label (default: repository name)");
    fetch->add_option("--page-size", fetch_options.page_size, "Discussions per request")->check(CLI::Range(1, 100));
    fetch->add_option("--endpoint", fetch_options.endpoint, "GraphQL endpoint");

    std::filesystem::path report_path, judgments_path;
    std::string denominator = "all";
    auto* evaluate = app.add_subcommand("evaluate", "Precision of a report against judgments");
    evaluate->add_option("--report", report_path, "Report JSON")->required();
    evaluate->add_option("--judgments", judgments_path, "Judgment CSV")->required();
    evaluate->add_option("--denominator", denominator, "all or judged")->check(CLI::IsMember({"all", "judged"}));

    int port = 8080;
    reldisc::ServerOptions server_options;
    std::string token, ui_dir;
    auto* serve = app.add_subcommand("serve", "Serve a report to the review UI");
    serve->add_option("--report", report_path, "Report JSON")->required();
    serve->add_option("--judgments", judgments_path, "Judgment CSV (created if missing)")->required();
    serve->add_option("--port", port, "TCP port (0 picks one)")->required()->check(CLI::Range(0, 65535));
    serve->add_option("--host", server_options.host, "Bind address");
    serve->add_option("--denominator", denominator, "all or judged")->check(CLI::IsMember({"all", "judged"}));
    serve->add_option("--token", token, "Shared token required in X-Review-Token");
    serve->add_option("--ui", ui_dir, "Built UI bundle to serve at /");

    std::filesystem::path spec;
    auto* matrix = app.add_subcommand("matrix", "Run a JSON list of configuration groups");
    matrix->add_option("--spec", spec, "Matrix spec JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            config.project = project;
            config.provider.kind = reldisc::parse_provider_kind(provider);
            config.provider.dim = dim;
            return do_run(config);
        }
        if (*fetch) {
            if (!fetch_project.empty()) fetch_options.project = fetch_project;
            return do_fetch(repo, fetch_out, fetch_options);
        }
        if (*evaluate) return do_evaluate(report_path, judgments_path, denominator);
        if (*serve) {
            if (!token.empty()) server_options.token = token;
            server_options.static_dir = ui_dir;
            return do_serve(report_path, judgments_path, port, denominator, server_options);
        }
        if (*matrix) return do_matrix(spec);
    } catch (const std::exception& e) {
        std::cerr << "reldisc: " << e.what() << '\n';
        return reldisc::exit_code_of(e);
    }
    return 0;
}
