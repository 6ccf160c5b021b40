#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "reldisc/evaluation.hpp"
#include "reldisc/report.hpp"

namespace reldisc {

struct CandidateStatus {
    CandidatePair pair;
    std::map<std::string, Label> labels;  // effective label per evaluator
    std::optional<Label> consensus;
};

struct CandidatePage {
    std::size_t page = 1;
    std::size_t page_size = 0;
    std::size_t total = 0;  // items matching the filter across all pages
    std::vector<CandidateStatus> items;
};

struct JudgmentAck {
    Judgment judgment;
    std::size_t store_rows = 0;
    PrecisionReport metrics;
};

/// One loaded report plus its judgment file. The file is append-only and is
/// re-read whenever it changes on disk, so judgments written by other tools
/// show up on the next request. All members are safe to call concurrently;
/// appends are serialized.
class ReviewSession {
public:
    /// Creates the judgment file (header only) if it does not exist. Existing
    /// judgments must reference candidates of `report`.
    ReviewSession(CandidateReport report, std::filesystem::path judgments_path,
                  Denominator denominator = Denominator::AllCandidates);

    /// Pages are 1-based and ordered by similarity descending. With
    /// `unjudged_only`, pairs already labeled (by `evaluator` if given, by
    /// anyone otherwise) are skipped. Pages past the end are empty.
    CandidatePage candidates(std::size_t page, std::size_t page_size, bool unjudged_only = false,
                             const std::optional<std::string>& evaluator = std::nullopt);

    /// Validates, appends and returns the recomputed metrics. A pair given
    /// in target/master order is stored in master/target order. Throws
    /// UnknownPairError or ValidationError.
    JudgmentAck post_judgment(Judgment j);

    PrecisionReport metrics(std::optional<Denominator> denominator = std::nullopt);

    /// Report header, store size and per-evaluator progress as JSON.
    std::string meta_json();

    const CandidateReport& report() const { return report_; }
    std::vector<Judgment> judgments();

private:
    void refresh();  // caller holds mutex_

    const CandidateReport report_;
    const std::filesystem::path path_;
    const Denominator denominator_;
    std::vector<PairKey> keys_;
    std::mutex mutex_;
    std::vector<Judgment> judgments_;
    std::optional<std::filesystem::file_time_type> seen_mtime_;
    std::uintmax_t seen_size_ = 0;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    /// When set, every /api/v1 request must carry it in X-Review-Token.
    std::optional<std::string> token;
    /// Built UI bundle served at "/" when non-empty.
    std::filesystem::path static_dir;
};

/// HTTP front end for a ReviewSession:
///   GET  /api/v1/candidates?page&page_size&unjudged_only&evaluator
///   POST /api/v1/judgments
///   GET  /api/v1/metrics?denominator=all|judged
///   GET  /api/v1/report/meta
class ReviewServer {
public:
    ReviewServer(ReviewSession& session, ServerOptions options = {});
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds `port` (0 picks a free one) and returns the bound port. Throws
    /// IoError if binding fails.
    int bind(int port);
    /// Serves until stop(); call after bind().
    void serve();
    /// bind() plus serve() on a background thread.
    int start(int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
};

}  // namespace reldisc
