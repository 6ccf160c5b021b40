#include "reldisc/review_server.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

#include "reldisc/error.hpp"

namespace reldisc {

using nlohmann::ordered_json;

ReviewSession::ReviewSession(CandidateReport report, std::filesystem::path judgments_path, Denominator denominator)
    : report_(std::move(report)), path_(std::move(judgments_path)), denominator_(denominator), keys_(report_.keys()) {
    std::sort(keys_.begin(), keys_.end());
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) {
        std::ofstream out(path_, std::ios::binary);
        if (!out) throw IoError("cannot create judgment store " + path_.string());
        out << kJudgmentHeader << '\n';
    }
    std::lock_guard lock(mutex_);
    refresh();
    precision(keys_, judgments_, denominator_);
}

void ReviewSession::refresh() {
    std::error_code ec;
    const auto mtime = std::filesystem::last_write_time(path_, ec);
    if (ec) throw IoError("cannot stat judgment store " + path_.string());
    const auto size = std::filesystem::file_size(path_, ec);
    if (ec) throw IoError("cannot stat judgment store " + path_.string());
    if (seen_mtime_ && *seen_mtime_ == mtime && seen_size_ == size) return;
    judgments_ = load_judgments(path_);
    seen_mtime_ = mtime;
    seen_size_ = size;
}

std::vector<Judgment> ReviewSession::judgments() {
    std::lock_guard lock(mutex_);
    refresh();
    return judgments_;
}

CandidatePage ReviewSession::candidates(std::size_t page, std::size_t page_size, bool unjudged_only,
                                        const std::optional<std::string>& evaluator) {
    if (page < 1) throw ValidationError("page must be >= 1");
    if (page_size < 1) throw ValidationError("page_size must be >= 1");
    std::map<PairKey, std::map<std::string, Label>> labels;
    {
        std::lock_guard lock(mutex_);
        refresh();
        labels = effective_labels(judgments_);
    }
    std::vector<const CandidatePair*> matching;
    for (const auto& c : report_.candidates) {
        if (unjudged_only) {
            const auto it = labels.find(c.key());
            const bool judged = it != labels.end() && (evaluator ? it->second.count(*evaluator) > 0 : true);
            if (judged) continue;
        }
        matching.push_back(&c);
    }
    CandidatePage out;
    out.page = page;
    out.page_size = page_size;
    out.total = matching.size();
    if (page - 1 >= (matching.size() + page_size - 1) / page_size) return out;
    const auto first = (page - 1) * page_size;
    const auto last = std::min(matching.size(), first + page_size);
    for (auto i = first; i < last; ++i) {
        CandidateStatus s;
        s.pair = *matching[i];
        if (const auto it = labels.find(s.pair.key()); it != labels.end()) {
            s.labels = it->second;
            std::vector<Label> all;
            for (const auto& [who, label] : it->second) all.push_back(label);
            s.consensus = consensus(all);
        }
        out.items.push_back(std::move(s));
    }
    return out;
}

JudgmentAck ReviewSession::post_judgment(Judgment j) {
    validate(j);
    if (!std::binary_search(keys_.begin(), keys_.end(), j.key())) {
        const PairKey swapped{j.target_id, j.master_id};
        if (!std::binary_search(keys_.begin(), keys_.end(), swapped)) {
            throw UnknownPairError("pair (" + std::to_string(j.master_id) + ", " + std::to_string(j.target_id) +
                                   ") is not a candidate of this report");
        }
        std::swap(j.master_id, j.target_id);
    }
    std::lock_guard lock(mutex_);
    refresh();
    append_judgment(path_, j);
    judgments_.push_back(j);
    std::error_code ec;
    seen_mtime_ = std::filesystem::last_write_time(path_, ec);
    seen_size_ = std::filesystem::file_size(path_, ec);
    return {j, judgments_.size(), precision(keys_, judgments_, denominator_)};
}

PrecisionReport ReviewSession::metrics(std::optional<Denominator> denominator) {
    std::lock_guard lock(mutex_);
    refresh();
    return precision(keys_, judgments_, denominator.value_or(denominator_));
}

std::string ReviewSession::meta_json() {
    std::vector<Judgment> snapshot = judgments();
    std::map<std::string, std::size_t> judged_by;
    for (const auto& [key, by_evaluator] : effective_labels(snapshot)) {
        for (const auto& [who, label] : by_evaluator) ++judged_by[who];
    }
    const auto full = ordered_json::parse(to_json(report_));
    ordered_json j;
    for (const char* key : {"format_version", "tool_version", "created_at", "config", "corpus_summary",
                            "threshold_stats", "warnings", "candidate_count"}) {
        j[key] = full[key];
    }
    j["denominator"] = to_string(denominator_);
    j["judgment_rows"] = snapshot.size();
    auto& evaluators = j["evaluators"] = ordered_json::object();
    for (const auto& [who, n] : judged_by) {
        evaluators[who] = {{"judged", n}, {"remaining", report_.candidates.size() - n}};
    }
    return j.dump(2) + "\n";
}

namespace {

ordered_json url_json(const std::optional<std::string>& s) { return s ? ordered_json(*s) : ordered_json(); }

ordered_json judgment_json(const Judgment& j) {
    return {{"master_id", j.master_id},
            {"target_id", j.target_id},
            {"label", std::string(1, to_char(j.label))},
            {"evaluator", j.evaluator},
            {"comment", url_json(j.comment)},
            {"judged_at", format_timestamp(j.judged_at)}};
}

std::string page_json(const CandidatePage& p) {
    ordered_json j;
    j["page"] = p.page;
    j["page_size"] = p.page_size;
    j["total"] = p.total;
    auto& items = j["items"] = ordered_json::array();
    for (const auto& s : p.items) {
        ordered_json labels = ordered_json::object();
        for (const auto& [who, label] : s.labels) labels[who] = std::string(1, to_char(label));
        items.push_back({{"master_id", s.pair.master_id},
                         {"target_id", s.pair.target_id},
                         {"similarity", s.pair.value},
                         {"similarity_display", format_fixed4(s.pair.value)},
                         {"master_title", s.pair.master_title},
                         {"target_title", s.pair.target_title},
                         {"master_url", url_json(s.pair.master_url)},
                         {"target_url", url_json(s.pair.target_url)},
                         {"labels", labels},
                         {"consensus", s.consensus ? ordered_json(std::string(1, to_char(*s.consensus)))
                                                   : ordered_json()}});
    }
    return j.dump(2) + "\n";
}

Judgment judgment_from_body(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
        throw ValidationError("request body is not valid JSON");
    }
    if (!doc.is_object()) throw ValidationError("request body must be a JSON object");
    const auto id = [&](const char* key) {
        const auto it = doc.find(key);
        if (it == doc.end() || !it->is_number_integer()) {
            throw ValidationError(std::string("'") + key + "' must be an integer");
        }
        return it->get<DiscussionId>();
    };
    const auto text = [&](const char* key, bool required) -> std::optional<std::string> {
        const auto it = doc.find(key);
        if (it == doc.end() || it->is_null()) {
            if (required) throw ValidationError(std::string("missing '") + key + "'");
            return std::nullopt;
        }
        if (!it->is_string()) throw ValidationError(std::string("'") + key + "' must be a string");
        return it->get<std::string>();
    };
    Judgment j;
    j.master_id = id("master_id");
    j.target_id = id("target_id");
    j.label = parse_label(*text("label", true));
    j.evaluator = *text("evaluator", true);
    j.comment = text("comment", false);
    if (j.comment && j.comment->empty()) j.comment.reset();
    if (const auto at = text("judged_at", false)) {
        j.judged_at = parse_timestamp(*at);
    } else {
        j.judged_at = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    }
    return j;
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    const auto v = req.get_param_value(key);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ValidationError(std::string("query parameter '") + key + "' must be a non-negative integer");
    }
    return n;
}

bool query_flag(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return false;
    const auto v = req.get_param_value(key);
    if (v.empty() || v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ValidationError(std::string("query parameter '") + key + "' must be true or false");
}

void send_json(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, ordered_json{{"error", message}}.dump() + "\n");
}

}  // namespace

struct ReviewServer::Impl {
    ReviewSession& session;
    ServerOptions options;
    httplib::Server server;

    Impl(ReviewSession& s, ServerOptions o) : session(s), options(std::move(o)) {}

    template <typename F>
    httplib::Server::Handler guarded(F&& f) {
        return [this, f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
            if (options.token && req.get_header_value("X-Review-Token") != *options.token) {
                send_error(res, 401, "missing or wrong X-Review-Token");
                return;
            }
            try {
                f(req, res);
            } catch (const UnknownPairError& e) {
                send_error(res, 404, e.what());
            } catch (const ValidationError& e) {
                send_error(res, 400, e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            }
        };
    }

    void routes() {
        server.Get("/api/v1/candidates", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto page = query_size(req, "page", 1);
            const auto size = query_size(req, "page_size", 20);
            std::optional<std::string> evaluator;
            if (req.has_param("evaluator") && !req.get_param_value("evaluator").empty()) {
                evaluator = req.get_param_value("evaluator");
            }
            const auto p = session.candidates(page, size, query_flag(req, "unjudged_only"), evaluator);
            send_json(res, 200, page_json(p));
        }));
        server.Post("/api/v1/judgments", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto ack = session.post_judgment(judgment_from_body(req.body));
            ordered_json j;
            j["accepted"] = judgment_json(ack.judgment);
            j["store_rows"] = ack.store_rows;
            j["metrics"] = ordered_json::parse(metrics_json(ack.metrics));
            send_json(res, 201, j.dump(2) + "\n");
        }));
        server.Get("/api/v1/metrics", guarded([this](const httplib::Request& req, httplib::Response& res) {
            std::optional<Denominator> d;
            if (req.has_param("denominator") && !req.get_param_value("denominator").empty()) {
                d = parse_denominator(req.get_param_value("denominator"));
            }
            send_json(res, 200, metrics_json(session.metrics(d)) + "\n");
        }));
        server.Get("/api/v1/report/meta", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, session.meta_json());
        }));
        if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir.string())) {
            throw IoError("cannot serve static files from " + options.static_dir.string());
        }
    }
};

ReviewServer::ReviewServer(ReviewSession& session, ServerOptions options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {
    impl_->routes();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(int port) {
    if (port < 0 || port > 65535) throw ValidationError("port must be in 0..65535");
    const int bound = port == 0 ? impl_->server.bind_to_any_port(impl_->options.host)
                                : (impl_->server.bind_to_port(impl_->options.host, port) ? port : -1);
    if (bound < 0) throw IoError("cannot bind " + impl_->options.host + ":" + std::to_string(port));
    return bound;
}

void ReviewServer::serve() { impl_->server.listen_after_bind(); }

int ReviewServer::start(int port) {
    const int bound = bind(port);
    thread_ = std::thread([this] { serve(); });
    impl_->server.wait_until_ready();
    return bound;
}

void ReviewServer::stop() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace reldisc
