#include "reldisc/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "atomic_file.hpp"
#include "csv.hpp"
#include "reldisc/error.hpp"
#include "reldisc/preprocess.hpp"
#include "reldisc/similarity.hpp"
#include "text_util.hpp"

#ifndef RELDISC_VERSION
#define RELDISC_VERSION "0.0.0"
#endif

namespace reldisc {

using nlohmann::ordered_json;

std::string tool_version() { return RELDISC_VERSION; }

void RunConfig::validate() const {
    if (corpus_path.empty()) throw ValidationError("corpus path is empty");
    if (output_path.empty()) throw ValidationError("output path is empty");
    if (k < 1) throw ValidationError("k must be >= 1");
    if (project && project->empty()) throw ValidationError("project filter is empty");
    if (threads < 1) throw ValidationError("threads must be >= 1");
    CategorySelector::parse(category);
    provider.validate();
}

CorpusFilter RunConfig::filter() const {
    CorpusFilter f;
    f.project = project;
    f.category = CategorySelector::parse(category);
    return f;
}

std::vector<PairKey> CandidateReport::keys() const {
    std::vector<PairKey> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(c.key());
    return out;
}

ArtifactPaths artifact_paths(const std::filesystem::path& report_path) {
    const auto dir = report_path.parent_path();
    const auto stem = report_path.stem().string();
    return {report_path, dir / (stem + ".similarity.csv"), dir / (stem + ".candidates.csv")};
}

std::string format_fixed4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

namespace {

ordered_json optional_string(const std::optional<std::string>& s) { return s ? ordered_json(*s) : ordered_json(); }

ordered_json stats_json(const ThresholdStats& s) {
    return {{"k", s.k},
            {"size_s", s.size_s},
            {"q1", s.q1},
            {"q2", s.q2},
            {"q3", s.q3},
            {"iqr", s.iqr},
            {"t_related", s.t_related},
            {"display",
             {{"q1", format_fixed4(s.q1)},
              {"q2", format_fixed4(s.q2)},
              {"q3", format_fixed4(s.q3)},
              {"iqr", format_fixed4(s.iqr)},
              {"t_related", format_fixed4(s.t_related)}}}};
}

}  // namespace

std::string to_json(const CandidateReport& r) {
    ordered_json j;
    j["format_version"] = r.format_version;
    j["tool_version"] = r.tool_version;
    j["created_at"] = r.created_at;
    j["config"] = {{"corpus", r.config.corpus},
                   {"project", optional_string(r.config.project)},
                   {"category", r.config.category},
                   {"k", r.config.k},
                   {"provider", r.config.provider},
                   {"dim", r.config.dim},
                   {"endpoint", optional_string(r.config.endpoint)},
                   {"output", r.config.output}};
    j["corpus_summary"] = {{"loaded", r.corpus_summary.loaded},
                           {"selected", r.corpus_summary.selected},
                           {"prepared", r.corpus_summary.prepared},
                           {"dropped_empty", r.corpus_summary.dropped_empty}};
    j["threshold_stats"] = stats_json(r.threshold_stats);
    j["similarity_file"] = r.similarity_file;
    j["warnings"] = r.warnings;
    j["candidate_count"] = r.candidates.size();
    auto& list = j["candidates"] = ordered_json::array();
    for (const auto& c : r.candidates) {
        list.push_back({{"master_id", c.master_id},
                        {"target_id", c.target_id},
                        {"similarity", c.value},
                        {"similarity_display", format_fixed4(c.value)},
                        {"master_title", c.master_title},
                        {"target_title", c.target_title},
                        {"master_url", optional_string(c.master_url)},
                        {"target_url", optional_string(c.target_url)}});
    }
    return j.dump(2) + "\n";
}

namespace {

using nlohmann::json;

class SchemaCheck {
public:
    std::vector<std::string> errors;

    const json* field(const json& obj, const std::string& where, const char* key) {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            errors.push_back(where + ": missing '" + key + "'");
            return nullptr;
        }
        return &*it;
    }

    const json* object(const json& obj, const std::string& where, const char* key) {
        const auto* v = field(obj, where, key);
        if (v && !v->is_object()) {
            errors.push_back(where + "." + key + ": expected an object");
            return nullptr;
        }
        return v;
    }

    bool string(const json& obj, const std::string& where, const char* key, bool nullable = false) {
        const auto* v = field(obj, where, key);
        if (!v) return false;
        if (v->is_string() || (nullable && v->is_null())) return true;
        errors.push_back(where + "." + key + (nullable ? ": expected a string or null" : ": expected a string"));
        return false;
    }

    bool count(const json& obj, const std::string& where, const char* key, std::int64_t min = 0) {
        const auto* v = field(obj, where, key);
        if (!v) return false;
        if (v->is_number_integer() && v->get<std::int64_t>() >= min) return true;
        errors.push_back(where + "." + key + ": expected an integer >= " + std::to_string(min));
        return false;
    }

    bool number(const json& obj, const std::string& where, const char* key) {
        const auto* v = field(obj, where, key);
        if (!v) return false;
        if (v->is_number()) return true;
        errors.push_back(where + "." + key + ": expected a number");
        return false;
    }
};

std::vector<std::string> check(const json& doc) {
    SchemaCheck c;
    if (!doc.is_object()) return {"document is not a JSON object"};
    const std::string root = "report";
    if (c.count(doc, root, "format_version") && doc["format_version"].get<int>() != kReportFormatVersion) {
        c.errors.push_back("report.format_version: unsupported version " + doc["format_version"].dump());
    }
    c.string(doc, root, "tool_version");
    if (c.string(doc, root, "created_at")) {
        try {
            parse_timestamp(doc["created_at"].get<std::string>());
        } catch (const ValidationError&) {
            c.errors.push_back("report.created_at: not a timestamp");
        }
    }
    if (const auto* cfg = c.object(doc, root, "config")) {
        const std::string w = "config";
        c.string(*cfg, w, "corpus");
        c.string(*cfg, w, "project", true);
        c.string(*cfg, w, "category");
        c.count(*cfg, w, "k", 1);
        if (c.string(*cfg, w, "provider")) {
            const auto p = (*cfg)["provider"].get<std::string>();
            if (p != "hash" && p != "http") c.errors.push_back("config.provider: expected hash or http");
        }
        c.count(*cfg, w, "dim");
        c.string(*cfg, w, "endpoint", true);
        c.string(*cfg, w, "output");
    }
    if (const auto* sum = c.object(doc, root, "corpus_summary")) {
        const std::string w = "corpus_summary";
        const bool ok = c.count(*sum, w, "loaded") & c.count(*sum, w, "selected") & c.count(*sum, w, "prepared") &
                        c.count(*sum, w, "dropped_empty");
        if (ok) {
            const auto loaded = (*sum)["loaded"].get<std::size_t>();
            const auto selected = (*sum)["selected"].get<std::size_t>();
            const auto prepared = (*sum)["prepared"].get<std::size_t>();
            const auto dropped = (*sum)["dropped_empty"].get<std::size_t>();
            if (selected > loaded) c.errors.push_back("corpus_summary: selected exceeds loaded");
            if (prepared + dropped != selected) c.errors.push_back("corpus_summary: prepared + dropped_empty != selected");
            if (prepared < 2) c.errors.push_back("corpus_summary: fewer than two prepared documents");
        }
    }
    std::optional<double> t_related;
    if (const auto* st = c.object(doc, root, "threshold_stats")) {
        const std::string w = "threshold_stats";
        c.count(*st, w, "k", 1);
        c.count(*st, w, "size_s", 1);
        const bool ok = c.number(*st, w, "q1") & c.number(*st, w, "q2") & c.number(*st, w, "q3") &
                        c.number(*st, w, "iqr") & c.number(*st, w, "t_related");
        c.object(*st, w, "display");
        if (ok) {
            const double q1 = (*st)["q1"], q2 = (*st)["q2"], q3 = (*st)["q3"], iqr = (*st)["iqr"];
            const double t = (*st)["t_related"];
            if (!(q1 <= q2 && q2 <= q3)) c.errors.push_back("threshold_stats: quartiles out of order");
            if (iqr != q3 - q1) c.errors.push_back("threshold_stats: iqr != q3 - q1");
            if (t != q3 + kFenceMultiplier * iqr) c.errors.push_back("threshold_stats: t_related != q3 + 1.5 iqr");
            t_related = t;
        }
    }
    c.string(doc, root, "similarity_file");
    if (const auto* w = c.field(doc, root, "warnings")) {
        if (!w->is_array() || !std::all_of(w->begin(), w->end(), [](const json& x) { return x.is_string(); })) {
            c.errors.push_back("report.warnings: expected an array of strings");
        }
    }
    c.count(doc, root, "candidate_count");
    if (const auto* list = c.field(doc, root, "candidates")) {
        if (!list->is_array()) {
            c.errors.push_back("report.candidates: expected an array");
        } else {
            if (doc.contains("candidate_count") && doc["candidate_count"].is_number_integer() &&
                doc["candidate_count"].get<std::size_t>() != list->size()) {
                c.errors.push_back("report.candidate_count does not match the candidates array");
            }
            std::set<std::pair<std::int64_t, std::int64_t>> seen;
            std::optional<std::tuple<double, std::int64_t, std::int64_t>> prev;
            for (std::size_t i = 0; i < list->size(); ++i) {
                const auto& item = (*list)[i];
                const auto w = "candidates[" + std::to_string(i) + "]";
                if (!item.is_object()) {
                    c.errors.push_back(w + ": expected an object");
                    continue;
                }
                const bool ok = c.count(item, w, "master_id", 1) & c.count(item, w, "target_id", 1) &
                                c.number(item, w, "similarity");
                c.string(item, w, "similarity_display");
                c.string(item, w, "master_title");
                c.string(item, w, "target_title");
                c.string(item, w, "master_url", true);
                c.string(item, w, "target_url", true);
                if (!ok) continue;
                const auto m = item["master_id"].get<std::int64_t>();
                const auto t = item["target_id"].get<std::int64_t>();
                const double v = item["similarity"];
                if (m == t) c.errors.push_back(w + ": master_id equals target_id");
                if (!seen.insert({m, t}).second) c.errors.push_back(w + ": duplicate pair");
                if (t_related && v < *t_related) c.errors.push_back(w + ": similarity below t_related");
                if (prev) {
                    const auto& [pv, pm, pt] = *prev;
                    if (v > pv || (v == pv && std::tie(m, t) < std::tie(pm, pt))) {
                        c.errors.push_back(w + ": candidates not sorted by similarity descending");
                    }
                }
                prev = std::make_tuple(v, m, t);
            }
        }
    }
    return c.errors;
}

std::optional<std::string> opt_string(const json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
}

}  // namespace

std::vector<std::string> schema_errors(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        return {std::string("not valid JSON: ") + e.what()};
    }
    return check(doc);
}

CandidateReport parse_report(std::string_view json_text) {
    const auto errors = schema_errors(json_text);
    if (!errors.empty()) {
        std::string msg = "invalid report:";
        for (std::size_t i = 0; i < errors.size() && i < 5; ++i) msg += "\n  " + errors[i];
        if (errors.size() > 5) msg += "\n  (" + std::to_string(errors.size() - 5) + " more)";
        throw ValidationError(msg);
    }
    const auto doc = json::parse(json_text);
    CandidateReport r;
    r.format_version = doc["format_version"];
    r.tool_version = doc["tool_version"];
    r.created_at = doc["created_at"];
    const auto& cfg = doc["config"];
    r.config = {cfg["corpus"], opt_string(cfg["project"]), cfg["category"],   cfg["k"],
                cfg["provider"], cfg["dim"], opt_string(cfg["endpoint"]), cfg["output"]};
    const auto& sum = doc["corpus_summary"];
    r.corpus_summary = {sum["loaded"], sum["selected"], sum["prepared"], sum["dropped_empty"]};
    const auto& st = doc["threshold_stats"];
    r.threshold_stats = {st["k"], st["size_s"], st["q1"], st["q2"], st["q3"], st["iqr"], st["t_related"]};
    r.similarity_file = doc["similarity_file"];
    r.warnings = doc["warnings"].get<std::vector<std::string>>();
    for (const auto& item : doc["candidates"]) {
        r.candidates.push_back({item["master_id"], item["target_id"], item["similarity"], item["master_title"],
                                item["target_title"], opt_string(item["master_url"]), opt_string(item["target_url"])});
    }
    return r;
}

CandidateReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read report " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_report(buf.str());
}

void save_report(const std::filesystem::path& path, const CandidateReport& report) {
    const auto text = to_json(report);
    detail::write_atomically(path, [&](std::ostream& out) { out << text; });
}

std::string to_candidates_csv(const CandidateReport& report) {
    std::ostringstream out;
    detail::write_csv_row(out, {"master_id", "target_id", "similarity", "master_title", "target_title", "master_url",
                                "target_url"});
    for (const auto& c : report.candidates) {
        detail::write_csv_row(out, {std::to_string(c.master_id), std::to_string(c.target_id), format_fixed4(c.value),
                                    c.master_title, c.target_title, c.master_url.value_or(""),
                                    c.target_url.value_or("")});
    }
    return out.str();
}

namespace {

template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
    const auto tag = [stage](const std::exception& e) { return std::string(stage) + ": " + e.what(); };
    try {
        return f();
    } catch (const IntegrityError& e) {
        throw IntegrityError(tag(e));
    } catch (const ValidationError& e) {
        throw ValidationError(tag(e));
    } catch (const IoError& e) {
        throw IoError(tag(e));
    } catch (const ProviderError& e) {
        throw ProviderError(tag(e));
    } catch (const InvariantError& e) {
        throw InvariantError(tag(e));
    }
}

// Everything up to the similarity records; independent of k.
struct PreparedGroup {
    std::vector<Discussion> selected;
    CorpusSummary summary;
    std::vector<SimilarityRecord> records;
    std::string created_at;
};

PreparedGroup prepare_group(const RunConfig& config, const std::vector<Discussion>& corpus) {
    PreparedGroup g;
    g.summary.loaded = corpus.size();
    g.selected = staged("filter", [&] { return apply_filter(corpus, config.filter()); });
    g.summary.selected = g.selected.size();
    PipelineStats stats;
    const auto docs = staged("preprocess", [&] { return prepare_all(g.selected, stats); });
    g.summary.prepared = docs.size();
    g.summary.dropped_empty = g.summary.selected - g.summary.prepared;
    if (docs.size() < 2) {
        throw ValidationError("too few documents: " + std::to_string(docs.size()) +
                              " left after filtering and preprocessing, at least 2 are needed");
    }
    const auto vectors = staged("embed", [&] { return embed_batch(config.provider, docs); });
    g.records = staged("similarity", [&] { return pairwise(docs, vectors, config.threads); });
    Timestamp newest = g.selected.front().created_at;
    for (const auto& d : g.selected) newest = std::max(newest, d.created_at);
    g.created_at = format_timestamp(newest);
    return g;
}

ConfigEcho echo(const RunConfig& config) {
    ConfigEcho e;
    e.corpus = config.corpus_path.generic_string();
    e.project = config.project;
    e.category = CategorySelector::parse(config.category).label();
    e.k = config.k;
    e.provider = to_string(config.provider.kind);
    e.dim = config.provider.kind == ProviderConfig::Kind::Hash ? config.provider.dim : 0;
    if (config.provider.kind == ProviderConfig::Kind::Http) e.endpoint = config.provider.endpoint;
    e.output = config.output_path.generic_string();
    return e;
}

CandidateReport finish(const RunConfig& config, const PreparedGroup& g) {
    CandidateReport r;
    r.tool_version = tool_version();
    r.created_at = g.created_at;
    r.config = echo(config);
    r.corpus_summary = g.summary;
    r.threshold_stats = staged("threshold", [&] { return compute_threshold(g.records, config.k); });
    r.candidates = staged("select", [&] { return select_candidates(g.records, r.threshold_stats, g.selected); });
    if (r.threshold_stats.size_s == g.records.size()) {
        r.warnings.push_back("k saturates the corpus: S holds every pair");
    }
    if (r.threshold_stats.degenerate()) {
        r.warnings.push_back("IQR is zero: the threshold equals Q3");
    }

    const auto paths = artifact_paths(config.output_path);
    r.similarity_file = paths.similarity.filename().string();
    staged("write", [&] {
        if (const auto dir = paths.report.parent_path(); !dir.empty()) {
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create directory " + dir.string());
        }
        save_similarity_file(paths.similarity, g.records);
        const auto csv = to_candidates_csv(r);
        detail::write_atomically(paths.candidates, [&](std::ostream& out) { out << csv; });
        save_report(paths.report, r);
        return 0;
    });
    return r;
}

std::vector<Discussion> load_stage(const std::filesystem::path& path) {
    return staged("load", [&] { return load_corpus(path); });
}

}  // namespace

CandidateReport run(const RunConfig& config) {
    staged("config", [&] {
        config.validate();
        return 0;
    });
    const auto corpus = load_stage(config.corpus_path);
    return finish(config, prepare_group(config, corpus));
}

std::vector<MatrixOutcome> run_matrix(const std::vector<RunConfig>& configs) {
    using GroupKey = std::tuple<std::string, std::string, std::string, std::string, std::size_t, std::string>;
    struct GroupResult {
        std::optional<PreparedGroup> group;
        std::string error;
        int exit_code = 0;
    };
    std::map<std::string, std::vector<Discussion>> corpora;
    std::map<std::string, std::pair<std::string, int>> corpus_errors;
    std::map<GroupKey, GroupResult> groups;
    std::set<std::string> outputs;

    std::vector<MatrixOutcome> out;
    for (const auto& config : configs) {
        MatrixOutcome o{config, std::nullopt, {}, 0};
        try {
            staged("config", [&] {
                config.validate();
                return 0;
            });
            const auto output = std::filesystem::absolute(config.output_path).lexically_normal().string();
            if (!outputs.insert(output).second) {
                throw ValidationError("config: output path " + config.output_path.string() + " used twice");
            }
            const auto corpus_key = std::filesystem::absolute(config.corpus_path).lexically_normal().string();
            const GroupKey key{corpus_key,
                               config.project ? detail::ascii_lower(*config.project) : std::string(),
                               CategorySelector::parse(config.category).label(),
                               to_string(config.provider.kind),
                               config.provider.dim,
                               config.provider.endpoint};
            auto it = groups.find(key);
            if (it == groups.end()) {
                GroupResult result;
                try {
                    if (auto e = corpus_errors.find(corpus_key); e != corpus_errors.end()) {
                        result.error = e->second.first;
                        result.exit_code = e->second.second;
                    } else {
                        auto c = corpora.find(corpus_key);
                        if (c == corpora.end()) {
                            try {
                                c = corpora.emplace(corpus_key, load_stage(config.corpus_path)).first;
                            } catch (const std::exception& e) {
                                corpus_errors[corpus_key] = {e.what(), exit_code_of(e)};
                                throw;
                            }
                        }
                        result.group = prepare_group(config, c->second);
                    }
                } catch (const std::exception& e) {
                    result.error = e.what();
                    result.exit_code = exit_code_of(e);
                }
                it = groups.emplace(key, std::move(result)).first;
            }
            if (!it->second.group) {
                o.error = it->second.error;
                o.exit_code = it->second.exit_code;
            } else {
                o.report = finish(config, *it->second.group);
            }
        } catch (const std::exception& e) {
            o.error = e.what();
            o.exit_code = exit_code_of(e);
        }
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<RunConfig> parse_matrix_spec(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("matrix spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ValidationError("matrix spec must be a JSON list of run configs");
    static const std::set<std::string> known{"corpus", "project", "category", "k",
                                             "provider", "dim", "endpoint", "out", "threads"};
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    std::vector<RunConfig> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        const auto where = "matrix spec entry " + std::to_string(i);
        if (!item.is_object()) throw ValidationError(where + ": expected an object");
        for (const auto& [key, value] : item.items()) {
            if (!known.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
        }
        const auto str = [&](const char* key) -> std::optional<std::string> {
            const auto it = item.find(key);
            if (it == item.end() || it->is_null()) return std::nullopt;
            if (!it->is_string()) throw ValidationError(where + ": '" + key + "' must be a string");
            return it->get<std::string>();
        };
        const auto count = [&](const char* key) -> std::optional<std::size_t> {
            const auto it = item.find(key);
            if (it == item.end() || it->is_null()) return std::nullopt;
            if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
                throw ValidationError(where + ": '" + key + "' must be a non-negative integer");
            }
            return it->get<std::size_t>();
        };
        RunConfig c;
        const auto corpus = str("corpus");
        const auto output = str("out");
        const auto k = count("k");
        if (!corpus) throw ValidationError(where + ": missing 'corpus'");
        if (!output) throw ValidationError(where + ": missing 'out'");
        if (!k) throw ValidationError(where + ": missing 'k'");
        c.corpus_path = resolve(*corpus);
        c.output_path = resolve(*output);
        c.k = *k;
        c.project = str("project");
        c.category = str("category").value_or("all");
        c.provider.kind = parse_provider_kind(str("provider").value_or("hash"));
        if (const auto dim = count("dim")) c.provider.dim = *dim;
        c.provider.endpoint = str("endpoint").value_or("");
        if (const auto t = count("threads")) c.threads = static_cast<unsigned>(*t);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<RunConfig> load_matrix_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read matrix spec " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matrix_spec(buf.str(), path.parent_path());
}

}  // namespace reldisc
