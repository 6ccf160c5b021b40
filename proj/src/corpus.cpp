#include "reldisc/corpus.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "atomic_file.hpp"
#include "reldisc/error.hpp"
#include "text_util.hpp"

namespace reldisc {

using nlohmann::json;
using detail::iequals;

void validate(const Discussion& d) {
    if (d.id <= 0) throw ValidationError("discussion id must be positive");
    if (d.project.empty()) throw ValidationError("discussion " + std::to_string(d.id) + ": empty project");
    if (d.category.empty()) throw ValidationError("discussion " + std::to_string(d.id) + ": empty category");
    if (d.title.empty()) throw ValidationError("discussion " + std::to_string(d.id) + ": empty title");
}

CategorySelector CategorySelector::parse(std::string_view text) {
    const auto t = detail::trim(text);
    if (t.empty()) throw ValidationError("empty category filter");
    if (iequals(t, "all")) return {Kind::All, "ALL"};
    if (iequals(t, "qa") || iequals(t, "q&a")) return {Kind::QuestionsAndAnswers, "Q&A"};
    if (iequals(t, "ideas")) return {Kind::Ideas, "Ideas"};
    return {Kind::Raw, std::string(t)};
}

bool CategorySelector::matches(std::string_view raw) const {
    switch (kind_) {
        case Kind::All:
            return true;
        case Kind::QuestionsAndAnswers:
            return iequals(raw, "q-a") || iequals(raw, "help");
        case Kind::Ideas:
            return iequals(raw, "ideas") || iequals(raw, "ideas-feature-requests");
        case Kind::Raw:
            return iequals(raw, label_);
    }
    return false;
}

bool CorpusFilter::matches(const Discussion& d) const {
    if (project && !iequals(*project, d.project)) return false;
    if (category && !category->matches(d.category)) return false;
    if (since && d.created_at < *since) return false;
    if (until && d.created_at > *until) return false;
    return true;
}

namespace {

std::string require_string(const json& record, const char* key) {
    const auto it = record.find(key);
    if (it == record.end()) throw ValidationError(std::string("missing field '") + key + "'");
    if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

Discussion from_record(const json& record) {
    if (!record.is_object()) throw ValidationError("record is not a JSON object");
    Discussion d;
    const auto id = record.find("id");
    if (id == record.end()) throw ValidationError("missing field 'id'");
    if (!id->is_number_integer()) throw ValidationError("field 'id' must be an integer");
    d.id = id->get<DiscussionId>();
    d.project = require_string(record, "project");
    d.category = require_string(record, "category");
    d.author = require_string(record, "author");
    d.created_at = parse_timestamp(require_string(record, "created_at"));
    d.title = require_string(record, "title");
    d.body = require_string(record, "body");
    if (const auto url = record.find("url"); url != record.end() && !url->is_null()) {
        if (!url->is_string()) throw ValidationError("field 'url' must be a string");
        d.url = url->get<std::string>();
    }
    validate(d);
    return d;
}

}  // namespace

std::vector<Discussion> read_corpus(std::istream& in) {
    std::vector<Discussion> corpus;
    std::map<std::pair<std::string, DiscussionId>, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        Discussion d;
        try {
            d = from_record(json::parse(line));
        } catch (const json::exception& e) {
            throw ParseError(line_no, e.what());
        } catch (const ValidationError& e) {
            throw ParseError(line_no, e.what());
        }
        auto [it, inserted] = seen.emplace(std::make_pair(d.project, d.id), line_no);
        if (!inserted) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate discussion (" + d.project +
                                  ", " + std::to_string(d.id) + "), first seen on line " +
                                  std::to_string(it->second));
        }
        corpus.push_back(std::move(d));
    }
    if (in.bad()) throw IoError("failed reading corpus stream");
    return corpus;
}

std::vector<Discussion> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus " + path.string());
    return read_corpus(in);
}

std::string to_jsonl(const Discussion& d) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["project"] = d.project;
    j["category"] = d.category;
    j["author"] = d.author;
    j["created_at"] = format_timestamp(d.created_at);
    j["title"] = d.title;
    j["body"] = d.body;
    if (d.url) j["url"] = *d.url;
    return j.dump();
}

void write_corpus(std::ostream& out, const std::vector<Discussion>& corpus) {
    for (const auto& d : corpus) out << to_jsonl(d) << '\n';
}

void save_corpus(const std::filesystem::path& path, const std::vector<Discussion>& corpus) {
    detail::write_atomically(path, [&](std::ostream& out) { write_corpus(out, corpus); });
}

std::vector<Discussion> apply_filter(const std::vector<Discussion>& corpus, const CorpusFilter& filter) {
    std::vector<Discussion> out;
    for (const auto& d : corpus) {
        if (filter.matches(d)) out.push_back(d);
    }
    return out;
}

}  // namespace reldisc
