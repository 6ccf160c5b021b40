#include "reldisc/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>

#include "csv.hpp"
#include "text_util.hpp"

namespace reldisc {

namespace {

DiscussionId parse_id(std::string_view text, std::size_t line, const char* field) {
    DiscussionId v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(line, std::string(field) + " is not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::size_t label_index(Label l) { return static_cast<std::size_t>(l); }

}  // namespace

char to_char(Label label) {
    switch (label) {
    case Label::D: return 'D';
    case Label::R: return 'R';
    case Label::N: return 'N';
    }
    return '?';
}

Label parse_label(std::string_view text) {
    if (text == "D") return Label::D;
    if (text == "R") return Label::R;
    if (text == "N") return Label::N;
    throw ValidationError("label must be D, R or N, got '" + std::string(text) + "'");
}

void validate(const Judgment& j) {
    if (j.master_id <= 0 || j.target_id <= 0) throw ValidationError("judgment ids must be positive");
    if (j.master_id == j.target_id) throw ValidationError("judgment pairs a discussion with itself");
    if (detail::trim(j.evaluator).empty()) throw ValidationError("judgment evaluator is empty");
}

std::vector<Judgment> read_judgments(std::istream& in) {
    detail::CsvReader reader(in);
    std::vector<std::string> fields;
    std::vector<Judgment> out;
    if (!reader.next(fields)) return out;
    std::string header;
    for (std::size_t i = 0; i < fields.size(); ++i) header += (i ? "," : "") + std::string(detail::trim(fields[i]));
    if (header != kJudgmentHeader) {
        throw ParseError(reader.line(), "expected header '" + std::string(kJudgmentHeader) + "'");
    }
    while (reader.next(fields)) {
        const auto line = reader.line();
        if (fields.size() != 6) {
            throw ParseError(line, "expected 6 fields, found " + std::to_string(fields.size()));
        }
        Judgment j;
        j.master_id = parse_id(fields[0], line, "master_id");
        j.target_id = parse_id(fields[1], line, "target_id");
        try {
            j.label = parse_label(fields[2]);
            j.evaluator = fields[3];
            if (!fields[4].empty()) j.comment = fields[4];
            j.judged_at = parse_timestamp(fields[5]);
            validate(j);
        } catch (const ValidationError& e) {
            throw ParseError(line, e.what());
        }
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<Judgment> load_judgments(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read judgments " + path.string());
    return read_judgments(in);
}

namespace {

std::vector<std::string> to_row(const Judgment& j) {
    return {std::to_string(j.master_id), std::to_string(j.target_id), std::string(1, to_char(j.label)), j.evaluator,
            j.comment.value_or(""), format_timestamp(j.judged_at)};
}

}  // namespace

void write_judgments(std::ostream& out, const std::vector<Judgment>& judgments) {
    out << kJudgmentHeader << '\n';
    for (const auto& j : judgments) detail::write_csv_row(out, to_row(j));
}

void append_judgment(const std::filesystem::path& path, const Judgment& j) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + path.string());
    if (fresh) out << kJudgmentHeader << '\n';
    detail::write_csv_row(out, to_row(j));
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::map<PairKey, std::map<std::string, Label>> effective_labels(const std::vector<Judgment>& judgments) {
    std::map<PairKey, std::map<std::string, const Judgment*>> latest;
    for (const auto& j : judgments) {
        auto& slot = latest[j.key()][j.evaluator];
        if (!slot || j.judged_at >= slot->judged_at) slot = &j;
    }
    std::map<PairKey, std::map<std::string, Label>> out;
    for (const auto& [key, by_evaluator] : latest) {
        auto& labels = out[key];
        for (const auto& [evaluator, j] : by_evaluator) labels.emplace(evaluator, j->label);
    }
    return out;
}

Label consensus(const std::vector<Label>& labels) {
    LabelCounts c;
    for (const auto l : labels) c.add(l);
    if (2 * (c.d + c.r) > c.total()) return c.d > c.r ? Label::D : Label::R;
    return Label::N;
}

std::string to_string(Denominator d) { return d == Denominator::AllCandidates ? "all" : "judged"; }

Denominator parse_denominator(std::string_view text) {
    if (text == "all" || text == "all_candidates") return Denominator::AllCandidates;
    if (text == "judged" || text == "judged_only") return Denominator::JudgedOnly;
    throw ValidationError("denominator must be 'all' or 'judged', got '" + std::string(text) + "'");
}

void LabelCounts::add(Label label) {
    switch (label) {
    case Label::D: ++d; break;
    case Label::R: ++r; break;
    case Label::N: ++n; break;
    }
}

double PrecisionReport::value() const {
    if (!precision) throw ValidationError("precision is undefined: no pairs in the denominator");
    return *precision;
}

PrecisionReport precision(const std::vector<PairKey>& candidates, const std::vector<Judgment>& judgments,
                          Denominator denominator) {
    const std::set<PairKey> known(candidates.begin(), candidates.end());
    for (const auto& j : judgments) {
        if (!known.count(j.key())) {
            throw UnknownPairError("judgment for pair (" + std::to_string(j.master_id) + ", " +
                                   std::to_string(j.target_id) + ") which is not a candidate");
        }
    }
    PrecisionReport rep;
    rep.denominator = denominator;
    rep.total_candidates = known.size();
    for (const auto& [key, by_evaluator] : effective_labels(judgments)) {
        std::vector<Label> labels;
        for (const auto& [evaluator, label] : by_evaluator) {
            labels.push_back(label);
            rep.label_counts.add(label);
        }
        const auto c = consensus(labels);
        rep.consensus_counts.add(c);
        ++rep.judged;
        if (is_true_positive(c)) ++rep.true_positives;
    }
    rep.unjudged = rep.total_candidates - rep.judged;
    const auto denom = denominator == Denominator::AllCandidates ? rep.total_candidates : rep.judged;
    if (denom > 0) rep.precision = static_cast<double>(rep.true_positives) / static_cast<double>(denom);
    return rep;
}

double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
    if (a.size() != b.size()) throw ValidationError("kappa needs aligned label sequences of equal length");
    if (a.empty()) throw ValidationError("kappa needs at least one item");
    std::array<std::size_t, 3> ca{}, cb{};
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++ca[label_index(a[i])];
        ++cb[label_index(b[i])];
        if (a[i] == b[i]) ++agree;
    }
    const auto n = static_cast<double>(a.size());
    const double p_o = static_cast<double>(agree) / n;
    double p_e = 0.0;
    for (std::size_t k = 0; k < 3; ++k) p_e += (static_cast<double>(ca[k]) / n) * (static_cast<double>(cb[k]) / n);
    if (p_e >= 1.0) return 1.0;
    return (p_o - p_e) / (1.0 - p_e);
}

double mean_precision(const std::vector<double>& precisions) {
    if (precisions.empty()) throw ValidationError("mean precision of no reports");
    double sum = 0.0;
    for (const auto p : precisions) sum += p;
    return sum / static_cast<double>(precisions.size());
}

double mean_precision(const std::vector<PrecisionReport>& reports) {
    std::vector<double> values;
    for (const auto& r : reports) values.push_back(r.value());
    return mean_precision(values);
}

std::string format_percent(double fraction) {
    const auto hundredths = static_cast<long long>(std::floor(fraction * 10000.0 + 1e-9));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", hundredths / 100, hundredths % 100);
    return buf;
}

std::string metrics_json(const PrecisionReport& report) {
    auto counts = [](const LabelCounts& c) { return nlohmann::ordered_json{{"D", c.d}, {"R", c.r}, {"N", c.n}}; };
    nlohmann::ordered_json j;
    j["denominator"] = to_string(report.denominator);
    j["total_candidates"] = report.total_candidates;
    j["judged"] = report.judged;
    j["unjudged"] = report.unjudged;
    j["true_positives"] = report.true_positives;
    if (report.precision) {
        j["precision"] = *report.precision;
        j["precision_percent"] = format_percent(*report.precision);
    } else {
        j["precision"] = "undefined";
        j["precision_percent"] = "undefined";
    }
    j["consensus"] = counts(report.consensus_counts);
    j["labels"] = counts(report.label_counts);
    return j.dump(2);
}

}  // namespace reldisc
