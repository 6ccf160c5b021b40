#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reldisc/timestamp.hpp"

namespace reldisc {

/// Discussion number; positive and unique within a project.
using DiscussionId = std::int64_t;

/// One forum post as collected from the host. Comments are not stored.
struct Discussion {
    DiscussionId id = 0;
    std::string project;
    std::string category;  // raw label, never rewritten
    std::string author;
    Timestamp created_at{};
    std::string title;
    std::string body;
    std::optional<std::string> url;

    bool operator==(const Discussion&) const = default;
};

/// Throws ValidationError if `d` breaks a field invariant (positive id,
/// non-empty project, category and title).
void validate(const Discussion& d);

/// Category filter value after canonicalization. The standardized labels
/// Q&A, Ideas and ALL group several raw category slugs; anything else is
/// matched literally (case-insensitive).
class CategorySelector {
public:
    enum class Kind { All, QuestionsAndAnswers, Ideas, Raw };

    /// Accepts the CLI spellings (qa, ideas, all), the canonical labels
    /// (Q&A, Ideas, ALL) and any other non-empty string as a raw label.
    static CategorySelector parse(std::string_view text);

    Kind kind() const { return kind_; }
    /// "Q&A", "Ideas", "ALL", or the raw label.
    const std::string& label() const { return label_; }
    bool matches(std::string_view raw_category) const;

    bool operator==(const CategorySelector&) const = default;

private:
    CategorySelector(Kind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

    Kind kind_;
    std::string label_;
};

struct CorpusFilter {
    std::optional<std::string> project;
    std::optional<CategorySelector> category;
    std::optional<Timestamp> since;  // inclusive
    std::optional<Timestamp> until;  // inclusive

    bool matches(const Discussion& d) const;
};

/// Reads a JSONL corpus. Malformed lines raise ParseError with the 1-based
/// line number; a repeated (project, id) key raises ValidationError.
std::vector<Discussion> load_corpus(const std::filesystem::path& path);
std::vector<Discussion> read_corpus(std::istream& in);

void save_corpus(const std::filesystem::path& path, const std::vector<Discussion>& corpus);
void write_corpus(std::ostream& out, const std::vector<Discussion>& corpus);

/// One JSONL line (no trailing newline), keys in schema order.
std::string to_jsonl(const Discussion& d);

std::vector<Discussion> apply_filter(const std::vector<Discussion>& corpus, const CorpusFilter& filter);

}  // namespace reldisc
