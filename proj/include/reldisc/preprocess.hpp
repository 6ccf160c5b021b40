#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reldisc/corpus.hpp"

namespace reldisc {

/// Title and body of one discussion after the cleaning pipeline. `text` is
/// never empty: posts that clean down to nothing are dropped instead.
struct PreparedDoc {
    DiscussionId discussion_id = 0;
    std::string project;
    Timestamp created_at{};
    std::string text;

    bool operator==(const PreparedDoc&) const = default;
};

/// Counters are plain sums so partial stats from shards can be added in any
/// order.
struct PipelineStats {
    std::size_t input_count = 0;
    std::size_t emitted = 0;
    std::size_t dropped_empty = 0;
    std::size_t markup_bytes_removed = 0;  // code blocks, URLs, tags
    std::size_t noise_bytes_removed = 0;   // punctuation, emoji, digits, stopwords
    std::size_t stopwords_removed = 0;

    PipelineStats& operator+=(const PipelineStats& other);
    bool operator==(const PipelineStats&) const = default;
};

/// Character classes the noise filter acts on. Everything that is not one of
/// these (letters, marks, '.', '_') is kept.
enum class CharClass { Kept, Whitespace, Punctuation, Digit, Emoji, Invisible };

CharClass classify(char32_t cp);

/// Simple case mapping for Latin, Greek, Cyrillic, Armenian and fullwidth
/// forms; other code points map to themselves.
char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view utf8);

/// Removes fenced/inline Markdown code, <code>/<pre>/<script>/<style>
/// regions and URLs, then reduces any remaining tags to their text. Unclosed
/// HTML regions are left as text.
std::string strip_code_and_urls(std::string_view html_or_md);

/// Drops punctuation other than '.' and '_', emoji, digits and English
/// stopwords. Tokens left with only '.'/'_' characters are dropped too.
/// Output tokens are separated by single spaces.
std::string strip_noise(std::string_view text);

/// Lowercases, lemmatizes every whitespace-separated token, and collapses
/// whitespace.
std::string normalize(std::string_view text);

/// Lemma of one lowercase token: irregular-form table first, then suffix
/// rules. Tokens with characters other than a-z (ignoring trailing periods)
/// are returned unchanged.
std::string lemmatize(std::string_view token);

bool is_stopword(std::string_view token);

/// Full pipeline over `title + " " + body`. Returns nullopt when nothing is
/// left. `stats`, when given, is updated.
std::optional<PreparedDoc> prepare(const Discussion& d, PipelineStats* stats = nullptr);

std::vector<PreparedDoc> prepare_all(const std::vector<Discussion>& corpus, PipelineStats& stats);

/// Sizes and FNV-1a 64 checksums of the compiled-in word lists.
struct LexiconInfo {
    std::size_t stopword_count;
    std::size_t lemma_count;
    std::uint64_t stopwords_checksum;
    std::uint64_t lemmas_checksum;
};

LexiconInfo lexicon_info();

}  // namespace reldisc
