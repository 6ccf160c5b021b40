#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace reldisc::detail {

extern const std::string_view kStopwordsText;
extern const std::string_view kLemmasText;

std::uint64_t fnv1a64(std::string_view bytes);

class Lexicon {
public:
    static const Lexicon& instance();

    bool is_stopword(std::string_view lower_token) const;
    /// Irregular lemma for `lower_token`, or empty view.
    std::string_view irregular(std::string_view lower_token) const;

    std::size_t stopword_count() const { return stopwords_.size(); }
    std::size_t lemma_count() const { return lemmas_.size(); }

private:
    Lexicon();

    std::unordered_set<std::string> stopwords_;
    std::unordered_map<std::string, std::string> lemmas_;
};

}  // namespace reldisc::detail
