#include "lexicon.hpp"

#include <stdexcept>

#include "text_util.hpp"

namespace reldisc::detail {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

template <typename Fn>
void for_each_entry(std::string_view text, Fn&& fn) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        if (!line.empty() && line.front() != '#') fn(line);
        pos = end + 1;
    }
}

}  // namespace

Lexicon::Lexicon() {
    for_each_entry(kStopwordsText, [&](std::string_view line) { stopwords_.emplace(line); });
    for_each_entry(kLemmasText, [&](std::string_view line) {
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw std::logic_error("lemma table line without tab");
        lemmas_.emplace(std::string(trim(line.substr(0, tab))), std::string(trim(line.substr(tab + 1))));
    });
}

const Lexicon& Lexicon::instance() {
    static const Lexicon lexicon;
    return lexicon;
}

bool Lexicon::is_stopword(std::string_view lower_token) const {
    return stopwords_.count(std::string(lower_token)) > 0;
}

std::string_view Lexicon::irregular(std::string_view lower_token) const {
    const auto it = lemmas_.find(std::string(lower_token));
    return it == lemmas_.end() ? std::string_view{} : std::string_view{it->second};
}

}  // namespace reldisc::detail
