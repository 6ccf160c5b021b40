#include "reldisc/preprocess.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <span>
#include <utility>

#include "lexicon.hpp"
#include "text_util.hpp"
#include "utf8.hpp"

namespace reldisc {

using detail::Lexicon;

PipelineStats& PipelineStats::operator+=(const PipelineStats& other) {
    input_count += other.input_count;
    emitted += other.emitted;
    dropped_empty += other.dropped_empty;
    markup_bytes_removed += other.markup_bytes_removed;
    noise_bytes_removed += other.noise_bytes_removed;
    stopwords_removed += other.stopwords_removed;
    return *this;
}

// ---------------------------------------------------------------------------
// Character classes

namespace {

struct Range {
    char32_t lo;
    char32_t hi;
};

// Tables are sorted and non-overlapping.
bool in_ranges(char32_t cp, std::span<const Range> ranges) {
    auto it = std::upper_bound(ranges.begin(), ranges.end(), cp, [](char32_t v, const Range& r) { return v < r.lo; });
    return it != ranges.begin() && cp <= std::prev(it)->hi;
}

// Extended_Pictographic plus emoji components (skin tones, regional
// indicators, keycap, ZWJ, variation selectors, tag characters).
constexpr Range kEmoji[] = {
    {0x00A9, 0x00A9}, {0x00AE, 0x00AE}, {0x200D, 0x200D}, {0x203C, 0x203C}, {0x2049, 0x2049},
    {0x20E3, 0x20E3}, {0x2122, 0x2122}, {0x2139, 0x2139}, {0x2194, 0x2199}, {0x21A9, 0x21AA},
    {0x231A, 0x231B}, {0x2328, 0x2328}, {0x2388, 0x2388}, {0x23CF, 0x23CF}, {0x23E9, 0x23F3},
    {0x23F8, 0x23FA}, {0x24C2, 0x24C2}, {0x25AA, 0x25AB}, {0x25B6, 0x25B6}, {0x25C0, 0x25C0},
    {0x25FB, 0x25FE}, {0x2600, 0x2605}, {0x2607, 0x2612}, {0x2614, 0x2685}, {0x2690, 0x2705},
    {0x2708, 0x2712}, {0x2714, 0x2714}, {0x2716, 0x2716}, {0x271D, 0x271D}, {0x2721, 0x2721},
    {0x2728, 0x2728}, {0x2733, 0x2734}, {0x2744, 0x2744}, {0x2747, 0x2747}, {0x274C, 0x274C},
    {0x274E, 0x274E}, {0x2753, 0x2755}, {0x2757, 0x2757}, {0x2763, 0x2767}, {0x2795, 0x2797},
    {0x27A1, 0x27A1}, {0x27B0, 0x27B0}, {0x27BF, 0x27BF}, {0x2934, 0x2935}, {0x2B05, 0x2B07},
    {0x2B1B, 0x2B1C}, {0x2B50, 0x2B50}, {0x2B55, 0x2B55}, {0x3030, 0x3030}, {0x303D, 0x303D},
    {0x3297, 0x3297}, {0x3299, 0x3299}, {0xFE0E, 0xFE0F}, {0x1F000, 0x1F0FF}, {0x1F10D, 0x1F10F},
    {0x1F12F, 0x1F12F}, {0x1F16C, 0x1F171}, {0x1F17E, 0x1F17F}, {0x1F18E, 0x1F18E}, {0x1F191, 0x1F19A},
    {0x1F1AD, 0x1F1FF}, {0x1F201, 0x1F20F}, {0x1F21A, 0x1F21A}, {0x1F22F, 0x1F22F}, {0x1F232, 0x1F23A},
    {0x1F23C, 0x1F23F}, {0x1F249, 0x1F3FF}, {0x1F400, 0x1F53D}, {0x1F546, 0x1F64F}, {0x1F680, 0x1F6FF},
    {0x1F774, 0x1F77F}, {0x1F7D5, 0x1F7FF}, {0x1F80C, 0x1F80F}, {0x1F848, 0x1F84F}, {0x1F85A, 0x1F85F},
    {0x1F888, 0x1F88F}, {0x1F8AE, 0x1F8FF}, {0x1F90C, 0x1F93A}, {0x1F93C, 0x1F945}, {0x1F947, 0x1FAFF},
    {0x1FC00, 0x1FFFD}, {0xE0020, 0xE007F},
};

constexpr Range kSpace[] = {
    {0x0085, 0x0085}, {0x00A0, 0x00A0}, {0x1680, 0x1680}, {0x2000, 0x200A}, {0x2028, 0x2029},
    {0x202F, 0x202F}, {0x205F, 0x205F}, {0x3000, 0x3000},
};

constexpr Range kInvisible[] = {
    {0x00AD, 0x00AD}, {0x061C, 0x061C}, {0x180E, 0x180E}, {0x200B, 0x200C}, {0x200E, 0x200F},
    {0x2060, 0x2064}, {0xFEFF, 0xFEFF},
};

constexpr Range kNumber[] = {
    {0x00B2, 0x00B3}, {0x00B9, 0x00B9}, {0x00BC, 0x00BE}, {0x0660, 0x0669}, {0x06F0, 0x06F9},
    {0x07C0, 0x07C9}, {0x0966, 0x096F}, {0x09E6, 0x09EF}, {0x0A66, 0x0A6F}, {0x0AE6, 0x0AEF},
    {0x0B66, 0x0B6F}, {0x0BE6, 0x0BEF}, {0x0C66, 0x0C6F}, {0x0CE6, 0x0CEF}, {0x0D66, 0x0D6F},
    {0x0E50, 0x0E59}, {0x0ED0, 0x0ED9}, {0x0F20, 0x0F29}, {0x1040, 0x1049}, {0x17E0, 0x17E9},
    {0x1810, 0x1819}, {0x2070, 0x2070}, {0x2074, 0x2079}, {0x2080, 0x2089}, {0x2150, 0x2189},
    {0x2460, 0x249B}, {0x24EA, 0x24FF}, {0x2776, 0x2793}, {0x3007, 0x3007}, {0x3021, 0x3029},
    {0x3038, 0x303A}, {0x3192, 0x3195}, {0x3220, 0x3229}, {0x3248, 0x324F}, {0x3251, 0x325F},
    {0x3280, 0x3289}, {0x32B1, 0x32BF}, {0xFF10, 0xFF19}, {0x1D7CE, 0x1D7FF}, {0x1F100, 0x1F10C},
};

// Punctuation and symbol blocks (Unicode P* and S* categories, coarsely).
constexpr Range kPunct[] = {
    {0x00A1, 0x00A9}, {0x00AB, 0x00B4}, {0x00B6, 0x00B9}, {0x00BB, 0x00BF}, {0x00D7, 0x00D7},
    {0x00F7, 0x00F7}, {0x02C2, 0x02C5}, {0x02D2, 0x02DF}, {0x02E5, 0x02EB}, {0x02ED, 0x02ED},
    {0x02EF, 0x02FF}, {0x037E, 0x037E}, {0x0387, 0x0387}, {0x055A, 0x055F}, {0x0589, 0x058A},
    {0x05BE, 0x05BE}, {0x05C0, 0x05C0}, {0x05C3, 0x05C3}, {0x05C6, 0x05C6}, {0x05F3, 0x05F4},
    {0x0609, 0x060D}, {0x061B, 0x061B}, {0x061E, 0x061F}, {0x066A, 0x066D}, {0x06D4, 0x06D4},
    {0x0964, 0x0965}, {0x0970, 0x0970}, {0x0E4F, 0x0E4F}, {0x0E5A, 0x0E5B}, {0x10FB, 0x10FB},
    {0x1360, 0x1368}, {0x166E, 0x166E}, {0x169B, 0x169C}, {0x16EB, 0x16ED}, {0x2010, 0x2027},
    {0x2030, 0x205E}, {0x207A, 0x207E}, {0x208A, 0x208E}, {0x20A0, 0x20CF}, {0x2100, 0x214F},
    {0x2190, 0x245F}, {0x2500, 0x2BFF}, {0x2E00, 0x2E7F}, {0x3001, 0x3004}, {0x3008, 0x3020},
    {0x3030, 0x3030}, {0x303D, 0x303F}, {0x30A0, 0x30A0}, {0x30FB, 0x30FB}, {0xFD3E, 0xFD3F},
    {0xFE10, 0xFE19}, {0xFE30, 0xFE6F}, {0xFF01, 0xFF0F}, {0xFF1A, 0xFF20}, {0xFF3B, 0xFF40},
    {0xFF5B, 0xFF65}, {0xFFE0, 0xFFEE}, {0xFFF9, 0xFFFD}, {0x1F000, 0x1F0FF}, {0x1F300, 0x1F6FF},
    {0x1F700, 0x1FAFF},
};

}  // namespace

CharClass classify(char32_t cp) {
    if (cp < 0x80) {
        if (cp == ' ' || cp < 0x20 || cp == 0x7F) return CharClass::Whitespace;
        if (cp >= '0' && cp <= '9') return CharClass::Digit;
        if (cp == '.' || cp == '_') return CharClass::Kept;
        if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return CharClass::Kept;
        return CharClass::Punctuation;
    }
    if (cp <= 0x9F) return CharClass::Whitespace;  // C1 controls
    if (in_ranges(cp, kEmoji)) return CharClass::Emoji;
    if (in_ranges(cp, kSpace)) return CharClass::Whitespace;
    if (in_ranges(cp, kInvisible)) return CharClass::Invisible;
    if (in_ranges(cp, kNumber)) return CharClass::Digit;
    if (in_ranges(cp, kPunct)) return CharClass::Punctuation;
    return CharClass::Kept;
}

char32_t to_lower(char32_t cp) {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x0100 && cp <= 0x017F) {
        if (cp == 0x0130) return 'i';
        if (cp == 0x0178) return 0x00FF;
        if ((cp >= 0x0139 && cp <= 0x0148) || (cp >= 0x0179 && cp <= 0x017E)) return (cp & 1) ? cp + 1 : cp;
        if (cp == 0x0131 || cp == 0x0138 || cp == 0x0149 || cp == 0x017F) return cp;
        return (cp & 1) ? cp : cp + 1;
    }
    if (cp >= 0x0391 && cp <= 0x03AB && cp != 0x03A2) return cp + 0x20;
    if (cp == 0x0386) return 0x03AC;
    if (cp >= 0x0388 && cp <= 0x038A) return cp + 0x25;
    if (cp == 0x038C) return 0x03CC;
    if (cp == 0x038E || cp == 0x038F) return cp + 0x3F;
    if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
    if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
    if ((cp >= 0x0460 && cp <= 0x0481) || (cp >= 0x048A && cp <= 0x04BF) || (cp >= 0x04D0 && cp <= 0x052F)) {
        return (cp & 1) ? cp : cp + 1;
    }
    if (cp >= 0x0531 && cp <= 0x0556) return cp + 0x30;
    if (cp >= 0x1E00 && cp <= 0x1EFF && !(cp >= 0x1E96 && cp <= 0x1E9F)) return (cp & 1) ? cp : cp + 1;
    if (cp >= 0xFF21 && cp <= 0xFF3A) return cp + 0x20;
    return cp;
}

std::string to_lower(std::string_view utf8) {
    std::string out;
    out.reserve(utf8.size());
    std::size_t pos = 0;
    while (pos < utf8.size()) {
        const auto start = pos;
        const auto cp = detail::decode_next(utf8, pos);
        if (cp == detail::kInvalidCodepoint) {
            out.append(utf8.substr(start, pos - start));
        } else {
            detail::append_utf8(out, to_lower(cp));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Code and URL removal

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_alnum(char c) { return is_ascii_alpha(c) || (c >= '0' && c <= '9'); }
bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
    return s.size() - pos >= prefix.size() && detail::iequals(s.substr(pos, prefix.size()), prefix);
}

// Markdown fenced code blocks (``` or ~~~, up to three spaces of indent).
// An unclosed fence runs to the end of the text.
std::string strip_fences(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_fence = false;
    char fence_char = 0;
    std::size_t fence_len = 0;
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto end = s.find('\n', pos);
        end = end == std::string_view::npos ? s.size() : end + 1;
        const auto line = s.substr(pos, end - pos);
        pos = end;

        std::size_t indent = 0;
        while (indent < line.size() && indent < 3 && line[indent] == ' ') ++indent;
        const auto body = line.substr(indent);
        const char c = body.empty() ? '\0' : body.front();
        std::size_t run = 0;
        if (c == '`' || c == '~') {
            while (run < body.size() && body[run] == c) ++run;
        }

        if (!in_fence) {
            const bool opens = run >= 3 && !(c == '`' && body.substr(run).find('`') != std::string_view::npos);
            if (opens) {
                in_fence = true;
                fence_char = c;
                fence_len = run;
            } else {
                out.append(line);
            }
        } else if (c == fence_char && run >= fence_len && detail::trim(body.substr(run)).empty()) {
            in_fence = false;
        }
    }
    return out;
}

// Where the matching close tag `</name>` ends, or npos.
std::size_t find_close_tag(std::string_view s, std::size_t from, std::string_view name) {
    for (auto pos = s.find("</", from); pos != std::string_view::npos; pos = s.find("</", pos + 2)) {
        if (!starts_with_ci(s, pos + 2, name)) continue;
        auto i = pos + 2 + name.size();
        while (i < s.size() && is_ascii_space(s[i])) ++i;
        if (i < s.size() && s[i] == '>') return i + 1;
    }
    return std::string_view::npos;
}

std::string strip_code_regions(std::string_view s) {
    static constexpr std::array<std::string_view, 4> kRegions{"code", "pre", "script", "style"};
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<') {
            bool removed = false;
            for (const auto name : kRegions) {
                if (!starts_with_ci(s, i + 1, name)) continue;
                const auto after = i + 1 + name.size();
                if (after < s.size() && !(s[after] == '>' || s[after] == '/' || is_ascii_space(s[after]))) continue;
                const auto open_end = s.find('>', after);
                if (open_end == std::string_view::npos) break;
                if (s[open_end - 1] == '/') {  // <code/>
                    i = open_end + 1;
                    removed = true;
                    break;
                }
                const auto close_end = find_close_tag(s, open_end + 1, name);
                if (close_end == std::string_view::npos) break;
                i = close_end;
                removed = true;
                break;
            }
            if (removed) continue;
        }
        out.push_back(s[i++]);
    }
    return out;
}

// Markdown inline code: a backtick run closed by a run of the same length.
std::string strip_inline_code(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '`') {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t run = 0;
        while (i + run < s.size() && s[i + run] == '`') ++run;
        std::size_t j = i + run;
        std::size_t close = std::string_view::npos;
        while (j < s.size()) {
            if (s[j] != '`') {
                ++j;
                continue;
            }
            std::size_t other = 0;
            while (j + other < s.size() && s[j + other] == '`') ++other;
            if (other == run) {
                close = j + other;
                break;
            }
            j += other;
        }
        if (close == std::string_view::npos) {
            out.append(s.substr(i, run));
            i += run;
        } else {
            i = close;
        }
    }
    return out;
}

std::string strip_tags(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<') {
            if (s.substr(i, 4) == "<!--") {
                const auto end = s.find("-->", i + 4);
                if (end != std::string_view::npos) {
                    i = end + 3;
                    out.push_back(' ');
                    continue;
                }
            } else if (i + 1 < s.size() &&
                       (is_ascii_alpha(s[i + 1]) || s[i + 1] == '!' ||
                        (s[i + 1] == '/' && i + 2 < s.size() && is_ascii_alpha(s[i + 2])))) {
                const auto end = s.find('>', i + 1);
                if (end != std::string_view::npos) {
                    i = end + 1;
                    out.push_back(' ');
                    continue;
                }
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

bool url_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u > 0x20 && u != 0x7F && c != '<' && c != '>' && c != '"' && c != '\'' && c != '`';
}

// Length of the URL starting at `pos`, or 0 if none starts there.
std::size_t url_length_at(std::string_view s, std::size_t pos) {
    static constexpr std::array<std::string_view, 4> kPrefixes{"https://", "http://", "ftp://", "www."};
    if (pos > 0 && (is_ascii_alnum(s[pos - 1]) || s[pos - 1] == '_' || s[pos - 1] == '.' || s[pos - 1] == '/' ||
                    s[pos - 1] == '@' || s[pos - 1] == '-')) {
        return 0;
    }
    std::size_t prefix = 0;
    for (const auto p : kPrefixes) {
        if (starts_with_ci(s, pos, p)) {
            prefix = p.size();
            break;
        }
    }
    if (prefix == 0) return 0;
    auto end = pos + prefix;
    while (end < s.size() && url_char(s[end])) ++end;

    // Trailing sentence punctuation is not part of the URL; closing brackets
    // are kept only when the URL opened them.
    while (end > pos + prefix) {
        const char c = s[end - 1];
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == '*') {
            --end;
            continue;
        }
        const char open = c == ')' ? '(' : c == ']' ? '[' : c == '}' ? '{' : '\0';
        if (open != '\0') {
            const auto url = s.substr(pos, end - pos);
            if (std::count(url.begin(), url.end(), open) < std::count(url.begin(), url.end(), c)) {
                --end;
                continue;
            }
        }
        break;
    }
    if (end == pos + prefix) return 0;
    return end - pos;
}

std::string strip_urls(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (const auto len = url_length_at(s, i); len > 0) {
            i += len;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::string decode_entities(std::string_view s) {
    static constexpr std::array<std::pair<std::string_view, char32_t>, 7> kNamed{{
        {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}, {"nbsp", ' '}, {"#39", '\''},
    }};
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '&') {
            const auto semi = s.find(';', i + 1);
            if (semi != std::string_view::npos && semi - i <= 10) {
                const auto name = s.substr(i + 1, semi - i - 1);
                char32_t cp = 0;
                for (const auto& [entity, value] : kNamed) {
                    if (name == entity) cp = value;
                }
                if (cp == 0 && name.size() >= 2 && name[0] == '#') {
                    const bool hex = name[1] == 'x' || name[1] == 'X';
                    const auto digits = name.substr(hex ? 2 : 1);
                    std::uint32_t v = 0;
                    bool ok = !digits.empty();
                    for (const char c : digits) {
                        int d = -1;
                        if (c >= '0' && c <= '9') d = c - '0';
                        else if (hex && c >= 'a' && c <= 'f') d = c - 'a' + 10;
                        else if (hex && c >= 'A' && c <= 'F') d = c - 'A' + 10;
                        if (d < 0 || v > 0x10FFFF) {
                            ok = false;
                            break;
                        }
                        v = v * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
                    }
                    if (ok && v > 0 && v <= 0x10FFFF && !(v >= 0xD800 && v <= 0xDFFF)) cp = v;
                }
                if (cp != 0) {
                    detail::append_utf8(out, cp);
                    i = semi + 1;
                    continue;
                }
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

}  // namespace

std::string strip_code_and_urls(std::string_view html_or_md) {
    auto s = strip_fences(html_or_md);
    s = strip_code_regions(s);
    s = strip_inline_code(s);
    s = strip_tags(s);
    s = strip_urls(s);
    return decode_entities(s);
}

// ---------------------------------------------------------------------------
// Noise removal

namespace {

bool only_joiners(std::string_view token) {
    return std::all_of(token.begin(), token.end(), [](char c) { return c == '.' || c == '_'; });
}

template <typename Fn>
void for_each_token(std::string_view s, Fn&& fn) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        while (pos < s.size() && s[pos] == ' ') ++pos;
        auto end = s.find(' ', pos);
        if (end == std::string_view::npos) end = s.size();
        if (end > pos) fn(s.substr(pos, end - pos));
        pos = end;
    }
}

std::string strip_noise_counted(std::string_view text, std::size_t& stopwords) {
    std::string mapped;
    mapped.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto start = pos;
        const auto cp = detail::decode_next(text, pos);
        if (cp == detail::kInvalidCodepoint) {
            mapped.push_back(' ');
            continue;
        }
        switch (classify(cp)) {
            case CharClass::Kept:
                mapped.append(text.substr(start, pos - start));
                break;
            case CharClass::Whitespace:
            case CharClass::Punctuation:
            case CharClass::Emoji:
                mapped.push_back(' ');
                break;
            case CharClass::Digit:
            case CharClass::Invisible:
                break;
        }
    }

    std::string out;
    out.reserve(mapped.size());
    for_each_token(mapped, [&](std::string_view token) {
        if (only_joiners(token)) return;
        if (is_stopword(token)) {
            ++stopwords;
            return;
        }
        if (!out.empty()) out.push_back(' ');
        out.append(token);
    });
    return out;
}

}  // namespace

bool is_stopword(std::string_view token) { return Lexicon::instance().is_stopword(to_lower(token)); }

std::string strip_noise(std::string_view text) {
    std::size_t ignored = 0;
    return strip_noise_counted(text, ignored);
}

// ---------------------------------------------------------------------------
// Lemmatization

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }
bool has_vowel(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}
bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}
bool consonant_at(std::string_view s, std::size_t i) { return i < s.size() && !is_vowel(s[i]); }

// Restores the stem of an -ing/-ed form: undoubles a final consonant
// (running -> run) or puts back a silent 'e' (updating -> update).
std::string fix_stem(std::string stem) {
    const auto n = stem.size();
    const char last = stem[n - 1];
    if (n >= 4 && last == stem[n - 2] && !is_vowel(last) && last != 'l' && last != 's' && last != 'z' &&
        last != 'f') {
        stem.pop_back();
        return stem;
    }
    // Only looked at when the letter before the two-letter ending is a consonant.
    static constexpr std::array<std::string_view, 9> kAfterConsonant{"at", "ar", "ur", "ok", "id", "od", "ud", "um", "in"};
    static constexpr std::array<std::string_view, 20> kAlways{"iz", "yz", "ys", "ut", "bl", "pl", "dl", "gl", "tl",
                                                              "kl", "fl", "zl", "eas", "rs", "ns", "ps", "ag", "rg",
                                                              "dg", "ir"};
    const std::string_view view(stem);
    bool add_e = last == 'v' || last == 'c';
    for (const auto ending : kAlways) add_e = add_e || ends_with(view, ending);
    if (ends_with(view, "ir") && n >= 3 && is_vowel(view[n - 3]) && view[n - 3] != 'u') add_e = false;
    if (!add_e && n >= 3) {
        for (const auto ending : kAfterConsonant) {
            if (ends_with(view, ending) && consonant_at(view, n - 3)) {
                add_e = !(ending == "in" && n < 5);
                break;
            }
        }
    }
    if (!add_e && n == 3 && !is_vowel(view[0]) && is_vowel(view[1]) && !is_vowel(view[2]) && view[2] != 'w' &&
        view[2] != 'x' && view[2] != 'y') {
        add_e = true;
    }
    if (add_e) stem.push_back('e');
    return stem;
}

std::string lemmatize_word(std::string_view w) {
    if (const auto irregular = Lexicon::instance().irregular(w); !irregular.empty()) return std::string(irregular);
    if (w.size() <= 3) return std::string(w);
    const auto n = w.size();

    if (n >= 5 && (ends_with(w, "ies") || ends_with(w, "ied"))) return std::string(w.substr(0, n - 3)) + "y";
    if (ends_with(w, "sses") || ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") ||
        ends_with(w, "zzes")) {
        return std::string(w.substr(0, n - 2));
    }
    if (ends_with(w, "s")) {
        if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return std::string(w);
        return std::string(w.substr(0, n - 1));
    }
    if (ends_with(w, "ing")) {
        const auto stem = w.substr(0, n - 3);
        if (stem.size() >= 3 && has_vowel(stem)) return fix_stem(std::string(stem));
        return std::string(w);
    }
    if (ends_with(w, "ed")) {
        const auto stem = w.substr(0, n - 2);
        if (stem.size() >= 3 && has_vowel(stem) && stem.back() != 'e') return fix_stem(std::string(stem));
        return std::string(w);
    }
    return std::string(w);
}

}  // namespace

std::string lemmatize(std::string_view token) {
    auto core_len = token.size();
    while (core_len > 0 && token[core_len - 1] == '.') --core_len;
    const auto core = token.substr(0, core_len);
    if (core.empty() || !std::all_of(core.begin(), core.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
        return std::string(token);
    }
    return lemmatize_word(core) + std::string(token.substr(core_len));
}

std::string normalize(std::string_view text) {
    const auto lower = to_lower(text);
    std::string spaced;
    spaced.reserve(lower.size());
    for (const char c : lower) spaced.push_back(is_ascii_space(c) ? ' ' : c);

    std::string out;
    out.reserve(spaced.size());
    for_each_token(spaced, [&](std::string_view token) {
        if (!out.empty()) out.push_back(' ');
        out.append(lemmatize(token));
    });
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

std::optional<PreparedDoc> prepare(const Discussion& d, PipelineStats* stats) {
    const auto joined = d.title + " " + d.body;
    const auto no_markup = strip_code_and_urls(joined);
    std::size_t stopwords = 0;
    const auto no_noise = strip_noise_counted(no_markup, stopwords);
    auto text = normalize(no_noise);

    if (stats) {
        ++stats->input_count;
        stats->markup_bytes_removed += joined.size() > no_markup.size() ? joined.size() - no_markup.size() : 0;
        stats->noise_bytes_removed += no_markup.size() > no_noise.size() ? no_markup.size() - no_noise.size() : 0;
        stats->stopwords_removed += stopwords;
        ++(text.empty() ? stats->dropped_empty : stats->emitted);
    }
    if (text.empty()) return std::nullopt;
    return PreparedDoc{d.id, d.project, d.created_at, std::move(text)};
}

std::vector<PreparedDoc> prepare_all(const std::vector<Discussion>& corpus, PipelineStats& stats) {
    std::vector<PreparedDoc> out;
    out.reserve(corpus.size());
    for (const auto& d : corpus) {
        if (auto doc = prepare(d, &stats)) out.push_back(std::move(*doc));
    }
    return out;
}

LexiconInfo lexicon_info() {
    const auto& lex = Lexicon::instance();
    return {lex.stopword_count(), lex.lemma_count(), detail::fnv1a64(detail::kStopwordsText),
            detail::fnv1a64(detail::kLemmasText)};
}

}  // namespace reldisc
