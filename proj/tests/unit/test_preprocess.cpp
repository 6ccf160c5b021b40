#include <doctest.h>

#include <cstring>
#include <random>
#include <regex>
#include <sstream>

#include "reldisc/preprocess.hpp"
#include "test_support.hpp"
#include "utf8.hpp"

using namespace reldisc;
using testing::make_discussion;

namespace {

bool url_boundary_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::strchr("_./@-", c) != nullptr;
}

// Reference URL remover: a regex finds candidates, trailing sentence
// punctuation and unmatched closing brackets are trimmed afterwards.
std::string oracle_strip_urls(const std::string& s) {
    static const std::regex re(R"((https?://|ftp://|www\.)[^\x01- <>"'`\x7f]*)", std::regex::icase);
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        std::smatch m;
        if (!std::regex_search(s.cbegin() + static_cast<std::ptrdiff_t>(i), s.cend(), m, re)) break;
        const auto start = i + static_cast<std::size_t>(m.position(0));
        const auto prefix = static_cast<std::size_t>(m.length(1));
        auto end = start + static_cast<std::size_t>(m.length(0));
        while (end > start + prefix) {
            const char c = s[end - 1];
            if (std::strchr(".,;:!?*", c)) {
                --end;
                continue;
            }
            const char open = c == ')' ? '(' : c == ']' ? '[' : c == '}' ? '{' : 0;
            if (open) {
                const auto url = s.substr(start, end - start);
                if (std::count(url.begin(), url.end(), open) < std::count(url.begin(), url.end(), c)) {
                    --end;
                    continue;
                }
            }
            break;
        }
        const bool boundary = start == 0 || !url_boundary_char(s[start - 1]);
        if (!boundary || end == start + prefix) {
            out.append(s, i, start + 1 - i);
            i = start + 1;
            continue;
        }
        out.append(s, i, start - i);
        i = end;
    }
    out.append(s, i, std::string::npos);
    return out;
}

struct UrlCase {
    const char* input;
    const char* expected;
};

const UrlCase kUrlCases[] = {
    {"read https://example.com/a?b=1 now", "read  now"},
    {"https://example.com", ""},
    {"http://example.com/path", ""},
    {"ftp://files.example.org/pub/x.tar.gz", ""},
    {"visit www.example.com today", "visit  today"},
    {"WWW.EXAMPLE.COM shouting", " shouting"},
    {"HTTPS://EXAMPLE.COM/UP", ""},
    {"end of sentence https://a.io.", "end of sentence ."},
    {"comma https://a.io, next", "comma , next"},
    {"question https://a.io?", "question ?"},
    {"exclaim https://a.io/x!", "exclaim !"},
    {"colon https://a.io/x: see", "colon : see"},
    {"semicolon https://a.io/x; more", "semicolon ; more"},
    {"bold **https://a.io/x**", "bold ****"},
    {"(see https://a.io/x)", "(see )"},
    {"(https://en.wikipedia.org/wiki/Foo_(bar))", "()"},
    {"[link](https://a.io/docs)", "[link]()"},
    {"[https://a.io]", "[]"},
    {"{https://a.io/x}", "{}"},
    {"semi;https://a.io", "semi;"},
    {"\"https://a.io/x\"", "\"\""},
    {"'https://a.io/x'", "''"},
    {"hash #https://a.io", "hash #"},
    {"two https://a.io and http://b.io urls", "two  and  urls"},
    {"adjacent https://a.io/https://b.io", "adjacent "},
    {"query https://a.io/s?q=a+b&x=%20y#frag", "query "},
    {"port http://localhost:3000/api", "port "},
    {"ip http://127.0.0.1:8080", "ip "},
    {"user https://user:pw@host.io/p", "user "},
    {"tab\thttps://a.io\tafter", "tab\t\tafter"},
    {"newline https://a.io\nnext line", "newline \nnext line"},
    {"no scheme example.com stays", "no scheme example.com stays"},
    {"mailto:me@example.com stays", "mailto:me@example.com stays"},
    {"https:// alone", "https:// alone"},
    {"https://. only dot", "https://. only dot"},
    {"www. bare", "www. bare"},
    {"inword xhttps://a.io", "inword xhttps://a.io"},
    {"dotted .www.a.io", "dotted .www.a.io"},
    {"slash /https://a.io", "slash /https://a.io"},
    {"at @www.a.io", "at @www.a.io"},
    {"dash -https://a.io", "dash -https://a.io"},
    {"under _www.a.io", "under _www.a.io"},
    {"paren(https://a.io)", "paren()"},
    {"quote\"https://a.io\"x", "quote\"\"x"},
    {"file:///etc/passwd stays", "file:///etc/passwd stays"},
    {"https://a.io/path_(x)_y.", "."},
    {"https://a.io/a)b) trailing", ") trailing"},
    {"multiple dots https://a.io/...", "multiple dots ..."},
    {"asterisk https://a.io/*", "asterisk *"},
    {"Next.js see https://nextjs.org/docs/api-reference/next.config.js/introduction.", "Next.js see ."},
};

}  // namespace

TEST_CASE("URL table matches expected outputs and the regex oracle") {
    int n = 0;
    for (const auto& c : kUrlCases) {
        CAPTURE(c.input);
        CHECK(strip_code_and_urls(c.input) == c.expected);
        CHECK(oracle_strip_urls(c.input) == c.expected);
        ++n;
    }
    CHECK(n == 50);
}

TEST_CASE("URL remover agrees with the oracle on generated strings") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> parts = {"https://", "http://", "www.", "ftp://", "a.io", "/p", "(", ")", "[",
                                            "]", ".", ",", "!", " ", "x", "_", "@", "-", "?q=1", "\t", "*", "'"};
    std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
    std::uniform_int_distribution<int> len(1, 14);
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        for (int k = len(rng); k > 0; --k) s += parts[pick(rng)];
        CAPTURE(s);
        REQUIRE(strip_code_and_urls(s) == oracle_strip_urls(s));
    }
}

TEST_CASE("code regions and markup are removed") {
    CHECK(strip_code_and_urls("see <code>npm install</code> for help") == "see  for help");
    CHECK(strip_code_and_urls("plain text stays as is") == "plain text stays as is");
    CHECK(strip_code_and_urls("") == "");
    CHECK(strip_code_and_urls("Use `npm ci` instead") == "Use  instead");
    CHECK(strip_code_and_urls("```js\nconst x = 1;\n```\nafter fence") == "after fence");
    CHECK(strip_code_and_urls("~~~\ncode\n~~~\ntext") == "text");
    CHECK(strip_code_and_urls("before\n```\nnever closed") == "before\n");
    CHECK(strip_code_and_urls("<pre><code>a\nb</code></pre>tail") == "tail");
    CHECK(strip_code_and_urls("<script>alert(1)</script>ok") == "ok");
    CHECK(strip_code_and_urls("<p>Some <b>bold</b> text</p>") == " Some  bold  text ");
    CHECK(strip_code_and_urls("a <!-- hidden --> b") == "a   b");
    CHECK(strip_code_and_urls("a &amp; b &lt;tag&gt;") == "a & b <tag>");
    CHECK(strip_code_and_urls("x < y and y > z") == "x < y and y > z");
    CHECK(strip_code_and_urls("<code>unclosed region") == " unclosed region");
    CHECK(strip_code_and_urls("&#233;t&#xE9;") == "\xC3\xA9t\xC3\xA9");
    CHECK(strip_code_and_urls("<https://a.io/x>") == " ");
    CHECK(strip_code_and_urls("`https://a.io/x`") == "");
}

TEST_CASE("noise removal keeps '.' and '_' and drops the rest") {
    CHECK(strip_noise("Next.js version_1.3 breaks!!! 🎉") == "Next.js version_. breaks");
    CHECK(to_lower(strip_noise("Next.js version_1.3 breaks!!! 🎉")) == "next.js version_. breaks");
    CHECK(strip_noise("") == "");
    CHECK(strip_noise("the and of") == "");
    CHECK(strip_noise("The AND Of") == "");
    CHECK(strip_noise("Hello, World! It's 2021...") == "Hello World");
    CHECK(strip_noise("emoji 😀👍🏽 done ❤️") == "emoji done");
    CHECK(strip_noise("zero​width") == "zerowidth");
    CHECK(strip_noise("a-b/c\\d") == "b c");
    CHECK(strip_noise("x-b/c\\z") == "x b c z");
    CHECK(strip_noise("___ ... _._") == "");
    CHECK(strip_noise("snake_case_name") == "snake_case_name");
    CHECK(strip_noise("Café naïve ÉCOLE") == "Café naïve ÉCOLE");
    CHECK(strip_noise("x\xFFz") == "x z");
}

TEST_CASE("every shipped stopword is removed on its own") {
    std::istringstream list(testing::read_file(std::filesystem::path(RELDISC_TEST_DATA) / "../../data/stopwords.txt"));
    std::string word;
    int n = 0;
    while (std::getline(list, word)) {
        if (word.empty() || word[0] == '#') continue;
        CAPTURE(word);
        CHECK(is_stopword(word));
        CHECK(strip_noise(word) == "");
        ++n;
    }
    CHECK(n == 179);
    CHECK_FALSE(is_stopword("gatsby"));
    CHECK_FALSE(is_stopword("build"));
}

TEST_CASE("normalize lowercases and lemmatizes") {
    CHECK(normalize("Running Tests") == "run test");
    CHECK(normalize("gatsby") == "gatsby");
    CHECK(normalize("Databases were failing") == "database be fail");
    CHECK(normalize("  Multiple   spaces\there ") == "multiple space here");
    CHECK(normalize("ÉCOLE Ωμέγα") == "école ωμέγα");
    CHECK(normalize("") == "");
}

TEST_CASE("lemmatizer rules and exceptions") {
    const std::pair<const char*, const char*> cases[] = {
        {"studies", "study"},   {"libraries", "library"}, {"installed", "install"}, {"fixed", "fix"},
        {"rendered", "render"}, {"configured", "configure"}, {"crashes", "crash"},   {"boxes", "box"},
        {"stopped", "stop"},    {"making", "make"},       {"hoping", "hope"},       {"queries", "query"},
        {"analysis", "analysis"}, {"was", "be"},          {"children", "child"},    {"caching", "cache"},
        {"caches", "cache"},    {"using", "use"},         {"routes", "route"},      {"status", "status"},
        {"class", "class"},     {"is", "be"},             {"bus", "bus"},           {"running", "run"},
        {"version_", "version_"}, {"next.js", "next.js"}, {"breaks.", "break."},    {"ran", "run"},
        {"gatsby", "gatsby"},   {"kubernetes", "kubernetes"}, {"windows", "windows"},
    };
    for (const auto& [in, out] : cases) {
        CAPTURE(in);
        CHECK(lemmatize(in) == out);
    }
}

TEST_CASE("prepare composes the steps in order and drops empty posts") {
    PipelineStats stats;
    const auto help = prepare(make_discussion(1, "Help", "<code>x=1</code>"), &stats);
    REQUIRE(help);
    CHECK(help->text == "help");
    CHECK(help->discussion_id == 1);
    CHECK_FALSE(prepare(make_discussion(2, ".", "123 !!!"), &stats));
    CHECK(stats.input_count == 2);
    CHECK(stats.emitted == 1);
    CHECK(stats.dropped_empty == 1);

    const auto nx = prepare(make_discussion(3, "Next.js version_1.3 breaks!!! 🎉", ""));
    REQUIRE(nx);
    CHECK(nx->text == "next.js version_. break");

    // Stopword removal runs before lemmatization, so "were" never reaches
    // the lemma table, and code removal runs before everything.
    CHECK(prepare(make_discussion(4, "Databases were failing", ""))->text == "database fail");
    CHECK(prepare(make_discussion(5, "<code>The</code> Running", ""))->text == "run");
    CHECK(prepare(make_discussion(6, "see https://the.io/running", "docs"))->text == "see doc");
}

TEST_CASE("130-post fixture drops exactly the three empty posts") {
    std::vector<Discussion> corpus;
    for (int i = 1; i <= 127; ++i) {
        corpus.push_back(make_discussion(i, "Question number " + std::to_string(i) + " about builds",
                                         "Body text for post " + std::to_string(i)));
    }
    corpus.push_back(make_discussion(128, ".", "123 !!!"));
    corpus.push_back(make_discussion(129, "The", "<code>const x = 1;</code> https://example.com/x"));
    corpus.push_back(make_discussion(130, "???", "🎉🎉 and of 42"));
    PipelineStats stats;
    const auto docs = prepare_all(corpus, stats);
    CHECK(stats.input_count == 130);
    CHECK(stats.dropped_empty == 3);
    CHECK(stats.emitted == 127);
    CHECK(docs.size() == 127);
    CHECK(docs.back().discussion_id == 127);
    CHECK(stats.input_count == stats.emitted + stats.dropped_empty);
    CHECK(stats.markup_bytes_removed > 0);
    CHECK(stats.stopwords_removed > 0);
}

TEST_CASE("stats are commutative sums") {
    PipelineStats a, b;
    prepare(make_discussion(1, "The first one", "and a <code>x</code>"), &a);
    prepare(make_discussion(2, ".", "!!"), &b);
    PipelineStats ab = a, ba = b;
    ab += b;
    ba += a;
    CHECK(ab == ba);
    CHECK(ab.input_count == 2);
}

TEST_CASE("lexicon checksums are pinned") {
    const auto info = lexicon_info();
    CHECK(info.stopword_count == 179);
    CHECK(info.lemma_count == 165);
    CHECK(info.stopwords_checksum == 0x2024cde651fbd52ull);
    CHECK(info.lemmas_checksum == 0x27646486631c5e48ull);
}

namespace {

std::string random_utf8(std::mt19937_64& rng) {
    static const char32_t pool[] = {U'a', U'Z', U'.', U'_', U' ', U'\t', U'\n', U'!', U'7', U'<', U'>', U'`',
                                    U'&', U';', U'é', U'Ω', U'Я', U'中', U'😀', U'🎉', U'​', U' ',
                                    U'️', U'٣', U'—', U'“', U'ǅ', U'Ｑ', U'ß', U'İ'};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(pool) - 1);
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<int> raw(0, 255);
    std::uniform_int_distribution<int> coin(0, 19);
    std::string s;
    for (int n = len(rng); n > 0; --n) {
        if (coin(rng) == 0) {
            s.push_back(static_cast<char>(raw(rng)));
        } else {
            detail::append_utf8(s, pool[pick(rng)]);
        }
    }
    return s;
}

}  // namespace

TEST_CASE("prepared text satisfies the character-class invariant") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5000; ++i) {
        const auto d = make_discussion(1, random_utf8(rng), random_utf8(rng));
        const auto p = prepare(d);
        if (!p) continue;
        const auto& t = p->text;
        CAPTURE(t);
        REQUIRE_FALSE(t.empty());
        REQUIRE(to_lower(t) == t);
        REQUIRE(t.front() != ' ');
        REQUIRE(t.back() != ' ');
        REQUIRE(t.find("  ") == std::string::npos);
        std::size_t pos = 0;
        while (pos < t.size()) {
            const auto cp = detail::decode_next(t, pos);
            if (cp == U' ') continue;
            REQUIRE(cp != detail::kInvalidCodepoint);
            REQUIRE(classify(cp) == CharClass::Kept);
        }
        REQUIRE(prepare(d) == p);
    }
}
