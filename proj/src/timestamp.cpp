#include "reldisc/timestamp.hpp"

#include <cstdio>

#include "reldisc/error.hpp"

namespace reldisc {

namespace {

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    bool done() const { return pos_ >= text_.size(); }
    char peek() const { return done() ? '\0' : text_[pos_]; }

    int digits(std::size_t count) {
        int value = 0;
        for (std::size_t i = 0; i < count; ++i) {
            if (done() || text_[pos_] < '0' || text_[pos_] > '9') fail();
            value = value * 10 + (text_[pos_++] - '0');
        }
        return value;
    }

    void expect(char c) {
        if (peek() != c) fail();
        ++pos_;
    }

    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    [[noreturn]] void fail() const {
        throw ValidationError("invalid timestamp '" + std::string(text_) + "'");
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    Cursor in(text);
    const int y = in.digits(4);
    in.expect('-');
    const int mo = in.digits(2);
    in.expect('-');
    const int d = in.digits(2);
    if (!in.accept('T') && !in.accept('t') && !in.accept(' ')) in.fail();
    const int hh = in.digits(2);
    in.expect(':');
    const int mm = in.digits(2);
    int ss = 0;
    if (in.accept(':')) {
        ss = in.digits(2);
        if (in.accept('.')) {
            if (in.peek() < '0' || in.peek() > '9') in.fail();
            while (in.peek() >= '0' && in.peek() <= '9') in.digits(1);
        }
    }

    int offset_minutes = 0;
    if (in.accept('Z') || in.accept('z')) {
    } else if (in.peek() == '+' || in.peek() == '-') {
        const int sign = in.peek() == '-' ? -1 : 1;
        in.accept(in.peek());
        const int oh = in.digits(2);
        in.accept(':');
        const int om = in.digits(2);
        if (oh > 23 || om > 59) in.fail();
        offset_minutes = sign * (oh * 60 + om);
    } else if (!in.done()) {
        in.fail();
    }
    if (!in.done()) in.fail();

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) in.fail();

    const auto local = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
    return time_point_cast<seconds>(local - minutes{offset_minutes});
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day_point = floor<days>(ts);
    const year_month_day ymd{day_point};
    const hh_mm_ss tod{ts - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

}  // namespace reldisc
