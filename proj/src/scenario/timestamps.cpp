// SPDX-License-Identifier: Apache-2.0
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "evsched/errors.hpp"
#include "evsched/scenario.hpp"

namespace evsched {
namespace {

using namespace std::chrono;

[[noreturn]] void bad(std::string_view text, const char* why) {
    throw InputError("cannot parse timestamp '" + std::string(text) + "': " + why);
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}
    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool eat(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    void skip_spaces() {
        while (!done() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool number(int digits, int& out) {
        if (pos_ + static_cast<std::size_t>(digits) > s_.size()) return false;
        const char* first = s_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, first + digits, out);
        if (ec != std::errc{} || ptr != first + digits) return false;
        pos_ += static_cast<std::size_t>(digits);
        return true;
    }
    std::string_view word() {
        const std::size_t begin = pos_;
        while (!done() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        return s_.substr(begin, pos_ - begin);
    }
    std::string_view rest() const { return s_.substr(pos_); }

private:
    std::string_view s_;
    std::size_t pos_{0};
};

sys_seconds make_time(std::string_view text, int y, int mo, int d, int h, int mi, int s) {
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) bad(text, "invalid calendar date");
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) bad(text, "invalid time of day");
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

Timestamp parse_rfc1123(std::string_view text) {
    static constexpr std::array<std::string_view, 12> kMonths{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                              "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    Cursor c(text);
    c.skip_spaces();
    c.word();
    if (!c.eat(',')) bad(text, "expected ',' after weekday");
    c.skip_spaces();
    int d = 0, y = 0, h = 0, mi = 0, s = 0;
    if (!c.number(2, d) && !c.number(1, d)) bad(text, "expected day");
    c.skip_spaces();
    const auto mon = c.word();
    int mo = 0;
    for (std::size_t k = 0; k < kMonths.size(); ++k)
        if (mon == kMonths[k]) mo = static_cast<int>(k) + 1;
    if (mo == 0) bad(text, "unknown month name");
    c.skip_spaces();
    if (!c.number(4, y)) bad(text, "expected year");
    c.skip_spaces();
    if (!c.number(2, h) || !c.eat(':') || !c.number(2, mi) || !c.eat(':') || !c.number(2, s)) bad(text, "expected HH:MM:SS");
    c.skip_spaces();
    const auto zone = c.word();
    if (!zone.empty() && zone != "GMT" && zone != "UTC") bad(text, "only GMT/UTC zones are supported");
    c.skip_spaces();
    if (!c.done()) bad(text, "trailing characters");
    return make_time(text, y, mo, d, h, mi, s);
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) bad(text, "empty");
    if (std::isalpha(static_cast<unsigned char>(text.front()))) return parse_rfc1123(text);

    Cursor c(text);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!c.number(4, y) || !c.eat('-') || !c.number(2, mo) || !c.eat('-') || !c.number(2, d)) bad(text, "expected YYYY-MM-DD");
    if (c.done()) return make_time(text, y, mo, d, 0, 0, 0);
    if (!c.eat('T') && !c.eat(' ')) bad(text, "expected 'T' between date and time");
    if (!c.number(2, h) || !c.eat(':') || !c.number(2, mi)) bad(text, "expected HH:MM");
    if (c.eat(':') && !c.number(2, s)) bad(text, "expected seconds");
    if (c.eat('.')) {
        int digit = 0;
        while (std::isdigit(static_cast<unsigned char>(c.peek()))) c.number(1, digit);
    }
    auto ts = make_time(text, y, mo, d, h, mi, s);
    if (c.done() || c.eat('Z')) {
        if (!c.done()) bad(text, "trailing characters");
        return ts;
    }
    const char sign = c.peek();
    if (sign != '+' && sign != '-') bad(text, "expected zone designator");
    c.eat(sign);
    int oh = 0, om = 0;
    if (!c.number(2, oh)) bad(text, "expected zone hours");
    c.eat(':');
    if (!c.done() && !c.number(2, om)) bad(text, "expected zone minutes");
    if (!c.done()) bad(text, "trailing characters");
    const auto offset = hours{oh} + minutes{om};
    return sign == '+' ? ts - offset : ts + offset;
}

std::string format_timestamp(Timestamp ts) {
    const auto day_point = floor<days>(ts);
    const year_month_day ymd{day_point};
    const hh_mm_ss tod{ts - day_point};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()));
    return buf;
}

}  // namespace evsched
