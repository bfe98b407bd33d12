#include "distill/rational.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace distill {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

constexpr __int128 I64_MAX = static_cast<__int128>(INT64_MAX);
constexpr __int128 I64_MIN = static_cast<__int128>(INT64_MIN);

} // namespace

Rational Rational::from_i128(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("rational: zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const __int128 g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    if (n > I64_MAX || n < I64_MIN || d > I64_MAX) {
        throw std::overflow_error("rational: value exceeds 64-bit range");
    }
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
}

Rational::Rational(std::int64_t n, std::int64_t d) {
    Rational r = from_i128(n, d);
    num_ = r.num_;
    den_ = r.den_;
}

Rational Rational::operator+(const Rational& o) const {
    return from_i128(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                     static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return from_i128(static_cast<__int128>(num_) * o.den_ - static_cast<__int128>(o.num_) * den_,
                     static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
    return from_i128(static_cast<__int128>(num_) * o.num_,
                     static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::domain_error("rational: division by zero");
    return from_i128(static_cast<__int128>(num_) * o.den_,
                     static_cast<__int128>(den_) * o.num_);
}

bool Rational::operator<(const Rational& o) const {
    return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

bool Rational::is_terminating_decimal() const {
    std::int64_t d = den_;
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    return d == 1;
}

std::string Rational::to_decimal_string(int max_places) const {
    const bool negative = num_ < 0;
    __int128 n = num_ < 0 ? -static_cast<__int128>(num_) : static_cast<__int128>(num_);
    const __int128 d = den_;
    __int128 whole = n / d;
    __int128 rem = n % d;

    std::string frac;
    for (int i = 0; i < max_places && rem != 0; ++i) {
        rem *= 10;
        frac.push_back(static_cast<char>('0' + static_cast<int>(rem / d)));
        rem %= d;
    }
    if (rem != 0) {
        // Round half-even on the truncated expansion.
        const __int128 twice = rem * 2;
        bool round_up = twice > d;
        if (twice == d) {
            round_up = !frac.empty() && ((frac.back() - '0') % 2 == 1);
        }
        if (round_up) {
            int i = static_cast<int>(frac.size()) - 1;
            for (; i >= 0; --i) {
                if (frac[i] == '9') {
                    frac[i] = '0';
                } else {
                    frac[i] += 1;
                    break;
                }
            }
            if (i < 0) whole += 1;
        }
    }
    while (!frac.empty() && frac.back() == '0') frac.pop_back();

    std::string out;
    if (negative && (whole != 0 || !frac.empty())) out.push_back('-');
    std::string ws;
    if (whole == 0) {
        ws = "0";
    } else {
        while (whole > 0) {
            ws.push_back(static_cast<char>('0' + static_cast<int>(whole % 10)));
            whole /= 10;
        }
        std::string rev(ws.rbegin(), ws.rend());
        ws = rev;
    }
    out += ws;
    if (!frac.empty()) {
        out.push_back('.');
        out += frac;
    }
    return out;
}

std::string Rational::to_exact_decimal_string() const {
    std::int64_t d = den_;
    int twos = 0;
    int fives = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    if (d != 1) return to_decimal_string(6);
    return to_decimal_string(twos > fives ? twos : fives);
}

std::optional<Rational> Rational::parse_decimal(const std::string& text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    bool negative = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-';
        ++i;
    }
    std::string int_part, frac_part;
    while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) int_part.push_back(text[i++]);
    if (i < n && text[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) frac_part.push_back(text[i++]);
    }
    if (i != n) return std::nullopt;
    if (int_part.empty() && frac_part.empty()) return std::nullopt;
    if (int_part.size() + frac_part.size() > 18) return std::nullopt; // would overflow

    __int128 num = 0;
    for (char c : int_part) num = num * 10 + (c - '0');
    __int128 den = 1;
    for (char c : frac_part) {
        num = num * 10 + (c - '0');
        den *= 10;
    }
    if (negative) num = -num;
    return from_i128(num, den);
}

} // namespace distill
