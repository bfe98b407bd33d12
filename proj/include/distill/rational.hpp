#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace distill {

// Exact rational on 64-bit numerator/denominator with 128-bit intermediates.
// Always normalized: den > 0, gcd(|num|, den) == 1. Throws std::overflow_error
// when a reduced result no longer fits in 64 bits.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const; // throws std::domain_error on /0
    Rational operator-() const { return Rational(-num_, den_); }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const;

    Rational abs() const { return num_ < 0 ? Rational(-num_, den_) : *this; }
    bool is_integer() const { return den_ == 1; }

    // True when the value has a finite decimal expansion (den = 2^a * 5^b).
    bool is_terminating_decimal() const;

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    // Canonical decimal rendering: exact when the expansion fits max_places,
    // otherwise rounded half-even. No trailing zeros, no trailing point.
    std::string to_decimal_string(int max_places = 6) const;

    // Full expansion for terminating values (however many places that takes);
    // non-terminating values fall back to 6-place rounding.
    std::string to_exact_decimal_string() const;

    // Parses "[-+]123", "[-+]1.25", ".5", "3." styles. Empty or malformed -> nullopt.
    static std::optional<Rational> parse_decimal(const std::string& text);

private:
    std::int64_t num_;
    std::int64_t den_;

    static Rational from_i128(__int128 n, __int128 d);
};

} // namespace distill
