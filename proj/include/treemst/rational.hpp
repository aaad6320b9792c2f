#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace treemst {

/// Exact rational on int64 with canonical form: denominator > 0, gcd(|num|, den) = 1.
/// All protocol decisions rest on strict distance comparisons, so every operation
/// here is exact; intermediate products use __int128 and overflow past int64 throws.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
    Rational(std::int64_t num, std::int64_t den) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        __int128 n = num;
        __int128 d = den;
        if (d < 0) { n = -n; d = -d; }
        normalize_assign(n, d);
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
        __int128 d = i128(a.den_) * b.den_;
        return from_i128(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        __int128 n = i128(a.num_) * b.den_ - i128(b.num_) * a.den_;
        __int128 d = i128(a.den_) * b.den_;
        return from_i128(n, d);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
    Rational& operator-=(const Rational& o) { *this = *this - o; return *this; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    /// Canonical text form: "7" for integers, "7/2" otherwise.
    std::string to_string() const {
        std::string s = std::to_string(num_);
        if (den_ != 1) {
            s += '/';
            s += std::to_string(den_);
        }
        return s;
    }

    /// Accepts "7", "-3", "7/2", and decimal fractions like "1.25"; reduces to canonical form.
    static Rational parse(std::string_view text) {
        if (text.empty()) throw std::invalid_argument("Rational: empty string");
        auto slash = text.find('/');
        if (slash != std::string_view::npos) {
            std::int64_t n = parse_int(text.substr(0, slash));
            std::int64_t d = parse_int(text.substr(slash + 1));
            return Rational(n, d);
        }
        auto dot = text.find('.');
        if (dot != std::string_view::npos) {
            std::string_view whole = text.substr(0, dot);
            std::string_view frac = text.substr(dot + 1);
            if (frac.empty()) throw std::invalid_argument("Rational: trailing decimal point");
            bool neg = !whole.empty() && whole.front() == '-';
            std::int64_t w = whole.empty() || whole == "-" ? 0 : parse_int(whole);
            __int128 den = 1;
            for (char c : frac) {
                if (c < '0' || c > '9') throw std::invalid_argument("Rational: bad decimal digit");
                den *= 10;
                if (den > INT64_MAX) throw std::overflow_error("Rational: decimal too long");
            }
            std::int64_t f = parse_int(frac);
            __int128 n = i128(w < 0 ? -w : w) * den + f;
            if (neg || w < 0) n = -n;
            return from_i128(n, den);
        }
        return Rational(parse_int(text));
    }

private:
    static __int128 i128(std::int64_t v) { return static_cast<__int128>(v); }

    static std::int64_t narrow(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Rational: int64 overflow");
        return static_cast<std::int64_t>(v);
    }

    static Rational from_i128(__int128 n, __int128 d) {
        Rational r;
        r.normalize_assign(n, d);
        return r;
    }

    void normalize_assign(__int128 n, __int128 d) {
        if (d == 0) throw std::invalid_argument("Rational: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a != 0) { n /= a; d /= a; }
        num_ = narrow(n);
        den_ = narrow(d == 0 ? 1 : d);
    }

    static std::int64_t parse_int(std::string_view s) {
        if (s.empty()) throw std::invalid_argument("Rational: empty number");
        std::size_t i = 0;
        bool neg = false;
        if (s[0] == '-' || s[0] == '+') { neg = s[0] == '-'; i = 1; }
        if (i == s.size()) throw std::invalid_argument("Rational: sign without digits");
        __int128 v = 0;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("Rational: bad digit");
            v = v * 10 + (s[i] - '0');
            if (v > INT64_MAX) throw std::overflow_error("Rational: literal overflow");
        }
        return static_cast<std::int64_t>(neg ? -v : v);
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace treemst
