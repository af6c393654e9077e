// Minimal exact rational arithmetic. Used where the estimation algebra must
// round-trip without floating-point error; intermediates run through 128-bit
// integers and results must reduce back into 64 bits.

#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace bufprobe {

struct Rational {
    // Invariant: den > 0 and gcd(|num|, den) == 1.
    std::int64_t num{0};
    std::int64_t den{1};

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}    // NOLINT: implicit by design
    Rational(std::int64_t n, std::int64_t d) { *this = make(n, d); }

    static Rational make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) {
            throw std::overflow_error("rational does not reduce into 64 bits");
        }
        Rational r;
        r.num = static_cast<std::int64_t>(n);
        r.den = static_cast<std::int64_t>(d);
        return r;
    }

    friend Rational operator+(Rational a, Rational b) {
        return make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator-(Rational a, Rational b) {
        return make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator*(Rational a, Rational b) {
        return make(static_cast<__int128>(a.num) * b.num,
                    static_cast<__int128>(a.den) * b.den);
    }
    friend Rational operator/(Rational a, Rational b) {
        if (b.num == 0) throw std::domain_error("rational division by zero");
        return make(static_cast<__int128>(a.num) * b.den,
                    static_cast<__int128>(a.den) * b.num);
    }
    friend bool operator==(const Rational&, const Rational&) = default;

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  private:
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }
};

}  // namespace bufprobe
