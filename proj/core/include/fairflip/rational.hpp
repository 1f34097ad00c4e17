#pragma once

#include <cstdint>
#include <compare>
#include <numeric>
#include <string>

#include "fairflip/errors.hpp"

namespace fairflip {

/// Exact rational on 128-bit integers. All probabilities and expectations in
/// the toolkit are rationals of this kind: numerators/denominators stay far
/// below 2^127 for any instance that fits the enumeration budget, and every
/// operation checks for overflow rather than silently wrapping.
class Rat {
public:
    using Int = __int128;

    constexpr Rat() : num_(0), den_(1) {}
    constexpr Rat(long long n) : num_(n), den_(1) {}
    Rat(Int n, Int d) : num_(n), den_(d) { normalize(); }

    static Rat from_ratio(long long n, long long d) { return Rat(Int(n), Int(d)); }

    Int num() const { return num_; }
    Int den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    Rat operator-() const { Rat r; r.num_ = -num_; r.den_ = den_; return r; }

    friend Rat operator+(const Rat& a, const Rat& b) {
        return Rat(checked_add(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                   checked_mul(a.den_, b.den_));
    }
    friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return Rat(checked_mul(a.num_, b.num_), checked_mul(a.den_, b.den_));
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.num_ == 0) throw DomainError("Rat: division by zero");
        return Rat(checked_mul(a.num_, b.den_), checked_mul(a.den_, b.num_));
    }

    Rat& operator+=(const Rat& o) { *this = *this + o; return *this; }
    Rat& operator-=(const Rat& o) { *this = *this - o; return *this; }
    Rat& operator*=(const Rat& o) { *this = *this * o; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        Int lhs = checked_mul(a.num_, b.den_);
        Int rhs = checked_mul(b.num_, a.den_);
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    Rat abs() const { return num_ < 0 ? -*this : *this; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    /// "p/q" (or "p" when q == 1); used by the exact columns of reports.
    std::string to_string() const {
        std::string s = int_to_string(num_);
        if (den_ != 1) s += "/" + int_to_string(den_);
        return s;
    }

    static Rat half() { return from_ratio(1, 2); }

private:
    Int num_;
    Int den_; // > 0, gcd(|num|, den) == 1

    void normalize() {
        if (den_ == 0) throw DomainError("Rat: zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        Int g = gcd128(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    static Int gcd128(Int a, Int b) {
        while (b != 0) { Int t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    static Int checked_mul(Int a, Int b) {
        Int out;
        if (__builtin_mul_overflow(a, b, &out))
            throw CapacityError("exact arithmetic overflow: instance too large for 128-bit rationals");
        return out;
    }
    static Int checked_add(Int a, Int b) {
        Int out;
        if (__builtin_add_overflow(a, b, &out))
            throw CapacityError("exact arithmetic overflow: instance too large for 128-bit rationals");
        return out;
    }

    static std::string int_to_string(Int v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
        std::string digits;
        while (u > 0) { digits.push_back(char('0' + int(u % 10))); u /= 10; }
        if (neg) digits.push_back('-');
        return {digits.rbegin(), digits.rend()};
    }
};

} // namespace fairflip
