#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace switchlab {

// Arbitrary-precision signed integer, sign-magnitude with base 2^32 limbs
// (little endian, no leading zero limbs; zero is an empty limb vector).
// Sized for this library's workloads: weights and bounds are products of
// small rationals, so values stay in the low hundreds of bits.
class BigInt {
public:
    BigInt() = default;

    BigInt(long long v) {
        unsigned long long mag;
        if (v < 0) {
            negative_ = true;
            mag = ~static_cast<unsigned long long>(v) + 1ULL;
        } else {
            mag = static_cast<unsigned long long>(v);
        }
        if (mag != 0) limbs_.push_back(static_cast<std::uint32_t>(mag));
        if (mag >> 32) limbs_.push_back(static_cast<std::uint32_t>(mag >> 32));
    }

    BigInt(int v) : BigInt(static_cast<long long>(v)) {}

    static BigInt from_string(std::string_view s) {
        if (s.empty()) throw std::invalid_argument("BigInt: empty string");
        bool neg = false;
        std::size_t i = 0;
        if (s[0] == '-' || s[0] == '+') {
            neg = (s[0] == '-');
            i = 1;
        }
        if (i == s.size()) throw std::invalid_argument("BigInt: no digits");
        BigInt out;
        for (; i < s.size(); ++i) {
            char c = s[i];
            if (c < '0' || c > '9')
                throw std::invalid_argument("BigInt: bad digit in \"" + std::string(s) + "\"");
            out.mul_small(10);
            out.add_small(static_cast<std::uint32_t>(c - '0'));
        }
        out.negative_ = neg && !out.is_zero();
        return out;
    }

    bool is_zero() const { return limbs_.empty(); }
    bool is_negative() const { return negative_; }
    bool is_odd() const { return !limbs_.empty() && (limbs_[0] & 1u); }

    BigInt operator-() const {
        BigInt r = *this;
        if (!r.is_zero()) r.negative_ = !r.negative_;
        return r;
    }

    BigInt abs() const {
        BigInt r = *this;
        r.negative_ = false;
        return r;
    }

    friend BigInt operator+(const BigInt& a, const BigInt& b) {
        if (a.negative_ == b.negative_) {
            BigInt r;
            r.limbs_ = add_mag(a.limbs_, b.limbs_);
            r.negative_ = a.negative_ && !r.limbs_.empty();
            return r;
        }
        int c = cmp_mag(a.limbs_, b.limbs_);
        if (c == 0) return BigInt();
        BigInt r;
        if (c > 0) {
            r.limbs_ = sub_mag(a.limbs_, b.limbs_);
            r.negative_ = a.negative_;
        } else {
            r.limbs_ = sub_mag(b.limbs_, a.limbs_);
            r.negative_ = b.negative_;
        }
        return r;
    }

    friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

    friend BigInt operator*(const BigInt& a, const BigInt& b) {
        BigInt r;
        if (a.is_zero() || b.is_zero()) return r;
        r.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
        for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
            std::uint64_t carry = 0;
            for (std::size_t j = 0; j < b.limbs_.size(); ++j) {
                std::uint64_t cur = static_cast<std::uint64_t>(a.limbs_[i]) * b.limbs_[j] +
                                    r.limbs_[i + j] + carry;
                r.limbs_[i + j] = static_cast<std::uint32_t>(cur);
                carry = cur >> 32;
            }
            r.limbs_[i + b.limbs_.size()] += static_cast<std::uint32_t>(carry);
        }
        r.trim();
        r.negative_ = (a.negative_ != b.negative_) && !r.is_zero();
        return r;
    }

    // Truncating division, C++ semantics for signs.
    static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
        if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
        q = BigInt();
        r = BigInt();
        if (cmp_mag(a.limbs_, b.limbs_) < 0) {
            r = a;
            return;
        }
        std::size_t bits = a.bit_length();
        q.limbs_.assign((bits + 31) / 32, 0);
        for (std::size_t i = bits; i-- > 0;) {
            r.shift_left_one();
            if (a.get_bit(i)) {
                if (r.limbs_.empty())
                    r.limbs_.push_back(1);
                else
                    r.limbs_[0] |= 1u;
            }
            if (cmp_mag(r.limbs_, b.limbs_) >= 0) {
                r.limbs_ = sub_mag(r.limbs_, b.limbs_);
                q.limbs_[i / 32] |= (1u << (i % 32));
            }
        }
        q.trim();
        r.trim();
        q.negative_ = (a.negative_ != b.negative_) && !q.is_zero();
        r.negative_ = a.negative_ && !r.is_zero();
    }

    friend BigInt operator/(const BigInt& a, const BigInt& b) {
        BigInt q, r;
        divmod(a, b, q, r);
        return q;
    }

    friend BigInt operator%(const BigInt& a, const BigInt& b) {
        BigInt q, r;
        divmod(a, b, q, r);
        return r;
    }

    // -1, 0, +1 ordering of a against b.
    static int cmp(const BigInt& a, const BigInt& b) {
        if (a.negative_ != b.negative_) return a.negative_ ? -1 : 1;
        int c = cmp_mag(a.limbs_, b.limbs_);
        return a.negative_ ? -c : c;
    }

    friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
    friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

    static BigInt gcd(BigInt a, BigInt b) {
        a.negative_ = false;
        b.negative_ = false;
        while (!b.is_zero()) {
            BigInt q, r;
            divmod(a, b, q, r);
            a = b;
            b = r;
        }
        return a;
    }

    BigInt pow(unsigned long long e) const {
        BigInt base = *this;
        BigInt acc(1);
        while (e > 0) {
            if (e & 1ULL) acc = acc * base;
            base = base * base;
            e >>= 1;
        }
        return acc;
    }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::string digits;
        BigInt cur = abs();
        while (!cur.is_zero()) {
            std::uint32_t rem = cur.divmod_small(1000000000u);
            for (int k = 0; k < 9; ++k) {
                digits.push_back(static_cast<char>('0' + rem % 10));
                rem /= 10;
            }
        }
        while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
        if (negative_) digits.push_back('-');
        std::reverse(digits.begin(), digits.end());
        return digits;
    }

    double to_double() const {
        double v = 0.0;
        for (std::size_t i = limbs_.size(); i-- > 0;) v = v * 4294967296.0 + limbs_[i];
        return negative_ ? -v : v;
    }

    std::size_t bit_length() const {
        if (limbs_.empty()) return 0;
        std::uint32_t top = limbs_.back();
        std::size_t b = 0;
        while (top) {
            ++b;
            top >>= 1;
        }
        return (limbs_.size() - 1) * 32 + b;
    }

    bool fits_longlong() const {
        BigInt lim(static_cast<long long>(1) << 62);
        return cmp_mag(limbs_, lim.limbs_) < 0;
    }

    long long to_longlong() const {
        if (!fits_longlong()) throw std::overflow_error("BigInt: does not fit in long long");
        long long v = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) v = (v << 32) | limbs_[i];
        return negative_ ? -v : v;
    }

private:
    bool negative_ = false;
    std::vector<std::uint32_t> limbs_;

    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
        if (limbs_.empty()) negative_ = false;
    }

    bool get_bit(std::size_t i) const {
        std::size_t limb = i / 32;
        if (limb >= limbs_.size()) return false;
        return (limbs_[limb] >> (i % 32)) & 1u;
    }

    void shift_left_one() {
        std::uint32_t carry = 0;
        for (auto& l : limbs_) {
            std::uint32_t next = l >> 31;
            l = (l << 1) | carry;
            carry = next;
        }
        if (carry) limbs_.push_back(carry);
    }

    void mul_small(std::uint32_t m) {
        std::uint64_t carry = 0;
        for (auto& l : limbs_) {
            std::uint64_t cur = static_cast<std::uint64_t>(l) * m + carry;
            l = static_cast<std::uint32_t>(cur);
            carry = cur >> 32;
        }
        if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
    }

    void add_small(std::uint32_t v) {
        std::uint64_t carry = v;
        for (auto& l : limbs_) {
            if (!carry) return;
            std::uint64_t cur = static_cast<std::uint64_t>(l) + carry;
            l = static_cast<std::uint32_t>(cur);
            carry = cur >> 32;
        }
        if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
    }

    // Divides in place by a small divisor, returns the remainder.
    std::uint32_t divmod_small(std::uint32_t d) {
        std::uint64_t rem = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            std::uint64_t cur = (rem << 32) | limbs_[i];
            limbs_[i] = static_cast<std::uint32_t>(cur / d);
            rem = cur % d;
        }
        trim();
        return static_cast<std::uint32_t>(rem);
    }

    static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
        if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
        for (std::size_t i = a.size(); i-- > 0;) {
            if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
        }
        return 0;
    }

    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        const auto& big = a.size() >= b.size() ? a : b;
        const auto& small = a.size() >= b.size() ? b : a;
        std::vector<std::uint32_t> out = big;
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            std::uint64_t cur = static_cast<std::uint64_t>(out[i]) + carry +
                                (i < small.size() ? small[i] : 0u);
            out[i] = static_cast<std::uint32_t>(cur);
            carry = cur >> 32;
            if (!carry && i >= small.size()) break;
        }
        if (carry) out.push_back(static_cast<std::uint32_t>(carry));
        return out;
    }

    // Requires |a| >= |b|.
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> out = a;
        std::int64_t borrow = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            std::int64_t cur = static_cast<std::int64_t>(out[i]) - borrow -
                               (i < b.size() ? static_cast<std::int64_t>(b[i]) : 0);
            if (cur < 0) {
                cur += (1LL << 32);
                borrow = 1;
            } else {
                borrow = 0;
            }
            out[i] = static_cast<std::uint32_t>(cur);
        }
        while (!out.empty() && out.back() == 0) out.pop_back();
        return out;
    }
};

// Exact rational number, always normalized: den > 0, gcd(num, den) = 1.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(int n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }
    Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

    // Accepts "a" or "a/b"; decimals are deliberately rejected.
    static Rational from_string(std::string_view s) {
        auto slash = s.find('/');
        if (s.find('.') != std::string_view::npos)
            throw std::invalid_argument("Rational: decimal input not accepted, use a/b");
        if (slash == std::string_view::npos)
            return Rational(BigInt::from_string(s), BigInt(1));
        return Rational(BigInt::from_string(s.substr(0, slash)),
                        BigInt::from_string(s.substr(slash + 1)));
    }

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_negative() const { return num_.is_negative(); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw std::domain_error("Rational: division by zero");
        return Rational(a.num_ * b.den_, a.den_ * b.num_);
    }
    Rational operator-() const {
        Rational r = *this;
        r.num_ = -r.num_;
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    static int cmp(const Rational& a, const Rational& b) {
        return BigInt::cmp(a.num_ * b.den_, b.num_ * a.den_);
    }
    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const Rational& a, const Rational& b) { return cmp(a, b) != 0; }
    friend bool operator<(const Rational& a, const Rational& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a, b) >= 0; }

    Rational pow(long long e) const {
        if (e < 0) {
            if (is_zero()) throw std::domain_error("Rational: 0 to negative power");
            return Rational(den_.pow(static_cast<unsigned long long>(-e)),
                            num_.pow(static_cast<unsigned long long>(-e)));
        }
        return Rational(num_.pow(static_cast<unsigned long long>(e)),
                        den_.pow(static_cast<unsigned long long>(e)));
    }

    // Always "num/den", e.g. "0/1", "29/200".
    std::string to_string() const { return num_.to_string() + "/" + den_.to_string(); }

    double to_double() const { return num_.to_double() / den_.to_double(); }

private:
    BigInt num_;
    BigInt den_;

    void normalize() {
        if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
        if (den_.is_negative()) {
            den_ = -den_;
            num_ = -num_;
        }
        if (num_.is_zero()) {
            den_ = BigInt(1);
            return;
        }
        BigInt g = BigInt::gcd(num_, den_);
        num_ = num_ / g;
        den_ = den_ / g;
    }
};

}  // namespace switchlab
