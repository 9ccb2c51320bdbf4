#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace prast {

// Exact rational backed by GMP. Always canonical (reduced, positive denominator).
class Rational {
public:
    Rational() = default;
    Rational(long n) : v_(n) {}
    Rational(long n, long d);
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    static Rational parse(std::string_view text);  // "3", "0.6", "1/3"; throws on malformed input
    static std::optional<Rational> try_parse(std::string_view text);

    const mpq_class& raw() const { return v_; }
    std::string numerator_str() const { return v_.get_num().get_str(); }
    std::string denominator_str() const { return v_.get_den().get_str(); }

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    Rational operator-() const { return Rational(mpq_class(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend auto operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    // "3/5", "-2", "0"
    std::string str() const;
    // Terminating decimal with at most max_digits fractional digits, if one exists.
    std::optional<std::string> exact_decimal(int max_digits = 6) const;
    // Decimal if exact within 6 digits, otherwise the fraction. Used by the pretty printer.
    std::string compact() const;
    // "7/5 (1.4)" or "8/3 (≈2.666667)"
    std::string pretty() const;
    double to_double() const { return v_.get_d(); }

    std::size_t hash() const;

private:
    mpq_class v_;
};

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace prast

template <>
struct std::hash<prast::Rational> {
    std::size_t operator()(const prast::Rational& r) const { return r.hash(); }
};
