#include "prast/rational.hpp"

#include <cctype>
#include <functional>
#include <stdexcept>

namespace prast {

Rational::Rational(long n, long d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    v_ = mpq_class(n, d);
    v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("division by zero");
    v_ /= o.v_;
    return *this;
}

static bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

std::optional<Rational> Rational::try_parse(std::string_view text) {
    bool neg = false;
    if (!text.empty() && text[0] == '-') {
        neg = true;
        text.remove_prefix(1);
    }
    mpq_class q;
    auto slash = text.find('/');
    auto dot = text.find('.');
    if (slash != std::string_view::npos) {
        auto n = text.substr(0, slash), d = text.substr(slash + 1);
        if (!all_digits(n) || !all_digits(d)) return std::nullopt;
        mpz_class den(std::string(d), 10);
        if (den == 0) return std::nullopt;
        q = mpq_class(mpz_class(std::string(n), 10), den);
    } else if (dot != std::string_view::npos) {
        auto i = text.substr(0, dot), f = text.substr(dot + 1);
        if (!all_digits(i) || !all_digits(f)) return std::nullopt;
        mpz_class scale = 1;
        for (std::size_t k = 0; k < f.size(); ++k) scale *= 10;
        q = mpq_class(mpz_class(std::string(i) + std::string(f), 10), scale);
    } else {
        if (!all_digits(text)) return std::nullopt;
        q = mpq_class(mpz_class(std::string(text), 10));
    }
    q.canonicalize();
    if (neg) q = -q;
    return Rational(q);
}

Rational Rational::parse(std::string_view text) {
    auto r = try_parse(text);
    if (!r) throw std::invalid_argument("malformed rational literal: " + std::string(text));
    return *r;
}

std::string Rational::str() const {
    if (is_integer()) return v_.get_num().get_str();
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::optional<std::string> Rational::exact_decimal(int max_digits) const {
    mpz_class den = v_.get_den();
    int twos = 0, fives = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) { den /= 2; ++twos; }
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) { den /= 5; ++fives; }
    if (den != 1) return std::nullopt;
    int digits = std::max(twos, fives);
    if (digits > max_digits) return std::nullopt;
    if (digits == 0) return v_.get_num().get_str();
    mpz_class scale = 1;
    for (int k = 0; k < digits; ++k) scale *= 10;
    mpz_class scaled = v_.get_num() * scale / v_.get_den();
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string s = scaled.get_str();
    if (static_cast<int>(s.size()) <= digits) s = std::string(digits - s.size() + 1, '0') + s;
    s.insert(s.size() - digits, ".");
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return neg ? "-" + s : s;
}

std::string Rational::compact() const {
    if (auto d = exact_decimal()) return *d;
    return str();
}

std::string Rational::pretty() const {
    if (is_integer()) return str();
    if (auto d = exact_decimal()) return str() + " (" + *d + ")";
    // six fractional digits, rounded half up
    mpq_class scaled = v_ * 1000000;
    mpz_class r = scaled.get_num() * 2 + scaled.get_den();
    mpz_class den2 = scaled.get_den() * 2;
    mpz_fdiv_q(r.get_mpz_t(), r.get_mpz_t(), den2.get_mpz_t());
    bool neg = r < 0;
    if (neg) r = -r;
    std::string s = r.get_str();
    if (s.size() <= 6) s = std::string(7 - s.size(), '0') + s;
    s.insert(s.size() - 6, ".");
    return str() + " (≈" + (neg ? "-" : "") + s + ")";
}

std::size_t Rational::hash() const {
    std::hash<std::string> h;
    return h(v_.get_num().get_str(16)) * 1000003u ^ h(v_.get_den().get_str(16));
}

}  // namespace prast
