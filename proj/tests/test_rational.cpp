#include "prast/rational.hpp"

#include <doctest.h>

#include <random>

using prast::Rational;

TEST_CASE("literal forms") {
    CHECK(Rational::parse("3") == Rational(3));
    CHECK(Rational::parse("0.6") == Rational(3, 5));
    CHECK(Rational::parse("1/3") == Rational(1, 3));
    CHECK(Rational::parse("4/6") == Rational(2, 3));
    CHECK(Rational::parse("-0.25") == Rational(-1, 4));
    // leading zeros are decimal, never octal
    CHECK(Rational::parse("0.08") == Rational(2, 25));
    CHECK(Rational::parse("010") == Rational(10));
    CHECK(Rational::parse("0.12") == Rational(3, 25));
}

TEST_CASE("malformed literals") {
    for (const char* s : {"", "1/0", "abc", "1.2.3", "1/", "/2", "0x10", "1e3", "--1"}) {
        INFO(s);
        CHECK_FALSE(Rational::try_parse(s).has_value());
    }
    CHECK_THROWS_AS(Rational::parse("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
}

TEST_CASE("canonical form") {
    Rational r(6, -4);
    CHECK(r.str() == "-3/2");
    CHECK(r.denominator_str() == "2");
    CHECK(Rational(0, 5).str() == "0");
    CHECK(Rational(10, 5).is_integer());
    CHECK(Rational(1, 3).hash() == Rational(2, 6).hash());
}

TEST_CASE("decimal rendering") {
    CHECK(Rational(7, 5).pretty() == "7/5 (1.4)");
    CHECK(Rational(8, 3).pretty() == "8/3 (≈2.666667)");
    CHECK(Rational(-1, 3).pretty() == "-1/3 (≈-0.333333)");
    CHECK(Rational(2).pretty() == "2");
    CHECK(Rational(1, 8).exact_decimal() == "0.125");
    CHECK_FALSE(Rational(1, 3).exact_decimal().has_value());
    CHECK_FALSE(Rational(1, 1 << 20).exact_decimal().has_value());
    CHECK(Rational(1, 3).compact() == "1/3");
    CHECK(Rational(3, 5).compact() == "0.6");
}

TEST_CASE("property: str and compact round-trip through parse") {
    std::mt19937 g(7);
    std::uniform_int_distribution<long> num(-1000, 1000), den(1, 1000);
    for (int k = 0; k < 2000; ++k) {
        Rational r(num(g), den(g));
        CHECK(Rational::parse(r.str()) == r);
        CHECK(Rational::parse(r.compact()) == r);
        if (auto d = r.exact_decimal()) CHECK(Rational::parse(*d) == r);
    }
}

TEST_CASE("property: field laws on random values") {
    std::mt19937 g(11);
    std::uniform_int_distribution<long> num(-50, 50), den(1, 50);
    for (int k = 0; k < 1000; ++k) {
        Rational a(num(g), den(g)), b(num(g), den(g)), c(num(g), den(g));
        CHECK(a + b == b + a);
        CHECK((a + b) + c == a + (b + c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a - a == Rational(0));
        if (!b.is_zero()) CHECK((a / b) * b == a);
        CHECK((a < b) == ((a - b).sign() < 0));
        CHECK(min(a, b) <= max(a, b));
    }
}
