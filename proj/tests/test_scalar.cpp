#include "doctest.h"

#include "gpolylab/errors.hpp"
#include "gpolylab/scalar.hpp"

using namespace gpolylab;

TEST_CASE("radical products reduce") {
    CHECK(mul(ExactScalar::sqrt(2), ExactScalar::sqrt(3)) == ExactScalar::sqrt(6));
    CHECK(mul(ExactScalar::sqrt(6), ExactScalar::sqrt(10)) == ExactScalar(2) * ExactScalar::sqrt(15));
    CHECK(ExactScalar::sqrt(12) == ExactScalar(2) * ExactScalar::sqrt(3));
    CHECK((ExactScalar::sqrt(2) * ExactScalar::sqrt(2) - 2).is_zero());
    CHECK((ExactScalar(2) * ExactScalar::pi() - ExactScalar(2) * ExactScalar::pi()).is_zero());
    CHECK(ExactScalar::sqrt(4).is_integer());
}

TEST_CASE("printing and parsing round trip") {
    ExactScalar s = parse_scalar("sqrt(2)*sqrt(3) + pi + 2");
    CHECK(s.to_string() == "sqrt(6) + pi + 2");
    CHECK(parse_scalar(s.to_string()) == s);
    CHECK(parse_scalar("-1/2*sqrt(3)").to_string() == "-1/2*sqrt(3)");
    CHECK(parse_scalar("(1 - sqrt(2))*(1 + sqrt(2))") == ExactScalar(-1));
    CHECK(ExactScalar::from_json(s.to_json()) == s);
    CHECK_THROWS_AS(parse_scalar("sqrt(2"), SyntaxError);
    CHECK_THROWS_AS(parse_scalar("1/0"), SyntaxError);
    CHECK(parse_rational("0.05") == Rational(1, 20));
    CHECK(parse_rational("-2/7") == Rational(-2, 7));
}

TEST_CASE("sign decisions") {
    CHECK(sign(ExactScalar::sqrt(2) - 1) == Sign::positive);
    CHECK(sign(ExactScalar(3) - ExactScalar::pi()) == Sign::negative);
    CHECK(sign(ExactScalar::e() * 2 - parse_scalar("sqrt(29)")) == Sign::positive);  // 5.4366 > 5.3852
    CHECK(compare(ExactScalar::sqrt(2), Rational(141421356, 100000000)) == 1);
    CHECK(relies_on_independence(ExactScalar::pi() - ExactScalar::e()));
    CHECK_FALSE(relies_on_independence(ExactScalar::pi() - 3));
}

TEST_CASE("precision cap is reported") {
    // 1/10^400 below sqrt(2) needs more than 128 bits.
    Integer big;
    mpz_ui_pow_ui(big.get_mpz_t(), 10, 400);
    ExactScalar tiny = ExactScalar::sqrt(2) * Rational(1) - ExactScalar::sqrt(2) + Rational(Integer(1), big);
    CHECK(sign(tiny) == Sign::positive);  // rational after cancellation
    unsigned old = precision_cap();
    set_precision_cap(128);
    // (sqrt(2) - 1)^k is small for large k.
    ExactScalar p = 1;
    for (int i = 0; i < 60; ++i) p *= ExactScalar::sqrt(2) - 1;
    CHECK_THROWS_AS(sign(p), PrecisionCapExceeded);
    set_precision_cap(old);
    CHECK(sign(p) == Sign::positive);
}

TEST_CASE("interval enclosures nest") {
    ExactScalar r2 = ExactScalar::sqrt(2);
    Interval a = interval(r2, 20);
    CHECK(a.contains(Rational(141421356, 100000000)));
    CHECK(a.upper - a.lower <= Rational(1, 1 << 17));
    Interval prev = interval(r2 + ExactScalar::pi(), 8);
    for (unsigned b = 9; b <= 200; ++b) {
        Interval cur = interval(r2 + ExactScalar::pi(), b);
        CHECK(prev.contains(cur));
        prev = cur;
    }
    CHECK(interval(ExactScalar(0), 10).lower == 0);
}
