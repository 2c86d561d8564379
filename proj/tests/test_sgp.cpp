#include "doctest.h"

#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"
#include "gpolylab/sgp.hpp"

using namespace gpolylab;

namespace {

// Brute-force identity oracle on [-range, range]; returns the number of members checked.
int check_sound(const std::string& text, int range = 1000) {
    GPExpr e = parse(text);
    SgpResult r = to_sgp_normal(e);
    GPExpr h = to_expr(r.form);
    int members = 0;
    for (int n = -range; n <= range; ++n) {
        if (!c_membership(n, r.conditions)) continue;
        ++members;
        CHECK_MESSAGE(eval_int(e, n) == eval_int(h, n), text << " at n = " << n);
    }
    return members;
}

}  // namespace

TEST_CASE("collapse of a constant outer coefficient") {
    SgpResult r = to_sgp_normal(parse("ni(1/3*ni(sqrt(2)*n^2))"));
    CHECK(print(to_expr(r.form)) == "ni(1/3*sqrt(2)*n^2)");
    REQUIRE(r.conditions.conditions().size() == 3);
    CHECK(print(r.conditions.conditions()[0].expr) == "1/3*sqrt(2)*n^2");
    CHECK(print(r.conditions.conditions()[1].expr) == "1/3*ni(sqrt(2)*n^2)");
    CHECK(print(r.conditions.conditions()[2].expr) == "sqrt(2)*n^2");
    CHECK(r.conditions.conditions()[0].delta == Rational(1, 4));
    CHECK(r.conditions.conditions()[2].delta == Rational(1, 4));
    CHECK(check_sound("ni(1/3*ni(sqrt(2)*n^2))") > 100);
}

TEST_CASE("already normal inputs are unchanged") {
    for (const char* s : {"ni(sqrt(2)*n^2)", "2*ni(sqrt(2)*n^2) - ni(sqrt(3)*n^2)", "n*ni(sqrt(2)*n)",
                          "ni(sqrt(2)*n^2*ni(sqrt(3)*n))", "3*n^2 - ni(sqrt(5)*n)", "ni(pi*n^3)",
                          "ni(sqrt(2)*n)*ni(sqrt(3)*n^2)"}) {
        SgpResult r = to_sgp_normal(parse(s));
        CHECK(r.conditions.empty());
        CHECK(is_zero(sub(to_expr(r.form), parse(s))));
    }
}

TEST_CASE("chain structure") {
    SgpResult r = to_sgp_normal(parse("ni(pi*n*ni(sqrt(5)*n^2 + 2*n))"));
    REQUIRE(r.form.terms.size() == 2);
    CHECK(sgp_degree(r.form) == 3);
    // ni(sqrt(5)n^2 + 2n) splits exactly; pi n times it has two non-integer parts.
    CHECK(to_sgp_normal(parse("ni(pi*n*ni(sqrt(5)*n^2 + 2*n))")).conditions.conditions().size() == 2);
    CHECK(check_sound("ni(pi*n*ni(sqrt(5)*n^2 + 2*n))", 300) > 50);
    SgpResult chain = to_sgp_normal(parse("ni(sqrt(2)*n^2*ni(sqrt(3)*n))"));
    REQUIRE(chain.form.terms.size() == 1);
    CHECK(chain_text(chain.form.terms[0].product.chains[0]) == "L(sqrt(2)*n^2, sqrt(3)*n)");
}

TEST_CASE("finite-sum splitting is sound") {
    CHECK(check_sound("ni(sqrt(2)*n^2 + sqrt(3)*n)") > 50);
    CHECK(check_sound("ni(sqrt(2)*n + 2*n^2 + pi*n^2)") > 50);
    CHECK(check_sound("2*ni(1/2*ni(sqrt(3)*n) + sqrt(2)*n) + n^3") > 50);
    CHECK(check_sound("ni(2*pi*n - ni(2*pi*n))") == 2001);
}

TEST_CASE("unsupported patterns") {
    CHECK_THROWS_AS(to_sgp_normal(parse("sqrt(2)*n")), UnsupportedPattern);
    CHECK_THROWS_AS(to_sgp_normal(parse("fl(sqrt(2)*n)")), UnsupportedPattern);
    CHECK_THROWS_AS(to_sgp_normal(parse("ni(sqrt(2)*ni(sqrt(3)*n)*ni(sqrt(5)*n))")), UnsupportedPattern);
    CHECK_THROWS_AS(to_sgp_normal(parse_any("ni(sqrt(2)*n + 1/3)")), UnsupportedPattern);
}
