#include "doctest.h"

#include <optional>
#include <random>
#include <set>

#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"
#include "gpolylab/gpstruct.hpp"

using namespace gpolylab;

namespace {

const char* kCoeffs[] = {"sqrt(2)", "sqrt(3)", "pi", "1/3*sqrt(5)", "1/2*pi", "-sqrt(7)", "e", "2/5*sqrt(3)"};

std::string pick(std::mt19937& rng, int n) { return std::to_string(std::uniform_int_distribution<int>(1, n)(rng)); }

// Random SGP-shaped expression, degree <= 4.
std::string random_sgp(std::mt19937& rng) {
    std::uniform_int_distribution<int> nterms(1, 3), kind(0, 3), coef(0, 7), sgn(0, 1);
    std::string s;
    for (int t = nterms(rng); t > 0; --t) {
        std::string c = kCoeffs[coef(rng)];
        std::string term;
        switch (kind(rng)) {
            case 0: term = pick(rng, 3) + "*n^" + pick(rng, 4); break;
            case 1: term = pick(rng, 3) + "*ni(" + c + "*n^" + pick(rng, 4) + ")"; break;
            case 2: term = "ni(" + c + "*n^" + pick(rng, 2) + "*ni(" + kCoeffs[coef(rng)] + "*n^" + pick(rng, 2) + "))"; break;
            default: term = "n^" + pick(rng, 2) + "*ni(" + c + "*n^" + pick(rng, 2) + ")"; break;
        }
        s += s.empty() ? term : (sgn(rng) ? " + " : " - ") + term;
    }
    return s;
}

// D(n) == p(n+m) - p(n) - p(m) on C1 within [lo, hi]; returns the member count.
int check_derivative(const GPExpr& p, const DerivativeResult& r, long lo, long hi) {
    Integer pm = eval_int(p, r.m);
    int members = 0;
    for (const auto& n : c_enumerate(r.C1, lo, hi)) {
        ++members;
        Integer want = eval_int(p, n + r.m) - eval_int(p, n) - pm;
        CHECK_MESSAGE(eval_int(r.D, n) == want, print(p) << " m=" << r.m << " n=" << n);
    }
    return members;
}

// First m >= from for which the derivative exists.
DerivativeResult first_admissible(const GPExpr& p, long from) {
    for (long m = from;; ++m) {
        try {
            return derivative(p, m);
        } catch (const NotGood&) {
        } catch (const ShiftTooSmall&) {
        }
    }
}

}  // namespace

TEST_CASE("leading sums") {
    CHECK(leading_sum(parse("ni(sqrt(2)*n^2*ni(sqrt(3)*n) + ni(pi*n^3)) + 2*n^3 + 2*n^2")).to_string() ==
          "sqrt(6) + pi + 2");
    CHECK(leading_sum(parse("n + n*ni(2*pi*n - ni(2*pi*n))")).is_zero());
    CHECK(leading_sum(parse("n^2")) == ExactScalar(1));
    CHECK(leading_sum(parse("fl(sqrt(2)*n^2) + n")) == ExactScalar::sqrt(2));
    CHECK(leading_sum(GPExpr()).is_zero());
}

TEST_CASE("leading sum is multilinear") {
    std::mt19937 rng(11);
    ExactScalar c = parse_scalar("3/2*sqrt(3) - pi");
    int sums = 0;
    for (int i = 0; i < 300; ++i) {
        GPExpr p = parse(random_sgp(rng)), q = parse(random_sgp(rng));
        CHECK(leading_sum(scale(c, p)) == c * leading_sum(p));
        if (degree(p) != degree(q)) continue;
        ExactScalar s = leading_sum(p) + leading_sum(q);
        if (s.is_zero()) continue;
        ++sums;
        CHECK(leading_sum(add(p, q)) == s);
    }
    CHECK(sums > 20);
}

TEST_CASE("non-degeneracy") {
    CHECK(nondegenerate({parse("n^2 + n"), parse("n^2 + ni(sqrt(3)*n)")}));
    CHECK_FALSE(nondegenerate({parse("n*ni(2*pi*n) + n"), parse("ni(2*pi*n^2) + 2*n")}));
    CHECK_FALSE(nondegenerate({parse("n"), parse("n")}));
}

TEST_CASE("equivalence") {
    CHECK(equivalent(parse("ni(pi*n^3*ni(sqrt(2)*n)) + ni(1/5*n^3)"), parse("ni(pi*n^3*ni(sqrt(2)*n)) + ni(pi*n^2)")));
    CHECK_FALSE(equivalent(parse("3*n^2 - ni(sqrt(5)*n)"), parse("n*ni(pi*n)")));
    GPExpr p = parse("ni(sqrt(2)*n^2) + n");
    CHECK(equivalent(p, p));
    CHECK_FALSE(equivalent(parse("n"), parse("2*n")));
}

TEST_CASE("equivalence is an equivalence relation on a corpus") {
    std::mt19937 rng(5);
    std::vector<GPExpr> corpus;
    for (int i = 0; i < 500; ++i) corpus.push_back(parse(random_sgp(rng)));
    // small perturbations so that some pairs are equivalent
    for (int i = 0; i < 100; ++i) corpus[400 + i] = add(corpus[i], parse("ni(sqrt(11)*n)"));
    int pairs = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        CHECK(equivalent(corpus[i], corpus[i]));
        for (std::size_t j = i + 1; j < corpus.size(); j += 7) {
            bool ij = equivalent(corpus[i], corpus[j]);
            CHECK(ij == equivalent(corpus[j], corpus[i]));
            if (!ij) continue;
            ++pairs;
            for (std::size_t k = 0; k < corpus.size(); k += 13)
                if (equivalent(corpus[j], corpus[k])) CHECK(equivalent(corpus[i], corpus[k]));
        }
    }
    CHECK(pairs > 10);
}

TEST_CASE("weight vectors") {
    std::vector<GPExpr> sys{parse("3*n^2 - ni(sqrt(5)*n)"), parse("ni(pi*n^3*ni(sqrt(2)*n)) + ni(1/5*n^3)"),
                            parse("n*ni(pi*n)"), parse("ni(pi*n^3*ni(sqrt(2)*n)) + ni(pi*n^2)")};
    CHECK(weight_vector(sys) == WeightVector{0, 2, 0, 1});
    CHECK(weight_vector({parse("n"), parse("2*n"), parse("n^2")}) == WeightVector{2, 1});
    CHECK(weight_vector({}).empty());
    CHECK(weight_text({0, 2, 0, 1}) == "[0,2,0,1]");
}

TEST_CASE("PET order") {
    CHECK(pet_compare({0, 2, 0, 1}, {0, 2, 0, 1}) == std::strong_ordering::equal);
    CHECK(pet_compare({5, 1}, {0, 2}) == std::strong_ordering::less);
    CHECK(pet_compare({0, 2, 0, 1}, {9, 9, 9}) == std::strong_ordering::greater);
    CHECK(pet_compare({1, 0, 0}, {1}) == std::strong_ordering::equal);

    std::mt19937 rng(3);
    std::uniform_int_distribution<int> len(0, 4), val(0, 3);
    auto gen = [&] {
        WeightVector w(len(rng));
        for (auto& x : w) x = val(rng);
        return w;
    };
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
        WeightVector a = gen(), b = gen(), c = gen();
        auto ab = pet_compare(a, b), ba = pet_compare(b, a);
        if ((ab == std::strong_ordering::less) != (ba == std::strong_ordering::greater)) ++bad;
        if ((ab == std::strong_ordering::equal) != (ba == std::strong_ordering::equal)) ++bad;
        if (ab == std::strong_ordering::less && pet_compare(b, c) == std::strong_ordering::less &&
            pet_compare(a, c) != std::strong_ordering::less)
            ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("m(h)") {
    CHECK(m_threshold(parse("ni(sqrt(2)*n^2)")).to_string() == "2");
    CHECK(m_threshold(parse("ni(pi*n^3)")).to_string() == "2");
    ScalarRatio r = m_threshold(parse("2*ni(sqrt(2)*n^2) - ni(sqrt(3)*n^2)"));
    CHECK(r.num == parse_scalar("2*(4*sqrt(2) + 2*sqrt(3))"));
    CHECK(r.den == parse_scalar("4*sqrt(2) - 2*sqrt(3)"));
    // ratio is about 8.32
    CHECK_FALSE(r.exceeded_by(8));
    CHECK(r.exceeded_by(9));
    CHECK(r.exceeded_by(-9));
    CHECK_THROWS_AS(m_threshold(parse("ni(sqrt(2)*n^2) - n*ni(sqrt(2)*n)")), DomainError);
}

TEST_CASE("goodness") {
    CHECK_FALSE(good(1, parse("ni(1/2*n)")));
    CHECK(good(2, parse("ni(1/2*n)")));
    for (long m : {-7, -1, 1, 2, 3, 50, 1001}) CHECK(good(m, parse("ni(sqrt(2)*n)")));
    // 3/2 * 1 at the inner link
    CHECK_FALSE(good(1, parse("ni(sqrt(2)*n*ni(3/2*n))")));
}

TEST_CASE("good sets") {
    ConstraintSet c = good_set(parse("ni(1/2*n)"), Rational(1, 4));
    CHECK(c_enumerate(c, -6, 6) == std::vector<Integer>{-6, -4, -2, 0, 2, 4, 6});
    GPExpr p = parse("ni(sqrt(2)*n)");
    ConstraintSet g = good_set(p, Rational(1, 8));
    REQUIRE(g.conditions().size() == 1);
    CHECK(print(g.conditions()[0].expr) == "sqrt(2)*n");
    GPExpr nested = parse("ni(pi*n^2*ni(1/3*sqrt(3)*n))");
    ConstraintSet gn = good_set(nested, Rational(1, 4));
    auto members = c_enumerate(gn, -2000, 2000);
    CHECK(members.size() > 100);
    for (const auto& m : members) CHECK(good(m, nested));
    CHECK_THROWS_AS(good_set(p, Rational(1, 3)), DomainError);
    CHECK_THROWS_AS(good_set(p, Rational(0)), DomainError);
}

TEST_CASE("derivative examples") {
    DerivativeResult r = derivative(parse("n^2"), 3);
    CHECK(print(r.D) == "6*n");
    CHECK(r.C1.empty());

    GPExpr lin = parse("ni(sqrt(2)*n)");
    DerivativeResult r1 = derivative(lin, 4);
    CHECK(is_zero(r1.D));
    CHECK(r1.C1.conditions().size() == 1);
    CHECK(check_derivative(lin, r1, -10000, 10000) > 1000);

    GPExpr p = parse("ni(sqrt(2)*n^2)");
    DerivativeResult r5 = derivative(p, 5);
    CHECK(print(r5.D) == "ni(10*sqrt(2)*n)");
    CHECK(check_derivative(p, r5, 1, 10000) > 100);

    CHECK_THROWS_AS(derivative(p, 1), ShiftTooSmall);
    CHECK_THROWS_AS(derivative(parse("ni(1/2*n^2)"), 3), NotGood);
    CHECK_THROWS_AS(derivative(parse("n^2"), 0), ShiftTooSmall);
}

TEST_CASE("derivative identity oracle") {
    ApproxParams params;
    for (const char* text : {"ni(sqrt(2)*n^2)", "ni(pi*n^3)", "n^2", "ni(sqrt(2)*n^2*ni(sqrt(3)*n))",
                             "2*ni(sqrt(2)*n^2) - ni(sqrt(3)*n^2) + n", "ni(sqrt(2)*n)*ni(sqrt(3)*n)"}) {
        GPExpr p = parse(text);
        DerivativeResult r = first_admissible(p, degree(p) >= 3 ? 1000 : 20);
        CAPTURE(text);
        CAPTURE(r.m);
        CHECK(degree(r.D) < degree(p));
        ExactScalar target = ExactScalar(Integer(r.m * degree(p))) * leading_sum(p);
        CHECK(compare(abs(leading_sum(r.D) - target) * ExactScalar(Integer(2 * params.N)), abs(target)) < 0);
        CHECK(pet_compare(weight_vector({r.D}), weight_vector({p})) == std::strong_ordering::less);
        CHECK(check_derivative(p, r, -10000, 10000) > 0);
    }
}

TEST_CASE("proper sets") {
    CHECK(proper_set({parse("n^2")}, {3, 8, -5}).empty());

    GPExpr p = parse("ni(sqrt(2)*n^2)");
    ConstraintSet both = proper_set({p}, {5, 7});
    auto members = c_enumerate(both, 1, 10000);
    CHECK(members.size() > 20);
    for (long m : {5, 7}) {
        DerivativeResult r = derivative(p, m);
        for (const auto& n : members)
            CHECK(eval_int(r.D, n) == eval_int(p, n + m) - eval_int(p, n) - eval_int(p, Integer(m)));
    }

    ConstraintSet lin = proper_set({parse("ni(sqrt(2)*n)"), parse("n")}, {3});
    REQUIRE(lin.conditions().size() == 1);
    for (const auto& n : c_enumerate(lin, -3000, 3000))
        CHECK(nearest_int(ExactScalar::sqrt(2) * ExactScalar(Integer(n + 3))) ==
              nearest_int(ExactScalar::sqrt(2) * ExactScalar(n)) + nearest_int(ExactScalar::sqrt(2) * 3));
}

TEST_CASE("shifted systems") {
    std::vector<GPExpr> raw{parse("n^2"), parse("2*n^2")};
    CHECK_THROWS_WITH_AS(shifted_system(raw, {10000, 100000}), doctest::Contains("q_{2,1}"), ShiftTooSmall);
    CHECK_THROWS_AS(shifted_system({parse("n^2")}, {0}), ShiftTooSmall);

    std::vector<GPExpr> P{rescale(raw[0], 100), rescale(raw[1], 100)};
    ShiftedSystem s = shifted_system(P, {10000, 100000});
    REQUIRE(s.q.size() == 2);
    CHECK(print(s.q[0][0]) == "200000000*n");

    // unscaled, A(q_{2,j}) = sqrt(3) + 1 - sqrt(2) is too small
    std::vector<GPExpr> irr{parse("ni(sqrt(2)*n^2)"), parse("ni(sqrt(3)*n^2) + n^2")};
    CHECK_THROWS_AS(shifted_system(irr, {2000, 30000}), ShiftTooSmall);
    for (auto& p : irr) p = rescale(p, 100);
    ShiftedSystem t = shifted_system(irr, {2000, 30000});
    std::vector<Integer> ks{2000, 30000};
    int members = 0;
    for (const auto& n : c_enumerate(t.C1, 1, 1000)) {
        ++members;
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(eval_int(t.q[i][j], n) ==
                      eval_int(irr[i], n + ks[j]) - eval_int(irr[i], ks[j]) - eval_int(irr[0], n));
    }
    CHECK(members > 0);
}

TEST_CASE("approximation discipline") {
    ApproxParams p100{100};
    CHECK(approx_check(1000, 1001, p100));
    CHECK(approx_check(ExactScalar::pi(), ExactScalar::pi()));
    CHECK_FALSE(approx_check(1, 2));
}

TEST_CASE("PET successors have smaller weight") {
    std::mt19937 rng(17);
    const char* pool[] = {"ni(sqrt(2)*n^2)", "ni(sqrt(3)*n^2)", "ni(pi*n^3)", "n^2", "ni(1/3*sqrt(5)*n)", "n",
                          "2*ni(sqrt(2)*n^2) + n", "ni(sqrt(7)*n^3) - n^2", "3*n", "ni(e*n^2)"};
    std::uniform_int_distribution<int> size(1, 3), idx(0, 9);
    int done = 0, attempts = 0;
    while (done < 200 && attempts < 400) {
        ++attempts;
        std::vector<GPExpr> P;
        std::set<int> used;
        for (int s = size(rng); s > 0; --s) {
            int i = idx(rng);
            if (used.insert(i).second) P.push_back(parse(pool[i]));
        }
        if (!nondegenerate(P)) continue;
        std::uniform_int_distribution<long> base(1000, 5000);
        std::optional<PetStep> step;
        for (int tries = 0; tries < 20 && !step; ++tries) {
            long k = base(rng);
            try {
                step = pet_successor(P, {k, 7 * k + 1});
            } catch (const NotGood&) {
            } catch (const ShiftTooSmall&) {
            }
        }
        REQUIRE(step.has_value());
        CHECK(pet_compare(weight_vector(step->system), weight_vector(P)) == std::strong_ordering::less);
        ++done;
    }
    CHECK(done == 200);
}
