#include "doctest.h"

#include "gpolylab/constraints.hpp"
#include "gpolylab/dynsim.hpp"
#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"

using namespace gpolylab;

namespace {

ExactScalar S(const char* t) { return parse_scalar(t); }

std::vector<Integer> window_set(std::vector<const char*> exprs, const Rational& eps, long N) {
    ConstraintSet c;
    for (const char* e : exprs) c.add(Condition{parse(e), eps, 0});
    return c_enumerate(c, 1, N);
}

}  // namespace

TEST_CASE("closed-form orbits match stepping") {
    std::vector<std::pair<System, Point>> cases{
        {System::rotation(S("sqrt(2)")), {S("1/3")}},
        {System::skew2(S("sqrt(3)")), {S("1/5"), S("2/7")}},
        {System::skew(3, S("pi - 3")), {S("1/2"), S("0"), S("3/4")}},
    };
    for (const auto& [s, x0] : cases) {
        Point x = reduce(x0);
        int bad = 0;
        for (long n = 1; n <= 1000; ++n) {
            x = step(s, x);
            if (!(x == orbit_point(s, x0, n))) ++bad;
        }
        CHECK_MESSAGE(bad == 0, s.to_string());
        Point y = orbit_point(s, x0, -37);
        CHECK(orbit_point(s, y, 37) == reduce(x0));
        CHECK(orbit_point(s, x0, 0) == reduce(x0));
    }
}

TEST_CASE("orbit points") {
    System rot = System::rotation(S("sqrt(2)"));
    ExactScalar d = torus_distance(orbit_point(rot, {0}, 29), {0});
    CHECK(compare(d, S("121/10000")) > 0);
    CHECK(compare(d, S("123/10000")) < 0);
    System sk = System::skew2(S("sqrt(2)"));
    for (long n : {1, 7, 100, -4}) {
        Point p = orbit_point(sk, {0, 0}, n);
        CHECK(p == reduce({ExactScalar(n) * S("sqrt(2)"), ExactScalar(n * n) * S("sqrt(2)")}));
    }
}

TEST_CASE("return sets are constraint sets") {
    for (const char* a : {"sqrt(2)", "sqrt(3)", "pi - 3"})
        for (Rational eps : {Rational(1, 10), Rational(1, 20)}) {
            std::string lin = std::string("(") + a + ")*n", quad = std::string("(") + a + ")*n^2";
            CHECK(return_set(System::rotation(S(a)), {0}, eps, 1000) == window_set({lin.c_str()}, eps, 1000));
            CHECK(return_set(System::skew2(S(a)), {0, 0}, eps, 1000) ==
                  window_set({lin.c_str(), quad.c_str()}, eps, 1000));
        }
    CHECK(return_set(System::rotation(S("sqrt(2)")), {0}, Rational(1, 10), 30) == std::vector<Integer>{5, 12, 17, 24, 29});
    CHECK(return_set(System::rotation(S("sqrt(2)")), {0}, Rational(499, 1000), 10).size() == 10);
    CHECK_THROWS_AS(return_set(System::rotation(S("sqrt(2)")), {0}, Rational(1, 2), 5), DomainError);
}

TEST_CASE("boxes") {
    BoxRegion b = parse_box("0:0.1,1/2:1/4");
    REQUIRE(b.arcs.size() == 2);
    CHECK(b.arcs[0].radius == Rational(1, 10));
    CHECK(b.to_string() == "0:1/10,1/2:1/4");
    CHECK(b.contains({S("19/20"), S("3/5")}));
    CHECK_FALSE(b.contains({S("1/10"), S("1/2")}));
    CHECK(box_within(parse_box("0.95:0.02,0.5:0.1"), b));
    CHECK_FALSE(box_within(parse_box("0.95:0.06,0.5:0.1"), b));
    CHECK(box_within(b, BoxRegion::full(2)));
    CHECK_THROWS_AS(parse_box("0:0"), DomainError);
    CHECK_THROWS_AS(parse_box("0"), DomainError);

    System sk = System::skew2(S("sqrt(2)"));
    // (x, y) -> (x + 3a, y + 6x + 9a): y spread is 6 * rx + ry
    BoxRegion small = parse_box("0:1/100,0:1/100");
    CHECK(box_maps_into(sk, small, 0, small) == false);
    CHECK(box_maps_into(sk, small, 0, parse_box("0:2/100,0:2/100")));
    CHECK(box_maps_into(sk, small, 1, BoxRegion::full(2)));
    CHECK_FALSE(box_maps_into(sk, BoxRegion::full(2), 1, small));

    auto pts = grid_points(parse_box("1/2:1/4"), 4);
    REQUIRE(pts.size() == 5);
    CHECK(pts[0][0] == S("1/2"));
    for (const auto& p : pts) CHECK(parse_box("1/2:1/4").contains(p));
}

TEST_CASE("hitting sets") {
    System rot = System::rotation(S("sqrt(2)"));
    GPExpr n = parse("n"), n2 = parse("2*n");
    auto all = hitting_set(rot, BoxRegion::full(1), {BoxRegion::full(1)}, {n}, 20, 8);
    CHECK(all.size() == 20);

    BoxRegion arc = parse_box("0:0.1");
    auto hits = hitting_set(rot, arc, {arc}, {n}, 300, 8);
    for (const auto& m : return_set(rot, {0}, Rational(1, 10), 300))
        CHECK(std::find(hits.begin(), hits.end(), m) != hits.end());

    BoxRegion v1 = parse_box("0.3:0.05"), v2 = parse_box("0.7:0.05");
    auto two = hitting_set(rot, arc, {v1, v2}, {n, n2}, 300, 8);
    CHECK_FALSE(two.empty());
    for (const auto& m : two) {
        bool ok = false;
        for (const auto& x : grid_points(arc, 8))
            ok = ok || (v1.contains(orbit_point(rot, x, m)) && v2.contains(orbit_point(rot, x, 2 * m)));
        CHECK(ok);
    }
    CHECK_THROWS_AS(hitting_set(rot, arc, {v1}, {n, n2}, 10, 8), DomainError);
}

TEST_CASE("van der Waerden search") {
    System rot = System::rotation(S("sqrt(2)"));
    auto hit = vdw_search(rot, {parse("n")}, Rational(1, 10), 100, 8);
    REQUIRE(hit);
    CHECK(hit->n == 5);
    CHECK(hit->x == Point{S("0")});
    auto dup = vdw_search(rot, {parse("n"), parse("n")}, Rational(1, 10), 100, 8);
    REQUIRE(dup);
    CHECK(dup->n == 5);

    System sk = System::skew2(S("sqrt(2)"));
    auto h2 = vdw_search(sk, {parse("n"), parse("2*n")}, Rational(1, 20), 1000000, 8);
    REQUIRE(h2);
    for (long k : {1, 2}) CHECK(compare(torus_distance(orbit_point(sk, h2->x, k * h2->n), h2->x), S("1/20")) < 0);

    CHECK_FALSE(vdw_search(System::rotation(S("1/7")), {parse("n")}, Rational(1, 10), 6, 8));
    CHECK(vdw_search(System::rotation(S("1/7")), {parse("n")}, Rational(1, 10), 7, 8)->n == 7);
}

TEST_CASE("descending refinement") {
    FSGenerators g{1, 2};
    while (g.size() < 20) g.push_back(g[g.size() - 1] + g[g.size() - 2]);
    std::vector<Integer> r{3, 5};
    System sk = System::skew2(S("sqrt(2)"));

    std::vector<BoxRegion> full{BoxRegion::full(2)};
    auto d0 = descending_refine(sk, {parse("n")}, full, g, r, 3);
    REQUIRE(d0);
    CHECK(d0->boxes.size() == 4);
    CHECK(box_within(BoxRegion::full(2), d0->boxes.back()[0]));
    CHECK(verify_descent(sk, {parse("n")}, full, r, *d0));

    std::vector<BoxRegion> generous{parse_box("0:1/4,0:1/4")};
    auto d = descending_refine(sk, {parse("n")}, generous, g, r, 3);
    REQUIRE(d);
    CHECK(d->values.size() == 4);
    CHECK(verify_descent(sk, {parse("n")}, generous, r, *d));
    for (std::size_t j = 1; j < d->values.size(); ++j) {
        CHECK(d->values[j] > d->values[j - 1] + growth_at(r, d->values[j - 1]));
        CHECK(d->alphas[j].front() > d->alphas[j - 1].back());
    }

    // rotation by 1/7, generators all multiples of 7: stage 1 would need 7 | n - 1
    System rot = System::rotation(S("1/7"));
    FSGenerators sevens{7, 14, 21, 28, 35, 42};
    CHECK_FALSE(descending_refine(rot, {parse("n")}, {parse_box("0:1/100")}, sevens, {0}, 2));

    // a tampered result fails verification
    Descent bad = *d;
    bad.values[1] = bad.values[0];
    CHECK_FALSE(verify_descent(sk, {parse("n")}, generous, r, bad));
}

TEST_CASE("finite-sum witnesses") {
    std::vector<Integer> evens;
    for (long v = 2; v <= 100; v += 2) evens.push_back(v);
    CHECK(fs_witness_in_set(evens, 3) == FSGenerators{2, 4, 8});

    auto members = window_set({"sqrt(2)*n"}, Rational(1, 10), 200);
    CHECK(fs_witness_in_set(members, 2) == FSGenerators{5, 12});
    auto w3 = fs_witness_in_set(members, 3);
    REQUIRE(w3);
    for (std::uint64_t mask = 1; mask < 8; ++mask) {
        Integer s = 0;
        for (int i = 0; i < 3; ++i)
            if (mask >> i & 1) s += (*w3)[i];
        CHECK(std::find(members.begin(), members.end(), s) != members.end());
    }
    CHECK_FALSE(fs_witness_in_set({1}, 2));
    CHECK_FALSE(fs_witness_in_set(evens, 10, 50));
}
