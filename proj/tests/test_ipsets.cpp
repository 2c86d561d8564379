#include "doctest.h"

#include <algorithm>
#include <random>

#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"
#include "gpolylab/ipsets.hpp"

using namespace gpolylab;

namespace {

FSGenerators gens(std::initializer_list<long> xs) {
    FSGenerators g;
    for (long x : xs) g.emplace_back(x);
    return g;
}

std::vector<long> as_longs(const std::vector<Integer>& v) {
    std::vector<long> out;
    for (const auto& x : v) out.push_back(x.get_si());
    return out;
}

}  // namespace

TEST_CASE("finite sums") {
    CHECK(as_longs(fs_enumerate(gens({1, 2, 4}), 3).values) == std::vector<long>{1, 2, 3, 4, 5, 6, 7});
    FSSet ones = fs_enumerate(gens({1, 1}), 2);
    CHECK(as_longs(ones.values) == std::vector<long>{1, 2});
    CHECK(ones.entries.size() == 3);
    CHECK(std::count_if(ones.entries.begin(), ones.entries.end(), [](const FSEntry& e) { return e.value == 1; }) == 2);
    CHECK(as_longs(fs_enumerate(gens({3, 9}), 2).values) == std::vector<long>{3, 9, 12});
    CHECK_THROWS_AS(fs_enumerate(FSGenerators(30, Integer(1)), 30, 1000), BudgetExceeded);
}

TEST_CASE("n_alpha and exclusion") {
    CHECK(n_alpha(gens({1, 2, 4}), {1, 3}) == 5);
    CHECK(n_alpha(gens({5}), {1}) == 5);
    CHECK(n_alpha(gens({2, -3}), {1, 2}) == -1);
    CHECK(as_longs(sub_ip_excluding(gens({1, 2, 4, 8}), {{2}})) == std::vector<long>{1, 4, 8});
    CHECK(as_longs(sub_ip_excluding(gens({1, 2, 4, 8}), {})) == std::vector<long>{1, 2, 4, 8});
    CHECK(sub_ip_excluding(gens({1, 2, 4}), {{1}, {2}, {3}}).empty());
}

TEST_CASE("additivity over disjoint supports") {
    std::mt19937 rng(3);
    FSGenerators g;
    for (int i = 0; i < 10; ++i) g.emplace_back(static_cast<long>(rng() % 200) - 100 == 0 ? 1 : static_cast<long>(rng() % 200) - 100);
    FSSet s = fs_enumerate(g, 10);
    for (std::uint64_t a = 1; a < 1024; a += 7) {
        for (std::uint64_t b = 1; b < 1024; b += 13) {
            if (a & b) continue;
            CHECK(s.entries[(a | b) - 1].value == s.entries[a - 1].value + s.entries[b - 1].value);
        }
    }
}

TEST_CASE("divisible refinement") {
    auto r = divisible_refine(gens({1, 1, 1, 1, 1, 1}), 3);
    CHECK(as_longs(r.generators) == std::vector<long>{3, 3});
    CHECK(r.supports == std::vector<IndexSet>{{1, 2, 3}, {4, 5, 6}});
    CHECK(as_longs(divisible_refine(gens({2, 4, 6}), 2).generators) == std::vector<long>{2, 4, 6});
    CHECK(as_longs(divisible_refine(gens({1, 2}), 3).generators) == std::vector<long>{3});
    CHECK_THROWS_AS(divisible_refine(gens({1, 1}), 3, 1), DomainError);
    auto z = divisible_refine(gens({2, -2, 3, 1}), 2);
    for (const auto& x : z.generators) CHECK(x != 0);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        FSGenerators g;
        for (int i = 0; i < 12; ++i) g.emplace_back(1 + static_cast<long>(rng() % 50));
        Integer m(2 + static_cast<long>(rng() % 5));
        auto out = divisible_refine(g, m);
        std::vector<Integer> in_values = fs_enumerate(g, 12).values;
        for (std::size_t i = 0; i < out.generators.size(); ++i) {
            CHECK(out.generators[i] % m == 0);
            CHECK(n_alpha(g, out.supports[i]) == out.generators[i]);
        }
        if (out.generators.empty() || out.generators.size() > 12) continue;
        for (const auto& v : fs_enumerate(out.generators, static_cast<unsigned>(out.generators.size())).values)
            CHECK(std::binary_search(in_values.begin(), in_values.end(), v));
    }
}

TEST_CASE("cell refinement") {
    FSGenerators ones(200, Integer(1));
    CellSpec spec;
    spec.alpha = {ExactScalar::sqrt(2)};
    // Frozen from an independent mpmath search in smallest-magnitude order.
    auto r = cell_refine(ones, spec, Rational(1, 10), 2);
    REQUIRE(r);
    CHECK(as_longs(r->chosen.generators) == std::vector<long>{5, 12});
    CHECK(r->m == 6);
    for (const auto& v : fs_enumerate(r->chosen.generators, 2).values) {
        ExactScalar f = frac(ExactScalar::sqrt(2) * ExactScalar(v)).value;
        CHECK(compare(abs(f), Rational(1, 10)) < 0);
    }
    auto first = cell_refine(gens({7, 8, 9}), CellSpec{}, Rational(1, 10), 2);
    REQUIRE(first);
    CHECK(as_longs(first->chosen.generators) == std::vector<long>{7, 8});
    CHECK_THROWS_AS(cell_refine(ones, spec, Rational(3, 5), 2), DomainError);
    CHECK_FALSE(cell_refine(gens({1, 1}), spec, Rational(1, 10), 1));
}

TEST_CASE("cell refinement with all four families re-verified") {
    FSGenerators ones(3000, Integer(1));
    CellSpec spec;
    spec.alpha = {ExactScalar::sqrt(2)};
    spec.b = {ExactScalar(Rational(1, 3))};
    spec.beta = {ExactScalar::sqrt(3)};
    spec.c = {ExactScalar::sqrt(5)};
    Rational eps(1, 4);
    auto r = cell_refine(ones, spec, eps, 3);
    REQUIRE(r);
    std::size_t violations = 0;
    for (const auto& v : fs_enumerate(r->chosen.generators, 3).values) {
        ExactScalar n(v);
        ExactScalar an = ExactScalar::sqrt(2) * n, bn = ExactScalar::sqrt(3) * n;
        for (const auto& x : {an, ExactScalar(Rational(1, 3)) * ExactScalar(nearest_int(an)), bn,
                              ExactScalar::sqrt(5) * ExactScalar(nearest_int(bn))}) {
            if (compare(abs(frac(x).value), eps) >= 0) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("image additivity") {
    GPExpr p = parse("ni(sqrt(2)*n)");
    CHECK(image_additivity_check(p, gens({29, 29}), 2));
    CHECK_FALSE(image_additivity_check(p, gens({1, 1}), 2));
    CHECK(image_additivity_check(parse("n"), gens({3, -8, 11, 5}), 4));

    // When additive, FS of the images equals the image of FS.
    FSGenerators g = gens({29, 29});
    FSGenerators images;
    for (const auto& x : g) images.push_back(eval_int(p, x));
    std::vector<Integer> mapped;
    for (const auto& v : fs_enumerate(g, 2).values) mapped.push_back(eval_int(p, v));
    std::sort(mapped.begin(), mapped.end());
    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
    CHECK(fs_enumerate(images, 2).values == mapped);
}

TEST_CASE("spectra and scaling") {
    CHECK(as_longs(spectra_div(gens({3, 9}), 3)) == std::vector<long>{1, 3});
    CHECK(as_longs(spectra_div(gens({6, 12}), -3)) == std::vector<long>{-2, -4});
    CHECK_THROWS_AS(spectra_div(gens({4}), 3), DomainError);
    FSSet s = fs_enumerate(gens({1, 2}), 2);
    CHECK(as_longs(scale_members(s, 3).values) == std::vector<long>{3, 6, 9});
    FSSet z = scale_members(s, 0);
    CHECK(z.degenerate);
    CHECK(as_longs(z.values) == std::vector<long>{0});
    CHECK(as_longs(scale_members(s, -1).values) == std::vector<long>{-3, -2, -1});

    std::mt19937 rng(5);
    for (int t = 0; t < 20; ++t) {
        FSGenerators g;
        for (int i = 0; i < 6; ++i) g.emplace_back(static_cast<long>(rng() % 40) + 1);
        Integer q(static_cast<long>(rng() % 9) - 4);
        unsigned d = 1 + static_cast<unsigned>(rng() % 6);
        FSGenerators qg;
        for (const auto& x : g) qg.push_back(x * q);
        CHECK(scale_members(fs_enumerate(g, d), q).values == fs_enumerate(qg, d).values);
    }
}
