#pragma once

// Torus systems with exact orbits, and the recurrence searches run on them.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpolylab/gpexpr.hpp"
#include "gpolylab/ipsets.hpp"

namespace gpolylab {

enum class SystemKind {
    rotation,  // x -> x + a
    skew2,     // (x, y) -> (x + a, y + 2x + a), so T^n(0,0) = (n a, n^2 a)
    skew       // (x1, .., xd) -> (x1 + a, x2 + x1, .., xd + x(d-1))
};

struct System {
    SystemKind kind = SystemKind::rotation;
    unsigned dim = 1;
    ExactScalar alpha;

    static System rotation(ExactScalar a);
    static System skew2(ExactScalar a);
    static System skew(unsigned d, ExactScalar a);
    std::string to_string() const;
};

/// "rotation:sqrt(2)", "skew2:sqrt(2)", "skew3:pi" (generic skew of dimension 3).
System parse_system(std::string_view text);

/// Coordinates in [0, 1).
using Point = std::vector<ExactScalar>;

Point reduce(Point x);
Point step(const System& s, const Point& x);
/// T^n x by closed form; n may be negative.
Point orbit_point(const System& s, const Point& x, const Integer& n);

/// Max over coordinates of the circle distance.
ExactScalar torus_distance(const Point& a, const Point& b);

struct Arc {
    Rational center;
    Rational radius;  // >= 1/2 means the whole circle
};

/// Product of open arcs.
struct BoxRegion {
    std::vector<Arc> arcs;

    static BoxRegion full(unsigned dim);
    bool contains(const Point& x) const;
    std::string to_string() const;
};

/// "0:0.1,1/2:1/4"
BoxRegion parse_box(std::string_view text);

/// B is inside A (closure of B inside the open A, per coordinate).
bool box_within(const BoxRegion& b, const BoxRegion& a);
/// T^k B inside V, certified through the linear part of T^k.
bool box_maps_into(const System& s, const BoxRegion& b, const Integer& k, const BoxRegion& v);

/// grid points per coordinate, strictly inside; the center comes first.
std::vector<Point> grid_points(const BoxRegion& b, unsigned grid);

/// 1 <= n <= N with distance(T^n x, x) < eps.
std::vector<Integer> return_set(const System& s, const Point& x, const Rational& eps, const Integer& N);

/// n <= N for which some grid point x of U has T^{p_t(n)} x in V_t for every t.
std::vector<Integer> hitting_set(const System& s, const BoxRegion& u, const std::vector<BoxRegion>& targets,
                                 const std::vector<GPExpr>& polys, const Integer& N, unsigned grid);

struct VdwHit {
    Point x;
    Integer n;
};

/// First n in [1, N] (then first grid point) with distance(T^{p_t(n)} x, x) < eps for every t.
std::optional<VdwHit> vdw_search(const System& s, const std::vector<GPExpr>& polys, const Rational& eps,
                                 const Integer& N, unsigned grid);

struct Descent {
    std::vector<std::vector<BoxRegion>> boxes;  // boxes[n][i] = V_i^(n)
    std::vector<IndexSet> alphas;
    std::vector<Integer> values;
    std::uint64_t checked = 0;
};

/// r(x) = r[min(x, size-1)]; empty means 0.
Integer growth_at(const std::vector<Integer>& r, const Integer& x);

/// Stages 0..depth of the descending construction; nullopt when the candidate
/// budget runs out.
std::optional<Descent> descending_refine(const System& s, const std::vector<GPExpr>& polys,
                                         const std::vector<BoxRegion>& targets, const FSGenerators& g,
                                         const std::vector<Integer>& r, unsigned depth,
                                         std::uint64_t budget = 100000, unsigned grid = 8);

/// Nesting, growth and T^{p_i(n_j) - j} V_i^(n) inside V_i for all j <= n.
bool verify_descent(const System& s, const std::vector<GPExpr>& polys, const std::vector<BoxRegion>& targets,
                    const std::vector<Integer>& r, const Descent& d);

/// k strictly increasing members whose 2^k - 1 finite sums are distinct members.
std::optional<FSGenerators> fs_witness_in_set(const std::vector<Integer>& members, unsigned k,
                                              std::uint64_t budget = 1000000);

}  // namespace gpolylab
