#include "gpolylab/dynsim.hpp"

#include <algorithm>
#include <set>

#include "gpolylab/constraints.hpp"
#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"

namespace gpolylab {

namespace {

const Rational kHalf(1, 2);

bool is_full(const Arc& a) { return a.radius >= kHalf; }

ExactScalar frac_part(const ExactScalar& x) { return x - ExactScalar(floor_int(x)); }

ExactScalar circle_distance(const ExactScalar& a, const ExactScalar& b) { return abs(frac(a - b).value); }

// binomial(n, k) for any integer n
Integer gbinom(const Integer& n, unsigned k) {
    if (n >= 0) {
        Integer r;
        mpz_bin_ui(r.get_mpz_t(), n.get_mpz_t(), k);
        return r;
    }
    Integer num = 1, den = 1;
    for (unsigned i = 0; i < k; ++i) {
        num *= n - i;
        den *= i + 1;
    }
    return num / den;
}

// Linear part of T^k: row i gives the coefficients on x_j.
std::vector<std::vector<Integer>> linear_part(const System& s, const Integer& k) {
    std::vector<std::vector<Integer>> m(s.dim, std::vector<Integer>(s.dim, 0));
    for (unsigned i = 0; i < s.dim; ++i) m[i][i] = 1;
    if (s.kind == SystemKind::skew2) m[1][0] = 2 * k;
    if (s.kind == SystemKind::skew)
        for (unsigned i = 0; i < s.dim; ++i)
            for (unsigned j = 0; j < i; ++j) m[i][j] = gbinom(k, i - j);
    return m;
}

Point centers(const BoxRegion& b) {
    Point p;
    for (const auto& a : b.arcs) p.push_back(ExactScalar(a.center));
    return p;
}

void check_dim(const System& s, std::size_t d, const char* what) {
    if (d != s.dim) throw DomainError(std::string(what) + " has dimension " + std::to_string(d) + ", system has " +
                                      std::to_string(s.dim));
}

}  // namespace

System System::rotation(ExactScalar a) { return {SystemKind::rotation, 1, std::move(a)}; }
System System::skew2(ExactScalar a) { return {SystemKind::skew2, 2, std::move(a)}; }
System System::skew(unsigned d, ExactScalar a) {
    if (d == 0) throw DomainError("skew dimension must be positive");
    return {SystemKind::skew, d, std::move(a)};
}

std::string System::to_string() const {
    switch (kind) {
        case SystemKind::rotation: return "rotation:" + alpha.to_string();
        case SystemKind::skew2: return "skew2:" + alpha.to_string();
        default: return "skew" + std::to_string(dim) + "d:" + alpha.to_string();
    }
}

System parse_system(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw DomainError("system must look like kind:alpha");
    std::string_view kind = text.substr(0, colon);
    ExactScalar a = parse_scalar(text.substr(colon + 1));
    if (kind == "rotation") return System::rotation(a);
    if (kind == "skew2") return System::skew2(a);
    // skew<d>d, e.g. skew3d
    if (kind.size() > 5 && kind.substr(0, 4) == "skew" && kind.back() == 'd') {
        std::string digits(kind.substr(4, kind.size() - 5));
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit))
            return System::skew(static_cast<unsigned>(std::stoul(digits)), a);
    }
    throw DomainError("unknown system kind '" + std::string(kind) + "'");
}

Point reduce(Point x) {
    for (auto& c : x) c = frac_part(c);
    return x;
}

Point step(const System& s, const Point& x) {
    check_dim(s, x.size(), "point");
    Point y = x;
    y[0] = x[0] + s.alpha;
    if (s.kind == SystemKind::skew2) y[1] = x[1] + ExactScalar(2) * x[0] + s.alpha;
    if (s.kind == SystemKind::skew)
        for (unsigned i = 1; i < s.dim; ++i) y[i] = x[i] + x[i - 1];
    return reduce(std::move(y));
}

Point orbit_point(const System& s, const Point& x, const Integer& n) {
    check_dim(s, x.size(), "point");
    Point y(s.dim);
    switch (s.kind) {
        case SystemKind::rotation:
            y[0] = x[0] + ExactScalar(n) * s.alpha;
            break;
        case SystemKind::skew2:
            y[0] = x[0] + ExactScalar(n) * s.alpha;
            y[1] = x[1] + ExactScalar(Integer(2 * n)) * x[0] + ExactScalar(Integer(n * n)) * s.alpha;
            break;
        case SystemKind::skew:
            for (unsigned i = 0; i < s.dim; ++i) {
                ExactScalar v = ExactScalar(gbinom(n, i + 1)) * s.alpha;
                for (unsigned k = 0; k <= i; ++k) v += ExactScalar(gbinom(n, k)) * x[i - k];
                y[i] = v;
            }
            break;
    }
    return reduce(std::move(y));
}

ExactScalar torus_distance(const Point& a, const Point& b) {
    if (a.size() != b.size()) throw DomainError("points of different dimension");
    ExactScalar d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ExactScalar c = circle_distance(a[i], b[i]);
        if (i == 0 || compare(c, d) > 0) d = c;
    }
    return d;
}

BoxRegion BoxRegion::full(unsigned dim) { return {std::vector<Arc>(dim, Arc{0, kHalf})}; }

bool BoxRegion::contains(const Point& x) const {
    if (x.size() != arcs.size()) throw DomainError("point and box of different dimension");
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        if (is_full(arcs[i])) continue;
        if (!frac_within(x[i] - ExactScalar(arcs[i].center), arcs[i].radius)) return false;
    }
    return true;
}

std::string BoxRegion::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < arcs.size(); ++i)
        s += (i ? "," : "") + rational_to_string(arcs[i].center) + ":" + rational_to_string(arcs[i].radius);
    return s;
}

BoxRegion parse_box(std::string_view text) {
    BoxRegion b;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string_view part = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        auto colon = part.find(':');
        if (colon == std::string_view::npos) throw DomainError("box arc must look like center:radius");
        Arc a{parse_rational(part.substr(0, colon)), parse_rational(part.substr(colon + 1))};
        if (a.radius <= 0 || a.radius > kHalf) throw DomainError("arc radius must lie in (0, 1/2]");
        b.arcs.push_back(a);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return b;
}

bool box_within(const BoxRegion& b, const BoxRegion& a) {
    if (a.arcs.size() != b.arcs.size()) return false;
    for (std::size_t i = 0; i < a.arcs.size(); ++i) {
        if (is_full(a.arcs[i])) continue;
        if (is_full(b.arcs[i])) return false;
        Rational c = b.arcs[i].center - a.arcs[i].center;
        ExactScalar gap = circle_distance(ExactScalar(c), ExactScalar(0));
        if (compare(gap + ExactScalar(b.arcs[i].radius), ExactScalar(a.arcs[i].radius)) > 0) return false;
    }
    return true;
}

bool box_maps_into(const System& s, const BoxRegion& b, const Integer& k, const BoxRegion& v) {
    check_dim(s, b.arcs.size(), "box");
    check_dim(s, v.arcs.size(), "box");
    auto m = linear_part(s, k);
    Point image = orbit_point(s, centers(b), k);
    for (unsigned i = 0; i < s.dim; ++i) {
        if (is_full(v.arcs[i])) continue;
        Rational spread = 0;
        for (unsigned j = 0; j < s.dim; ++j) {
            if (m[i][j] == 0) continue;
            if (is_full(b.arcs[j])) return false;
            spread += Rational(abs(m[i][j])) * b.arcs[j].radius;
        }
        ExactScalar reach = circle_distance(image[i], ExactScalar(v.arcs[i].center)) + ExactScalar(spread);
        if (compare(reach, ExactScalar(v.arcs[i].radius)) >= 0) return false;
    }
    return true;
}

std::vector<Point> grid_points(const BoxRegion& b, unsigned grid) {
    if (grid == 0) throw DomainError("grid must be positive");
    // per-coordinate offsets in units of radius/grid, nearest the center first
    std::vector<std::vector<Rational>> axis;
    for (const auto& a : b.arcs) {
        Rational r = is_full(a) ? kHalf : a.radius;
        std::vector<Rational> vals{a.center};
        std::vector<Rational> offs;
        for (unsigned i = 0; i < grid; ++i) {
            Rational o = r * Rational(2 * static_cast<long>(i) + 1 - static_cast<long>(grid), grid);
            o.canonicalize();
            if (o != 0) offs.push_back(o);
        }
        std::stable_sort(offs.begin(), offs.end(), [](const Rational& x, const Rational& y) { return abs(x) < abs(y); });
        for (const auto& o : offs) vals.push_back(a.center + o);
        axis.push_back(std::move(vals));
    }
    std::vector<Point> pts{Point{}};
    for (const auto& vals : axis) {
        std::vector<Point> next;
        for (const auto& p : pts)
            for (const auto& v : vals) {
                Point q = p;
                q.push_back(ExactScalar(v));
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    for (auto& p : pts) p = reduce(std::move(p));
    return pts;
}

std::vector<Integer> return_set(const System& s, const Point& x, const Rational& eps, const Integer& N) {
    if (eps <= 0 || eps >= kHalf) throw DomainError("eps must lie in (0, 1/2)");
    check_dim(s, x.size(), "point");
    Point x0 = reduce(x);
    std::vector<Integer> out;
    for (Integer n = 1; n <= N; ++n) {
        Point y = orbit_point(s, x0, n);
        bool in = true;
        for (unsigned i = 0; i < s.dim && in; ++i) in = frac_within(y[i] - x0[i], eps);
        if (in) out.push_back(n);
    }
    return out;
}

std::vector<Integer> hitting_set(const System& s, const BoxRegion& u, const std::vector<BoxRegion>& targets,
                                 const std::vector<GPExpr>& polys, const Integer& N, unsigned grid) {
    if (targets.size() != polys.size()) throw DomainError("need one target per polynomial");
    check_dim(s, u.arcs.size(), "box");
    for (const auto& v : targets) check_dim(s, v.arcs.size(), "box");
    std::vector<Point> pts = grid_points(u, grid);
    std::vector<Integer> out;
    for (Integer n = 1; n <= N; ++n) {
        std::vector<Integer> k;
        for (const auto& p : polys) k.push_back(eval_int(p, n));
        for (const auto& x : pts) {
            bool ok = true;
            for (std::size_t t = 0; t < polys.size() && ok; ++t) ok = targets[t].contains(orbit_point(s, x, k[t]));
            if (ok) {
                out.push_back(n);
                break;
            }
        }
    }
    return out;
}

std::optional<VdwHit> vdw_search(const System& s, const std::vector<GPExpr>& polys, const Rational& eps,
                                 const Integer& N, unsigned grid) {
    if (eps <= 0 || eps >= kHalf) throw DomainError("eps must lie in (0, 1/2)");
    if (polys.empty()) throw DomainError("no polynomials");
    std::vector<Point> pts = grid_points(BoxRegion::full(s.dim), grid);
    for (Integer n = 1; n <= N; ++n) {
        std::vector<Integer> k;
        for (const auto& p : polys) k.push_back(eval_int(p, n));
        for (const auto& x : pts) {
            bool ok = true;
            for (std::size_t t = 0; t < k.size() && ok; ++t) {
                Point y = orbit_point(s, x, k[t]);
                for (unsigned i = 0; i < s.dim && ok; ++i) ok = frac_within(y[i] - x[i], eps);
            }
            if (ok) return VdwHit{x, n};
        }
    }
    return std::nullopt;
}

Integer growth_at(const std::vector<Integer>& r, const Integer& x) {
    if (r.empty()) return 0;
    if (x >= Integer(static_cast<unsigned long>(r.size() - 1))) return r.back();
    return r[x.get_ui()];
}

namespace {

// A box inside prev around some grid point whose T^k image lies in target.
std::optional<BoxRegion> find_subbox(const System& s, const BoxRegion& prev, const Integer& k,
                                     const BoxRegion& target, unsigned grid) {
    for (const auto& x : grid_points(prev, grid)) {
        if (!target.contains(orbit_point(s, x, k))) continue;
        BoxRegion room;
        for (unsigned j = 0; j < s.dim; ++j) {
            const Arc& a = prev.arcs[j];
            Rational c = x[j].as_rational().value();
            Rational slack = kHalf;
            if (!is_full(a)) {
                ExactScalar gap = circle_distance(ExactScalar(c), ExactScalar(a.center));
                slack = a.radius - gap.as_rational().value();
            }
            room.arcs.push_back({c, slack});
        }
        for (int halvings = 0; halvings < 48; ++halvings) {
            if (box_maps_into(s, room, k, target)) return room;
            for (auto& a : room.arcs) a.radius /= 2;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<Descent> descending_refine(const System& s, const std::vector<GPExpr>& polys,
                                         const std::vector<BoxRegion>& targets, const FSGenerators& g,
                                         const std::vector<Integer>& r, unsigned depth, std::uint64_t budget,
                                         unsigned grid) {
    if (targets.empty() || targets.size() != polys.size()) throw DomainError("need one target per polynomial");
    for (const auto& v : targets) check_dim(s, v.arcs.size(), "box");
    if (g.size() > 62) throw DomainError("at most 62 generators");
    Descent d;
    unsigned start = 0;  // generators used so far
    Integer last = 0;
    std::vector<BoxRegion> prev = targets;
    for (unsigned n = 0; n <= depth; ++n) {
        Integer floor_value = n == 0 ? growth_at(r, 0) : last + growth_at(r, last);
        bool found = false;
        unsigned left = static_cast<unsigned>(g.size()) - start;
        for (std::uint64_t mask = 1; left > 0 && mask < (std::uint64_t{1} << left) && !found; ++mask) {
            if (++d.checked > budget) return std::nullopt;
            IndexSet alpha = index_set_from_mask(mask << start);
            Integer v = n_alpha(g, alpha);
            if (abs(v) <= floor_value) continue;
            std::vector<BoxRegion> next;
            for (std::size_t i = 0; i < polys.size(); ++i) {
                auto b = find_subbox(s, prev[i], Integer(eval_int(polys[i], v) - n), targets[i], grid);
                if (!b) break;
                next.push_back(std::move(*b));
            }
            if (next.size() != polys.size()) continue;
            d.boxes.push_back(next);
            d.alphas.push_back(alpha);
            d.values.push_back(v);
            prev = std::move(next);
            last = abs(v);
            start = alpha.back();
            found = true;
        }
        if (!found) return std::nullopt;
    }
    return d;
}

bool verify_descent(const System& s, const std::vector<GPExpr>& polys, const std::vector<BoxRegion>& targets,
                    const std::vector<Integer>& r, const Descent& d) {
    if (d.boxes.size() != d.values.size() || d.alphas.size() != d.values.size()) return false;
    for (std::size_t n = 0; n < d.values.size(); ++n) {
        Integer need = n == 0 ? growth_at(r, 0) : Integer(abs(d.values[n - 1])) + growth_at(r, abs(d.values[n - 1]));
        if (abs(d.values[n]) <= need) return false;
        if (n > 0 && d.alphas[n].front() <= d.alphas[n - 1].back()) return false;
        for (std::size_t i = 0; i < polys.size(); ++i) {
            const BoxRegion& outer = n == 0 ? targets[i] : d.boxes[n - 1][i];
            if (!box_within(d.boxes[n][i], outer)) return false;
            for (std::size_t j = 0; j <= n; ++j) {
                Integer k = eval_int(polys[i], d.values[j]) - Integer(static_cast<unsigned long>(j));
                if (!box_maps_into(s, d.boxes[n][i], k, targets[i])) return false;
            }
        }
    }
    return true;
}

std::optional<FSGenerators> fs_witness_in_set(const std::vector<Integer>& members, unsigned k, std::uint64_t budget) {
    if (k == 0) throw DomainError("k must be positive");
    std::set<Integer> in(members.begin(), members.end());
    std::vector<Integer> vals(in.begin(), in.end());
    std::uint64_t nodes = 0;
    FSGenerators chosen;
    std::set<Integer> sums;

    // depth-first over increasing generators, smallest first
    auto dfs = [&](auto&& self, std::size_t from) -> bool {
        if (chosen.size() == k) return true;
        for (std::size_t i = from; i < vals.size(); ++i) {
            if (++nodes > budget) return false;
            const Integer& x = vals[i];
            std::vector<Integer> added{x};
            for (const auto& s : sums) added.push_back(s + x);
            bool ok = true;
            std::set<Integer> fresh;
            for (const auto& a : added)
                if (!in.count(a) || sums.count(a) || !fresh.insert(a).second) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            chosen.push_back(x);
            sums.insert(fresh.begin(), fresh.end());
            if (self(self, i + 1)) return true;
            for (const auto& a : fresh) sums.erase(a);
            chosen.pop_back();
            if (nodes > budget) return false;
        }
        return false;
    };
    if (dfs(dfs, 0)) return chosen;
    return std::nullopt;
}

}  // namespace gpolylab
