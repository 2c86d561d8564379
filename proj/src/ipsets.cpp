#include "gpolylab/ipsets.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"

namespace gpolylab {

IndexSet index_set_from_mask(std::uint64_t mask) {
    IndexSet out;
    for (unsigned i = 0; mask != 0; ++i, mask >>= 1)
        if (mask & 1U) out.push_back(i + 1);
    return out;
}

FSSet fs_enumerate(const FSGenerators& g, unsigned depth, std::uint64_t budget) {
    if (depth > g.size()) throw DomainError("depth exceeds the number of generators");
    if (depth >= 63 || (std::uint64_t{1} << depth) - 1 > budget)
        throw BudgetExceeded("2^" + std::to_string(depth) + " - 1 finite sums exceed the budget of " +
                             std::to_string(budget));
    FSSet s;
    const std::uint64_t total = (std::uint64_t{1} << depth) - 1;
    s.entries.reserve(total);
    for (std::uint64_t mask = 1; mask <= total; ++mask) {
        // Reuse the entry without the top bit.
        unsigned top = 63 - static_cast<unsigned>(__builtin_clzll(mask));
        std::uint64_t rest = mask & ~(std::uint64_t{1} << top);
        Integer v = g[top];
        if (rest != 0) v += s.entries[rest - 1].value;
        s.entries.push_back(FSEntry{index_set_from_mask(mask), v});
    }
    std::set<Integer> values;
    for (const auto& e : s.entries) values.insert(e.value);
    s.values.assign(values.begin(), values.end());
    return s;
}

Integer n_alpha(const FSGenerators& g, const IndexSet& alpha) {
    Integer s = 0;
    unsigned prev = 0;
    for (unsigned i : alpha) {
        if (i == 0 || i > g.size()) throw DomainError("index " + std::to_string(i) + " outside the generators");
        if (i <= prev) throw DomainError("index set must be strictly increasing");
        s += g[i - 1];
        prev = i;
    }
    return s;
}

FSGenerators sub_ip_excluding(const FSGenerators& g, const std::vector<IndexSet>& used) {
    std::set<unsigned> drop;
    for (const auto& a : used) drop.insert(a.begin(), a.end());
    FSGenerators out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!drop.count(static_cast<unsigned>(i + 1))) out.push_back(g[i]);
    return out;
}

RefineResult divisible_refine(const FSGenerators& g, const Integer& m, std::optional<std::size_t> count) {
    if (m == 0) throw DomainError("divisor must be nonzero");
    const Integer mod = abs(m);
    RefineResult out;
    std::size_t start = 0;
    while (start < g.size() && (!count || out.generators.size() < *count)) {
        // residue of prefix sum -> prefix length (relative to start)
        std::map<Integer, std::size_t> seen{{Integer(0), 0}};
        Integer prefix = 0;
        bool found = false;
        for (std::size_t i = start; i < g.size(); ++i) {
            prefix += g[i];
            Integer r;
            mpz_fdiv_r(r.get_mpz_t(), prefix.get_mpz_t(), mod.get_mpz_t());
            auto it = seen.find(r);
            if (it == seen.end()) {
                seen.emplace(r, i - start + 1);
                continue;
            }
            IndexSet support;
            Integer block = 0;
            for (std::size_t j = start + it->second; j <= i; ++j) {
                support.push_back(static_cast<unsigned>(j + 1));
                block += g[j];
            }
            if (block == 0) continue;  // generators must stay nonzero
            out.generators.push_back(block);
            out.supports.push_back(std::move(support));
            start = i + 1;
            found = true;
            break;
        }
        if (!found) break;
    }
    if (count && out.generators.size() < *count)
        throw DomainError("insufficient generators: found " + std::to_string(out.generators.size()) +
                          " blocks divisible by " + m.get_str() + ", wanted " + std::to_string(*count));
    return out;
}

unsigned cell_index(const ExactScalar& x, unsigned m) {
    const long two_m = 2L * static_cast<long>(m);
    ExactScalar f = x - ExactScalar(floor_int(x));
    Integer k = -floor_int(-(f * ExactScalar(two_m)));
    if (k <= 1 || k == two_m) return 1;
    return static_cast<unsigned>(k.get_ui());
}

namespace {

class CellSearch {
  public:
    CellSearch(const FSGenerators& g, const CellSpec& spec, unsigned m, unsigned k, std::uint64_t budget)
        : g_(g), spec_(spec), m_(m), k_(k), budget_(budget) {}

    std::optional<CellRefineResult> run() {
        std::vector<bool> used(g_.size(), false);
        std::vector<Integer> sums{Integer(0)};
        if (!dfs(used, sums)) return std::nullopt;
        CellRefineResult r;
        r.chosen = chosen_;
        r.m = m_;
        r.checks = checks_;
        for (const auto& v : chosen_.generators) r.cells.push_back(cells_of(v));
        return r;
    }

    std::uint64_t checks() const { return checks_; }

  private:
    std::vector<ExactScalar> family_values(const Integer& v) const {
        std::vector<ExactScalar> out;
        const ExactScalar n(v);
        for (std::size_t i = 0; i < spec_.alpha.size(); ++i) {
            ExactScalar an = spec_.alpha[i] * n;
            out.push_back(an);
            if (!spec_.b.empty()) out.push_back(spec_.b[i] * ExactScalar(nearest_int(an)));
        }
        for (std::size_t j = 0; j < spec_.beta.size(); ++j) {
            ExactScalar bn = spec_.beta[j] * n;
            out.push_back(bn);
            if (!spec_.c.empty()) out.push_back(spec_.c[j] * ExactScalar(nearest_int(bn)));
        }
        return out;
    }

    std::vector<unsigned> cells_of(const Integer& v) const {
        std::vector<unsigned> out;
        for (const auto& x : family_values(v)) out.push_back(cell_index(x, m_));
        return out;
    }

    bool in_first_cell(const Integer& v) {
        auto it = cache_.find(v);
        if (it != cache_.end()) return it->second;
        auto cells = cells_of(v);
        bool ok = std::all_of(cells.begin(), cells.end(), [](unsigned c) { return c == 1; });
        cache_.emplace(v, ok);
        return ok;
    }

    // Values reachable from unused generators, each with its first-found support.
    std::vector<std::pair<Integer, IndexSet>> candidates(const std::vector<bool>& used) const {
        constexpr std::size_t cap = std::size_t{1} << 16;
        std::map<Integer, IndexSet> reach;
        for (std::size_t i = 0; i < g_.size(); ++i) {
            if (used[i]) continue;
            std::vector<std::pair<Integer, IndexSet>> add;
            if (!reach.count(g_[i])) add.emplace_back(g_[i], IndexSet{static_cast<unsigned>(i + 1)});
            for (const auto& [v, sup] : reach) {
                Integer w = v + g_[i];
                if (reach.count(w)) continue;
                IndexSet s = sup;
                s.push_back(static_cast<unsigned>(i + 1));
                add.emplace_back(w, std::move(s));
            }
            for (auto& [v, s] : add) {
                if (reach.size() >= cap) break;
                reach.emplace(v, std::move(s));
            }
        }
        std::vector<std::pair<Integer, IndexSet>> out;
        for (auto& [v, s] : reach)
            if (v != 0) out.emplace_back(v, s);
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            int c = cmp(abs(a.first), abs(b.first));
            if (c != 0) return c < 0;
            return a.first > b.first;
        });
        return out;
    }

    bool dfs(std::vector<bool>& used, const std::vector<Integer>& sums) {
        if (chosen_.generators.size() == k_) return true;
        for (const auto& [v, support] : candidates(used)) {
            if (++checks_ > budget_) return false;
            bool ok = true;
            for (const auto& s : sums) {
                if (!in_first_cell(s + v)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            std::vector<Integer> next = sums;
            for (const auto& s : sums) next.push_back(s + v);
            for (unsigned i : support) used[i - 1] = true;
            chosen_.generators.push_back(v);
            chosen_.supports.push_back(support);
            if (dfs(used, next)) return true;
            chosen_.generators.pop_back();
            chosen_.supports.pop_back();
            for (unsigned i : support) used[i - 1] = false;
            if (checks_ > budget_) return false;
        }
        return false;
    }

    const FSGenerators& g_;
    const CellSpec& spec_;
    unsigned m_;
    unsigned k_;
    std::uint64_t budget_;
    std::uint64_t checks_ = 0;
    std::map<Integer, bool> cache_;
    RefineResult chosen_;
};

}  // namespace

std::optional<CellRefineResult> cell_refine(const FSGenerators& g, const CellSpec& spec, const Rational& eps,
                                            unsigned k, std::uint64_t budget) {
    if (eps <= 0 || eps >= Rational(1, 2)) throw DomainError("eps must lie in (0, 1/2)");
    if (k == 0) throw DomainError("k must be at least 1");
    if (!spec.b.empty() && spec.b.size() != spec.alpha.size())
        throw DomainError("b coefficients must match alpha in number");
    if (!spec.c.empty() && spec.c.size() != spec.beta.size())
        throw DomainError("c coefficients must match beta in number");
    for (const auto& x : g)
        if (x == 0) throw DomainError("generators must be nonzero");
    unsigned m = 3;
    while (Rational(1, 2 * m) >= eps) ++m;
    if (spec.empty()) {
        if (g.size() < k) return std::nullopt;
        CellRefineResult r;
        r.m = m;
        for (unsigned i = 0; i < k; ++i) {
            r.chosen.generators.push_back(g[i]);
            r.chosen.supports.push_back(IndexSet{i + 1});
            r.cells.emplace_back();
        }
        return r;
    }
    return CellSearch(g, spec, m, k, budget).run();
}

bool image_additivity_check(const GPExpr& p, const FSGenerators& g, unsigned depth) {
    FSSet s = fs_enumerate(g, depth);
    std::vector<Integer> images;
    for (unsigned i = 0; i < depth; ++i) images.push_back(eval_int(p, g[i]));
    for (const auto& e : s.entries) {
        Integer total = 0;
        for (unsigned i : e.alpha) total += images[i - 1];
        if (eval_int(p, e.value) != total) return false;
    }
    return true;
}

FSGenerators spectra_div(const FSGenerators& g, const Integer& q) {
    if (q == 0) throw DomainError("divisor must be nonzero");
    FSGenerators out;
    for (const auto& x : g) {
        if (!mpz_divisible_p(x.get_mpz_t(), q.get_mpz_t()))
            throw DomainError("generator " + x.get_str() + " is not divisible by " + q.get_str() +
                              " (refine with divisible_refine first)");
        out.push_back(x / q);
    }
    return out;
}

FSSet scale_members(const FSSet& s, const Integer& q) {
    FSSet out = s;
    for (auto& e : out.entries) e.value *= q;
    std::set<Integer> values;
    for (const auto& e : out.entries) values.insert(e.value);
    out.values.assign(values.begin(), values.end());
    out.degenerate = s.degenerate || q == 0;
    return out;
}

}  // namespace gpolylab
