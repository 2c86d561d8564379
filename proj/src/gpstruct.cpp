#include "gpolylab/gpstruct.hpp"

#include <algorithm>
#include <set>

#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"

namespace gpolylab {

namespace {

unsigned term_degree(const CanonTerm& t) {
    unsigned d = t.power;
    for (const auto& b : t.brackets) d += degree(b.inner());
    return d;
}

Integer ipow(const Integer& b, unsigned k) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), k);
    return r;
}

Integer binom(unsigned n, unsigned k) {
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

// a (n + m)^j
GPExpr shifted_power(const ExactScalar& a, unsigned j, const Integer& m) {
    std::vector<GPExpr> parts{GPExpr()};
    for (unsigned i = 0; i <= j; ++i)
        parts.push_back(GPExpr::monomial(a * ExactScalar(Integer(binom(j, i) * ipow(m, j - i))), i));
    return canonical(GPExpr::sum(std::move(parts)));
}

void add_unique(ConstraintSet& c, const Condition& cond) {
    std::string key = print(cond.expr);
    for (const auto& x : c.conditions())
        if (x.delta == cond.delta && x.shift == cond.shift && print(x.expr) == key) return;
    c.add(cond);
}

void merge_into(ConstraintSet& dst, const ConstraintSet& src) {
    for (const auto& c : src.conditions()) add_unique(dst, c);
}

ExactScalar product_leading(const ChainProduct& q) {
    ExactScalar a(1);
    for (const auto& c : q.chains)
        for (const auto& l : c.links) a *= l.coeff;
    return a;
}

// Bracket of one chain at n + m, split into the part at n, the part at m and
// the leftover bracketed pieces.
struct Split {
    Integer at_m;
    std::vector<GPExpr> pieces;
};

class Deriver {
  public:
    Deriver(Integer m, Rational delta, ConstraintSet& c1) : m_(std::move(m)), delta_(std::move(delta)), c1_(c1) {}

    Split split(const Chain& x) {
        const Link& head = x.links.front();
        GPExpr factor = GPExpr::monomial(1, 0);
        Integer rest_m = 1;
        if (x.links.size() > 1) {
            Chain rest{{x.links.begin() + 1, x.links.end()}};
            Split r = split(rest);
            std::vector<GPExpr> f{canonical(GPExpr::nearest_int(chain_value(rest))),
                                  GPExpr::monomial(ExactScalar(r.at_m), 0)};
            f.insert(f.end(), r.pieces.begin(), r.pieces.end());
            factor = canonical(GPExpr::sum(std::move(f)));
            rest_m = r.at_m;
        }
        ExactScalar xm = head.coeff * ExactScalar(Integer(ipow(m_, head.power) * rest_m));
        GPExpr e = mul(shifted_power(head.coeff, head.power, m_), factor);
        GPExpr r = sub(sub(e, chain_value(x)), GPExpr::monomial(xm, 0));

        Split out;
        out.at_m = nearest_int(xm);
        std::vector<GPExpr> nonint;
        for (const auto& t : canonical_terms(r)) {
            GPExpr piece = from_terms({t});
            if (t.coeff.is_integer()) {
                out.pieces.push_back(piece);
            } else {
                nonint.push_back(piece);
                out.pieces.push_back(canonical(GPExpr::nearest_int(piece)));
            }
        }
        if (!chain_integer_valued(x)) nonint.insert(nonint.begin(), chain_value(x));

        ExactScalar fm = frac(xm).value;
        std::size_t parts = nonint.size() + (fm.is_zero() ? 0 : 1);
        if (parts >= 2) {
            Rational slack = Rational(1, 2) - abs_upper_bound(fm);
            if (slack <= 0) throw NotGood("fractional part at m too close to 1/2: " + chain_text(x));
            Rational w = slack / Rational(static_cast<unsigned long>(nonint.size()));
            w.canonicalize();
            Rational d = window_round_down(std::min(delta_, w));
            for (const auto& q : nonint) add_unique(c1_, Condition{q, d, 0});
        }
        return out;
    }

  private:
    Integer m_;
    Rational delta_;
    ConstraintSet& c1_;
};

}  // namespace

std::string ScalarRatio::to_string() const {
    if (!den.terms().empty()) {
        Rational r = num.terms().empty() ? Rational(0) : Rational(num.terms().front().second / den.terms().front().second);
        if (ExactScalar(r) * den == num) return ExactScalar(r).to_string();
    }
    return "(" + num.to_string() + ")/(" + den.to_string() + ")";
}

bool ScalarRatio::exceeded_by(const Integer& m) const {
    return compare(ExactScalar(Integer(abs(m))) * abs(den), abs(num)) > 0;
}

ExactScalar leading_sum(const GPExpr& p) {
    auto terms = canonical_terms(p);
    unsigned d = 0;
    for (const auto& t : terms) d = std::max(d, term_degree(t));
    ExactScalar a;
    for (const auto& t : terms) {
        if (term_degree(t) != d) continue;
        ExactScalar x = t.coeff;
        for (const auto& b : t.brackets) x *= leading_sum(b.inner());
        a += x;
    }
    return a;
}

bool nondegenerate(const std::vector<GPExpr>& P) {
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (sign(leading_sum(P[i])) == Sign::zero) return false;
        for (std::size_t j = i + 1; j < P.size(); ++j)
            if (sign(leading_sum(sub(P[i], P[j]))) == Sign::zero) return false;
    }
    return true;
}

bool equivalent(const GPExpr& p, const GPExpr& q) {
    unsigned d = degree(p);
    if (degree(q) != d) return false;
    GPExpr r = sub(p, q);
    return is_zero(r) || degree(r) < d;
}

WeightVector weight_vector(const std::vector<GPExpr>& P) {
    std::vector<GPExpr> reps;
    WeightVector w;
    for (const auto& p : P) {
        if (is_zero(p)) continue;
        unsigned d = degree(p);
        if (d == 0) continue;
        bool found = false;
        for (const auto& r : reps)
            if (equivalent(p, r)) {
                found = true;
                break;
            }
        if (found) continue;
        reps.push_back(p);
        if (w.size() < d) w.resize(d, 0);
        ++w[d - 1];
    }
    return w;
}

std::strong_ordering pet_compare(const WeightVector& a, const WeightVector& b) {
    for (std::size_t i = std::max(a.size(), b.size()); i-- > 0;) {
        unsigned x = i < a.size() ? a[i] : 0;
        unsigned y = i < b.size() ? b[i] : 0;
        if (x != y) return x <=> y;
    }
    return std::strong_ordering::equal;
}

std::string weight_text(const WeightVector& w) {
    std::string s = "[";
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
    return s + "]";
}

ScalarRatio m_threshold(const GPExpr& h) {
    SGPForm f = to_sgp_normal(h).form;
    unsigned d = sgp_degree(f);
    ExactScalar num, den;
    ExactScalar dd(static_cast<long>(d));
    for (const auto& t : f.terms) {
        if (product_degree(t.product) != d) continue;
        ExactScalar x = ExactScalar(t.c) * dd * product_leading(t.product);
        num += abs(x);
        den += x;
    }
    auto it = f.polynomial.find(d);
    if (it != f.polynomial.end() && it->second != 0) {
        ExactScalar x = ExactScalar(it->second) * dd;
        num += abs(x);
        den += x;
    }
    if (sign(den) == Sign::zero) throw DomainError("m(h) undefined: top-degree sum vanishes");
    return {ExactScalar(2) * num, abs(den)};
}

bool good(const Integer& m, const GPExpr& p) {
    SGPForm f = to_sgp_normal(p).form;
    for (const auto& t : f.terms)
        for (const auto& c : t.product.chains)
            for (const auto& s : chain_suffixes(c)) {
                if (chain_integer_valued(s)) continue;
                ExactScalar fr = frac(eval_real(chain_value(s), m)).value;
                if (fr == ExactScalar(Rational(1, 2))) return false;
            }
    return true;
}

ConstraintSet good_set(const GPExpr& p, const Rational& delta) {
    if (delta <= 0 || delta > Rational(1, 4)) throw DomainError("delta must lie in (0, 1/4]");
    SgpResult r = to_sgp_normal(p);
    ConstraintSet c;
    merge_into(c, r.conditions);
    for (const auto& t : r.form.terms)
        for (const auto& ch : t.product.chains)
            for (const auto& s : chain_suffixes(ch))
                if (!chain_integer_valued(s)) add_unique(c, Condition{chain_value(s), delta, 0});
    return c;
}

DerivativeResult derivative(const GPExpr& p, const Integer& m, const ApproxParams& params, const Rational& delta) {
    if (delta <= 0 || delta >= Rational(1, 2)) throw DomainError("delta must lie in (0, 1/2)");
    SgpResult nf = to_sgp_normal(p);
    const SGPForm& h = nf.form;
    if (!nf.conditions.empty() && !c_membership(m, nf.conditions))
        throw NotGood("m = " + m.get_str() + " is outside the normal-form constraint set");
    if (!good(m, p)) throw NotGood("m = " + m.get_str() + " is not good");
    unsigned d = sgp_degree(h);
    if (d >= 2 && !m_threshold(p).exceeded_by(m))
        throw ShiftTooSmall("|m| = " + Integer(abs(m)).get_str() + " does not exceed m(h) = " + m_threshold(p).to_string());

    DerivativeResult out;
    out.m = m;
    for (const auto& c : nf.conditions.conditions()) add_unique(out.C1, c);
    for (const auto& c : nf.conditions.conditions()) add_unique(out.C1, Condition{c.expr, c.delta, c.shift + m});

    std::vector<GPExpr> parts{GPExpr()};
    for (const auto& [k, c] : h.polynomial)
        for (unsigned i = 1; i < k; ++i)
            parts.push_back(GPExpr::monomial(ExactScalar(Integer(c * binom(k, i) * ipow(m, k - i))), i));

    Deriver dv(m, delta, out.C1);
    for (const auto& t : h.terms) {
        const auto& chains = t.product.chains;
        std::vector<std::vector<GPExpr>> options;
        for (const auto& c : chains) {
            Split s = dv.split(c);
            std::vector<GPExpr> o{chain_bracket(c), GPExpr::monomial(ExactScalar(s.at_m), 0)};
            o.insert(o.end(), s.pieces.begin(), s.pieces.end());
            options.push_back(std::move(o));
        }
        std::vector<std::size_t> idx(chains.size(), 0);
        while (true) {
            bool all_n = std::all_of(idx.begin(), idx.end(), [](std::size_t i) { return i == 0; });
            bool all_m = std::all_of(idx.begin(), idx.end(), [](std::size_t i) { return i == 1; });
            if (!all_n && !all_m) {
                std::vector<GPExpr> f{GPExpr::monomial(ExactScalar(t.c), 0)};
                for (std::size_t i = 0; i < idx.size(); ++i) f.push_back(options[i][idx[i]]);
                parts.push_back(GPExpr::product(std::move(f)));
            }
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
            if (k == idx.size()) break;
        }
    }
    out.D = canonical(GPExpr::sum(std::move(parts)));

    if (d == 1 && !is_zero(out.D)) throw DomainError("degree-1 derivative did not vanish");
    if (d >= 2) {
        if (degree(out.D) >= d) throw DomainError("derivative did not lower the degree");
        ExactScalar target = ExactScalar(Integer(m * d)) * leading_sum(p);
        ExactScalar err = abs(leading_sum(out.D) - target);
        if (compare(err * ExactScalar(Integer(2 * params.N)), abs(target)) >= 0)
            throw ShiftTooSmall("A(D) is not within 1/(2N) of deg*m*A(p) at m = " + m.get_str());
    }
    return out;
}

ConstraintSet proper_set(const std::vector<GPExpr>& P, const std::vector<Integer>& M, const Rational& delta) {
    ConstraintSet c;
    for (const auto& p : P)
        for (const auto& m : M) merge_into(c, derivative(p, m, {}, delta).C1);
    return c;
}

ShiftedSystem shifted_system(const std::vector<GPExpr>& P, const std::vector<Integer>& shifts,
                             const ApproxParams& params) {
    if (P.empty() || shifts.empty()) throw DomainError("empty system or shift list");
    ShiftedSystem out;
    std::vector<std::pair<std::string, GPExpr>> flat;
    for (std::size_t i = 0; i < P.size(); ++i) {
        out.q.emplace_back();
        for (std::size_t j = 0; j < shifts.size(); ++j) {
            DerivativeResult dr = derivative(P[i], shifts[j], params);
            merge_into(out.C1, dr.C1);
            GPExpr q = canonical(sub(add(dr.D, P[i]), P[0]));
            out.q.back().push_back(q);
            flat.emplace_back("q_{" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "}", q);
        }
    }
    ExactScalar N(params.N);
    for (const auto& [name, q] : flat) {
        ExactScalar a = leading_sum(q);
        if (compare(abs(a), N) <= 0)
            throw ShiftTooSmall("|A(" + name + ")| = " + abs(a).to_string() + " is not >> 1");
    }
    for (std::size_t x = 0; x < flat.size(); ++x)
        for (std::size_t y = x + 1; y < flat.size(); ++y) {
            ExactScalar a = leading_sum(sub(flat[x].second, flat[y].second));
            if (compare(abs(a), N) <= 0)
                throw ShiftTooSmall("|A(" + flat[x].first + " - " + flat[y].first + ")| = " + abs(a).to_string() +
                                    " is not >> 1");
        }
    return out;
}

PetStep pet_successor(const std::vector<GPExpr>& P, const std::vector<Integer>& shifts,
                      const ApproxParams& params) {
    if (P.empty()) throw DomainError("empty system");
    std::size_t first = 0;
    for (std::size_t i = 1; i < P.size(); ++i)
        if (degree(P[i]) < degree(P[first])) first = i;
    const GPExpr& p1 = P[first];
    bool linear = degree(p1) == 1;

    PetStep out;
    for (std::size_t t = 0; t < P.size(); ++t) {
        if (linear && degree(P[t]) == 1) {
            if (t != first) out.system.push_back(sub(P[t], p1));
            continue;
        }
        for (const auto& k : shifts) {
            DerivativeResult dr = derivative(P[t], k, params);
            merge_into(out.C1, dr.C1);
            out.system.push_back(canonical(sub(add(dr.D, P[t]), p1)));
        }
    }
    return out;
}

bool approx_check(const ExactScalar& a, const ExactScalar& b, const ApproxParams& params) {
    if (a == b) return true;
    ExactScalar gap = ExactScalar(params.N) * abs(a - b);
    return compare(abs(a), gap) > 0 && compare(abs(b), gap) > 0;
}

}  // namespace gpolylab
