#include "gpolylab/sgp.hpp"

#include <algorithm>

#include "gpolylab/errors.hpp"

namespace gpolylab {

std::string chain_text(const Chain& c) {
    std::string out = "L(";
    for (std::size_t i = 0; i < c.links.size(); ++i) {
        if (i > 0) out += ", ";
        out += print(GPExpr::monomial(c.links[i].coeff, c.links[i].power));
    }
    return out + ")";
}

unsigned chain_degree(const Chain& c) {
    unsigned d = 0;
    for (const auto& l : c.links) d += l.power;
    return d;
}

unsigned product_degree(const ChainProduct& q) {
    unsigned d = 0;
    for (const auto& c : q.chains) d += chain_degree(c);
    return d;
}

unsigned sgp_degree(const SGPForm& h) {
    unsigned d = 0;
    for (const auto& t : h.terms) d = std::max(d, product_degree(t.product));
    for (const auto& [k, c] : h.polynomial)
        if (c != 0) d = std::max(d, k);
    return d;
}

bool chain_integer_valued(const Chain& c) { return c.links.front().coeff.is_integer(); }

GPExpr chain_value(const Chain& c) {
    GPExpr v = GPExpr::monomial(c.links.back().coeff, c.links.back().power);
    for (std::size_t i = c.links.size() - 1; i-- > 0;)
        v = GPExpr::product({GPExpr::monomial(c.links[i].coeff, c.links[i].power), GPExpr::nearest_int(v)});
    return canonical(v);
}

GPExpr chain_bracket(const Chain& c) {
    if (chain_integer_valued(c)) return chain_value(c);
    return canonical(GPExpr::nearest_int(chain_value(c)));
}

std::vector<Chain> chain_suffixes(const Chain& c) {
    std::vector<Chain> out;
    for (std::size_t t = 0; t < c.links.size(); ++t) out.push_back(Chain{{c.links.begin() + t, c.links.end()}});
    return out;
}

GPExpr product_expr(const ChainProduct& q) {
    std::vector<GPExpr> factors{GPExpr::monomial(1, 0)};
    for (const auto& c : q.chains) factors.push_back(chain_bracket(c));
    return canonical(GPExpr::product(std::move(factors)));
}

GPExpr to_expr(const SGPForm& h) {
    std::vector<GPExpr> parts{GPExpr()};
    for (const auto& t : h.terms) parts.push_back(GPExpr::scalar_mul(ExactScalar(t.c), product_expr(t.product)));
    for (const auto& [k, c] : h.polynomial) parts.push_back(GPExpr::monomial(ExactScalar(c), k));
    return canonical(GPExpr::sum(std::move(parts)));
}

nlohmann::json to_json(const SGPForm& h) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : h.terms) {
        nlohmann::json chains = nlohmann::json::array();
        for (const auto& c : t.product.chains) chains.push_back(chain_text(c));
        terms.push_back({{"c", t.c.get_str()}, {"chains", chains}});
    }
    nlohmann::json poly = nlohmann::json::object();
    for (const auto& [k, c] : h.polynomial)
        if (c != 0) poly[std::to_string(k)] = c.get_str();
    return {{"terms", terms}, {"polynomial", poly}, {"expr", print(to_expr(h))}};
}

Rational window_round_down(const Rational& x) {
    if (x <= 0) throw DomainError("window must be positive");
    if (x >= Rational(1, 256)) {
        Integer k;
        Rational scaled = x * 4096;
        mpz_fdiv_q(k.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
        Rational r(k, 4096);
        r.canonicalize();
        return r;
    }
    Rational p(1, 256);
    while (p > x) p /= 2;
    return p;
}

Rational abs_upper_bound(const ExactScalar& a) {
    Interval iv = enclose(a, 128);
    return std::max(Rational(abs(iv.lower)), Rational(abs(iv.upper)));
}

// ---------------------------------------------------------------------------
// Normal-form algebra

namespace {

std::string product_key(const ChainProduct& q) {
    std::string k;
    for (const auto& c : q.chains) k += chain_text(c) + ";";
    return k;
}

void sort_chains(ChainProduct& q) {
    std::stable_sort(q.chains.begin(), q.chains.end(),
                     [](const Chain& a, const Chain& b) { return chain_text(a) < chain_text(b); });
}

SGPForm normalized(SGPForm h) {
    std::vector<SgpTerm> merged;
    std::map<std::string, std::size_t> index;
    for (auto& t : h.terms) {
        if (t.c == 0) continue;
        sort_chains(t.product);
        std::string k = product_key(t.product);
        auto it = index.find(k);
        if (it == index.end()) {
            index.emplace(k, merged.size());
            merged.push_back(std::move(t));
        } else {
            merged[it->second].c += t.c;
        }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(), [](const SgpTerm& t) { return t.c == 0; }),
                 merged.end());
    h.terms = std::move(merged);
    for (auto it = h.polynomial.begin(); it != h.polynomial.end();) {
        if (it->second == 0)
            it = h.polynomial.erase(it);
        else
            ++it;
    }
    return h;
}

SGPForm form_add(SGPForm a, const SGPForm& b) {
    a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
    for (const auto& [k, c] : b.polynomial) a.polynomial[k] += c;
    return normalized(std::move(a));
}

SGPForm monomial_form(const Integer& c, unsigned k) {
    SGPForm f;
    if (c != 0) f.polynomial[k] = c;
    return f;
}

// n^k times the bracketed chain c: folded into the chain's leading link.
Chain attach_power(const Chain& c, unsigned k) {
    if (k == 0) return c;
    Chain out;
    if (chain_integer_valued(c)) {
        out = c;
        out.links.front().power += k;
    } else {
        out.links.push_back(Link{ExactScalar(1), k});
        out.links.insert(out.links.end(), c.links.begin(), c.links.end());
    }
    return out;
}

SGPForm form_mul(const SGPForm& a, const SGPForm& b) {
    SGPForm out;
    for (const auto& [ka, ca] : a.polynomial)
        for (const auto& [kb, cb] : b.polynomial) out.polynomial[ka + kb] += ca * cb;
    auto poly_times_terms = [&out](const SGPForm& p, const SGPForm& t) {
        for (const auto& [k, c] : p.polynomial) {
            for (const auto& term : t.terms) {
                SgpTerm nt{c * term.c, term.product};
                if (k > 0) nt.product.chains.front() = attach_power(nt.product.chains.front(), k);
                out.terms.push_back(std::move(nt));
            }
        }
    };
    poly_times_terms(a, b);
    poly_times_terms(b, a);
    for (const auto& x : a.terms) {
        for (const auto& y : b.terms) {
            SgpTerm t{x.c * y.c, x.product};
            t.product.chains.insert(t.product.chains.end(), y.product.chains.begin(), y.product.chains.end());
            out.terms.push_back(std::move(t));
        }
    }
    return normalized(std::move(out));
}

// ni(chain) as a form. Integer-valued chains are their own bracket.
SGPForm bracketed_chain(const Chain& c) {
    SGPForm f;
    const Link& head = c.links.front();
    if (!head.coeff.is_integer()) {
        f.terms.push_back(SgpTerm{1, ChainProduct{{c}}});
        return f;
    }
    Integer a = head.coeff.as_rational()->get_num();
    if (a == 0) return f;
    if (c.links.size() == 1) return monomial_form(a, head.power);
    Chain rest{{c.links.begin() + 1, c.links.end()}};
    if (head.power == 0) {
        SGPForm r = bracketed_chain(rest);
        SGPForm scaled;
        for (auto& t : r.terms) scaled.terms.push_back(SgpTerm{t.c * a, t.product});
        for (auto& [k, v] : r.polynomial) scaled.polynomial[k] = v * a;
        return normalized(std::move(scaled));
    }
    if (chain_integer_valued(rest)) {
        // n^j * (integer-valued rest): fold the power in.
        SGPForm r = bracketed_chain(rest);
        return form_mul(monomial_form(a, head.power), r);
    }
    Chain unit = c;
    unit.links.front().coeff = 1;
    f.terms.push_back(SgpTerm{a, ChainProduct{{unit}}});
    return f;
}

class Normalizer {
  public:
    SGPForm top(const GPExpr& e) {
        SGPForm total;
        for (const auto& t : canonical_terms(e)) {
            if (!t.coeff.is_integer())
                throw UnsupportedPattern("non-integer coefficient outside brackets: " + print(from_terms({t})));
            total = form_add(std::move(total), integer_term(t));
        }
        return total;
    }

    ConstraintSet conditions;

  private:
    SGPForm integer_term(const CanonTerm& t) {
        SGPForm s = monomial_form(t.coeff.as_rational()->get_num(), t.power);
        for (const auto& b : t.brackets) s = form_mul(s, bracket(b));
        return s;
    }

    // Pieces of a non-integer term a n^j ni(Y): integer-valued ones go to ints.
    void nonint_term(const CanonTerm& t, SGPForm& ints, std::vector<Chain>& chains) {
        if (t.brackets.empty()) {
            chains.push_back(Chain{{Link{t.coeff, t.power}}});
            return;
        }
        if (t.brackets.size() > 1)
            throw UnsupportedPattern("product of brackets under a non-integer coefficient: " + print(from_terms({t})));
        SGPForm inner = bracket(t.brackets.front());
        auto place = [&](Chain c) {
            if (chain_integer_valued(c))
                ints = form_add(std::move(ints), bracketed_chain(c));
            else
                chains.push_back(std::move(c));
        };
        for (const auto& [k, p] : inner.polynomial) place(Chain{{Link{t.coeff * ExactScalar(p), t.power + k}}});
        for (const auto& term : inner.terms) {
            if (term.product.chains.size() != 1)
                throw UnsupportedPattern("chain product inside a chain: " + print(from_terms({t})));
            const Chain& q = term.product.chains.front();
            Chain c;
            if (chain_integer_valued(q)) {
                // q = n^k ni(rest) with unit leading coefficient
                c.links.push_back(Link{t.coeff * ExactScalar(term.c), t.power + q.links.front().power});
                c.links.insert(c.links.end(), q.links.begin() + 1, q.links.end());
            } else {
                c.links.push_back(Link{t.coeff * ExactScalar(term.c), t.power});
                c.links.insert(c.links.end(), q.links.begin(), q.links.end());
            }
            place(std::move(c));
        }
    }

    // ni(a ni(b n^k)) -> ni(a b n^k) for constant non-integer a.
    Chain collapse(const Chain& c) {
        if (c.links.size() != 2 || c.links[0].power != 0) return c;
        const ExactScalar& a = c.links[0].coeff;
        const ExactScalar& b = c.links[1].coeff;
        const unsigned k = c.links[1].power;
        Chain out{{Link{a * b, k}}};
        const Rational quarter(1, 4);
        Rational da = window_round_down(std::min(quarter, Rational(1 / (4 * abs_upper_bound(a)))));
        conditions.add(Condition{GPExpr::monomial(a * b, k), quarter});
        conditions.add(Condition{chain_value(c), quarter});
        conditions.add(Condition{GPExpr::monomial(b, k), da});
        return out;
    }

    SGPForm bracket(const GPExpr& b) {
        if (b.kind() == NodeKind::floor) throw UnsupportedPattern("floor brackets are outside the normal-form fragment");
        SGPForm ints;
        std::vector<Chain> chains;
        for (const auto& t : canonical_terms(b.inner())) {
            if (t.power == 0 && t.brackets.empty())
                throw UnsupportedPattern("constant term inside a bracket: " + print(b));
            if (t.coeff.is_integer())
                ints = form_add(std::move(ints), integer_term(t));
            else
                nonint_term(t, ints, chains);
        }
        if (chains.size() >= 2) {
            Rational delta(1, 2 * static_cast<long>(chains.size()));
            for (const auto& c : chains) conditions.add(Condition{chain_value(c), delta});
        }
        for (const auto& c : chains) ints = form_add(std::move(ints), bracketed_chain(collapse(c)));
        return ints;
    }
};

}  // namespace

SgpResult to_sgp_normal(const GPExpr& e) {
    Normalizer n;
    SGPForm form = n.top(e);
    return SgpResult{std::move(form), std::move(n.conditions)};
}

}  // namespace gpolylab
