#pragma once

// Normal form: integer combinations of products of bracketed L-chains plus an
// integer polynomial. L(a1 n^j1, a2 n^j2, ..., al n^jl) = a1 n^j1 ni(L(a2 n^j2, ...)).

#include <map>
#include <string>
#include <vector>

#include "gpolylab/constraints.hpp"
#include "gpolylab/gpexpr.hpp"

namespace gpolylab {

struct Link {
    ExactScalar coeff;
    unsigned power = 0;
};

/// Non-empty. A chain whose leading coefficient is an integer is integer-valued;
/// such chains are kept with leading coefficient 1.
struct Chain {
    std::vector<Link> links;
};

struct ChainProduct {
    std::vector<Chain> chains;  // sorted by text
};

struct SgpTerm {
    Integer c;
    ChainProduct product;
};

struct SGPForm {
    std::vector<SgpTerm> terms;
    std::map<unsigned, Integer> polynomial;  // power -> integer coefficient
};

std::string chain_text(const Chain& c);
unsigned chain_degree(const Chain& c);
unsigned product_degree(const ChainProduct& q);
unsigned sgp_degree(const SGPForm& h);
bool chain_integer_valued(const Chain& c);

/// The chain value without the outer bracket.
GPExpr chain_value(const Chain& c);
/// ni(chain), or the chain itself when it is integer-valued.
GPExpr chain_bracket(const Chain& c);
/// Chain suffixes L(a_t n^j_t, ..., a_l n^j_l), t = 1..l.
std::vector<Chain> chain_suffixes(const Chain& c);
GPExpr product_expr(const ChainProduct& q);
GPExpr to_expr(const SGPForm& h);

nlohmann::json to_json(const SGPForm& h);

struct SgpResult {
    SGPForm form;
    ConstraintSet conditions;  // expr(n) == form(n) for every member
};

/// Rewrite into normal form. Brackets holding several non-integer parts are split
/// by the finite-sum rule and ni(a ni(b n^k)) with constant a collapses to
/// ni(a b n^k); each rewrite adds its window conditions. Anything outside this
/// fragment raises UnsupportedPattern.
SgpResult to_sgp_normal(const GPExpr& e);

/// Round a positive rational down to a short window: multiples of 1/4096 from
/// 1/256 up, powers of two below.
Rational window_round_down(const Rational& x);
/// Rational upper bound on |a|.
Rational abs_upper_bound(const ExactScalar& a);

}  // namespace gpolylab
