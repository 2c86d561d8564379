#include "gpolylab/gpeval.hpp"

#include "gpolylab/errors.hpp"

namespace gpolylab {

namespace {

Integer floor_rational(const Rational& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

}  // namespace

Integer floor_int(const ExactScalar& a) {
    if (auto q = a.as_rational()) return floor_rational(*q);
    // A non-rational canonical scalar is never an integer, so refinement terminates
    // unless the cap is too low.
    const unsigned cap = precision_cap();
    for (unsigned bits = 128; bits <= cap; bits *= 2) {
        Interval iv = enclose(a, bits);
        Integer lo = floor_rational(iv.lower);
        if (lo == floor_rational(iv.upper)) return lo;
    }
    throw TieUndecidable("floor of " + a.to_string() + " not decided within " + std::to_string(cap) + " bits");
}

Integer nearest_int(const ExactScalar& a) {
    try {
        return -floor_int(ExactScalar(Rational(1, 2)) - a);
    } catch (const TieUndecidable&) {
        throw TieUndecidable("nearest integer of " + a.to_string() + " not decided within " +
                             std::to_string(precision_cap()) + " bits");
    }
}

FracValue frac(const ExactScalar& a, FracFlavor flavor) {
    Integer k = flavor == FracFlavor::nearest ? nearest_int(a) : floor_int(a);
    return FracValue{a - ExactScalar(k), flavor};
}

ExactScalar eval_real(const GPExpr& e, const Integer& n, std::vector<TraceEntry>* trace) {
    switch (e.kind()) {
        case NodeKind::monomial: {
            if (e.coeff().is_zero()) return {};
            Integer p;
            mpz_pow_ui(p.get_mpz_t(), n.get_mpz_t(), e.power());
            return e.coeff() * ExactScalar(p);
        }
        case NodeKind::sum: {
            ExactScalar s;
            for (const auto& c : e.items()) s += eval_real(c, n, trace);
            return s;
        }
        case NodeKind::product: {
            ExactScalar s(1);
            for (const auto& c : e.items()) {
                s *= eval_real(c, n, trace);
                if (s.is_zero()) break;
            }
            return s;
        }
        case NodeKind::nearest_int:
        case NodeKind::floor: {
            ExactScalar inner = eval_real(e.inner(), n, trace);
            Integer k = e.kind() == NodeKind::floor ? floor_int(inner) : nearest_int(inner);
            if (trace) trace->push_back(TraceEntry{print(e), k, inner - ExactScalar(k)});
            return ExactScalar(k);
        }
        case NodeKind::scalar_mul:
            return e.coeff() * eval_real(e.inner(), n, trace);
    }
    return {};
}

Integer eval_int(const GPExpr& e, const Integer& n, std::vector<TraceEntry>* trace) {
    ExactScalar v = eval_real(e, n, trace);
    if (!v.is_integer())
        throw DomainError("expression is not integer-valued at n = " + n.get_str() + " (value " + v.to_string() + ")");
    auto q = v.as_rational();
    return q ? q->get_num() : Integer(0);
}

BracketSumCheck bracket_sum_check(const std::vector<ExactScalar>& r) {
    if (r.empty()) throw DomainError("bracket_sum_check needs at least one scalar");
    BracketSumCheck out;
    ExactScalar total, frac_n, frac_f;
    Integer sum_n = 0, sum_f = 0;
    for (const auto& x : r) {
        total += x;
        Integer kn = nearest_int(x);
        Integer kf = floor_int(x);
        sum_n += kn;
        sum_f += kf;
        frac_n += x - ExactScalar(kn);
        frac_f += x - ExactScalar(kf);
    }
    const ExactScalar half(Rational(1, 2));
    out.condition_nearest = compare(frac_n, -half) > 0 && compare(frac_n, half) <= 0;
    out.identity_nearest = nearest_int(total) == sum_n;
    out.condition_floor = compare(frac_f, ExactScalar(0)) >= 0 && compare(frac_f, ExactScalar(1)) < 0;
    out.identity_floor = floor_int(total) == sum_f;
    return out;
}

}  // namespace gpolylab
