#pragma once

// Exact evaluation of generalized polynomials at integer points.

#include <string>
#include <vector>

#include "gpolylab/gpexpr.hpp"
#include "gpolylab/scalar.hpp"

namespace gpolylab {

/// Smallest nearest integer: ties go down, so a - nearest_int(a) lies in (-1/2, 1/2].
Integer nearest_int(const ExactScalar& a);
/// Greatest integer <= a.
Integer floor_int(const ExactScalar& a);

enum class FracFlavor { nearest, floor };

struct FracValue {
    ExactScalar value;
    FracFlavor flavor = FracFlavor::nearest;
};

/// a minus its bracket, exact.
FracValue frac(const ExactScalar& a, FracFlavor flavor = FracFlavor::nearest);

/// One evaluated bracket: its text, the integer it produced, and the exact fractional part.
struct TraceEntry {
    std::string bracket;
    Integer value;
    ExactScalar frac;
};

/// Exact value at n with every bracket resolved.
ExactScalar eval_real(const GPExpr& e, const Integer& n, std::vector<TraceEntry>* trace = nullptr);
/// Integer value at n; DomainError if the value is not an integer.
Integer eval_int(const GPExpr& e, const Integer& n, std::vector<TraceEntry>* trace = nullptr);

struct BracketSumCheck {
    bool condition_nearest = false;
    bool identity_nearest = false;
    bool condition_floor = false;
    bool identity_floor = false;
};

/// Hypotheses and conclusions of the finite-sum bracket identity, computed separately.
BracketSumCheck bracket_sum_check(const std::vector<ExactScalar>& r);

}  // namespace gpolylab
