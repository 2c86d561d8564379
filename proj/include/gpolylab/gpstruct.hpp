#pragma once

// Leading sums, equivalence classes and weight vectors, and the shift derivative
// D(p, m) = p(n+m) - p(n) - p(m) with its constraint set.

#include <compare>
#include <vector>

#include "gpolylab/constraints.hpp"
#include "gpolylab/gpexpr.hpp"
#include "gpolylab/sgp.hpp"

namespace gpolylab {

/// counts[d-1] = number of ~-classes of degree d; no trailing zeros.
using WeightVector = std::vector<unsigned>;

struct ApproxParams {
    Integer N = 1000;
};

/// num/den, kept apart because the quotient usually leaves the scalar ring.
struct ScalarRatio {
    ExactScalar num;
    ExactScalar den;

    std::string to_string() const;
    /// |m| > num/den
    bool exceeded_by(const Integer& m) const;
};

struct DerivativeResult {
    GPExpr D;
    ConstraintSet C1;
    Integer m;
};

/// Sum of the coefficients of the maximal-degree terms, brackets read through.
ExactScalar leading_sum(const GPExpr& p);

bool nondegenerate(const std::vector<GPExpr>& P);
bool equivalent(const GPExpr& p, const GPExpr& q);

/// Zero and constant elements are skipped.
WeightVector weight_vector(const std::vector<GPExpr>& P);
/// Decided at the largest index where the vectors differ.
std::strong_ordering pet_compare(const WeightVector& a, const WeightVector& b);
std::string weight_text(const WeightVector& w);

ScalarRatio m_threshold(const GPExpr& h);

/// No chain suffix of p takes a value with fractional part 1/2 at m.
bool good(const Integer& m, const GPExpr& p);
/// Members are good shifts for p: every non-integer chain suffix within delta of Z,
/// plus the normal-form conditions. 0 < delta <= 1/4.
ConstraintSet good_set(const GPExpr& p, const Rational& delta);

/// delta caps the bracket-splitting windows.
DerivativeResult derivative(const GPExpr& p, const Integer& m, const ApproxParams& params = {},
                            const Rational& delta = Rational(1, 4));

ConstraintSet proper_set(const std::vector<GPExpr>& P, const std::vector<Integer>& M,
                         const Rational& delta = Rational(1, 4));

struct ShiftedSystem {
    // q[i][j] = D(p_i, k_j) + p_i - p_1
    std::vector<std::vector<GPExpr>> q;
    ConstraintSet C1;
};

/// Throws ShiftTooSmall naming the first pair that breaks |A| >> 1.
ShiftedSystem shifted_system(const std::vector<GPExpr>& P, const std::vector<Integer>& shifts,
                             const ApproxParams& params = {});

struct PetStep {
    std::vector<GPExpr> system;
    ConstraintSet C1;
};

/// One reduction step: p_1 is the first element of least degree.
PetStep pet_successor(const std::vector<GPExpr>& P, const std::vector<Integer>& shifts,
                      const ApproxParams& params = {});

/// |a| > N|a-b| and |b| > N|a-b|; a == b counts as true.
bool approx_check(const ExactScalar& a, const ExactScalar& b, const ApproxParams& params = {});

}  // namespace gpolylab
