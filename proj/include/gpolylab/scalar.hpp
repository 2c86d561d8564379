#pragma once

// Exact coefficients: rational combinations of products of sqrt(k), pi and e.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"

namespace gpolylab {

using Integer = mpz_class;
using Rational = mpq_class;

/// A product sqrt(radicand) * pi^pi_pow * e^e_pow with square-free radicand (1 = none).
struct ScalarMonomial {
    std::uint64_t radicand = 1;
    std::uint32_t pi_pow = 0;
    std::uint32_t e_pow = 0;

    bool is_one() const noexcept { return radicand == 1 && pi_pow == 0 && e_pow == 0; }
    auto operator<=>(const ScalarMonomial&) const = default;
};

/// Element of Q[sqrt(k), pi, e] in canonical form.
///
/// Terms are kept sorted by monomial with nonzero coefficients in lowest terms,
/// so structural equality is value equality (pi and e are treated as
/// independent transcendentals). Zero is the empty term list.
class ExactScalar {
  public:
    using Term = std::pair<ScalarMonomial, Rational>;

    ExactScalar() = default;
    ExactScalar(long v);  // NOLINT(google-explicit-constructor)
    ExactScalar(const Integer& v);  // NOLINT(google-explicit-constructor)
    ExactScalar(const Rational& v);  // NOLINT(google-explicit-constructor)

    static ExactScalar sqrt(std::uint64_t k);
    static ExactScalar pi();
    static ExactScalar e();
    static ExactScalar from_terms(std::vector<Term> terms);

    const std::vector<Term>& terms() const noexcept { return terms_; }

    bool is_zero() const noexcept { return terms_.empty(); }
    bool is_rational() const noexcept;
    bool is_integer() const noexcept;
    std::optional<Rational> as_rational() const;
    bool has_pi() const noexcept;
    bool has_e() const noexcept;

    ExactScalar operator-() const;
    ExactScalar& operator+=(const ExactScalar& o);
    ExactScalar& operator-=(const ExactScalar& o);
    ExactScalar& operator*=(const ExactScalar& o);

    friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { return a += b; }
    friend ExactScalar operator-(ExactScalar a, const ExactScalar& b) { return a -= b; }
    friend ExactScalar operator*(ExactScalar a, const ExactScalar& b) { return a *= b; }
    bool operator==(const ExactScalar& o) const;

    /// Division by a nonzero rational scalar; throws DomainError otherwise.
    ExactScalar divided_by(const ExactScalar& divisor) const;

    /// Text in the scalar grammar, e.g. "sqrt(6) + pi + 2", "-1/2*sqrt(3)".
    std::string to_string() const;
    /// Canonical JSON term list.
    nlohmann::json to_json() const;
    static ExactScalar from_json(const nlohmann::json& j);

    /// Rough double value; for display only.
    double approx() const;

  private:
    void normalize();
    std::vector<Term> terms_;
};

enum class Sign { negative = -1, zero = 0, positive = 1 };

/// Closed interval with dyadic endpoints.
struct Interval {
    Rational lower;
    Rational upper;
    unsigned precision = 0;

    bool contains(const Rational& x) const { return lower <= x && x <= upper; }
    bool contains(const Interval& o) const { return lower <= o.lower && o.upper <= upper; }
};

ExactScalar add(const ExactScalar& a, const ExactScalar& b);
ExactScalar sub(const ExactScalar& a, const ExactScalar& b);
ExactScalar mul(const ExactScalar& a, const ExactScalar& b);
ExactScalar rational_div(const ExactScalar& a, const ExactScalar& b);

/// Sign by canonical emptiness, then interval refinement up to the precision cap.
/// Throws PrecisionCapExceeded if the cap is hit without separation.
Sign sign(const ExactScalar& a);
/// sign(a - b) as -1, 0, 1.
int compare(const ExactScalar& a, const ExactScalar& b);
ExactScalar abs(const ExactScalar& a);

/// Enclosure with width <= 2^(1-bits) * (1 + magnitude bound); nested in `bits`.
Interval interval(const ExactScalar& a, unsigned bits);

/// Tight enclosure at the given working precision (not nested across precisions).
Interval enclose(const ExactScalar& a, unsigned working_bits);

/// True when a zero/nonzero claim about `a` relies on pi and e being
/// algebraically independent over the radical field.
bool relies_on_independence(const ExactScalar& a);

/// Current sign-decision cap in bits (default 4096, GPOLYLAB_PRECISION_CAP overrides).
unsigned precision_cap();
void set_precision_cap(unsigned bits);

/// Parse integers, p/q, sqrt(k), pi, e combined with + - * and parentheses.
ExactScalar parse_scalar(std::string_view text);

/// Parse a rational: "3", "-2/7", or a decimal like "0.05".
Rational parse_rational(std::string_view text);
std::string rational_to_string(const Rational& q);

}  // namespace gpolylab
