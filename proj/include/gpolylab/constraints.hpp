#pragma once

// Sets of integers cut out by fractional-part windows {q(n + shift)} in (-delta, delta).

#include <cstdint>
#include <optional>
#include <vector>

#include "gpolylab/gpexpr.hpp"
#include "gpolylab/ipsets.hpp"

namespace gpolylab {

struct Condition {
    GPExpr expr;
    Rational delta;
    Integer shift = 0;  // the condition reads {expr(n + shift)}
};

/// Empty list means all integers.
class ConstraintSet {
  public:
    ConstraintSet() = default;
    explicit ConstraintSet(std::vector<Condition> conditions);

    void add(Condition c);
    const std::vector<Condition>& conditions() const noexcept { return conditions_; }
    bool empty() const noexcept { return conditions_.empty(); }

    nlohmann::json to_json() const;
    static ConstraintSet from_json(const nlohmann::json& j);

  private:
    std::vector<Condition> conditions_;
};

/// |{x}| < delta with the nearest-fraction.
bool frac_within(const ExactScalar& x, const Rational& delta);

bool c_membership(const Integer& n, const ConstraintSet& c);
std::vector<Integer> c_enumerate(const ConstraintSet& c, const Integer& lo, const Integer& hi,
                                 std::uint64_t budget = 10000000);
ConstraintSet c_intersect(const ConstraintSet& a, const ConstraintSet& b);

struct IpWitness {
    IndexSet alpha;
    Integer value;
    std::uint64_t checked = 0;
};

/// First alpha in binary-rank order with n_alpha in C; nullopt when the budget
/// (number of index sets tried) or the generators run out.
std::optional<IpWitness> ip_intersection_witness(const ConstraintSet& c, const FSGenerators& g,
                                                 std::uint64_t budget = std::uint64_t{1} << 16);

}  // namespace gpolylab
