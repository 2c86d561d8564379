#include "gpolylab/constraints.hpp"

#include <map>

#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"

namespace gpolylab {

namespace {

void check_delta(const Rational& d) {
    if (d <= 0 || d >= Rational(1, 2)) throw DomainError("window delta must lie in (0, 1/2), got " + rational_to_string(d));
}

}  // namespace

ConstraintSet::ConstraintSet(std::vector<Condition> conditions) {
    for (auto& c : conditions) add(std::move(c));
}

void ConstraintSet::add(Condition c) {
    check_delta(c.delta);
    conditions_.push_back(std::move(c));
}

nlohmann::json ConstraintSet::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : conditions_) {
        nlohmann::json j = {{"expr", print(c.expr)}, {"delta", rational_to_string(c.delta)}};
        if (c.shift != 0) j["shift"] = c.shift.get_str();
        arr.push_back(j);
    }
    return arr;
}

ConstraintSet ConstraintSet::from_json(const nlohmann::json& j) {
    ConstraintSet out;
    for (const auto& item : j) {
        Condition c{parse_any(item.at("expr").get<std::string>()), parse_rational(item.at("delta").get<std::string>())};
        if (item.contains("shift")) c.shift = Integer(item.at("shift").get<std::string>());
        out.add(std::move(c));
    }
    return out;
}

bool frac_within(const ExactScalar& x, const Rational& delta) {
    ExactScalar f = frac(x).value;
    return compare(f, delta) < 0 && compare(f, Rational(-delta)) > 0;
}

bool c_membership(const Integer& n, const ConstraintSet& c) {
    for (const auto& cond : c.conditions()) {
        if (!frac_within(eval_real(cond.expr, n + cond.shift), cond.delta)) return false;
    }
    return true;
}

std::vector<Integer> c_enumerate(const ConstraintSet& c, const Integer& lo, const Integer& hi, std::uint64_t budget) {
    if (lo > hi) throw DomainError("empty range: lo > hi");
    Integer len = hi - lo + 1;
    if (!len.fits_ulong_p() || len.get_ui() > budget)
        throw BudgetExceeded("range of " + len.get_str() + " integers exceeds the budget of " + std::to_string(budget));
    std::vector<Integer> out;
    for (Integer n = lo; n <= hi; ++n)
        if (c_membership(n, c)) out.push_back(n);
    return out;
}

ConstraintSet c_intersect(const ConstraintSet& a, const ConstraintSet& b) {
    std::vector<Condition> all = a.conditions();
    all.insert(all.end(), b.conditions().begin(), b.conditions().end());
    return ConstraintSet(std::move(all));
}

std::optional<IpWitness> ip_intersection_witness(const ConstraintSet& c, const FSGenerators& g, std::uint64_t budget) {
    if (g.empty()) return std::nullopt;
    const unsigned bits = static_cast<unsigned>(std::min<std::size_t>(g.size(), 63));
    const std::uint64_t last = (std::uint64_t{1} << bits) - 1;
    std::map<Integer, bool> cache;
    std::uint64_t checked = 0;
    for (std::uint64_t mask = 1; mask <= last && checked < budget; ++mask) {
        ++checked;
        IndexSet alpha = index_set_from_mask(mask);
        Integer v = n_alpha(g, alpha);
        auto it = cache.find(v);
        bool in = it != cache.end() ? it->second : cache.emplace(v, c_membership(v, c)).first->second;
        if (in) return IpWitness{std::move(alpha), v, checked};
    }
    return std::nullopt;
}

}  // namespace gpolylab
