#pragma once

// Finite-sum sets over finite generator prefixes.

#include <cstdint>
#include <optional>
#include <vector>

#include "gpolylab/gpexpr.hpp"
#include "gpolylab/scalar.hpp"

namespace gpolylab {

using FSGenerators = std::vector<Integer>;
/// 1-based, strictly increasing generator indices.
using IndexSet = std::vector<unsigned>;

struct FSEntry {
    IndexSet alpha;
    Integer value;
};

struct FSSet {
    std::vector<FSEntry> entries;  // in binary-rank order of alpha
    std::vector<Integer> values;   // sorted, distinct
    bool degenerate = false;       // produced by scaling with 0
};

/// Index set whose bit i (from 0) selects generator i + 1.
IndexSet index_set_from_mask(std::uint64_t mask);

FSSet fs_enumerate(const FSGenerators& g, unsigned depth, std::uint64_t budget = std::uint64_t{1} << 20);
Integer n_alpha(const FSGenerators& g, const IndexSet& alpha);
FSGenerators sub_ip_excluding(const FSGenerators& g, const std::vector<IndexSet>& used);

/// New generators with the supports (in g) they were summed from.
struct RefineResult {
    FSGenerators generators;
    std::vector<IndexSet> supports;
};

/// Disjoint consecutive blocks with sums divisible by m, by the prefix-sum
/// pigeonhole scan. With `count`, stops after that many and fails if fewer exist.
RefineResult divisible_refine(const FSGenerators& g, const Integer& m, std::optional<std::size_t> count = std::nullopt);

/// Families {alpha_i n}, {b_i ni(alpha_i n)}, {beta_j n}, {c_j ni(beta_j n)}.
/// b (resp. c) is either empty or as long as alpha (resp. beta).
struct CellSpec {
    std::vector<ExactScalar> alpha, b, beta, c;
    bool empty() const { return alpha.empty() && beta.empty(); }
};

/// Cell of a value with floor-fraction f among 2m - 1 cells: cell 1 is
/// {x} in (-1/(2m), 1/(2m)], cell k >= 2 is f in ((k-1)/(2m), k/(2m)].
unsigned cell_index(const ExactScalar& x, unsigned m);

struct CellRefineResult {
    RefineResult chosen;
    unsigned m = 0;                          // cell parameter, 1/(2m) < eps and m > 2
    std::vector<std::vector<unsigned>> cells;  // per chosen value, per family member
    std::uint64_t checks = 0;
};

/// k FS values with disjoint supports whose every finite sum lies in cell 1 of
/// all families. nullopt when the budget (candidate checks) runs out.
std::optional<CellRefineResult> cell_refine(const FSGenerators& g, const CellSpec& spec, const Rational& eps,
                                            unsigned k, std::uint64_t budget = 1000000);

/// p(n_alpha) == sum of p(n_i) over i in alpha, for every alpha within depth.
bool image_additivity_check(const GPExpr& p, const FSGenerators& g, unsigned depth);

FSGenerators spectra_div(const FSGenerators& g, const Integer& q);
FSSet scale_members(const FSSet& s, const Integer& q);

}  // namespace gpolylab
