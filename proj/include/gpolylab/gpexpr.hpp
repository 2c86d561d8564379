#pragma once

// Generalized polynomial expressions in one integer variable n.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gpolylab/scalar.hpp"

namespace gpolylab {

enum class NodeKind { monomial, sum, product, nearest_int, floor, scalar_mul };

/// Immutable expression tree; copies share structure.
class GPExpr {
  public:
    /// The zero expression, Monomial(0, 0).
    GPExpr();

    static GPExpr monomial(ExactScalar coeff, unsigned power);
    static GPExpr sum(std::vector<GPExpr> items);
    static GPExpr product(std::vector<GPExpr> items);
    static GPExpr nearest_int(GPExpr inner);
    static GPExpr floor(GPExpr inner);
    static GPExpr scalar_mul(ExactScalar c, GPExpr inner);

    NodeKind kind() const;
    bool is_bracket() const { return kind() == NodeKind::nearest_int || kind() == NodeKind::floor; }
    /// Monomial or ScalarMul coefficient.
    const ExactScalar& coeff() const;
    unsigned power() const;
    /// Children of Sum/Product; the single operand of brackets and ScalarMul.
    const std::vector<GPExpr>& items() const;
    const GPExpr& inner() const { return items().front(); }

    /// Structural equality.
    bool operator==(const GPExpr& o) const;

  private:
    struct Node;
    explicit GPExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// One term of the canonical form: coeff * n^power * product of brackets.
/// Brackets are NearestInt/Floor nodes with canonical inner expressions,
/// sorted by their printed text.
struct CanonTerm {
    ExactScalar coeff;
    unsigned power = 0;
    std::vector<GPExpr> brackets;
};

/// Flatten, distribute products over sums, merge like terms, drop zeros.
/// Bracket contents are canonicalized but never simplified.
std::vector<CanonTerm> canonical_terms(const GPExpr& e);
GPExpr from_terms(const std::vector<CanonTerm>& terms);
GPExpr canonical(const GPExpr& e);

/// Parse and canonicalize. Rejects expressions with constant terms, so every
/// parsed expression vanishes at n = 0.
GPExpr parse(std::string_view text);
/// Parse without the constant-term check.
GPExpr parse_any(std::string_view text);

std::string print(const GPExpr& e);

/// Formal degree.
unsigned degree(const GPExpr& e);

bool is_zero(const GPExpr& e);
/// True when some canonical term at any depth is a bare constant.
bool has_constant_term(const GPExpr& e);

GPExpr add(const GPExpr& a, const GPExpr& b);
GPExpr sub(const GPExpr& a, const GPExpr& b);
GPExpr mul(const GPExpr& a, const GPExpr& b);
GPExpr scale(const ExactScalar& c, const GPExpr& a);

/// p(n) -> p(q n), applied through every bracket.
GPExpr rescale(const GPExpr& e, const Integer& q);

nlohmann::json to_json(const GPExpr& e);
GPExpr expr_from_json(const nlohmann::json& j);

}  // namespace gpolylab
