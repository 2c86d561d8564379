#include "gpolylab/gpexpr.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "gpolylab/errors.hpp"

namespace gpolylab {

struct GPExpr::Node {
    NodeKind kind = NodeKind::monomial;
    ExactScalar coeff;
    unsigned power = 0;
    std::vector<GPExpr> items;
};

namespace {

const char* bracket_name(NodeKind k) { return k == NodeKind::floor ? "fl" : "ni"; }

}  // namespace

GPExpr::GPExpr() {
    static const auto zero = std::make_shared<const Node>();
    node_ = zero;
}

GPExpr GPExpr::monomial(ExactScalar coeff, unsigned power) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::monomial;
    n->coeff = std::move(coeff);
    n->power = power;
    return GPExpr(std::move(n));
}

GPExpr GPExpr::sum(std::vector<GPExpr> items) {
    if (items.empty()) throw DomainError("empty sum");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::sum;
    n->items = std::move(items);
    return GPExpr(std::move(n));
}

GPExpr GPExpr::product(std::vector<GPExpr> items) {
    if (items.empty()) throw DomainError("empty product");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::product;
    n->items = std::move(items);
    return GPExpr(std::move(n));
}

GPExpr GPExpr::nearest_int(GPExpr inner) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::nearest_int;
    n->items.push_back(std::move(inner));
    return GPExpr(std::move(n));
}

GPExpr GPExpr::floor(GPExpr inner) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::floor;
    n->items.push_back(std::move(inner));
    return GPExpr(std::move(n));
}

GPExpr GPExpr::scalar_mul(ExactScalar c, GPExpr inner) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::scalar_mul;
    n->coeff = std::move(c);
    n->items.push_back(std::move(inner));
    return GPExpr(std::move(n));
}

NodeKind GPExpr::kind() const { return node_->kind; }
const ExactScalar& GPExpr::coeff() const { return node_->coeff; }
unsigned GPExpr::power() const { return node_->power; }
const std::vector<GPExpr>& GPExpr::items() const { return node_->items; }

bool GPExpr::operator==(const GPExpr& o) const {
    if (node_ == o.node_) return true;
    if (kind() != o.kind() || power() != o.power() || !(coeff() == o.coeff())) return false;
    return items() == o.items();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string power_text(unsigned p) { return p == 1 ? "n" : "n^" + std::to_string(p); }

bool is_unit(const ExactScalar& c) {
    auto q = c.as_rational();
    return q && (*q == 1 || *q == -1);
}

std::string monomial_text(const ExactScalar& c, unsigned p) {
    if (c.is_zero()) return "0";
    if (c.terms().size() > 1) {
        std::string s = "(" + c.to_string() + ")";
        return p == 0 ? s : s + "*" + power_text(p);
    }
    if (p == 0) return c.to_string();
    if (is_unit(c)) return (c.as_rational() < 0 ? "-" : "") + power_text(p);
    return c.to_string() + "*" + power_text(p);
}

std::string factor_text(const GPExpr& e) {
    std::string s = print(e);
    if (e.kind() == NodeKind::sum || (!s.empty() && s[0] == '-')) return "(" + s + ")";
    return s;
}

}  // namespace

std::string print(const GPExpr& e) {
    switch (e.kind()) {
        case NodeKind::monomial:
            return monomial_text(e.coeff(), e.power());
        case NodeKind::nearest_int:
        case NodeKind::floor:
            return std::string(bracket_name(e.kind())) + "(" + print(e.inner()) + ")";
        case NodeKind::scalar_mul: {
            std::string c = e.coeff().terms().size() > 1 ? "(" + e.coeff().to_string() + ")" : e.coeff().to_string();
            return c + "*" + factor_text(e.inner());
        }
        case NodeKind::product: {
            const auto& items = e.items();
            std::string out;
            std::size_t start = 0;
            const GPExpr& head = items.front();
            if (items.size() > 1 && head.kind() == NodeKind::monomial && head.power() == 0 && is_unit(head.coeff())) {
                out = head.coeff().as_rational() < 0 ? "-" : "";
                start = 1;
            } else if (head.kind() == NodeKind::monomial) {
                out = print(head) + (items.size() > 1 ? "*" : "");
                start = 1;
            }
            for (std::size_t i = start; i < items.size(); ++i) {
                if (i > start) out += "*";
                out += factor_text(items[i]);
            }
            return out;
        }
        case NodeKind::sum: {
            std::string out;
            for (std::size_t i = 0; i < e.items().size(); ++i) {
                const GPExpr& c = e.items()[i];
                std::string s = c.kind() == NodeKind::sum ? "(" + print(c) + ")" : print(c);
                if (i == 0)
                    out = s;
                else if (s[0] == '-')
                    out += " - " + s.substr(1);
                else
                    out += " + " + s;
            }
            return out;
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

std::string term_key(const CanonTerm& t) {
    std::string k = std::to_string(t.power);
    for (const auto& b : t.brackets) k += "|" + print(b);
    return k;
}

std::vector<CanonTerm> merge(std::vector<CanonTerm> terms) {
    std::vector<CanonTerm> out;
    std::map<std::string, std::size_t> index;
    for (auto& t : terms) {
        if (t.coeff.is_zero()) continue;
        std::string k = term_key(t);
        auto it = index.find(k);
        if (it == index.end()) {
            index.emplace(k, out.size());
            out.push_back(std::move(t));
        } else {
            out[it->second].coeff += t.coeff;
        }
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const CanonTerm& t) { return t.coeff.is_zero(); }),
              out.end());
    return out;
}

void sort_brackets(std::vector<GPExpr>& bs) {
    std::vector<std::pair<std::string, GPExpr>> keyed;
    keyed.reserve(bs.size());
    for (auto& b : bs) keyed.emplace_back(print(b), b);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < bs.size(); ++i) bs[i] = keyed[i].second;
}

std::vector<CanonTerm> multiply(const std::vector<CanonTerm>& a, const std::vector<CanonTerm>& b) {
    std::vector<CanonTerm> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a) {
        for (const auto& y : b) {
            CanonTerm t;
            t.coeff = x.coeff * y.coeff;
            t.power = x.power + y.power;
            t.brackets = x.brackets;
            t.brackets.insert(t.brackets.end(), y.brackets.begin(), y.brackets.end());
            sort_brackets(t.brackets);
            out.push_back(std::move(t));
        }
    }
    return merge(std::move(out));
}

}  // namespace

std::vector<CanonTerm> canonical_terms(const GPExpr& e) {
    switch (e.kind()) {
        case NodeKind::monomial:
            if (e.coeff().is_zero()) return {};
            return {CanonTerm{e.coeff(), e.power(), {}}};
        case NodeKind::sum: {
            std::vector<CanonTerm> all;
            for (const auto& c : e.items()) {
                auto ts = canonical_terms(c);
                all.insert(all.end(), ts.begin(), ts.end());
            }
            return merge(std::move(all));
        }
        case NodeKind::product: {
            std::vector<CanonTerm> acc{CanonTerm{ExactScalar(1), 0, {}}};
            for (const auto& c : e.items()) {
                acc = multiply(acc, canonical_terms(c));
                if (acc.empty()) break;
            }
            return acc;
        }
        case NodeKind::nearest_int:
        case NodeKind::floor: {
            auto inner = canonical_terms(e.inner());
            if (inner.empty()) return {};
            GPExpr in = from_terms(inner);
            GPExpr b = e.kind() == NodeKind::floor ? GPExpr::floor(in) : GPExpr::nearest_int(in);
            return {CanonTerm{ExactScalar(1), 0, {b}}};
        }
        case NodeKind::scalar_mul: {
            auto ts = canonical_terms(e.inner());
            for (auto& t : ts) t.coeff *= e.coeff();
            return merge(std::move(ts));
        }
    }
    return {};
}

GPExpr from_terms(const std::vector<CanonTerm>& terms) {
    std::vector<GPExpr> parts;
    for (const auto& t : terms) {
        if (t.coeff.is_zero()) continue;
        if (t.brackets.empty()) {
            parts.push_back(GPExpr::monomial(t.coeff, t.power));
            continue;
        }
        std::vector<GPExpr> factors;
        if (!(t.coeff == ExactScalar(1)) || t.power > 0) factors.push_back(GPExpr::monomial(t.coeff, t.power));
        factors.insert(factors.end(), t.brackets.begin(), t.brackets.end());
        parts.push_back(factors.size() == 1 ? factors.front() : GPExpr::product(std::move(factors)));
    }
    if (parts.empty()) return GPExpr();
    if (parts.size() == 1) return parts.front();
    return GPExpr::sum(std::move(parts));
}

GPExpr canonical(const GPExpr& e) { return from_terms(canonical_terms(e)); }

bool is_zero(const GPExpr& e) { return canonical_terms(e).empty(); }

bool has_constant_term(const GPExpr& e) {
    for (const auto& t : canonical_terms(e)) {
        if (t.power == 0 && t.brackets.empty()) return true;
        for (const auto& b : t.brackets)
            if (has_constant_term(b.inner())) return true;
    }
    return false;
}

unsigned degree(const GPExpr& e) {
    switch (e.kind()) {
        case NodeKind::monomial:
            return e.power();
        case NodeKind::sum: {
            unsigned d = 0;
            for (const auto& c : e.items()) d = std::max(d, degree(c));
            return d;
        }
        case NodeKind::product: {
            unsigned d = 0;
            for (const auto& c : e.items()) d += degree(c);
            return d;
        }
        default:
            return degree(e.inner());
    }
}

GPExpr add(const GPExpr& a, const GPExpr& b) { return canonical(GPExpr::sum({a, b})); }
GPExpr sub(const GPExpr& a, const GPExpr& b) {
    return canonical(GPExpr::sum({a, GPExpr::scalar_mul(ExactScalar(-1), b)}));
}
GPExpr mul(const GPExpr& a, const GPExpr& b) { return canonical(GPExpr::product({a, b})); }
GPExpr scale(const ExactScalar& c, const GPExpr& a) { return canonical(GPExpr::scalar_mul(c, a)); }

GPExpr rescale(const GPExpr& e, const Integer& q) {
    switch (e.kind()) {
        case NodeKind::monomial: {
            Integer f;
            mpz_pow_ui(f.get_mpz_t(), q.get_mpz_t(), e.power());
            return GPExpr::monomial(e.coeff() * ExactScalar(f), e.power());
        }
        case NodeKind::sum:
        case NodeKind::product: {
            std::vector<GPExpr> items;
            for (const auto& c : e.items()) items.push_back(rescale(c, q));
            return e.kind() == NodeKind::sum ? GPExpr::sum(std::move(items)) : GPExpr::product(std::move(items));
        }
        case NodeKind::nearest_int:
            return GPExpr::nearest_int(rescale(e.inner(), q));
        case NodeKind::floor:
            return GPExpr::floor(rescale(e.inner(), q));
        case NodeKind::scalar_mul:
            return GPExpr::scalar_mul(e.coeff(), rescale(e.inner(), q));
    }
    return e;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
  public:
    explicit Parser(std::string_view s) : s_(s) {}

    GPExpr parse() {
        skip();
        if (pos_ == s_.size()) fail("empty expression");
        GPExpr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_ + 1); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw SyntaxError(msg, at + 1); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    bool peek_digit() {
        skip();
        return pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]));
    }
    Integer uint_literal() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer");
        return Integer(std::string(s_.substr(start, pos_ - start)));
    }

    GPExpr expr() {
        std::vector<GPExpr> items{term()};
        for (;;) {
            if (accept('+'))
                items.push_back(term());
            else if (accept('-'))
                items.push_back(GPExpr::scalar_mul(ExactScalar(-1), term()));
            else
                break;
        }
        return items.size() == 1 ? items.front() : GPExpr::sum(std::move(items));
    }

    GPExpr term() {
        std::vector<GPExpr> items{factor()};
        while (accept('*')) items.push_back(factor());
        return items.size() == 1 ? items.front() : GPExpr::product(std::move(items));
    }

    GPExpr factor() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (accept('-')) return GPExpr::scalar_mul(ExactScalar(-1), factor());
        if (accept('(')) {
            GPExpr e = expr();
            expect(')');
            return e;
        }
        if (peek_digit()) return number();
        if (std::isalpha(static_cast<unsigned char>(s_[pos_]))) return word();
        fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    }

    GPExpr number() {
        Integer p = uint_literal();
        if (pos_ < s_.size() && s_[pos_] == '.') fail("decimal literal is not in the scalar universe (use p/q)");
        if (accept('/')) {
            skip();
            std::size_t at = pos_;
            Integer q = uint_literal();
            if (q == 0) fail_at("zero denominator", at);
            return GPExpr::monomial(ExactScalar(Rational(p, q)), 0);
        }
        return GPExpr::monomial(ExactScalar(p), 0);
    }

    GPExpr word() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        std::string w(s_.substr(start, pos_ - start));
        if (w == "ni" || w == "fl") {
            expect('(');
            GPExpr inner = expr();
            expect(')');
            return w == "ni" ? GPExpr::nearest_int(inner) : GPExpr::floor(inner);
        }
        if (w == "n") {
            if (!accept('^')) return GPExpr::monomial(ExactScalar(1), 1);
            skip();
            std::size_t at = pos_;
            if (!peek_digit()) fail_at("non-integer exponent", at);
            Integer k = uint_literal();
            if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == '/')) fail_at("non-integer exponent", at);
            if (k > 1000) fail_at("exponent too large", at);
            return GPExpr::monomial(ExactScalar(1), static_cast<unsigned>(k.get_ui()));
        }
        if (w == "sqrt") {
            expect('(');
            skip();
            std::size_t at = pos_;
            if (!peek_digit()) fail_at("sqrt takes a nonnegative integer", at);
            Integer k = uint_literal();
            expect(')');
            if (!k.fits_ulong_p()) fail_at("radicand too large", at);
            return GPExpr::monomial(ExactScalar::sqrt(k.get_ui()), 0);
        }
        if (w == "pi") return GPExpr::monomial(ExactScalar::pi(), 0);
        if (w == "e") return GPExpr::monomial(ExactScalar::e(), 0);
        fail_at("constant '" + w + "' is not in the scalar universe", start);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

GPExpr parse_any(std::string_view text) { return canonical(Parser(text).parse()); }

GPExpr parse(std::string_view text) {
    GPExpr e = parse_any(text);
    if (has_constant_term(e)) throw DomainError("expression has a constant term (must vanish at n = 0): " + print(e));
    return e;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const GPExpr& e) {
    nlohmann::json j;
    switch (e.kind()) {
        case NodeKind::monomial:
            j = {{"type", "monomial"}, {"coeff", e.coeff().to_json()}, {"power", e.power()}};
            break;
        case NodeKind::sum:
        case NodeKind::product: {
            nlohmann::json items = nlohmann::json::array();
            for (const auto& c : e.items()) items.push_back(to_json(c));
            j = {{"type", e.kind() == NodeKind::sum ? "sum" : "product"}, {"items", items}};
            break;
        }
        case NodeKind::nearest_int:
            j = {{"type", "nearest_int"}, {"inner", to_json(e.inner())}};
            break;
        case NodeKind::floor:
            j = {{"type", "floor"}, {"inner", to_json(e.inner())}};
            break;
        case NodeKind::scalar_mul:
            j = {{"type", "scalar_mul"}, {"coeff", e.coeff().to_json()}, {"inner", to_json(e.inner())}};
            break;
    }
    return j;
}

GPExpr expr_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "monomial")
        return GPExpr::monomial(ExactScalar::from_json(j.at("coeff")), j.at("power").get<unsigned>());
    if (type == "sum" || type == "product") {
        std::vector<GPExpr> items;
        for (const auto& c : j.at("items")) items.push_back(expr_from_json(c));
        return type == "sum" ? GPExpr::sum(std::move(items)) : GPExpr::product(std::move(items));
    }
    if (type == "nearest_int") return GPExpr::nearest_int(expr_from_json(j.at("inner")));
    if (type == "floor") return GPExpr::floor(expr_from_json(j.at("inner")));
    if (type == "scalar_mul")
        return GPExpr::scalar_mul(ExactScalar::from_json(j.at("coeff")), expr_from_json(j.at("inner")));
    throw DomainError("unknown node type '" + type + "'");
}

}  // namespace gpolylab
