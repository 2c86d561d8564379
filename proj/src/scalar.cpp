#include "gpolylab/scalar.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <tuple>

#include <mpfr.h>

#include "gpolylab/errors.hpp"

namespace gpolylab {

namespace {

class Mpfr {
  public:
    explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    ~Mpfr() { mpfr_clear(v_); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;
    mpfr_ptr get() { return v_; }

  private:
    mpfr_t v_;
};

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
        throw RangeError("radicand product overflows 64 bits");
    return a * b;
}

// Bounds on sqrt(r) * pi^a * e^b, rounded down (lower) or up.
void monomial_bound(const ScalarMonomial& m, mpfr_ptr out, mpfr_rnd_t rnd, mpfr_prec_t prec) {
    mpfr_set_ui(out, 1, rnd);
    Mpfr t(prec);
    if (m.radicand > 1) {
        mpfr_set_ui(t.get(), 0, rnd);
        mpz_class r;
        mpz_import(r.get_mpz_t(), 1, 1, sizeof(m.radicand), 0, 0, &m.radicand);
        mpfr_set_z(t.get(), r.get_mpz_t(), rnd);  // exact for radicand < 2^64 at prec >= 64
        mpfr_sqrt(t.get(), t.get(), rnd);
        mpfr_mul(out, out, t.get(), rnd);
    }
    if (m.pi_pow > 0) {
        mpfr_const_pi(t.get(), rnd);
        for (std::uint32_t i = 0; i < m.pi_pow; ++i) mpfr_mul(out, out, t.get(), rnd);
    }
    if (m.e_pow > 0) {
        mpfr_set_ui(t.get(), 1, rnd);
        mpfr_exp(t.get(), t.get(), rnd);
        for (std::uint32_t i = 0; i < m.e_pow; ++i) mpfr_mul(out, out, t.get(), rnd);
    }
}

Rational to_rational(mpfr_ptr x) {
    Rational q;
    mpfr_get_q(q.get_mpq_t(), x);
    return q;
}

// Crude magnitude bound using sqrt(r) <= r, pi < 4, e < 3.
Rational crude_magnitude(const ExactScalar& a) {
    Rational total = 0;
    for (const auto& [m, c] : a.terms()) {
        Integer f = 1;
        mpz_class r;
        mpz_import(r.get_mpz_t(), 1, 1, sizeof(m.radicand), 0, 0, &m.radicand);
        f *= r;
        for (std::uint32_t i = 0; i < m.pi_pow; ++i) f *= 4;
        for (std::uint32_t i = 0; i < m.e_pow; ++i) f *= 3;
        total += abs(c) * f;
    }
    return total;
}

// floor(x / 2^s) * 2^s for signed s.
Rational floor_to_grid(const Rational& x, long s, bool up) {
    Rational scaled = x;
    if (s >= 0) {
        mpq_div_2exp(scaled.get_mpq_t(), scaled.get_mpq_t(), static_cast<mp_bitcnt_t>(s));
    } else {
        mpq_mul_2exp(scaled.get_mpq_t(), scaled.get_mpq_t(), static_cast<mp_bitcnt_t>(-s));
    }
    Integer k;
    if (up)
        mpz_cdiv_q(k.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
    else
        mpz_fdiv_q(k.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
    Rational out(k);
    if (s >= 0)
        mpq_mul_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(s));
    else
        mpq_div_2exp(out.get_mpq_t(), out.get_mpq_t(), static_cast<mp_bitcnt_t>(-s));
    return out;
}

std::atomic<unsigned> g_cap{0};
std::once_flag g_cap_once;

void init_cap() {
    unsigned cap = 4096;
    if (const char* env = std::getenv("GPOLYLAB_PRECISION_CAP")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v >= 64) cap = static_cast<unsigned>(v);
    }
    unsigned expected = 0;
    g_cap.compare_exchange_strong(expected, cap);
}

}  // namespace

// ---------------------------------------------------------------------------
// ExactScalar

ExactScalar::ExactScalar(long v) : ExactScalar(Rational(v)) {}
ExactScalar::ExactScalar(const Integer& v) : ExactScalar(Rational(v)) {}
ExactScalar::ExactScalar(const Rational& v) {
    if (v != 0) {
        Rational c = v;
        c.canonicalize();
        terms_.emplace_back(ScalarMonomial{}, c);
    }
}

ExactScalar ExactScalar::sqrt(std::uint64_t k) {
    if (k == 0) return {};
    if (k > (std::uint64_t{1} << 40)) throw RangeError("sqrt radicand too large");
    std::uint64_t out = 1;
    for (std::uint64_t i = 2; i * i <= k; ++i) {
        while (k % (i * i) == 0) {
            k /= i * i;
            out *= i;
        }
    }
    ExactScalar s;
    s.terms_.emplace_back(ScalarMonomial{k, 0, 0}, Rational(static_cast<unsigned long>(out)));
    return s;
}

ExactScalar ExactScalar::pi() {
    ExactScalar s;
    s.terms_.emplace_back(ScalarMonomial{1, 1, 0}, Rational(1));
    return s;
}

ExactScalar ExactScalar::e() {
    ExactScalar s;
    s.terms_.emplace_back(ScalarMonomial{1, 0, 1}, Rational(1));
    return s;
}

ExactScalar ExactScalar::from_terms(std::vector<Term> terms) {
    ExactScalar s;
    for (auto& [m, c] : terms) {
        // Re-reduce radicands supplied from outside.
        ExactScalar part = ExactScalar::sqrt(m.radicand);
        ExactScalar rest;
        rest.terms_.emplace_back(ScalarMonomial{1, m.pi_pow, m.e_pow}, c);
        s += part * rest;
    }
    return s;
}

void ExactScalar::normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.first < b.first; });
    std::vector<Term> merged;
    for (auto& t : terms_) {
        if (!merged.empty() && merged.back().first == t.first) {
            merged.back().second += t.second;
        } else {
            merged.push_back(std::move(t));
        }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.second == 0; }),
                 merged.end());
    for (auto& t : merged) t.second.canonicalize();
    terms_ = std::move(merged);
}

bool ExactScalar::is_rational() const noexcept {
    return terms_.empty() || (terms_.size() == 1 && terms_.front().first.is_one());
}

bool ExactScalar::is_integer() const noexcept {
    return terms_.empty() || (is_rational() && terms_.front().second.get_den() == 1);
}

std::optional<Rational> ExactScalar::as_rational() const {
    if (!is_rational()) return std::nullopt;
    return terms_.empty() ? Rational(0) : terms_.front().second;
}

bool ExactScalar::has_pi() const noexcept {
    return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.first.pi_pow > 0; });
}

bool ExactScalar::has_e() const noexcept {
    return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.first.e_pow > 0; });
}

ExactScalar ExactScalar::operator-() const {
    ExactScalar r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
}

ExactScalar& ExactScalar::operator+=(const ExactScalar& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    normalize();
    return *this;
}

ExactScalar& ExactScalar::operator-=(const ExactScalar& o) { return *this += -o; }

ExactScalar& ExactScalar::operator*=(const ExactScalar& o) {
    std::vector<Term> out;
    out.reserve(terms_.size() * o.terms_.size());
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            std::uint64_t g = std::gcd(ma.radicand, mb.radicand);
            ScalarMonomial m{checked_mul(ma.radicand / g, mb.radicand / g), ma.pi_pow + mb.pi_pow,
                             ma.e_pow + mb.e_pow};
            Rational c = ca * cb;
            if (g > 1) {
                mpz_class gz;
                mpz_import(gz.get_mpz_t(), 1, 1, sizeof(g), 0, 0, &g);
                c *= gz;
            }
            out.emplace_back(m, c);
        }
    }
    terms_ = std::move(out);
    normalize();
    return *this;
}

bool ExactScalar::operator==(const ExactScalar& o) const {
    if (terms_.size() != o.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].first != o.terms_[i].first || terms_[i].second != o.terms_[i].second) return false;
    }
    return true;
}

ExactScalar ExactScalar::divided_by(const ExactScalar& divisor) const {
    auto q = divisor.as_rational();
    if (!q) throw DomainError("division by a non-rational scalar " + divisor.to_string());
    if (*q == 0) throw DomainError("division by zero");
    ExactScalar r = *this;
    for (auto& t : r.terms_) {
        t.second /= *q;
        t.second.canonicalize();
    }
    return r;
}

namespace {

std::string monomial_text(const ScalarMonomial& m) {
    std::string out;
    auto append = [&out](const std::string& s) {
        if (!out.empty()) out += "*";
        out += s;
    };
    if (m.radicand > 1) append("sqrt(" + std::to_string(m.radicand) + ")");
    for (std::uint32_t i = 0; i < m.pi_pow; ++i) append("pi");
    for (std::uint32_t i = 0; i < m.e_pow; ++i) append("e");
    return out;
}

std::string term_text(const ScalarMonomial& m, const Rational& c) {
    if (m.is_one()) return rational_to_string(c);
    std::string mono = monomial_text(m);
    if (c == 1) return mono;
    if (c == -1) return "-" + mono;
    return rational_to_string(c) + "*" + mono;
}

}  // namespace

std::string ExactScalar::to_string() const {
    if (terms_.empty()) return "0";
    // Irrational terms first, the rational part last.
    std::vector<const Term*> order;
    for (const auto& t : terms_)
        if (!t.first.is_one()) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(), [](const Term* a, const Term* b) {
        return std::tie(a->first.pi_pow, a->first.e_pow) < std::tie(b->first.pi_pow, b->first.e_pow);
    });
    for (const auto& t : terms_)
        if (t.first.is_one()) order.push_back(&t);
    std::string out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& [m, c] = *order[i];
        if (i == 0) {
            out += term_text(m, c);
        } else if (c < 0) {
            out += " - " + term_text(m, -c);
        } else {
            out += " + " + term_text(m, c);
        }
    }
    return out;
}

nlohmann::json ExactScalar::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [m, c] : terms_) {
        arr.push_back({{"coeff", rational_to_string(c)},
                       {"sqrt", m.radicand},
                       {"pi", m.pi_pow},
                       {"e", m.e_pow}});
    }
    return arr;
}

ExactScalar ExactScalar::from_json(const nlohmann::json& j) {
    std::vector<Term> terms;
    for (const auto& t : j) {
        terms.emplace_back(ScalarMonomial{t.at("sqrt").get<std::uint64_t>(), t.at("pi").get<std::uint32_t>(),
                                          t.at("e").get<std::uint32_t>()},
                           parse_rational(t.at("coeff").get<std::string>()));
    }
    return from_terms(std::move(terms));
}

double ExactScalar::approx() const {
    Interval iv = enclose(*this, 64);
    return Rational((iv.lower + iv.upper) / 2).get_d();
}

// ---------------------------------------------------------------------------
// Free operations

ExactScalar add(const ExactScalar& a, const ExactScalar& b) { return a + b; }
ExactScalar sub(const ExactScalar& a, const ExactScalar& b) { return a - b; }
ExactScalar mul(const ExactScalar& a, const ExactScalar& b) { return a * b; }
ExactScalar rational_div(const ExactScalar& a, const ExactScalar& b) { return a.divided_by(b); }

unsigned precision_cap() {
    std::call_once(g_cap_once, init_cap);
    return g_cap.load();
}

void set_precision_cap(unsigned bits) {
    std::call_once(g_cap_once, init_cap);
    if (bits < 64) throw DomainError("precision cap must be at least 64 bits");
    g_cap.store(bits);
}

Interval enclose(const ExactScalar& a, unsigned working_bits) {
    Interval iv;
    iv.precision = working_bits;
    if (auto q = a.as_rational()) {
        iv.lower = iv.upper = *q;
        return iv;
    }
    const auto prec = static_cast<mpfr_prec_t>(std::max(working_bits, 64U));
    Mpfr lo(prec), hi(prec), mlo(prec), mhi(prec), clo(prec), chi(prec);
    mpfr_set_ui(lo.get(), 0, MPFR_RNDD);
    mpfr_set_ui(hi.get(), 0, MPFR_RNDU);
    for (const auto& [m, c] : a.terms()) {
        monomial_bound(m, mlo.get(), MPFR_RNDD, prec);
        monomial_bound(m, mhi.get(), MPFR_RNDU, prec);
        Rational mag = abs(c);
        mpfr_set_q(clo.get(), mag.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(chi.get(), mag.get_mpq_t(), MPFR_RNDU);
        mpfr_mul(clo.get(), clo.get(), mlo.get(), MPFR_RNDD);
        mpfr_mul(chi.get(), chi.get(), mhi.get(), MPFR_RNDU);
        if (c > 0) {
            mpfr_add(lo.get(), lo.get(), clo.get(), MPFR_RNDD);
            mpfr_add(hi.get(), hi.get(), chi.get(), MPFR_RNDU);
        } else {
            mpfr_sub(lo.get(), lo.get(), chi.get(), MPFR_RNDD);
            mpfr_sub(hi.get(), hi.get(), clo.get(), MPFR_RNDU);
        }
    }
    iv.lower = to_rational(lo.get());
    iv.upper = to_rational(hi.get());
    return iv;
}

Interval interval(const ExactScalar& a, unsigned bits) {
    if (bits < 1) throw DomainError("interval precision must be >= 1 bit");
    if (auto q = a.as_rational()) return Interval{*q, *q, bits};
    // Fixed grid exponent per value keeps enclosures nested across precisions.
    Rational mag = crude_magnitude(a) + 1;
    Integer ceil_mag;
    mpz_cdiv_q(ceil_mag.get_mpz_t(), mag.get_num_mpz_t(), mag.get_den_mpz_t());
    const long e = static_cast<long>(mpz_sizeinbase(ceil_mag.get_mpz_t(), 2));
    const long grid_exp = e - static_cast<long>(bits) - 3;
    Rational grid = 1;
    if (grid_exp >= 0)
        mpq_mul_2exp(grid.get_mpq_t(), grid.get_mpq_t(), static_cast<mp_bitcnt_t>(grid_exp));
    else
        mpq_div_2exp(grid.get_mpq_t(), grid.get_mpq_t(), static_cast<mp_bitcnt_t>(-grid_exp));

    unsigned work = bits + 32 + static_cast<unsigned>(e);
    Interval tight;
    for (;; work *= 2) {
        tight = enclose(a, work);
        if ((tight.upper - tight.lower) * 4 <= grid) break;
    }
    Interval out;
    out.precision = bits;
    out.lower = floor_to_grid(tight.lower, grid_exp, false) - 2 * grid;
    out.upper = floor_to_grid(tight.upper, grid_exp, true) + 2 * grid;
    return out;
}

Sign sign(const ExactScalar& a) {
    if (a.is_zero()) return Sign::zero;
    if (auto q = a.as_rational()) return *q > 0 ? Sign::positive : Sign::negative;
    const unsigned cap = precision_cap();
    for (unsigned bits = 64; bits <= cap; bits *= 2) {
        Interval iv = enclose(a, bits);
        if (iv.lower > 0) return Sign::positive;
        if (iv.upper < 0) return Sign::negative;
    }
    throw PrecisionCapExceeded("sign of " + a.to_string() + " not separated within " + std::to_string(cap) +
                               " bits");
}

int compare(const ExactScalar& a, const ExactScalar& b) { return static_cast<int>(sign(a - b)); }

ExactScalar abs(const ExactScalar& a) { return sign(a) == Sign::negative ? -a : a; }

bool relies_on_independence(const ExactScalar& a) { return a.has_pi() && a.has_e(); }

// ---------------------------------------------------------------------------
// Text

namespace {

class ScalarParser {
  public:
    explicit ScalarParser(std::string_view s) : s_(s) {}

    ExactScalar parse() {
        ExactScalar v = expr();
        skip();
        if (pos_ != s_.size()) throw SyntaxError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_ + 1);
        return v;
    }

  private:
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
    bool accept_word(std::string_view w) {
        skip();
        if (s_.substr(pos_, w.size()) != w) return false;
        std::size_t end = pos_ + w.size();
        if (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end])) && w != "sqrt(") return false;
        pos_ = end;
        return true;
    }
    Integer uint_literal() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) throw SyntaxError("expected integer", start + 1);
        return Integer(std::string(s_.substr(start, pos_ - start)));
    }
    ExactScalar expr() {
        ExactScalar v = term();
        for (;;) {
            if (accept('+'))
                v += term();
            else if (accept('-'))
                v -= term();
            else
                return v;
        }
    }
    ExactScalar term() {
        ExactScalar v = unary();
        while (accept('*')) v *= unary();
        return v;
    }
    ExactScalar unary() {
        if (accept('-')) return -unary();
        return atom();
    }
    ExactScalar atom() {
        skip();
        if (pos_ >= s_.size()) throw SyntaxError("unexpected end of input", pos_ + 1);
        if (accept('(')) {
            ExactScalar v = expr();
            if (!accept(')')) throw SyntaxError("expected ')'", pos_ + 1);
            return v;
        }
        if (accept_word("sqrt(")) {
            std::size_t at = pos_;
            Integer k = uint_literal();
            if (!k.fits_ulong_p()) throw SyntaxError("radicand too large", at + 1);
            if (!accept(')')) throw SyntaxError("expected ')'", pos_ + 1);
            return ExactScalar::sqrt(k.get_ui());
        }
        if (accept_word("pi")) return ExactScalar::pi();
        if (accept_word("e")) return ExactScalar::e();
        if (std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            Integer p = uint_literal();
            if (accept('/')) {
                std::size_t at = pos_;
                Integer q = uint_literal();
                if (q == 0) throw SyntaxError("zero denominator", at + 1);
                return ExactScalar(Rational(p, q));
            }
            return ExactScalar(p);
        }
        throw SyntaxError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_ + 1);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

ExactScalar parse_scalar(std::string_view text) { return ScalarParser(text).parse(); }

Rational parse_rational(std::string_view text) {
    std::string s(text);
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    if (s.empty()) throw SyntaxError("empty rational", 0);
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    std::string body = s.substr(i);
    Rational out;
    auto digits = [&](const std::string& d, std::size_t off) {
        if (d.empty() || !std::all_of(d.begin(), d.end(), [](unsigned char c) { return std::isdigit(c); }))
            throw SyntaxError("malformed rational '" + s + "'", off);
        return Integer(d);
    };
    if (auto slash = body.find('/'); slash != std::string::npos) {
        Integer p = digits(body.substr(0, slash), i);
        Integer q = digits(body.substr(slash + 1), i + slash + 1);
        if (q == 0) throw SyntaxError("zero denominator", i + slash + 1);
        out = Rational(p, q);
    } else if (auto dot = body.find('.'); dot != std::string::npos) {
        std::string ip = body.substr(0, dot);
        std::string fp = body.substr(dot + 1);
        Integer whole = ip.empty() ? Integer(0) : digits(ip, i);
        Integer frac = fp.empty() ? Integer(0) : digits(fp, i + dot + 1);
        Integer scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, fp.size());
        out = Rational(whole * scale + frac, scale);
    } else {
        out = Rational(digits(body, i));
    }
    out.canonicalize();
    return neg ? Rational(-out) : out;
}

std::string rational_to_string(const Rational& q) {
    Rational c = q;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

}  // namespace gpolylab
