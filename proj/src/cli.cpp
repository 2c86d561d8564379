#include "gpolylab/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "gpolylab/constraints.hpp"
#include "gpolylab/dynsim.hpp"
#include "gpolylab/errors.hpp"
#include "gpolylab/gpeval.hpp"
#include "gpolylab/gpstruct.hpp"
#include "gpolylab/ipsets.hpp"
#include "gpolylab/sgp.hpp"

namespace gpolylab::cli {

using nlohmann::json;

namespace {

struct Globals {
    std::string format = "json";
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    bool dry = false;
    bool envelope = false;
    unsigned precision_cap = 0;
    std::string manifest;
    std::string save_manifest;
};

struct Outcome {
    Outcome() = default;
    explicit Outcome(json r, bool nf = false) : result(std::move(r)), not_found(nf) {}

    json result;
    bool not_found = false;
    // set for enumerations; used by --format csv
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// ---- value conversion

json jint(const Integer& v) {
    if (v.fits_slong_p()) return v.get_si();
    return v.get_str();
}

json jscalar(const ExactScalar& s) {
    if (s.is_integer()) return jint(s.as_rational()->get_num());
    return s.to_string();
}

json jints(const std::vector<Integer>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(jint(x));
    return a;
}

json jpoint(const Point& p) {
    json a = json::array();
    for (const auto& x : p) a.push_back(x.to_string());
    return a;
}

Integer to_integer(const std::string& s) {
    Integer v;
    if (s.empty() || v.set_str(s, 10) != 0) throw DomainError("not an integer: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

std::vector<Integer> integer_list(const std::string& s) {
    std::vector<Integer> out;
    for (const auto& p : split(s, ',')) out.push_back(to_integer(p));
    return out;
}

std::vector<GPExpr> exprs(const std::vector<std::string>& texts) {
    std::vector<GPExpr> out;
    for (const auto& t : texts) out.push_back(parse(t));
    return out;
}

// "expr;delta[;shift]"
Condition condition(const std::string& s) {
    auto parts = split(s, ';');
    if (parts.size() < 2 || parts.size() > 3) throw DomainError("condition must look like expr;delta[;shift]");
    Condition c{parse(parts[0]), parse_rational(parts[1])};
    if (parts.size() == 3) c.shift = to_integer(parts[2]);
    return c;
}

ConstraintSet conditions(const std::vector<std::string>& texts) {
    ConstraintSet c;
    for (const auto& t : texts) c.add(condition(t));
    return c;
}

// "1,2,4", "ones:COUNT", "random:COUNT:MAX" (uses the seed)
FSGenerators generators(const std::string& s, std::uint64_t seed) {
    auto parts = split(s, ':');
    if (parts.size() == 2 && parts[0] == "ones") {
        Integer n = to_integer(parts[1]);
        if (n < 0 || n > 1000000) throw DomainError("ones count out of range");
        return FSGenerators(n.get_ui(), Integer(1));
    }
    if (parts.size() == 3 && parts[0] == "random") {
        Integer n = to_integer(parts[1]), hi = to_integer(parts[2]);
        if (n < 0 || n > 1000000 || hi < 1 || !hi.fits_ulong_p()) throw DomainError("bad random generator spec");
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<unsigned long> d(1, hi.get_ui());
        FSGenerators g;
        for (unsigned long i = 0; i < n.get_ui(); ++i) g.push_back(Integer(d(rng)));
        return g;
    }
    return integer_list(s);
}

Point point(const std::string& s, unsigned dim) {
    Point p;
    for (const auto& x : split(s, ',')) p.push_back(parse_scalar(x));
    if (p.empty()) p.assign(dim, ExactScalar());
    if (p.size() != dim) throw DomainError("point has " + std::to_string(p.size()) + " coordinates, expected " +
                                           std::to_string(dim));
    return p;
}

unsigned small(const Integer& v, const char* what) {
    if (v < 0 || !v.fits_uint_p()) throw DomainError(std::string(what) + " out of range");
    return static_cast<unsigned>(v.get_ui());
}

json weight_json(const WeightVector& w) { return json(w); }

std::string order_name(std::strong_ordering o) {
    if (o == std::strong_ordering::less) return "less";
    if (o == std::strong_ordering::greater) return "greater";
    return "equal";
}

Outcome value_rows(json result, const std::vector<Integer>& values, const std::string& header = "n") {
    Outcome o{std::move(result)};
    o.header = {header};
    for (const auto& v : values) o.rows.push_back({v.get_str()});
    return o;
}

// [lo, hi] cut into `jobs` consecutive pieces, results concatenated in order
std::vector<Integer> parallel_range(const Integer& lo, const Integer& hi, unsigned jobs,
                                    const std::function<std::vector<Integer>(const Integer&, const Integer&)>& f) {
    if (jobs <= 1 || hi - lo < 1000) return f(lo, hi);
    Integer len = hi - lo + 1;
    std::vector<std::vector<Integer>> parts(jobs);
    std::vector<std::exception_ptr> errs(jobs);
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) {
        Integer a = lo + len * j / jobs, b = lo + len * (j + 1) / jobs - 1;
        pool.emplace_back([&, j, a, b] {
            try {
                if (a <= b) parts[j] = f(a, b);
            } catch (...) {
                errs[j] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    std::vector<Integer> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// ---- output

std::string plain(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void write_table(std::ostream& out, const json& v) {
    if (v.is_object()) {
        for (const auto& [k, x] : v.items()) out << k << ": " << plain(x) << "\n";
    } else if (v.is_array()) {
        for (const auto& x : v) out << plain(x) << "\n";
    } else {
        out << plain(v) << "\n";
    }
}

void write_csv(std::ostream& out, const Outcome& o) {
    if (o.header.empty()) {
        if (!o.result.is_array()) throw CLI::ValidationError("--format csv is only available for enumerations");
        out << "value\n";
        for (const auto& x : o.result) out << plain(x) << "\n";
        return;
    }
    for (std::size_t i = 0; i < o.header.size(); ++i) out << (i ? "," : "") << o.header[i];
    out << "\n";
    for (const auto& r : o.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
}

// ---- manifests

std::string command_path(const CLI::App* leaf) {
    std::vector<std::string> names;
    for (const CLI::App* a = leaf; a && a->get_parent(); a = a->get_parent()) names.insert(names.begin(), a->get_name());
    std::string s;
    for (const auto& n : names) s += (s.empty() ? "" : " ") + n;
    return s;
}

const CLI::App* selected_leaf(const CLI::App& app) {
    const CLI::App* cur = &app;
    while (true) {
        auto subs = cur->get_subcommands();
        if (subs.empty()) return cur;
        cur = subs.front();
    }
}

Manifest manifest_of(const CLI::App& app, const Globals& g) {
    Manifest m;
    const CLI::App* leaf = selected_leaf(app);
    m.command = command_path(leaf);
    m.parameters = json::object();
    for (const CLI::App* a = leaf; a && a->get_parent(); a = a->get_parent())
        for (const CLI::Option* opt : a->get_options()) {
            if (opt->count() == 0 || opt->get_single_name() == "help") continue;
            std::string name = opt->get_single_name();
            if (opt->get_expected_min() == 0) {
                m.parameters[name] = true;
                continue;
            }
            m.parameters[name] = opt->results();
            if (name.find("budget") != std::string::npos) m.budgets[name] = opt->results().back();
        }
    if (g.precision_cap) m.budgets["precision-cap"] = std::to_string(g.precision_cap);
    m.seed = g.seed;
    m.format = g.format;
    return m;
}

// ---- subcommands

using Handler = std::function<Outcome()>;

struct Registry {
    std::map<const CLI::App*, Handler> handlers;
    Globals* g = nullptr;
    Outcome dry(const std::string& what) const { return Outcome{json{{"dry_run", true}, {"valid", true}, {"command", what}}}; }
};

void add_expr_commands(CLI::App& app, Registry& reg) {
    Globals& g = *reg.g;

    auto* eval = app.add_subcommand("eval", "Evaluate an expression at an integer");
    auto ev = std::make_shared<std::tuple<std::string, std::string, bool>>();
    eval->add_option("--precision", g.precision_cap, "sign-decision bit cap (same as --precision-cap)");
    eval->add_option("--expr", std::get<0>(*ev), "expression")->required();
    eval->add_option("--n", std::get<1>(*ev), "integer argument")->required();
    eval->add_flag("--trace", std::get<2>(*ev), "list every bracket");
    reg.handlers[eval] = [ev, &g, &reg] {
        GPExpr e = parse_any(std::get<0>(*ev));
        Integer n = to_integer(std::get<1>(*ev));
        if (g.dry) return reg.dry("eval");
        std::vector<TraceEntry> trace;
        ExactScalar v = eval_real(e, n, std::get<2>(*ev) ? &trace : nullptr);
        if (!std::get<2>(*ev)) return Outcome{jscalar(v)};
        json t = json::array();
        for (const auto& x : trace) t.push_back({{"bracket", x.bracket}, {"value", jint(x.value)}, {"frac", x.frac.to_string()}});
        return Outcome{json{{"value", jscalar(v)}, {"frac_trace", t}}};
    };

    auto* a = app.add_subcommand("a", "Leading-coefficient sum A(p)");
    auto ae = std::make_shared<std::string>();
    a->add_option("--expr", *ae)->required();
    reg.handlers[a] = [ae, &g, &reg] {
        GPExpr e = parse(*ae);
        if (g.dry) return reg.dry("a");
        return Outcome{jscalar(leading_sum(e))};
    };

    auto* deg = app.add_subcommand("degree", "Formal degree");
    auto de = std::make_shared<std::string>();
    deg->add_option("--expr", *de)->required();
    reg.handlers[deg] = [de, &g, &reg] {
        GPExpr e = parse(*de);
        if (g.dry) return reg.dry("degree");
        return Outcome{json(degree(e))};
    };

    auto* eq = app.add_subcommand("equiv", "p ~ q");
    auto pq = std::make_shared<std::pair<std::string, std::string>>();
    eq->add_option("--p", pq->first)->required();
    eq->add_option("--q", pq->second)->required();
    reg.handlers[eq] = [pq, &g, &reg] {
        GPExpr p = parse(pq->first), q = parse(pq->second);
        if (g.dry) return reg.dry("equiv");
        return Outcome{json(equivalent(p, q))};
    };

    auto* w = app.add_subcommand("weight", "PET weight vector of a system");
    auto wp = std::make_shared<std::vector<std::string>>();
    w->add_option("--poly", *wp, "system element (repeat)");
    reg.handlers[w] = [wp, &g, &reg] {
        auto P = exprs(*wp);
        if (g.dry) return reg.dry("weight");
        return Outcome{weight_json(weight_vector(P))};
    };

    auto* pc = app.add_subcommand("pet-cmp", "Compare two weight vectors");
    auto ab = std::make_shared<std::pair<std::string, std::string>>();
    pc->add_option("--a", ab->first, "comma list")->required();
    pc->add_option("--b", ab->second, "comma list")->required();
    reg.handlers[pc] = [ab, &g, &reg] {
        auto conv = [](const std::string& s) {
            WeightVector w;
            for (const auto& x : integer_list(s)) w.push_back(small(x, "weight entry"));
            return w;
        };
        WeightVector x = conv(ab->first), y = conv(ab->second);
        if (g.dry) return reg.dry("pet-cmp");
        return Outcome{json(order_name(pet_compare(x, y)))};
    };

    auto* nd = app.add_subcommand("nondegenerate", "A(p_i) and A(p_i - p_j) all nonzero");
    auto np = std::make_shared<std::vector<std::string>>();
    nd->add_option("--poly", *np)->required();
    reg.handlers[nd] = [np, &g, &reg] {
        auto P = exprs(*np);
        if (g.dry) return reg.dry("nondegenerate");
        return Outcome{json(nondegenerate(P))};
    };

    auto* sg = app.add_subcommand("sgp", "Normal form with its constraint set");
    auto se = std::make_shared<std::string>();
    sg->add_option("--expr", *se)->required();
    reg.handlers[sg] = [se, &g, &reg] {
        GPExpr e = parse(*se);
        if (g.dry) return reg.dry("sgp");
        SgpResult r = to_sgp_normal(e);
        return Outcome{json{{"form", to_json(r.form)}, {"conditions", r.conditions.to_json()}}};
    };
}

void add_struct_commands(CLI::App& app, Registry& reg) {
    Globals& g = *reg.g;

    struct DeriveArgs {
        std::string expr, m, N = "1000", delta = "1/4", verify = "0";
    };
    auto* dv = app.add_subcommand("derive", "D(p, m) with its constraint set");
    auto da = std::make_shared<DeriveArgs>();
    dv->add_option("--expr", da->expr)->required();
    dv->add_option("--m", da->m, "shift")->required();
    dv->add_option("--N", da->N, "comparison strength")->capture_default_str();
    dv->add_option("--delta", da->delta, "window cap")->capture_default_str();
    dv->add_option("--verify", da->verify, "check the identity on C1 within [-R, R]")->capture_default_str();
    reg.handlers[dv] = [da, &g, &reg] {
        GPExpr p = parse(da->expr);
        Integer m = to_integer(da->m), R = to_integer(da->verify);
        ApproxParams params{to_integer(da->N)};
        Rational delta = parse_rational(da->delta);
        if (params.N < 1) throw DomainError("N must be positive");
        if (R < 0) throw DomainError("verify range must be non-negative");
        if (g.dry) return reg.dry("derive");
        DerivativeResult r = derivative(p, m, params, delta);
        json out{{"expr", print(p)},
                 {"m", jint(m)},
                 {"D", print(r.D)},
                 {"degree", degree(p)},
                 {"degree_D", degree(r.D)},
                 {"A_p", leading_sum(p).to_string()},
                 {"A_D", leading_sum(r.D).to_string()},
                 {"N", jint(params.N)},
                 {"delta", rational_to_string(delta)},
                 {"conditions", r.C1.to_json()}};
        if (degree(p) >= 2) out["threshold"] = m_threshold(p).to_string();
        if (R > 0) {
            Integer pm = eval_int(p, m);
            auto members = parallel_range(-R, R, g.jobs, [&](const Integer& lo, const Integer& hi) {
                return c_enumerate(r.C1, lo, hi, ~std::uint64_t{0});
            });
            std::uint64_t mismatches = 0, count = members.size();
            for (const auto& n : members)
                if (eval_int(r.D, n) != eval_int(p, n + m) - eval_int(p, n) - pm) ++mismatches;
            out["verified"] = {{"range", jint(R)}, {"members", count}, {"mismatches", mismatches}};
            if (mismatches) throw DomainError("derivative identity failed at " + std::to_string(mismatches) + " points");
        }
        return Outcome{out};
    };

    auto* gd = app.add_subcommand("good", "Goodness of a shift, or a constraint set of good shifts");
    auto ga = std::make_shared<std::tuple<std::string, std::string, std::string>>();
    gd->add_option("--expr", std::get<0>(*ga))->required();
    auto* mopt = gd->add_option("--m", std::get<1>(*ga), "shift");
    auto* dopt = gd->add_option("--delta", std::get<2>(*ga), "window for the good set");
    mopt->excludes(dopt);
    reg.handlers[gd] = [ga, mopt, dopt, &g, &reg] {
        GPExpr p = parse(std::get<0>(*ga));
        if (!mopt->count() && !dopt->count()) throw CLI::ValidationError("good needs --m or --delta");
        if (mopt->count()) {
            Integer m = to_integer(std::get<1>(*ga));
            if (g.dry) return reg.dry("good");
            return Outcome{json(good(m, p))};
        }
        Rational d = parse_rational(std::get<2>(*ga));
        if (g.dry) return reg.dry("good");
        return Outcome{good_set(p, d).to_json()};
    };

    struct ShiftArgs {
        std::vector<std::string> polys, shifts;
        std::string N = "1000", rescale = "1";
    };
    auto* sh = app.add_subcommand("shifted", "Shifted family q_{i,j} = D(p_i, k_j) + p_i - p_1");
    auto sa = std::make_shared<ShiftArgs>();
    sh->add_option("--poly", sa->polys)->required();
    sh->add_option("--shift", sa->shifts)->required();
    sh->add_option("--N", sa->N)->capture_default_str();
    sh->add_option("--rescale", sa->rescale, "replace p(n) by p(q n) first")->capture_default_str();
    reg.handlers[sh] = [sa, &g, &reg] {
        auto P = exprs(sa->polys);
        std::vector<Integer> ks;
        for (const auto& s : sa->shifts) ks.push_back(to_integer(s));
        Integer q = to_integer(sa->rescale);
        ApproxParams params{to_integer(sa->N)};
        if (q == 0) throw DomainError("rescale factor must be nonzero");
        if (g.dry) return reg.dry("shifted");
        for (auto& p : P) p = rescale(p, q);
        ShiftedSystem s = shifted_system(P, ks, params);
        json rows = json::array();
        for (const auto& row : s.q) {
            json r = json::array();
            for (const auto& x : row) r.push_back(print(x));
            rows.push_back(r);
        }
        json sys = json::array();
        for (const auto& p : P) sys.push_back(print(p));
        return Outcome{json{{"system", sys}, {"q", rows}, {"conditions", s.C1.to_json()}}};
    };

    auto* ps = app.add_subcommand("pet-step", "One PET reduction step and the weight vectors");
    auto pa = std::make_shared<ShiftArgs>();
    ps->add_option("--poly", pa->polys)->required();
    ps->add_option("--shift", pa->shifts)->required();
    ps->add_option("--N", pa->N)->capture_default_str();
    reg.handlers[ps] = [pa, &g, &reg] {
        auto P = exprs(pa->polys);
        std::vector<Integer> ks;
        for (const auto& s : pa->shifts) ks.push_back(to_integer(s));
        ApproxParams params{to_integer(pa->N)};
        if (g.dry) return reg.dry("pet-step");
        PetStep st = pet_successor(P, ks, params);
        json sys = json::array();
        for (const auto& x : st.system) sys.push_back(print(x));
        WeightVector before = weight_vector(P), after = weight_vector(st.system);
        return Outcome{json{{"system", sys},
                            {"weight_before", before},
                            {"weight_after", after},
                            {"order", order_name(pet_compare(after, before))},
                            {"conditions", st.C1.to_json()}}};
    };
}

void add_fs_commands(CLI::App& app, Registry& reg) {
    Globals& g = *reg.g;
    auto* fs = app.add_subcommand("fs", "Finite sums and IP-set refinements");
    fs->require_subcommand(1);

    struct FsArgs {
        std::string gen, depth = "10", m, count, q, expr, eps = "1/10", k = "2", budget = "1000000";
        std::vector<std::string> alpha, b, beta, c;
    };
    auto A = std::make_shared<FsArgs>();

    auto* en = fs->add_subcommand("enum", "All finite sums up to a depth");
    en->add_option("--gens,--gen", A->gen, "1,2,4 | ones:K | random:K:MAX")->required();
    en->add_option("--depth", A->depth)->capture_default_str();
    reg.handlers[en] = [A, &g, &reg] {
        FSGenerators gen = generators(A->gen, g.seed);
        unsigned depth = small(to_integer(A->depth), "depth");
        if (g.dry) return reg.dry("fs enum");
        FSSet s = fs_enumerate(gen, depth);
        Outcome o;
        o.result = json::array();
        o.header = {"alpha", "value"};
        for (const auto& e : s.entries) {
            o.result.push_back({{"alpha", e.alpha}, {"value", jint(e.value)}});
            std::string al;
            for (auto i : e.alpha) al += (al.empty() ? "" : " ") + std::to_string(i);
            o.rows.push_back({al, e.value.get_str()});
        }
        return o;
    };

    auto* rf = fs->add_subcommand("refine", "Blocks with sums divisible by m");
    rf->add_option("--gens,--gen", A->gen)->required();
    rf->add_option("--m", A->m)->required();
    rf->add_option("--count", A->count);
    reg.handlers[rf] = [A, &g, &reg] {
        FSGenerators gen = generators(A->gen, g.seed);
        Integer m = to_integer(A->m);
        std::optional<std::size_t> count;
        if (!A->count.empty()) count = small(to_integer(A->count), "count");
        if (g.dry) return reg.dry("fs refine");
        RefineResult r = divisible_refine(gen, m, count);
        return Outcome{json{{"generators", jints(r.generators)}, {"supports", r.supports}}};
    };

    auto* cr = fs->add_subcommand("cell-refine", "Sub-IP set inside cell 1 of the given families");
    cr->add_option("--gens,--gen", A->gen)->required();
    cr->add_option("--alpha", A->alpha, "family {alpha n} (repeat)");
    cr->add_option("--b", A->b, "coefficients for {b ni(alpha n)}");
    cr->add_option("--beta", A->beta, "family {beta n} (repeat)");
    cr->add_option("--c", A->c, "coefficients for {c ni(beta n)}");
    cr->add_option("--eps", A->eps)->capture_default_str();
    cr->add_option("--k", A->k)->capture_default_str();
    cr->add_option("--budget", A->budget)->capture_default_str();
    reg.handlers[cr] = [A, &g, &reg] {
        FSGenerators gen = generators(A->gen, g.seed);
        CellSpec spec;
        for (const auto& s : A->alpha) spec.alpha.push_back(parse_scalar(s));
        for (const auto& s : A->b) spec.b.push_back(parse_scalar(s));
        for (const auto& s : A->beta) spec.beta.push_back(parse_scalar(s));
        for (const auto& s : A->c) spec.c.push_back(parse_scalar(s));
        Rational eps = parse_rational(A->eps);
        unsigned k = small(to_integer(A->k), "k");
        Integer budget = to_integer(A->budget);
        if (!budget.fits_ulong_p()) throw DomainError("budget out of range");
        if (g.dry) return reg.dry("fs cell-refine");
        auto r = cell_refine(gen, spec, eps, k, budget.get_ui());
        if (!r) return Outcome{json{{"found", false}}, true};
        return Outcome{json{{"found", true},
                            {"generators", jints(r->chosen.generators)},
                            {"supports", r->chosen.supports},
                            {"m", r->m},
                            {"cells", r->cells},
                            {"checks", r->checks}}};
    };

    auto* sp = fs->add_subcommand("spectra", "Generators n_i / q; each must be divisible by q");
    sp->add_option("--gens,--gen", A->gen)->required();
    sp->add_option("--q", A->q)->required();
    reg.handlers[sp] = [A, &g, &reg] {
        FSGenerators gen = generators(A->gen, g.seed);
        Integer q = to_integer(A->q);
        if (g.dry) return reg.dry("fs spectra");
        return Outcome{jints(spectra_div(gen, q))};
    };

    auto* sc = fs->add_subcommand("scale", "q times every finite sum");
    sc->add_option("--gens,--gen", A->gen)->required();
    sc->add_option("--q", A->q)->required();
    sc->add_option("--depth", A->depth)->capture_default_str();
    reg.handlers[sc] = [A, &g, &reg] {
        FSGenerators gen = generators(A->gen, g.seed);
        Integer q = to_integer(A->q);
        unsigned depth = small(to_integer(A->depth), "depth");
        if (g.dry) return reg.dry("fs scale");
        FSSet s = scale_members(fs_enumerate(gen, depth), q);
        return value_rows(jints(s.values), s.values, "value");
    };

    auto* ic = fs->add_subcommand("image-check", "p(n_alpha) = sum of p(n_i) over alpha");
    ic->add_option("--expr", A->expr)->required();
    ic->add_option("--gens,--gen", A->gen)->required();
    ic->add_option("--depth", A->depth)->capture_default_str();
    reg.handlers[ic] = [A, &g, &reg] {
        GPExpr p = parse(A->expr);
        FSGenerators gen = generators(A->gen, g.seed);
        unsigned depth = small(to_integer(A->depth), "depth");
        if (g.dry) return reg.dry("fs image-check");
        return Outcome{json(image_additivity_check(p, gen, depth))};
    };
}

void add_cset_commands(CLI::App& app, Registry& reg) {
    Globals& g = *reg.g;
    auto* cs = app.add_subcommand("cset", "Constraint sets {q(n + shift)} in (-delta, delta)");
    cs->require_subcommand(1);

    struct CsArgs {
        std::vector<std::string> cond, with;
        std::string n, lo, hi, gen, budget;
    };
    auto A = std::make_shared<CsArgs>();
    const char* cond_help = "expr;delta[;shift] (repeat)";

    auto* mb = cs->add_subcommand("member", "Membership of one integer");
    mb->add_option("--cond", A->cond, cond_help);
    mb->add_option("--n", A->n)->required();
    reg.handlers[mb] = [A, &g, &reg] {
        ConstraintSet c = conditions(A->cond);
        Integer n = to_integer(A->n);
        if (g.dry) return reg.dry("cset member");
        return Outcome{json(c_membership(n, c))};
    };

    auto* en = cs->add_subcommand("enum", "Members in [lo, hi]");
    en->add_option("--cond", A->cond, cond_help);
    en->add_option("--lo", A->lo)->required();
    en->add_option("--hi", A->hi)->required();
    en->add_option("--budget", A->budget, "maximum range length");
    reg.handlers[en] = [A, &g, &reg] {
        ConstraintSet c = conditions(A->cond);
        Integer lo = to_integer(A->lo), hi = to_integer(A->hi);
        std::uint64_t budget = 10000000;
        if (!A->budget.empty()) budget = to_integer(A->budget).get_ui();
        if (lo > hi) throw DomainError("empty range: lo > hi");
        Integer len = hi - lo + 1;
        if (!len.fits_ulong_p() || len.get_ui() > budget)
            throw BudgetExceeded("range of " + len.get_str() + " integers exceeds the budget of " + std::to_string(budget));
        if (g.dry) return reg.dry("cset enum");
        auto v = parallel_range(lo, hi, g.jobs, [&](const Integer& a, const Integer& b) {
            return c_enumerate(c, a, b, ~std::uint64_t{0});
        });
        return value_rows(jints(v), v);
    };

    auto* is = cs->add_subcommand("intersect", "Intersection of two sets");
    is->add_option("--cond", A->cond, cond_help);
    is->add_option("--with", A->with, "conditions of the second set");
    reg.handlers[is] = [A, &g, &reg] {
        ConstraintSet a = conditions(A->cond), b = conditions(A->with);
        if (g.dry) return reg.dry("cset intersect");
        return Outcome{c_intersect(a, b).to_json()};
    };

    auto* ip = cs->add_subcommand("ip-witness", "First finite sum of the generators inside the set");
    ip->add_option("--cond", A->cond, cond_help);
    ip->add_option("--gens,--gen", A->gen)->required();
    ip->add_option("--budget", A->budget, "index sets to try");
    reg.handlers[ip] = [A, &g, &reg] {
        ConstraintSet c = conditions(A->cond);
        FSGenerators gen = generators(A->gen, g.seed);
        std::uint64_t budget = std::uint64_t{1} << 16;
        if (!A->budget.empty()) budget = to_integer(A->budget).get_ui();
        if (g.dry) return reg.dry("cset ip-witness");
        auto w = ip_intersection_witness(c, gen, budget);
        if (!w) return Outcome{json{{"found", false}}, true};
        return Outcome{json{{"found", true}, {"alpha", w->alpha}, {"value", jint(w->value)}, {"checked", w->checked}}};
    };
}

void add_sim_commands(CLI::App& app, Registry& reg) {
    Globals& g = *reg.g;
    auto* sim = app.add_subcommand("sim", "Torus systems: returns, hitting sets, recurrence searches");
    sim->require_subcommand(1);

    struct SimArgs {
        std::string system, x, eps = "1/10", N = "1000", grid = "8", box, gen, r = "0", depth = "3", k = "2",
                                budget = "100000";
        std::vector<std::string> polys, targets;
    };
    auto A = std::make_shared<SimArgs>();
    const char* sys_help = "rotation:ALPHA | skew2:ALPHA | skew<d>d:ALPHA";

    auto* rt = sim->add_subcommand("return", "Return times of a point");
    rt->add_option("--system", A->system, sys_help)->required();
    rt->add_option("--x", A->x, "comma-separated coordinates (default origin)");
    rt->add_option("--eps", A->eps)->capture_default_str();
    rt->add_option("--N", A->N)->capture_default_str();
    reg.handlers[rt] = [A, &g, &reg] {
        System s = parse_system(A->system);
        Point x = point(A->x, s.dim);
        Rational eps = parse_rational(A->eps);
        Integer N = to_integer(A->N);
        if (g.dry) return reg.dry("sim return");
        auto v = return_set(s, x, eps, N);
        return value_rows(jints(v), v);
    };

    auto* ht = sim->add_subcommand("hit", "Hitting times along polynomials");
    ht->add_option("--system", A->system, sys_help)->required();
    ht->add_option("--box", A->box, "source region U")->required();
    ht->add_option("--target", A->targets, "region V_t (repeat, one per --poly)")->required();
    ht->add_option("--poly", A->polys)->required();
    ht->add_option("--N", A->N)->capture_default_str();
    ht->add_option("--grid", A->grid)->capture_default_str();
    reg.handlers[ht] = [A, &g, &reg] {
        System s = parse_system(A->system);
        BoxRegion u = parse_box(A->box);
        std::vector<BoxRegion> vs;
        for (const auto& t : A->targets) vs.push_back(parse_box(t));
        auto P = exprs(A->polys);
        Integer N = to_integer(A->N);
        unsigned grid = small(to_integer(A->grid), "grid");
        if (grid < 8) throw DomainError("grid must be at least 8");
        if (g.dry) return reg.dry("sim hit");
        auto v = hitting_set(s, u, vs, P, N, grid);
        return value_rows(jints(v), v);
    };

    auto* vd = sim->add_subcommand("vdw", "Search n and x with T^{p_t(n)} x near x for all t");
    vd->add_option("--system", A->system, sys_help)->required();
    vd->add_option("--poly", A->polys)->required();
    vd->add_option("--eps", A->eps)->capture_default_str();
    vd->add_option("--N", A->N)->capture_default_str();
    vd->add_option("--grid", A->grid)->capture_default_str();
    reg.handlers[vd] = [A, &g, &reg] {
        System s = parse_system(A->system);
        auto P = exprs(A->polys);
        Rational eps = parse_rational(A->eps);
        Integer N = to_integer(A->N);
        unsigned grid = small(to_integer(A->grid), "grid");
        if (g.dry) return reg.dry("sim vdw");
        auto hit = vdw_search(s, P, eps, N, grid);
        if (!hit) return Outcome{json{{"found", false}}, true};
        json dist = json::array();
        for (const auto& p : P) dist.push_back(torus_distance(orbit_point(s, hit->x, eval_int(p, hit->n)), hit->x).approx());
        return Outcome{json{{"found", true}, {"n", jint(hit->n)}, {"x", jpoint(hit->x)}, {"distances", dist}}};
    };

    auto* ds = sim->add_subcommand("descend", "Descending sequence of boxes along an IP set");
    ds->add_option("--system", A->system, sys_help)->required();
    ds->add_option("--poly", A->polys)->required();
    ds->add_option("--target", A->targets, "V_i (repeat, one per --poly)")->required();
    ds->add_option("--gens,--gen", A->gen)->required();
    ds->add_option("--r", A->r, "growth list r(0),r(1),..")->capture_default_str();
    ds->add_option("--depth", A->depth)->capture_default_str();
    ds->add_option("--budget", A->budget)->capture_default_str();
    ds->add_option("--grid", A->grid)->capture_default_str();
    reg.handlers[ds] = [A, &g, &reg] {
        System s = parse_system(A->system);
        auto P = exprs(A->polys);
        std::vector<BoxRegion> vs;
        for (const auto& t : A->targets) vs.push_back(parse_box(t));
        FSGenerators gen = generators(A->gen, g.seed);
        std::vector<Integer> r = integer_list(A->r);
        unsigned depth = small(to_integer(A->depth), "depth");
        Integer budget = to_integer(A->budget);
        unsigned grid = small(to_integer(A->grid), "grid");
        if (!budget.fits_ulong_p()) throw DomainError("budget out of range");
        if (g.dry) return reg.dry("sim descend");
        auto d = descending_refine(s, P, vs, gen, r, depth, budget.get_ui(), grid);
        if (!d) return Outcome{json{{"found", false}}, true};
        json boxes = json::array();
        for (const auto& stage : d->boxes) {
            json b = json::array();
            for (const auto& x : stage) b.push_back(x.to_string());
            boxes.push_back(b);
        }
        return Outcome{json{{"found", true},
                            {"alphas", d->alphas},
                            {"values", jints(d->values)},
                            {"boxes", boxes},
                            {"checked", d->checked},
                            {"verified", verify_descent(s, P, vs, r, *d)}}};
    };

    auto* iw = sim->add_subcommand("ip-witness", "k generators whose finite sums all return");
    iw->add_option("--system", A->system, sys_help)->required();
    iw->add_option("--x", A->x);
    iw->add_option("--eps", A->eps)->capture_default_str();
    iw->add_option("--N", A->N)->capture_default_str();
    iw->add_option("--k", A->k)->capture_default_str();
    iw->add_option("--budget", A->budget)->capture_default_str();
    reg.handlers[iw] = [A, &g, &reg] {
        System s = parse_system(A->system);
        Point x = point(A->x, s.dim);
        Rational eps = parse_rational(A->eps);
        Integer N = to_integer(A->N);
        unsigned k = small(to_integer(A->k), "k");
        Integer budget = to_integer(A->budget);
        if (!budget.fits_ulong_p()) throw DomainError("budget out of range");
        if (g.dry) return reg.dry("sim ip-witness");
        auto w = fs_witness_in_set(return_set(s, x, eps, N), k, budget.get_ui());
        if (!w) return Outcome{json{{"found", false}}, true};
        return Outcome{json{{"found", true}, {"generators", jints(*w)}}};
    };
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int nesting);

int execute(CLI::App& app, Registry& reg, Globals& g, std::ostream& out, std::ostream& err, int nesting) {
    if (!g.manifest.empty()) {
        if (nesting > 0) throw CLI::ValidationError("a manifest cannot load another manifest");
        std::ifstream in(g.manifest);
        if (!in) throw DomainError("cannot read manifest " + g.manifest);
        Manifest m = Manifest::from_json(json::parse(in));
        return dispatch(m.to_args(), out, err, nesting + 1);
    }
    if (g.format != "json" && g.format != "table" && g.format != "csv")
        throw CLI::ValidationError("--format must be json, table or csv");
    if (g.jobs == 0) throw CLI::ValidationError("--jobs must be positive");
    if (g.precision_cap) set_precision_cap(g.precision_cap);

    const CLI::App* leaf = selected_leaf(app);
    auto it = reg.handlers.find(leaf);
    if (it == reg.handlers.end()) throw CLI::CallForHelp();

    if (!g.save_manifest.empty()) {
        std::ofstream f(g.save_manifest);
        if (!f) throw DomainError("cannot write manifest " + g.save_manifest);
        f << manifest_of(app, g).to_json().dump(2) << "\n";
    }
    Outcome o = it->second();
    json payload = o.result;
    if (g.envelope) payload = json{{"command", manifest_of(app, g).to_json()}, {"result", o.result}};
    if (g.format == "json")
        out << payload.dump() << "\n";
    else if (g.format == "table")
        write_table(out, payload);
    else
        write_csv(out, o);
    (void)err;
    return o.not_found ? not_found : ok;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int nesting) {
    CLI::App app{"Exact generalized-polynomial calculus, IP sets and torus recurrence", "gpolylab"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    Globals g;
    app.add_option("--format", g.format, "json | table | csv")->capture_default_str();
    app.add_option("--seed", g.seed, "seed for random generator specs")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads for range scans")->capture_default_str();
    app.add_option("--precision-cap", g.precision_cap, "sign-decision bit cap");
    app.add_flag("--dry-run", g.dry, "validate inputs only");
    app.add_flag("--envelope", g.envelope, "wrap the result with the replay manifest");
    app.add_option("--manifest", g.manifest, "replay a saved manifest");
    app.add_option("--save-manifest", g.save_manifest, "write the manifest of this run");
    app.set_config("--config", "", "key = value configuration file");

    Registry reg;
    reg.g = &g;
    add_expr_commands(app, reg);
    add_struct_commands(app, reg);
    add_fs_commands(app, reg);
    add_cset_commands(app, reg);
    add_sim_commands(app, reg);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        if (g.manifest.empty() && app.get_subcommands().empty()) throw CLI::CallForHelp();
        return execute(app, reg, g, out, err, nesting);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return args.empty() ? usage : ok;
    } catch (const CLI::Success&) {
        return ok;
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << "\n";
        return usage;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return budget;
    } catch (const SyntaxError& e) {
        err << "syntax error: " << e.what() << "\n";
        return failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
}

}  // namespace

json Manifest::to_json() const {
    return json{{"command", command}, {"parameters", parameters}, {"scalars", scalars},
                {"budgets", budgets}, {"seed", seed},             {"format", format}};
}

Manifest Manifest::from_json(const json& j) {
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.parameters = j.value("parameters", json::object());
    if (j.contains("scalars")) m.scalars = j.at("scalars").get<std::vector<std::string>>();
    m.budgets = j.value("budgets", json::object());
    m.seed = j.value("seed", std::uint64_t{0});
    m.format = j.value("format", std::string("json"));
    return m;
}

std::vector<std::string> Manifest::to_args() const {
    std::vector<std::string> args;
    std::istringstream in(command);
    for (std::string w; in >> w;) args.push_back(w);
    for (const auto& [k, v] : parameters.items()) {
        if (v.is_boolean()) {
            if (v.get<bool>()) args.push_back("--" + k);
            continue;
        }
        for (const auto& x : v) {
            args.push_back("--" + k);
            args.push_back(x.get<std::string>());
        }
    }
    args.push_back("--seed");
    args.push_back(std::to_string(seed));
    args.push_back("--format");
    args.push_back(format);
    if (budgets.contains("precision-cap")) {
        args.push_back("--precision-cap");
        args.push_back(budgets.at("precision-cap").get<std::string>());
    }
    return args;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return dispatch(args, out, err, 0);
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace gpolylab::cli
