#include "autocensus/folim.hpp"

#include "autocensus/error.hpp"
#include "detail.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace autocensus {

namespace {

std::vector<std::string> merge_sorted(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) { return std::binary_search(v.begin(), v.end(), s); }

// Variables bound somewhere inside a node, used to enforce single binding per path.
std::vector<std::string> bound_in(const Formula& f) {
    std::vector<std::string> out;
    const auto& nd = f.node();
    for (const auto& k : nd.kids) out = merge_sorted(out, bound_in(k));
    if (nd.kind == Formula::Kind::exists || nd.kind == Formula::Kind::forall) out = merge_sorted(out, {nd.var});
    return out;
}

}  // namespace

Formula::Formula() : Formula(truth()) {}

Formula Formula::make(Node n) {
    using K = Kind;
    switch (n.kind) {
    case K::truth:
    case K::falsity:
        break;
    case K::atom:
    case K::equal: {
        auto v = n.args;
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        n.free = v;
        break;
    }
    case K::exists:
    case K::forall: {
        const auto& body = n.kids.at(0);
        if (contains(bound_in(body), n.var)) throw Error("formula: variable '" + n.var + "' bound twice on one path");
        for (const auto& v : body.free_variables())
            if (v != n.var) n.free.push_back(v);
        n.rank = body.quantifier_rank() + 1;
        break;
    }
    default:
        for (const auto& k : n.kids) {
            n.free = merge_sorted(n.free, k.free_variables());
            n.rank = std::max(n.rank, k.quantifier_rank());
        }
    }
    return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::truth() {
    static const Formula t = Formula(std::make_shared<const Node>(Node{}));
    return t;
}

Formula Formula::falsity() {
    Node n;
    n.kind = Kind::falsity;
    return make(std::move(n));
}

Formula Formula::atom(int symbol, std::vector<std::string> args) {
    Node n;
    n.kind = Kind::atom;
    n.symbol = symbol;
    n.args = std::move(args);
    return make(std::move(n));
}

Formula Formula::equal(std::string a, std::string b) {
    Node n;
    n.kind = Kind::equal;
    n.args = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Formula Formula::negation(Formula f) {
    Node n;
    n.kind = Kind::negation;
    n.kids = {std::move(f)};
    return make(std::move(n));
}

Formula Formula::conjunction(std::vector<Formula> fs) {
    if (fs.empty()) return truth();
    if (fs.size() == 1) return fs[0];
    Node n;
    n.kind = Kind::conjunction;
    n.kids = std::move(fs);
    return make(std::move(n));
}

Formula Formula::disjunction(std::vector<Formula> fs) {
    if (fs.empty()) return falsity();
    if (fs.size() == 1) return fs[0];
    Node n;
    n.kind = Kind::disjunction;
    n.kids = std::move(fs);
    return make(std::move(n));
}

Formula Formula::implication(Formula a, Formula b) {
    Node n;
    n.kind = Kind::implication;
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Formula Formula::equivalence(Formula a, Formula b) {
    Node n;
    n.kind = Kind::equivalence;
    n.kids = {std::move(a), std::move(b)};
    return make(std::move(n));
}

Formula Formula::exists(std::string var, Formula body) {
    Node n;
    n.kind = Kind::exists;
    n.var = std::move(var);
    n.kids = {std::move(body)};
    return make(std::move(n));
}

Formula Formula::forall(std::string var, Formula body) {
    Node n;
    n.kind = Kind::forall;
    n.var = std::move(var);
    n.kids = {std::move(body)};
    return make(std::move(n));
}

Formula Formula::exists(const std::vector<std::string>& vars, Formula body) {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = exists(*it, std::move(body));
    return body;
}

Formula Formula::forall(const std::vector<std::string>& vars, Formula body) {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = forall(*it, std::move(body));
    return body;
}

std::size_t Formula::size() const {
    std::size_t s = 1;
    for (const auto& k : node_->kids) s += k.size();
    return s;
}

std::string Formula::to_string(const Vocabulary& voc) const {
    const auto& nd = *node_;
    auto join = [&](const char* op) {
        std::string s = "(";
        for (std::size_t i = 0; i < nd.kids.size(); ++i) {
            if (i) s += std::string(" ") + op + " ";
            s += nd.kids[i].to_string(voc);
        }
        return s + ")";
    };
    switch (nd.kind) {
    case Kind::truth: return "true";
    case Kind::falsity: return "false";
    case Kind::atom: {
        std::string s = voc.symbol(nd.symbol).name + "(";
        for (std::size_t i = 0; i < nd.args.size(); ++i) s += (i ? "," : "") + nd.args[i];
        return s + ")";
    }
    case Kind::equal: return nd.args[0] + " = " + nd.args[1];
    case Kind::negation: return "!" + nd.kids[0].to_string(voc);
    case Kind::conjunction: return join("&");
    case Kind::disjunction: return join("|");
    case Kind::implication: return join("->");
    case Kind::equivalence: return join("<->");
    case Kind::exists: return "(exists " + nd.var + ". " + nd.kids[0].to_string(voc) + ")";
    case Kind::forall: return "(forall " + nd.var + ". " + nd.kids[0].to_string(voc) + ")";
    }
    return {};
}

// ---- parser ----

namespace {

class FormulaParser {
public:
    FormulaParser(const Vocabulary& voc, const std::string& text) : voc_(voc), text_(text) { lex(); }

    Formula parse() {
        Formula f = formula();
        if (pos_ != toks_.size()) fail("unexpected '" + toks_[pos_] + "'");
        return f;
    }

private:
    void fail(const std::string& msg) const { throw ParseError("formula: " + msg); }

    void lex() {
        std::size_t i = 0;
        while (i < text_.size()) {
            unsigned char c = static_cast<unsigned char>(text_[i]);
            if (c >= 128) fail("non-ASCII input");
            if (std::isspace(c)) {
                ++i;
                continue;
            }
            if (std::isalpha(c) || c == '_') {
                std::size_t j = i;
                while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) ++j;
                toks_.push_back(text_.substr(i, j - i));
                i = j;
                continue;
            }
            if (text_.compare(i, 3, "<->") == 0) {
                toks_.push_back("<->");
                i += 3;
            } else if (text_.compare(i, 2, "->") == 0 || text_.compare(i, 2, "!=") == 0) {
                toks_.push_back(text_.substr(i, 2));
                i += 2;
            } else if (std::string("()&|!.,=").find(static_cast<char>(c)) != std::string::npos) {
                toks_.push_back(std::string(1, static_cast<char>(c)));
                ++i;
            } else {
                fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
            }
        }
    }

    bool at(const std::string& t) const { return pos_ < toks_.size() && toks_[pos_] == t; }
    bool accept(const std::string& t) {
        if (!at(t)) return false;
        ++pos_;
        return true;
    }
    void expect(const std::string& t) {
        if (!accept(t)) fail("expected '" + t + "'" + (pos_ < toks_.size() ? " before '" + toks_[pos_] + "'" : " at end"));
    }
    static bool is_ident(const std::string& t) {
        return !t.empty() && (std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_');
    }
    static bool reserved(const std::string& t) { return t == "exists" || t == "forall" || t == "true" || t == "false"; }
    std::string variable() {
        if (pos_ >= toks_.size() || !is_ident(toks_[pos_]) || reserved(toks_[pos_])) fail("expected a variable");
        return toks_[pos_++];
    }

    Formula formula() {
        Formula lhs = implication();
        while (accept("<->")) lhs = Formula::equivalence(lhs, implication());
        return lhs;
    }
    Formula implication() {
        Formula lhs = disjunction();
        if (accept("->")) return Formula::implication(lhs, implication());
        return lhs;
    }
    Formula disjunction() {
        std::vector<Formula> fs{conjunction()};
        while (accept("|")) fs.push_back(conjunction());
        return Formula::disjunction(std::move(fs));
    }
    Formula conjunction() {
        std::vector<Formula> fs{unary()};
        while (accept("&")) fs.push_back(unary());
        return Formula::conjunction(std::move(fs));
    }
    Formula unary() {
        if (accept("!")) return Formula::negation(unary());
        if (at("exists") || at("forall")) {
            bool ex = toks_[pos_++] == "exists";
            std::vector<std::string> vars{variable()};
            while (accept(",") || (pos_ < toks_.size() && is_ident(toks_[pos_]) && !reserved(toks_[pos_])))
                vars.push_back(variable());
            expect(".");
            Formula body = formula();
            try {
                return ex ? Formula::exists(vars, body) : Formula::forall(vars, body);
            } catch (const ParseError&) {
                throw;
            } catch (const Error& e) {
                throw ParseError(e.what());
            }
        }
        if (accept("(")) {
            Formula f = formula();
            expect(")");
            return f;
        }
        if (accept("true")) return Formula::truth();
        if (accept("false")) return Formula::falsity();
        if (pos_ >= toks_.size()) fail("unexpected end of input");
        if (!is_ident(toks_[pos_])) fail("unexpected '" + toks_[pos_] + "'");
        std::string name = toks_[pos_++];
        if (accept("(")) {
            int s = voc_.index_of(name);
            if (s < 0) fail("unknown symbol '" + name + "'");
            std::vector<std::string> args{variable()};
            while (accept(",")) args.push_back(variable());
            expect(")");
            if (static_cast<int>(args.size()) != voc_.symbol(s).arity)
                fail("symbol '" + name + "' has arity " + std::to_string(voc_.symbol(s).arity) + ", got " +
                     std::to_string(args.size()));
            return Formula::atom(s, std::move(args));
        }
        if (reserved(name)) fail("unexpected '" + name + "'");
        if (accept("=")) return Formula::equal(name, variable());
        if (accept("!=")) return Formula::negation(Formula::equal(name, variable()));
        fail("expected '=' or '(' after '" + name + "'");
        return {};
    }

    const Vocabulary& voc_;
    const std::string& text_;
    std::vector<std::string> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(const Vocabulary& voc, const std::string& text) { return FormulaParser(voc, text).parse(); }

// ---- evaluation ----

namespace {

void leaves(const Formula& f, Formula::Kind kind, std::vector<Formula>& out) {
    if (f.kind() == kind) {
        for (const auto& k : f.node().kids) leaves(k, kind, out);
    } else if (kind == Formula::Kind::disjunction && f.kind() == Formula::Kind::implication) {
        out.push_back(Formula::negation(f.node().kids[0]));
        leaves(f.node().kids[1], kind, out);
    } else {
        out.push_back(f);
    }
}

// Moves conjuncts (disjuncts) that do not mention the bound variable out of an existential
// (universal) quantifier, bottom-up. The universe is never empty, so this is an equivalence.
Formula miniscope(const Formula& f) {
    using K = Formula::Kind;
    const auto& nd = f.node();
    switch (nd.kind) {
    case K::truth:
    case K::falsity:
    case K::atom:
    case K::equal: return f;
    case K::negation: return Formula::negation(miniscope(nd.kids[0]));
    case K::implication: return Formula::implication(miniscope(nd.kids[0]), miniscope(nd.kids[1]));
    case K::equivalence: return Formula::equivalence(miniscope(nd.kids[0]), miniscope(nd.kids[1]));
    case K::conjunction:
    case K::disjunction: {
        std::vector<Formula> ks;
        for (const auto& k : nd.kids) ks.push_back(miniscope(k));
        return nd.kind == K::conjunction ? Formula::conjunction(std::move(ks)) : Formula::disjunction(std::move(ks));
    }
    case K::exists:
    case K::forall: {
        bool ex = nd.kind == K::exists;
        K join = ex ? K::conjunction : K::disjunction;
        std::vector<Formula> parts, indep, dep;
        leaves(miniscope(nd.kids[0]), join, parts);
        for (auto& g : parts) {
            const auto& fv = g.free_variables();
            (std::binary_search(fv.begin(), fv.end(), nd.var) ? dep : indep).push_back(g);
        }
        auto combine = [&](std::vector<Formula> v) {
            return ex ? Formula::conjunction(std::move(v)) : Formula::disjunction(std::move(v));
        };
        Formula inner = ex ? Formula::exists(nd.var, combine(dep)) : Formula::forall(nd.var, combine(dep));
        if (indep.empty()) return inner;
        indep.push_back(inner);
        return combine(std::move(indep));
    }
    }
    return f;
}

}  // namespace

struct Evaluator::Impl {
    struct CNode {
        Formula::Kind kind;
        int symbol = -1;
        std::vector<int> args;  // slots
        int var = -1;
        std::vector<int> kids;
        std::vector<int> free;  // slots, memoized quantifiers only
        bool memo = false;
        std::unordered_map<std::uint64_t, bool> table;
    };

    const Structure& M;
    std::vector<CNode> nodes;
    // Compiled nodes are keyed by address, so every compiled root is kept alive.
    std::vector<Formula> roots;
    std::unordered_map<const Formula::Node*, int> compiled;
    std::unordered_map<const Formula::Node*, int> rewritten;
    std::unordered_map<std::string, int> slot_of;
    std::vector<int> env;
    std::vector<int> tuple;

    explicit Impl(const Structure& m) : M(m) {
        int r = 0;
        for (int a : M.arities()) r = std::max(r, a);
        tuple.resize(static_cast<std::size_t>(std::max(r, 1)));
    }

    int slot(const std::string& name) {
        auto [it, fresh] = slot_of.emplace(name, static_cast<int>(slot_of.size()));
        if (fresh) env.push_back(-1);
        return it->second;
    }

    int compile(const Formula& f) {
        auto it = compiled.find(&f.node());
        if (it != compiled.end()) return it->second;
        const auto& nd = f.node();
        CNode c;
        c.kind = nd.kind;
        c.symbol = nd.symbol;
        for (const auto& a : nd.args) c.args.push_back(slot(a));
        if (!nd.var.empty()) c.var = slot(nd.var);
        for (const auto& k : nd.kids) c.kids.push_back(compile(k));
        if ((nd.kind == Formula::Kind::exists || nd.kind == Formula::Kind::forall) && nd.free.size() <= 2) {
            c.memo = true;
            for (const auto& v : nd.free) c.free.push_back(slot(v));
        }
        if (nd.kind == Formula::Kind::atom && nd.symbol >= M.symbol_count()) throw Error("formula: symbol outside the structure");
        int id = static_cast<int>(nodes.size());
        nodes.push_back(std::move(c));
        compiled.emplace(&f.node(), id);
        return id;
    }

    bool eval(int id) {
        using K = Formula::Kind;
        CNode& c = nodes[id];
        switch (c.kind) {
        case K::truth: return true;
        case K::falsity: return false;
        case K::atom:
            for (std::size_t i = 0; i < c.args.size(); ++i) tuple[i] = env[c.args[i]];
            return M.bit(M.cell(c.symbol, tuple.data()));
        case K::equal: return env[c.args[0]] == env[c.args[1]];
        case K::negation: return !eval(c.kids[0]);
        case K::conjunction:
            for (int k : c.kids)
                if (!eval(k)) return false;
            return true;
        case K::disjunction:
            for (int k : c.kids)
                if (eval(k)) return true;
            return false;
        case K::implication: return !eval(c.kids[0]) || eval(c.kids[1]);
        case K::equivalence: return eval(c.kids[0]) == eval(c.kids[1]);
        case K::exists:
        case K::forall: {
            std::uint64_t key = 0;
            if (c.memo) {
                for (int s : c.free) key = key * static_cast<std::uint64_t>(M.n() + 1) + static_cast<std::uint64_t>(env[s]);
                auto hit = c.table.find(key);
                if (hit != c.table.end()) return hit->second;
            }
            bool want = c.kind == K::exists;
            int saved = env[c.var];
            bool result = !want;
            int body = c.kids[0];
            for (int v = 0; v < M.n(); ++v) {
                env[c.var] = v;
                if (eval(body) == want) {
                    result = want;
                    break;
                }
            }
            env[c.var] = saved;
            if (c.memo) c.table.emplace(key, result);
            return result;
        }
        }
        return false;
    }
};

Evaluator::Evaluator(const Structure& M) : impl_(std::make_unique<Impl>(M)) {}
Evaluator::~Evaluator() = default;

bool Evaluator::operator()(const Formula& phi, const Assignment& a) {
    int root;
    auto known = impl_->rewritten.find(&phi.node());
    if (known != impl_->rewritten.end()) {
        root = known->second;
    } else {
        Formula m = miniscope(phi);
        root = impl_->compile(m);
        impl_->roots.push_back(phi);
        impl_->roots.push_back(m);
        impl_->rewritten.emplace(&phi.node(), root);
    }
    for (const auto& v : phi.free_variables()) {
        auto it = a.find(v);
        if (it == a.end()) throw Error("evaluate: unassigned free variable '" + v + "'");
        if (it->second < 0 || it->second >= impl_->M.n()) throw Error("evaluate: value of '" + v + "' outside the universe");
        impl_->env[impl_->slot(v)] = it->second;
    }
    return impl_->eval(root);
}

std::vector<int> Evaluator::satisfying(const Formula& phi) {
    if (phi.free_variables().size() != 1) throw Error("satisfying: formula needs exactly one free variable");
    const auto& v = phi.free_variables()[0];
    std::vector<int> out;
    for (int a = 0; a < impl_->M.n(); ++a)
        if ((*this)(phi, {{v, a}})) out.push_back(a);
    return out;
}

bool evaluate(const Structure& M, const Formula& phi, const Assignment& a) { return Evaluator(M)(phi, a); }

// ---- the support and orbit formulas ----

namespace {

Formula distinct(const std::vector<std::string>& vs) {
    std::vector<Formula> fs;
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j) fs.push_back(Formula::negation(Formula::equal(vs[i], vs[j])));
    return Formula::conjunction(std::move(fs));
}

// S(u, z, ..., z) <-> S(v, z, ..., z) over every symbol of arity >= 2; with `last` the
// distinguished coordinate is the final one instead of the first.
Formula agree(const Vocabulary& voc, const std::string& u, const std::string& v, const std::string& z, bool last) {
    std::vector<Formula> fs;
    for (int s = 0; s < voc.rho(); ++s) {
        int a = voc.symbol(s).arity;
        if (a < 2) continue;
        std::vector<std::string> tu(a, z), tv(a, z);
        int pos = last ? a - 1 : 0;
        tu[pos] = u;
        tv[pos] = v;
        fs.push_back(Formula::equivalence(Formula::atom(s, tu), Formula::atom(s, tv)));
    }
    return Formula::conjunction(std::move(fs));
}

void check_m(int m) {
    if (m < 2) throw Error("theta/xi: m must be at least 2");
}

}  // namespace

Formula theta(const Vocabulary& voc, int m, const std::string& x, ThetaForm form) {
    check_m(m);
    std::string w1 = x + "_w1", z = x + "_z";
    if (form == ThetaForm::counting) {
        std::vector<std::string> spare, zs;
        for (int i = 2; i < m; ++i) spare.push_back(x + "_w" + std::to_string(i));
        for (int i = 1; i < m; ++i) zs.push_back(x + "_d" + std::to_string(i));
        std::vector<std::string> all{x, w1};
        all.insert(all.end(), spare.begin(), spare.end());
        // m-1 distinct elements off {x, w1} on which x and w1 disagree.
        std::vector<Formula> bad{distinct(zs)};
        for (const auto& d : zs)
            bad.push_back(Formula::conjunction({Formula::negation(Formula::equal(d, x)), Formula::negation(Formula::equal(d, w1)),
                                                Formula::negation(agree(voc, x, w1, d, false))}));
        Formula room = Formula::exists(spare, distinct(all));
        return Formula::exists(w1, Formula::conjunction({Formula::negation(Formula::equal(x, w1)), room,
                                                         Formula::negation(Formula::exists(zs, Formula::conjunction(bad)))}));
    }
    std::vector<std::string> ys{w1};
    for (int i = 2; i < m; ++i) ys.push_back(x + "_w" + std::to_string(i));
    std::vector<std::string> all{x};
    all.insert(all.end(), ys.begin(), ys.end());
    std::vector<Formula> outside;
    for (const auto& u : all) outside.push_back(Formula::negation(Formula::equal(z, u)));
    Formula body = Formula::forall(z, Formula::implication(Formula::conjunction(outside), agree(voc, x, w1, z, false)));
    return Formula::exists(ys, Formula::conjunction({distinct(all), body}));
}

Formula xi(const Vocabulary& voc, int m, const std::string& x1, const std::string& x2, ThetaForm form) {
    check_m(m);
    std::string z = x1 + "_" + x2 + "_z";
    return Formula::forall(z, Formula::implication(Formula::negation(theta(voc, m, z, form)), agree(voc, x1, x2, z, true)));
}

Formula chi(const Vocabulary& voc, const Structure& A) {
    if (A.arities() != voc.arities()) throw Error("chi: structure does not match the vocabulary");
    int p = A.n();
    std::vector<std::string> xs;
    for (int i = 1; i <= p; ++i) xs.push_back("x" + std::to_string(i));
    std::vector<Formula> fs{distinct(xs)};
    for (int s = 0; s < voc.rho(); ++s) {
        int a = voc.symbol(s).arity;
        std::vector<int> t(a, 0);
        std::vector<std::string> args(a);
        while (true) {
            for (int j = 0; j < a; ++j) args[j] = xs[t[j]];
            Formula at = Formula::atom(s, args);
            fs.push_back(A.bit(A.cell(s, t.data())) ? at : Formula::negation(at));
            int j = a - 1;
            while (j >= 0 && ++t[j] == p) t[j--] = 0;
            if (j < 0) break;
        }
    }
    return Formula::conjunction(std::move(fs));
}

Formula psi(const Vocabulary& voc, const Structure& A, const PermutationGroup& H, ThetaForm form) {
    make_scenario(A, H);  // validates the pair
    int p = A.n();
    std::vector<std::string> xs;
    for (int i = 1; i <= p; ++i) xs.push_back("x" + std::to_string(i));
    auto orbit = orbits_on_tuples(H, 1).block_of;

    std::vector<Formula> parts{chi(voc, A)};
    std::vector<Formula> is_x;
    for (const auto& x : xs) is_x.push_back(Formula::equal("y", x));
    parts.push_back(Formula::forall("y", Formula::equivalence(theta(voc, p, "y", form), Formula::disjunction(is_x))));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;
            Formula f = xi(voc, p, xs[i], xs[j], form);
            parts.push_back(orbit[i] == orbit[j] ? f : Formula::negation(f));
        }
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;
            std::string y = "u" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
            Formula lhs = Formula::conjunction({Formula::negation(theta(voc, p, y, form)), xi(voc, p, xs[i], xs[j], form)});
            Formula rhs = Formula::conjunction({Formula::equivalence(xi(voc, p, y, xs[i], form), xi(voc, p, y, xs[j], form)),
                                                Formula::equivalence(xi(voc, p, xs[i], y, form), xi(voc, p, xs[j], y, form))});
            parts.push_back(Formula::forall(y, Formula::implication(lhs, rhs)));
        }
    return Formula::exists(xs, Formula::conjunction(std::move(parts)));
}

// ---- extension property ----

namespace {

// One probe: a tuple over roles. Role 0 is the fresh element c, roles 1..k the members of
// B, roles k+1..k+p the members of X.
struct Probe {
    int symbol;
    std::vector<int> roles;
    std::size_t cls;
};

std::vector<Probe> extension_probes(const Vocabulary& voc, int p, const PartitionSequence& Pi, int k,
                                    std::size_t& classes) {
    int roles = 1 + k + p;
    std::map<std::vector<int>, std::size_t> key_index;
    std::vector<Probe> out;
    for (int s = 0; s < voc.rho(); ++s) {
        int a = voc.symbol(s).arity;
        Mode mode = voc.symbol(s).mode;
        std::vector<int> t(a, 0);
        while (true) {
            bool has_c = std::count(t.begin(), t.end(), 0) > 0;
            std::vector<int> sorted = t;
            std::sort(sorted.begin(), sorted.end());
            bool inj = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
            if (has_c && (mode == Mode::general || inj)) {
                std::vector<int> key{s};
                std::vector<int> xs;
                if (mode == Mode::symmetric) {
                    // Orderings are merged, so the class is the role set with X collapsed to
                    // the union of the Pi-blocks of all its orderings.
                    for (int v : sorted)
                        if (v <= k) key.push_back(v);
                        else xs.push_back(v - k - 1);
                    key.push_back(-1);
                    if (!xs.empty()) {
                        const auto& P = Pi.pi(static_cast<int>(xs.size()));
                        int best = INT32_MAX;
                        std::sort(xs.begin(), xs.end());
                        do {
                            std::size_t idx = 0;
                            for (int v : xs) idx = idx * p + v;
                            best = std::min(best, P.block_of[idx]);
                        } while (std::next_permutation(xs.begin(), xs.end()));
                        key.push_back(static_cast<int>(xs.size()));
                        key.push_back(best);
                    }
                } else {
                    for (int v : t)
                        if (v <= k) key.push_back(v);
                        else {
                            key.push_back(-1);
                            xs.push_back(v - k - 1);
                        }
                    if (!xs.empty()) {
                        std::size_t idx = 0;
                        for (int v : xs) idx = idx * p + v;
                        key.push_back(Pi.pi(static_cast<int>(xs.size())).block_of[idx]);
                    }
                }
                auto [it, fresh] = key_index.emplace(key, key_index.size());
                (void)fresh;
                out.push_back({s, t, it->second});
            }
            int j = a - 1;
            while (j >= 0 && ++t[j] == roles) t[j--] = 0;
            if (j < 0) break;
        }
    }
    classes = key_index.size();
    return out;
}

}  // namespace

std::size_t extension_bits(const Vocabulary& voc, const std::vector<int>& X, const PartitionSequence& Pi, int k) {
    std::size_t classes = 0;
    extension_probes(voc, static_cast<int>(X.size()), Pi, k, classes);
    return classes;
}

bool has_k_extension(const Vocabulary& voc, const Structure& M, const std::vector<int>& X, const PartitionSequence& Pi,
                     int k) {
    int n = M.n(), p = static_cast<int>(X.size());
    if (k < 0) throw Error("has_k_extension: k < 0");
    std::vector<char> in_X(n, 0);
    for (int x : X) {
        if (x < 0 || x >= n) throw Error("has_k_extension: X is not inside the universe");
        in_X[x] = 1;
    }
    std::vector<int> outside;
    for (int v = 0; v < n; ++v)
        if (!in_X[v]) outside.push_back(v);
    int out = static_cast<int>(outside.size());
    if (k > out) return true;  // no B of size k
    std::size_t classes = 0;
    auto probes = extension_probes(voc, p, Pi, k, classes);
    std::uint64_t candidates = static_cast<std::uint64_t>(out - k);
    if (classes >= 63 || (std::uint64_t{1} << classes) > candidates) return false;
    std::uint64_t need = std::uint64_t{1} << classes;

    std::vector<int> role(1 + k + p), tuple(static_cast<std::size_t>(std::max(voc.r(), 1)));
    for (int i = 0; i < p; ++i) role[1 + k + i] = X[i];
    std::vector<int> b(k);
    std::iota(b.begin(), b.end(), 0);
    std::vector<char> in_B(n, 0);
    std::unordered_set<std::uint64_t> seen;
    std::vector<int> value(classes);
    while (true) {
        for (int i = 0; i < k; ++i) {
            role[1 + i] = outside[b[i]];
            in_B[outside[b[i]]] = 1;
        }
        seen.clear();
        for (int c : outside) {
            if (in_B[c]) continue;
            role[0] = c;
            std::fill(value.begin(), value.end(), -1);
            bool consistent = true;
            for (const auto& pr : probes) {
                for (std::size_t j = 0; j < pr.roles.size(); ++j) tuple[j] = role[pr.roles[j]];
                int bit = M.bit(M.cell(pr.symbol, tuple.data()));
                if (value[pr.cls] < 0) value[pr.cls] = bit;
                else if (value[pr.cls] != bit) {
                    consistent = false;
                    break;
                }
            }
            if (!consistent) continue;
            std::uint64_t sig = 0;
            for (std::size_t j = 0; j < classes; ++j) sig |= static_cast<std::uint64_t>(value[j]) << j;
            seen.insert(sig);
            if (seen.size() == need) break;
        }
        for (int i = 0; i < k; ++i) in_B[outside[b[i]]] = 0;
        if (seen.size() != need) return false;
        int i = k - 1;
        while (i >= 0 && b[i] == out - k + i) --i;
        if (i < 0) break;
        ++b[i];
        for (int j = i + 1; j < k; ++j) b[j] = b[j - 1] + 1;
    }
    return true;
}

// ---- sampling ----

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(splitmix64(seed) ^ index); }

TnSampler::TnSampler(const Sampler& s) : cfg_(s), space_(s.voc, s.scenario, s.Pi, s.n) {}

Structure TnSampler::draw(std::uint64_t trial) const {
    std::mt19937_64 gen(derive_seed(cfg_.seed, trial));
    Structure M = space_.base();
    std::uint64_t word = 0;
    for (std::size_t b = 0; b < space_.free_bits(); ++b) {
        if ((b & 63) == 0) word = gen();
        if ((word >> (b & 63)) & 1) space_.set_bit(M, b, true);
    }
    return M;
}

Structure sample_Tn(const Sampler& s) { return TnSampler(s).draw(0); }

// ---- Monte Carlo ----

std::vector<std::uint64_t> allocate_trials(const std::vector<Rational>& weights, std::uint64_t trials) {
    std::vector<std::uint64_t> out(weights.size(), 0);
    std::vector<std::pair<Rational, std::size_t>> rem;
    std::uint64_t used = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        Rational q = weights[i] * trials;
        BigInt fl = numerator(q) / denominator(q);
        out[i] = static_cast<std::uint64_t>(fl);
        used += out[i];
        rem.emplace_back(q - Rational(fl), i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; used < trials && j < rem.size(); ++j, ++used) ++out[rem[j].second];
    for (auto& t : out)
        if (t == 0) t = 1;
    return out;
}

McResult mc_sentence_probability(const Vocabulary& voc, const std::vector<WeightedScenario>& scenarios, const Formula& phi,
                                 int n, std::uint64_t trials, std::uint64_t seed, const McOptions& opt) {
    if (trials == 0) throw Error("mc: zero trials");
    if (scenarios.empty()) throw Error("mc: weight mismatch (no scenarios)");
    if (!phi.is_sentence()) throw Error("mc: formula has free variables");
    Rational total = 0;
    std::vector<Rational> w;
    for (const auto& s : scenarios) {
        if (s.weight < 0) throw Error("mc: weight mismatch (negative weight)");
        total += s.weight;
        w.push_back(s.weight);
    }
    if (total != 1) throw Error("mc: weight mismatch (weights sum to " + to_string(total) + ")");
    if (opt.decision && phi.quantifier_rank() > 3)
        throw GuardError("decision-qr", "decision mode needs quantifier rank <= 3, got " + std::to_string(phi.quantifier_rank()));

    auto alloc = allocate_trials(w, trials);
    McResult res;
    res.estimate = 0;
    double var = 0;
    bool all_verdicts = true;
    Rational decided = 0;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        auto sc = make_scenario(scenarios[i].A, scenarios[i].H);
        auto seqs = partition_sequences(sc, voc.r());
        Sampler cfg{voc, sc, seqs.front(), n, derive_seed(seed, i)};
        TnSampler sampler(cfg);
        McScenarioReport rep;
        rep.trials = alloc[i];
        BigInt hits = detail::parallel_sum(alloc[i], opt.jobs, [&](std::size_t t) -> BigInt {
            Structure M = sampler.draw(t);
            return Evaluator(M)(phi) ? 1 : 0;
        });
        rep.successes = static_cast<std::uint64_t>(hits);
        Rational ph(rep.successes, rep.trials);
        res.estimate += w[i] * ph;
        double pd = static_cast<double>(rep.successes) / static_cast<double>(rep.trials);
        double wd = to_double(w[i]);
        var += wd * wd * pd * (1 - pd) / static_cast<double>(rep.trials);

        if (opt.decision) {
            Formula th = theta(voc, sc.p(), "x", ThetaForm::counting);
            for (int a = 0; a < opt.witness_attempts; ++a) {
                Structure M = sampler.draw((std::uint64_t{1} << 62) + static_cast<std::uint64_t>(a));
                Evaluator ev(M);
                if (ev.satisfying(th) != sc.X) {
                    ++rep.rejected_witnesses;
                    continue;
                }
                rep.theta_verified = true;
                rep.extension_verified = has_k_extension(voc, M, sc.X, cfg.Pi, phi.quantifier_rank());
                rep.verdict = ev(phi);
                break;
            }
            if (rep.verdict) {
                if (*rep.verdict) decided += w[i];
            } else {
                all_verdicts = false;
            }
        }
        res.scenarios.push_back(rep);
    }
    res.standard_error = std::sqrt(var);
    if (opt.decision && all_verdicts) res.decision_value = decided;
    return res;
}

}  // namespace autocensus
