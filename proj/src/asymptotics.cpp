#include "autocensus/asymptotics.hpp"

#include "autocensus/census.hpp"
#include "autocensus/error.hpp"
#include "autocensus/support.hpp"
#include "detail.hpp"

#include <algorithm>
#include <climits>
#include <set>
#include <sstream>

namespace autocensus {

namespace {

Rational power_of_two(const BigInt& e) {
    if (e >= 0) return Rational(pow2(e));
    return Rational(BigInt(1), pow2(-e));
}

void require_general(const Vocabulary& voc, const char* what) {
    if (!voc.all_general()) throw Error(std::string(what) + ": asymptotic estimates cover general-mode vocabularies only");
}

// Permutation induced by g on t-tuples over [p], as an index map.
std::vector<std::size_t> tuple_map(const Permutation& g, int p, int t) {
    std::size_t total = 1;
    for (int i = 0; i < t; ++i) total *= static_cast<std::size_t>(p);
    std::vector<std::size_t> out(total);
    std::vector<int> tup(t);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t x = idx;
        for (int j = t - 1; j >= 0; --j) {
            tup[j] = static_cast<int>(x % p);
            x /= p;
        }
        std::size_t img = 0;
        for (int j = 0; j < t; ++j) img = img * p + static_cast<std::size_t>(g(tup[j]));
        out[idx] = img;
    }
    return out;
}

// Smallest group containing a list of elements that is already closed under composition.
PermutationGroup group_of(const std::vector<Permutation>& elems, int degree) {
    std::vector<Permutation> gens;
    auto G = generate({}, degree);
    for (auto& g : elems)
        if (!G.contains(g)) {
            gens.push_back(g);
            G = generate(gens, degree);
        }
    return G;
}

}  // namespace

// ---------------------------------------------------------------- signatures and polynomials

OrbitSignature orbit_signature(const Vocabulary& voc, const Structure& A, const PermutationGroup& H) {
    validate_scenario(make_scenario(A, H));
    OrbitSignature sig;
    sig.p = A.n();
    for (int i = 1; i < voc.r(); ++i) sig.q_list.push_back(burnside_count(H, i));
    return sig;
}

ExponentPolynomial::ExponentPolynomial(std::map<int, BigInt> coefficients) {
    for (auto& [d, c] : coefficients)
        if (c != 0) coeffs_[d] = c;
}

BigInt ExponentPolynomial::coefficient(int degree) const {
    auto it = coeffs_.find(degree);
    return it == coeffs_.end() ? BigInt(0) : it->second;
}

BigInt ExponentPolynomial::evaluate(const BigInt& n) const {
    BigInt v = 0;
    for (auto& [d, c] : coeffs_) v += c * ipow(n, static_cast<unsigned>(d));
    return v;
}

ExponentPolynomial ExponentPolynomial::nonconstant() const {
    auto c = coeffs_;
    c.erase(0);
    return ExponentPolynomial(std::move(c));
}

int ExponentPolynomial::leading_sign() const {
    if (coeffs_.empty()) return 0;
    return coeffs_.rbegin()->second > 0 ? 1 : -1;
}

ExponentPolynomial ExponentPolynomial::operator+(const ExponentPolynomial& o) const {
    auto c = coeffs_;
    for (auto& [d, v] : o.coeffs_) c[d] += v;
    return ExponentPolynomial(std::move(c));
}

ExponentPolynomial ExponentPolynomial::operator-(const ExponentPolynomial& o) const {
    auto c = coeffs_;
    for (auto& [d, v] : o.coeffs_) c[d] -= v;
    return ExponentPolynomial(std::move(c));
}

std::string ExponentPolynomial::to_string() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        auto [d, c] = *it;
        BigInt a = c < 0 ? BigInt(-c) : c;
        if (first) out << (c < 0 ? "-" : "");
        else out << (c < 0 ? " - " : " + ");
        first = false;
        if (a != 1 || d == 0) out << a;
        if (d >= 1) out << "n";
        if (d >= 2) out << "^" << d;
    }
    return out.str();
}

ExponentPolynomial shifted_power(long long a, int e) {
    std::map<int, BigInt> c;
    for (int k = 0; k <= e; ++k) {
        BigInt term = binomial(e, k) * ipow(BigInt(a), static_cast<unsigned>(e - k));
        if ((e - k) % 2) term = -term;
        c[k] = term;
    }
    return ExponentPolynomial(std::move(c));
}

ExponentPolynomial estimate_exponent(const Vocabulary& voc, const OrbitSignature& sig) {
    require_general(voc, "estimate_exponent");
    ExponentPolynomial lambda;
    for (auto& [j, k] : voc.arity_counts()) {
        std::map<int, BigInt> scaled;
        auto full = shifted_power(sig.p, j);
        for (auto& [d, c] : full.coefficients()) scaled[d] = c * k;
        lambda = lambda + ExponentPolynomial(scaled);
        for (int i = 1; i < j; ++i) {
            BigInt mult = BigInt(k) * binomial(j, i) * sig.q_list.at(i - 1);
            std::map<int, BigInt> m;
            auto mixed = shifted_power(sig.p, j - i);
            for (auto& [d, c] : mixed.coefficients()) m[d] = c * mult;
            lambda = lambda + ExponentPolynomial(m);
        }
    }
    return lambda;
}

AsymptoticEstimate asymptotic_estimate(const Vocabulary& voc, const Structure& A, const PermutationGroup& H) {
    require_general(voc, "asymptotic_estimate");
    auto sc = make_scenario(A, H);
    auto sig = orbit_signature(voc, A, H);
    AsymptoticEstimate est;
    est.binom_p = sig.p;
    est.c_A = factorial(static_cast<unsigned>(sig.p)) / automorphism_group(A).order();
    est.d = partition_sequences(sc, voc.r()).size();
    est.constant = est.c_A * est.d;
    est.expo = estimate_exponent(voc, sig);
    return est;
}

R2Constants r2_constants(const Vocabulary& voc, const OrbitSignature& sig) {
    if (voc.r() != 2) throw Error("r2_constants: maximal arity must be 2");
    BigInt k2 = voc.k(2), k1 = voc.k(1), p = sig.p, q = sig.q();
    return {k2 * p * p - k1 * p - 2 * k2 * q * p, k2 * p * p - k1 * p};
}

BigInt beta(const Vocabulary& voc, const BigInt& p, const BigInt& q, const BigInt& s) {
    int r = voc.r();
    if (r <= 2) throw Error("beta: requires maximal arity r > 2");
    BigInt k = voc.k(r), l = voc.k(r - 1), c = binomial(r, 2);
    return k * c * p * p - k * r * (r - 1) * p * q - l * (r - 1) * p + l * (r - 1) * q + k * c * s;
}

// ---------------------------------------------------------------- limits

std::string LimitValue::to_string() const { return is_finite() ? autocensus::to_string(value) : "inf"; }

int compare_growth(const AsymptoticEstimate& a, const AsymptoticEstimate& b) {
    int s = (a.expo.nonconstant() - b.expo.nonconstant()).leading_sign();
    if (s != 0) return s;
    if (a.binom_p != b.binom_p) return a.binom_p > b.binom_p ? 1 : -1;
    return 0;
}

LimitValue quotient_limit(const AsymptoticEstimate& num, const AsymptoticEstimate& den) {
    int c = compare_growth(num, den);
    if (c > 0) return LimitValue::infinite();
    if (c < 0) return LimitValue::finite(0);
    BigInt shift = num.expo.evaluate(0) - den.expo.evaluate(0);
    return LimitValue::finite(Rational(num.constant, den.constant) * power_of_two(shift));
}

namespace {

// Index of a fastest-growing estimate.
std::size_t fastest(const std::vector<AsymptoticEstimate>& xs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (compare_growth(xs[i], xs[best]) > 0) best = i;
    return best;
}

// Sum of c * 2^{expo(0)} over the estimates growing like `top`.
Rational leading_mass(const std::vector<AsymptoticEstimate>& xs, const AsymptoticEstimate& top) {
    Rational m = 0;
    for (auto& e : xs)
        if (compare_growth(e, top) == 0) m += Rational(e.constant) * power_of_two(e.expo.evaluate(0));
    return m;
}

}  // namespace

LimitValue aggregate_limit(const std::vector<AsymptoticEstimate>& num, const std::vector<AsymptoticEstimate>& den) {
    if (den.empty()) throw Error("aggregate_limit: empty denominator");
    if (num.empty()) return LimitValue::finite(0);
    auto& tn = num[fastest(num)];
    auto& td = den[fastest(den)];
    int c = compare_growth(tn, td);
    if (c > 0) return LimitValue::infinite();
    if (c < 0) return LimitValue::finite(0);
    return LimitValue::finite(leading_mass(num, tn) / leading_mass(den, td));
}

// ---------------------------------------------------------------- class specs

std::string ClassSpec::to_string() const {
    switch (kind) {
    case Kind::spt_star_eq: return "spt*=" + std::to_string(m);
    case Kind::spt_star_geq: return "spt*>=" + std::to_string(m);
    case Kind::spt_geq: return "spt>=" + std::to_string(m);
    case Kind::subgroup: return "sub:" + group_text(G);
    case Kind::iso_group: return "iso:" + group_text(G);
    }
    return "";
}

ClassSpec parse_class_spec(const std::string& text, int cap) {
    ClassSpec spec;
    spec.cap = cap;
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            throw ParseError("class spec: expected an integer in '" + text + "'");
        }
        if (used != s.size()) throw ParseError("class spec: expected an integer in '" + text + "'");
        if (v < 2) throw ParseError("class spec: m must be at least 2");
        return v;
    };
    auto group = [&](const std::string& s) {
        auto G = parse_group(s);
        if (G.is_trivial()) throw ParseError("class spec: the group must be nontrivial");
        return G;
    };
    if (text.rfind("spt*>=", 0) == 0) {
        spec.kind = ClassSpec::Kind::spt_star_geq;
        spec.m = number(text.substr(6));
    } else if (text.rfind("spt*=", 0) == 0) {
        spec.kind = ClassSpec::Kind::spt_star_eq;
        spec.m = number(text.substr(5));
    } else if (text.rfind("spt>=", 0) == 0) {
        spec.kind = ClassSpec::Kind::spt_geq;
        spec.m = number(text.substr(5));
    } else if (text.rfind("sub:", 0) == 0) {
        spec.kind = ClassSpec::Kind::subgroup;
        spec.G = group(text.substr(4));
    } else if (text.rfind("iso:", 0) == 0) {
        spec.kind = ClassSpec::Kind::iso_group;
        spec.G = group(text.substr(4));
    } else {
        throw ParseError("class spec: unknown form '" + text + "'");
    }
    return spec;
}

// ---------------------------------------------------------------- full groups

PermutationGroup orbit_closure(const Structure& A, const PermutationGroup& H, int r) {
    auto aut = automorphism_group(A);
    if (!H.is_subgroup_of(aut)) throw Error("orbit_closure: H is not a subgroup of Aut(A)");
    int p = A.n();
    std::vector<OrbitPartition> parts;
    for (int t = 1; t < r; ++t) parts.push_back(orbits_on_tuples(H, t));
    std::vector<Permutation> keep;
    for (auto& g : aut.elements()) {
        bool ok = true;
        for (int t = 1; t < r && ok; ++t) {
            auto map = tuple_map(g, p, t);
            auto& P = parts[t - 1];
            for (std::size_t i = 0; i < map.size() && ok; ++i) ok = P.block_of[map[i]] == P.block_of[i];
        }
        if (ok) keep.push_back(g);
    }
    return group_of(keep, p);
}

int full_group_limit(const Vocabulary& voc, const Structure& A, const PermutationGroup& H) {
    validate_scenario(make_scenario(A, H));
    return orbit_closure(A, H, voc.r()) == H ? 1 : 0;
}

// ---------------------------------------------------------------- decomposition

namespace {

struct ClassKey {
    std::vector<std::uint64_t> words;
    std::vector<std::vector<int>> labels;
    auto operator<=>(const ClassKey&) const = default;
};

bool matches(const ClassSpec& spec, int p, const PermutationGroup& K) {
    switch (spec.kind) {
    case ClassSpec::Kind::spt_star_eq: return p == spec.m;
    case ClassSpec::Kind::spt_star_geq: return p >= spec.m;
    case ClassSpec::Kind::spt_geq: {
        int best = 0;
        for (auto& g : K.elements()) best = std::max(best, g.support_size());
        return best >= spec.m;
    }
    case ClassSpec::Kind::subgroup: return embeds_in(spec.G, K);
    case ClassSpec::Kind::iso_group: return abstract_isomorphic(spec.G, K);
    }
    return false;
}

// Classes on exactly p points, keyed canonically under relabelling of [p].
void classes_on(const Vocabulary& voc, const ClassSpec& spec, int p, std::size_t guard,
                std::map<ClassKey, ClassEntry>& out) {
    int r = voc.r();
    auto perms = all_permutations(p);
    std::vector<std::vector<std::vector<std::size_t>>> maps(perms.size());
    for (std::size_t s = 0; s < perms.size(); ++s)
        for (int t = 1; t < r; ++t) maps[s].push_back(tuple_map(perms[s], p, t));
    std::set<ClassKey> seen;
    auto blank = empty_structure(voc, p);
    for (auto& H : subgroups(symmetric_group(p))) {
        if (H.has_fixed_point()) continue;
        // H-invariant structures: one bit per orbit of H on cells.
        detail::UnionFind uf(blank.cell_count());
        std::vector<int> tup(r), img(r);
        for (std::size_t c = 0; c < blank.cell_count(); ++c) {
            int s = blank.symbol_of(c);
            blank.tuple_of(c, tup.data());
            for (auto& h : H.generators()) {
                for (int j = 0; j < blank.arity(s); ++j) img[j] = h(tup[j]);
                uf.unite(c, blank.cell(s, img.data()));
            }
        }
        std::vector<std::vector<std::size_t>> orbits;
        std::map<std::size_t, std::size_t> index;
        for (std::size_t c = 0; c < blank.cell_count(); ++c) {
            auto [it, fresh] = index.emplace(uf.find(c), orbits.size());
            if (fresh) orbits.emplace_back();
            orbits[it->second].push_back(c);
        }
        if (orbits.size() >= 63 || (std::size_t{1} << orbits.size()) > guard)
            throw GuardError("decompose-structures", std::to_string(orbits.size()) + " invariant cell orbits on " + std::to_string(p) + " points");
        // Orbit labels of H under each relabelling, normalized.
        std::vector<std::vector<std::vector<int>>> labels(perms.size());
        std::vector<OrbitPartition> parts;
        for (int t = 1; t < r; ++t) parts.push_back(orbits_on_tuples(H, t));
        for (std::size_t s = 0; s < perms.size(); ++s)
            for (int t = 1; t < r; ++t) {
                auto& P = parts[t - 1];
                std::vector<int> l(P.block_of.size());
                for (std::size_t i = 0; i < l.size(); ++i) l[maps[s][t - 1][i]] = P.block_of[i];
                normalize_labels(l);
                labels[s].push_back(std::move(l));
            }
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << orbits.size()); ++code) {
            Structure A = blank;
            for (std::size_t o = 0; o < orbits.size(); ++o)
                if ((code >> o) & 1)
                    for (auto c : orbits[o]) A.set_bit(c, true);
            ClassKey key{A.words(), labels[0]};
            bool first = true;
            for (std::size_t s = 0; s < perms.size(); ++s) {
                ClassKey k{apply_permutation(perms[s], A).words(), labels[s]};
                if (first || k < key) key = std::move(k);
                first = false;
            }
            if (!seen.insert(key).second) continue;
            auto K = orbit_closure(A, H, r);
            if (!matches(spec, p, K)) continue;
            ClassEntry e{A, K, orbit_signature(voc, A, K), asymptotic_estimate(voc, A, K)};
            out.emplace(std::move(key), std::move(e));
        }
    }
}

}  // namespace

std::vector<Rational> Decomposition::weights() const {
    std::vector<Rational> w;
    Rational total = 0;
    for (auto& e : dominant) {
        w.push_back(Rational(e.est.constant) * power_of_two(e.est.expo.evaluate(0)));
        total += w.back();
    }
    for (auto& x : w) x /= total;
    return w;
}

Decomposition decompose(const Vocabulary& voc, const ClassSpec& spec, std::size_t structure_guard) {
    require_general(voc, "decompose");
    Decomposition dec;
    dec.spec = spec;
    bool exact_p = spec.kind == ClassSpec::Kind::spt_star_eq;
    int lo = 2;
    if (spec.kind == ClassSpec::Kind::spt_star_eq || spec.kind == ClassSpec::Kind::spt_star_geq ||
        spec.kind == ClassSpec::Kind::spt_geq)
        lo = spec.m;
    int hi = exact_p ? spec.m : spec.cap;
    if (!exact_p && lo > spec.cap) throw GuardError("cap", "support size " + std::to_string(lo) + " exceeds the cap " + std::to_string(spec.cap));
    int best = INT_MAX;
    std::map<ClassKey, ClassEntry> found;
    for (int p = lo; p <= hi; ++p) {
        // Fixed-point-free groups have q <= p/2, so p - q >= p/2: past 2*best nothing can tie.
        if (best != INT_MAX && p > 2 * best) break;
        std::map<ClassKey, ClassEntry> layer;
        classes_on(voc, spec, p, structure_guard, layer);
        for (auto& [k, e] : layer) best = std::min(best, e.sig.p - static_cast<int>(e.sig.q()));
        found.merge(layer);
        dec.max_p_searched = p;
    }
    if (found.empty())
        throw Error("decompose: no class matches " + spec.to_string() + " with support size <= " + std::to_string(hi));
    dec.delta = best;
    dec.certified = exact_p || 2 * best <= hi;
    for (auto& [k, e] : found) dec.all.push_back(e);
    std::vector<AsymptoticEstimate> ests;
    for (auto& e : dec.all) ests.push_back(e.est);
    auto& top = ests[fastest(ests)];
    for (auto& e : dec.all)
        if (compare_growth(e.est, top) == 0) dec.dominant.push_back(e);
    return dec;
}

LimitValue class_limit(const Vocabulary& voc, const ClassSpec& num, const ClassSpec& den) {
    auto a = decompose(voc, num);
    auto b = decompose(voc, den);
    for (auto* d : {&a, &b})
        if (!d->certified)
            throw GuardError("cap", "dominant stratum of " + d->spec.to_string() + " needs support size up to " +
                                        std::to_string(2 * d->delta) + ", cap is " + std::to_string(d->spec.cap));
    std::vector<AsymptoticEstimate> na, nb;
    for (auto& e : a.dominant) na.push_back(e.est);
    for (auto& e : b.dominant) nb.push_back(e.est);
    return aggregate_limit(na, nb);
}

}  // namespace autocensus
