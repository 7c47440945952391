#include "autocensus/support.hpp"

#include "autocensus/error.hpp"

#include <algorithm>

namespace autocensus {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

AutomorphismSearch::AutomorphismSearch(int n, std::vector<int> arities) : n_(n), arities_(std::move(arities)) {
    if (n > 64) throw GuardError("aut-n", "automorphism search supports n <= 64");
    checks_.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int s = 0; s < static_cast<int>(arities_.size()); ++s) {
            int a = arities_[s];
            std::vector<int> t(a, 0);
            // all tuples over {0..i} containing i
            std::size_t total = 1;
            for (int j = 0; j < a; ++j) total *= static_cast<std::size_t>(i + 1);
            for (std::size_t idx = 0; idx < total; ++idx) {
                std::size_t x = idx;
                bool has_i = false;
                for (int j = a - 1; j >= 0; --j) {
                    t[j] = static_cast<int>(x % (i + 1));
                    x /= (i + 1);
                    has_i |= t[j] == i;
                }
                if (has_i) checks_[i].push_back({s, t});
            }
        }
    }
}

void AutomorphismSearch::invariants(const Structure& M, std::vector<std::uint64_t>& sig) const {
    sig.assign(n_, 0);
    int t[16];
    for (std::size_t w = 0; w < M.words().size(); ++w) {
        std::uint64_t bits = M.words()[w];
        while (bits) {
            std::size_t c = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
            bits &= bits - 1;
            int s = M.symbol_of(c);
            int a = M.arity(s);
            M.tuple_of(c, t);
            for (int j = 0; j < a; ++j) {
                std::uint64_t eq = 0;
                for (int k = 0; k < a; ++k)
                    if (t[k] == t[j]) eq |= std::uint64_t{1} << k;
                sig[t[j]] += mix((static_cast<std::uint64_t>(s) << 40) ^ (static_cast<std::uint64_t>(j) << 32) ^ eq);
            }
        }
    }
}

void AutomorphismSearch::run(const Structure& M, const std::function<bool(const std::vector<int>&)>& fn) const {
    if (M.n() != n_ || M.arities() != arities_) throw Error("AutomorphismSearch: shape mismatch");
    if (n_ == 0) {
        fn({});
        return;
    }
    std::vector<std::uint64_t> sig;
    invariants(M, sig);
    std::vector<int> img(n_, -1);
    std::vector<char> used(n_, 0);
    int u[16];
    bool stop = false;
    auto consistent = [&](int i) {
        for (const auto& ch : checks_[i]) {
            int a = static_cast<int>(ch.tuple.size());
            for (int j = 0; j < a; ++j) u[j] = img[ch.tuple[j]];
            if (M.bit(M.cell(ch.symbol, ch.tuple.data())) != M.bit(M.cell(ch.symbol, u))) return false;
        }
        return true;
    };
    std::function<void(int)> rec = [&](int i) {
        if (stop) return;
        if (i == n_) {
            if (!fn(img)) stop = true;
            return;
        }
        for (int c = 0; c < n_ && !stop; ++c) {
            if (used[c] || sig[c] != sig[i]) continue;
            img[i] = c;
            used[c] = 1;
            if (consistent(i)) rec(i + 1);
            used[c] = 0;
            img[i] = -1;
        }
    };
    rec(0);
}

std::vector<Permutation> AutomorphismSearch::all(const Structure& M) const {
    std::vector<Permutation> out;
    run(M, [&](const std::vector<int>& img) {
        out.emplace_back(img);
        return true;
    });
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t AutomorphismSearch::count(const Structure& M) const {
    std::size_t c = 0;
    run(M, [&](const std::vector<int>&) {
        ++c;
        return true;
    });
    return c;
}

std::uint64_t AutomorphismSearch::moved_mask(const Structure& M) const {
    std::uint64_t mask = 0;
    run(M, [&](const std::vector<int>& img) {
        for (int i = 0; i < n_; ++i)
            if (img[i] != i) mask |= std::uint64_t{1} << i;
        return true;
    });
    return mask;
}

bool AutomorphismSearch::is_rigid(const Structure& M) const {
    bool rigid = true;
    run(M, [&](const std::vector<int>& img) {
        for (int i = 0; i < n_; ++i)
            if (img[i] != i) {
                rigid = false;
                return false;
            }
        return true;
    });
    return rigid;
}

PermutationGroup automorphism_group(const Structure& M, int guard) {
    if (M.n() > guard) throw GuardError("aut-n", "n=" + std::to_string(M.n()) + " exceeds " + std::to_string(guard));
    AutomorphismSearch search(M.n(), M.arities());
    auto autos = search.all(M);
    return generate(autos, M.n());
}

SupportProfile support_profile(const PermutationGroup& aut) {
    SupportProfile p;
    for (const auto& g : aut.elements()) p.spt = std::max(p.spt, g.support_size());
    p.spt_star_set = aut.support();
    p.spt_star = static_cast<int>(p.spt_star_set.size());
    return p;
}

SupportProfile support_profile(const Structure& M, int guard) { return support_profile(automorphism_group(M, guard)); }

static std::vector<char> support_flags(const Permutation& f) {
    std::vector<char> v(f.degree(), 0);
    for (int x : f.support()) v[x] = 1;
    return v;
}

static bool subset_of(const std::vector<char>& a, const std::vector<char>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

std::vector<Permutation> maximal_elements(const PermutationGroup& aut) {
    std::vector<std::vector<char>> sup;
    for (const auto& g : aut.elements()) sup.push_back(support_flags(g));
    std::vector<Permutation> out;
    for (std::size_t i = 0; i < sup.size(); ++i) {
        bool maximal = true;
        for (std::size_t j = 0; j < sup.size() && maximal; ++j)
            if (subset_of(sup[i], sup[j]) && sup[i] != sup[j]) maximal = false;
        if (maximal) out.push_back(aut.elements()[i]);
    }
    return out;
}

std::vector<Permutation> maximal_automorphisms(const Structure& M, int guard) {
    return maximal_elements(automorphism_group(M, guard));
}

int deficit(const Permutation& f, const std::vector<int>& X) {
    int d = 0;
    for (int x : f.support())
        if (!std::binary_search(X.begin(), X.end(), x)) ++d;
    return d;
}

SpecialSequence special_sequence(const PermutationGroup& aut) {
    if (aut.is_trivial()) throw Error("special_sequence: trivial automorphism group");
    auto star = maximal_elements(aut);
    SpecialSequence seq;
    // f_0: largest support, lexicographically first among ties
    std::size_t best = 0;
    for (std::size_t i = 1; i < star.size(); ++i)
        if (star[i].support_size() > star[best].support_size()) best = i;
    seq.autos.push_back(star[best]);
    std::vector<int> cum = star[best].support();
    seq.cumulative_supports.push_back(cum);
    while (true) {
        int dmax = 0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < star.size(); ++i) {
            int d = deficit(star[i], cum);
            if (d > dmax) {
                dmax = d;
                arg = i;
            }
        }
        if (dmax == 0) break;
        seq.deficits.push_back(dmax);
        seq.autos.push_back(star[arg]);
        auto s = star[arg].support();
        std::vector<int> merged;
        std::set_union(cum.begin(), cum.end(), s.begin(), s.end(), std::back_inserter(merged));
        cum = std::move(merged);
        seq.cumulative_supports.push_back(cum);
    }
    return seq;
}

SpecialSequence special_sequence(const Structure& M, int guard) { return special_sequence(automorphism_group(M, guard)); }

BigInt support_bound(int k) {
    if (k < 2) throw Error("support_bound: k must be >= 2");
    return ipow(BigInt(k), static_cast<unsigned>(k + 2));
}

Rational spt_threshold_bound(int m, int r) {
    if (r < 2) throw Error("spt_threshold: r must be >= 2");
    if (m < 0) throw Error("spt_threshold: m must be >= 0");
    BigInt mf = factorial(static_cast<unsigned>(m));
    return Rational(BigInt(2 * r) * (mf - 1) * m, mf) + 1;
}

BigInt spt_threshold(int m, int r) {
    Rational b = spt_threshold_bound(m, r);
    BigInt fl = boost::multiprecision::numerator(b) / boost::multiprecision::denominator(b);
    return fl + 1;
}

}  // namespace autocensus
