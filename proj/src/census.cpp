#include "autocensus/census.hpp"

#include "autocensus/error.hpp"
#include "autocensus/support.hpp"
#include "detail.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace autocensus {

namespace {

bool injective(const int* t, int a) {
    for (int i = 0; i < a; ++i)
        for (int j = i + 1; j < a; ++j)
            if (t[i] == t[j]) return false;
    return true;
}

std::size_t ipow_size(std::size_t b, int e) {
    std::size_t v = 1;
    for (int i = 0; i < e; ++i) v *= b;
    return v;
}

void decode_tuple(std::size_t idx, int n, int a, int* t) {
    for (int j = a - 1; j >= 0; --j) {
        t[j] = static_cast<int>(idx % static_cast<std::size_t>(n));
        idx /= static_cast<std::size_t>(n);
    }
}

std::size_t encode_tuple(const int* t, int n, int a) {
    std::size_t idx = 0;
    for (int j = 0; j < a; ++j) idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(t[j]);
    return idx;
}

// Extends a permutation of local positions to [n] by the identity off X.
Permutation extend(const Permutation& local, const std::vector<int>& X, int n) {
    std::vector<int> img(n);
    std::iota(img.begin(), img.end(), 0);
    for (std::size_t i = 0; i < X.size(); ++i) img[X[i]] = X[local(static_cast<int>(i))];
    return Permutation(img);
}

std::uint64_t mask_of(const std::vector<int>& X) {
    std::uint64_t m = 0;
    for (int x : X) m |= std::uint64_t{1} << x;
    return m;
}

// Distinct labelled copies sigma(A) of A, in order of first appearance over lex sigma.
std::vector<Structure> labelled_copies(const Structure& A) {
    std::vector<Structure> out;
    std::set<std::vector<std::uint64_t>> seen;
    for (auto& s : all_permutations(A.n())) {
        auto B = apply_permutation(s, A);
        if (seen.insert(B.words()).second) out.push_back(std::move(B));
    }
    return out;
}

// q'_i (symmetric) or q''_i (irreflexive): classes of injective i-tuples over X under
// Pi_i, optionally joined with reordering of coordinates.
std::uint64_t injective_classes(const OrbitPartition& P, bool unordered) {
    int p = P.n, i = P.arity;
    std::size_t total = P.block_of.size();
    detail::UnionFind uf(total);
    std::vector<std::size_t> first(static_cast<std::size_t>(P.block_count), SIZE_MAX);
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto& f = first[P.block_of[idx]];
        if (f == SIZE_MAX) f = idx;
        uf.unite(idx, f);
    }
    std::vector<int> t(i);
    if (unordered)
        for (std::size_t idx = 0; idx < total; ++idx) {
            decode_tuple(idx, p, i, t.data());
            std::sort(t.begin(), t.end());
            uf.unite(idx, encode_tuple(t.data(), p, i));
        }
    std::set<std::size_t> roots;
    for (std::size_t idx = 0; idx < total; ++idx) {
        decode_tuple(idx, p, i, t.data());
        if (injective(t.data(), i)) roots.insert(uf.find(idx));
    }
    return roots.size();
}

}  // namespace

// ---------------------------------------------------------------- scenarios

void validate_scenario(const EmbeddedScenario& sc) {
    int p = sc.A.n();
    if (p < 2) throw Error("scenario: |A| must be at least 2");
    if (sc.H.degree() != p) throw Error("scenario: H acts on " + std::to_string(sc.H.degree()) + " points, |A| = " + std::to_string(p));
    if (sc.H.has_fixed_point()) throw Error("scenario: H has a fixed point");
    for (auto& h : sc.H.generators())
        if (!(apply_permutation(h, sc.A) == sc.A)) throw Error("scenario: H is not a subgroup of Aut(A)");
    if (static_cast<int>(sc.X.size()) != p) throw Error("scenario: |X| differs from |A|");
    std::set<int> xs(sc.X.begin(), sc.X.end());
    if (static_cast<int>(xs.size()) != p || *xs.begin() < 0) throw Error("scenario: X must list distinct elements");
    if (!sc.A_X.same_shape(sc.A)) throw Error("scenario: A_X has the wrong shape");
    if (!(canonical_form(sc.A) == canonical_form(sc.A_X))) throw Error("scenario: A_X is not isomorphic to A");
}

EmbeddedScenario make_scenario(const Structure& A, const PermutationGroup& H, std::vector<int> X,
                               std::optional<Structure> A_X) {
    EmbeddedScenario sc{A, H, std::move(X), A_X ? *A_X : A};
    validate_scenario(sc);
    return sc;
}

EmbeddedScenario make_scenario(const Structure& A, const PermutationGroup& H) {
    std::vector<int> X(A.n());
    std::iota(X.begin(), X.end(), 0);
    return make_scenario(A, H, std::move(X));
}

PartitionSequence partition_sequence_of(const PermutationGroup& H, const Permutation& sigma, int r) {
    auto Hf = conjugate(H, sigma);
    PartitionSequence seq;
    for (int t = 1; t < r; ++t) seq.partitions.push_back(orbits_on_tuples(Hf, t));
    return seq;
}

std::vector<PartitionSequence> partition_sequences(const EmbeddedScenario& sc, int r) {
    validate_scenario(sc);
    std::vector<PartitionSequence> out;
    for (auto& sigma : all_permutations(sc.p())) {
        if (!(apply_permutation(sigma, sc.A) == sc.A_X)) continue;
        auto seq = partition_sequence_of(sc.H, sigma, r);
        if (std::find(out.begin(), out.end(), seq) == out.end()) out.push_back(std::move(seq));
    }
    return out;
}

// ---------------------------------------------------------------- closed forms

BigInt fixing_exponent(const Vocabulary& voc, int n, const std::vector<Permutation>& perms) {
    for (auto& f : perms)
        if (f.degree() != n) throw Error("count_fixing: permutation of degree " + std::to_string(f.degree()) + " on [" + std::to_string(n) + "]");
    std::map<std::pair<int, Mode>, std::uint64_t> memo;
    BigInt total = 0;
    for (auto& sym : voc.symbols()) {
        auto key = std::make_pair(sym.arity, sym.mode);
        auto it = memo.find(key);
        if (it == memo.end()) {
            int a = sym.arity;
            std::size_t size = ipow_size(static_cast<std::size_t>(n), a);
            if (size > 50'000'000) throw GuardError("tuples", "n^arity too large for orbit counting");
            detail::UnionFind uf(size);
            std::vector<int> t(a), u(a);
            for (std::size_t idx = 0; idx < size; ++idx) {
                decode_tuple(idx, n, a, t.data());
                for (auto& f : perms) {
                    for (int j = 0; j < a; ++j) u[j] = f(t[j]);
                    uf.unite(idx, encode_tuple(u.data(), n, a));
                }
                if (sym.mode == Mode::symmetric)
                    for (int j = 0; j + 1 < a; ++j) {
                        u = t;
                        std::swap(u[j], u[j + 1]);
                        uf.unite(idx, encode_tuple(u.data(), n, a));
                    }
            }
            std::uint64_t orbits = 0;
            for (std::size_t idx = 0; idx < size; ++idx) {
                if (uf.find(idx) != idx) continue;
                decode_tuple(idx, n, a, t.data());
                if (sym.mode == Mode::general || injective(t.data(), a)) ++orbits;
            }
            it = memo.emplace(key, orbits).first;
        }
        total += it->second;
    }
    return total;
}

BigInt count_fixing(const Vocabulary& voc, int n, const std::vector<Permutation>& perms) {
    return pow2(fixing_exponent(voc, n, perms));
}

BigInt Tn_exponent(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n) {
    int p = sc.p();
    if (n < p) throw Error("count_Tn: n < |A|");
    if (static_cast<int>(Pi.partitions.size()) != voc.r() - 1) throw Error("count_Tn: partition sequence length differs from r-1");
    long long m = n - p;
    BigInt total = 0;
    for (auto& sym : voc.symbols()) {
        int j = sym.arity;
        switch (sym.mode) {
        case Mode::general:
            total += ipow(BigInt(m), j);
            for (int i = 1; i < j; ++i)
                total += binomial(j, i) * Pi.pi(i).block_count * ipow(BigInt(m), j - i);
            break;
        case Mode::irreflexive:
            total += falling(m, j);
            for (int i = 1; i < j; ++i)
                total += binomial(j, i) * injective_classes(Pi.pi(i), false) * falling(m, j - i);
            break;
        case Mode::symmetric:
            total += binomial(m, j);
            for (int i = 1; i < j; ++i) total += injective_classes(Pi.pi(i), true) * binomial(m, j - i);
            break;
        }
    }
    return total;
}

BigInt count_Tn(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n) {
    return pow2(Tn_exponent(voc, sc, Pi, n));
}

// ---------------------------------------------------------------- T_n spaces

TnSpace::TnSpace(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n)
    : X_(sc.X), base_(empty_structure(voc, n)) {
    int p = sc.p();
    if (n < p) throw Error("T_n space: n < |X|");
    for (int x : X_)
        if (x >= n) throw Error("T_n space: X is not inside [n]");
    if (static_cast<int>(Pi.partitions.size()) < voc.r() - 1) throw Error("T_n space: partition sequence too short");
    std::vector<int> local(n, -1);
    for (int i = 0; i < p; ++i) local[X_[i]] = i;

    // First local tuple of each block of Pi_i.
    std::vector<std::vector<std::size_t>> first(Pi.partitions.size());
    for (std::size_t i = 0; i < Pi.partitions.size(); ++i) {
        auto& P = Pi.partitions[i];
        first[i].assign(static_cast<std::size_t>(P.block_count), SIZE_MAX);
        for (std::size_t idx = 0; idx < P.block_of.size(); ++idx)
            if (first[i][P.block_of[idx]] == SIZE_MAX) first[i][P.block_of[idx]] = idx;
    }

    std::size_t cells = base_.cell_count();
    detail::UnionFind uf(cells);
    std::vector<char> fixed(cells, 0), forced_off(cells, 0);
    int r = voc.r();
    std::vector<int> t(r), u(r), xs(r), lt(r);
    for (int s = 0; s < voc.rho(); ++s) {
        int a = voc.symbol(s).arity;
        Mode mode = voc.symbol(s).mode;
        std::size_t off = base_.offset(s), total = ipow_size(static_cast<std::size_t>(n), a);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t c = off + idx;
            decode_tuple(idx, n, a, t.data());
            int inside = 0;
            for (int j = 0; j < a; ++j)
                if (local[t[j]] >= 0) xs[inside++] = j;
            if (inside == a) {
                fixed[c] = 1;
                for (int j = 0; j < a; ++j) lt[j] = local[t[j]];
                base_.set_bit(c, sc.A_X.bit(sc.A_X.cell(s, lt.data())));
                continue;
            }
            if (mode != Mode::general && !injective(t.data(), a)) {
                forced_off[c] = 1;
                continue;
            }
            if (inside > 0) {
                for (int k = 0; k < inside; ++k) lt[k] = local[t[xs[k]]];
                auto& P = Pi.partitions[inside - 1];
                std::size_t rep = first[inside - 1][P.block_of[encode_tuple(lt.data(), p, inside)]];
                decode_tuple(rep, p, inside, lt.data());
                u = t;
                for (int k = 0; k < inside; ++k) u[xs[k]] = X_[lt[k]];
                uf.unite(c, off + encode_tuple(u.data(), n, a));
            }
            if (mode == Mode::symmetric) {
                u.assign(t.begin(), t.begin() + a);
                std::sort(u.begin(), u.end());
                uf.unite(c, off + encode_tuple(u.data(), n, a));
            }
        }
    }
    // A class touching a forced-off cell is forced off entirely.
    std::vector<char> dead(cells, 0);
    for (std::size_t c = 0; c < cells; ++c)
        if (forced_off[c]) dead[uf.find(c)] = 1;
    std::vector<std::size_t> bit_of_root(cells, SIZE_MAX);
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t c = 0; c < cells; ++c) {
        if (fixed[c] || forced_off[c]) continue;
        std::size_t root = uf.find(c);
        if (dead[root]) continue;
        if (bit_of_root[root] == SIZE_MAX) {
            bit_of_root[root] = members.size();
            members.emplace_back();
        }
        members[bit_of_root[root]].push_back(c);
    }
    start_.push_back(0);
    for (auto& m : members) {
        cells_.insert(cells_.end(), m.begin(), m.end());
        start_.push_back(cells_.size());
    }
}

std::uint64_t TnSpace::X_mask() const {
    if (n() > 64) throw GuardError("mask", "n > 64");
    return mask_of(X_);
}

void TnSpace::set_bit(Structure& M, std::size_t b, bool v) const {
    for (auto it = cells_begin(b); it != cells_end(b); ++it) M.set_bit(*it, v);
}

void TnSpace::decode_into(std::uint64_t code, Structure& M) const {
    if (free_bits() > 63) throw GuardError("free-bits", "T_n space has more than 63 free bits");
    M.words() = base_.words();
    for (std::size_t b = 0; b < free_bits(); ++b)
        if ((code >> b) & 1) set_bit(M, b, true);
}

Structure TnSpace::decode(std::uint64_t code) const {
    Structure M = base_;
    decode_into(code, M);
    return M;
}

bool respects(const Structure& M, const std::vector<int>& X, const PartitionSequence& Pi) {
    int n = M.n(), p = static_cast<int>(X.size());
    std::vector<int> local(n, -1);
    for (int i = 0; i < p; ++i) local[X[i]] = i;
    std::vector<std::vector<std::size_t>> first(Pi.partitions.size());
    for (std::size_t i = 0; i < Pi.partitions.size(); ++i) {
        auto& P = Pi.partitions[i];
        first[i].assign(static_cast<std::size_t>(P.block_count), SIZE_MAX);
        for (std::size_t idx = 0; idx < P.block_of.size(); ++idx)
            if (first[i][P.block_of[idx]] == SIZE_MAX) first[i][P.block_of[idx]] = idx;
    }
    std::vector<int> t, u, xs, lt;
    for (int s = 0; s < M.symbol_count(); ++s) {
        int a = M.arity(s);
        t.assign(a, 0);
        xs.assign(a, 0);
        lt.assign(a, 0);
        std::size_t off = M.offset(s), total = ipow_size(static_cast<std::size_t>(n), a);
        for (std::size_t idx = 0; idx < total; ++idx) {
            decode_tuple(idx, n, a, t.data());
            int inside = 0;
            for (int j = 0; j < a; ++j)
                if (local[t[j]] >= 0) xs[inside++] = j;
            if (inside == 0 || inside == a) continue;
            if (inside > static_cast<int>(Pi.partitions.size())) throw Error("respects: partition sequence too short");
            for (int k = 0; k < inside; ++k) lt[k] = local[t[xs[k]]];
            auto& P = Pi.partitions[inside - 1];
            std::size_t rep = first[inside - 1][P.block_of[encode_tuple(lt.data(), p, inside)]];
            decode_tuple(rep, p, inside, lt.data());
            u = t;
            for (int k = 0; k < inside; ++k) u[xs[k]] = X[lt[k]];
            if (M.bit(off + idx) != M.bit(off + encode_tuple(u.data(), n, a))) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- exact counts

BigInt count_Sn_AX_Pi_exact(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n,
                            const CensusGuard& guard) {
    TnSpace space(voc, sc, Pi, n);
    if (space.free_bits() > guard.free_bits)
        throw GuardError("free-bits", std::to_string(space.free_bits()) + " free bits exceed " + std::to_string(guard.free_bits));
    AutomorphismSearch search(n, voc.arities());
    std::uint64_t want = space.X_mask(), count = 0;
    Structure M = space.base();
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << space.free_bits()); ++code) {
        space.decode_into(code, M);
        if (search.moved_mask(M) == want) ++count;
    }
    return count;
}

BigInt count_Sn_AX_H_exact(const Vocabulary& voc, const EmbeddedScenario& sc, int n, const CensusGuard& guard) {
    auto seqs = partition_sequences(sc, voc.r());
    AutomorphismSearch search(n, voc.arities());
    std::uint64_t count = 0, want = mask_of(sc.X);
    for (std::size_t k = 0; k < seqs.size(); ++k) {
        TnSpace space(voc, sc, seqs[k], n);
        if (space.free_bits() > guard.free_bits)
            throw GuardError("free-bits", std::to_string(space.free_bits()) + " free bits exceed " + std::to_string(guard.free_bits));
        Structure M = space.base();
        for (std::uint64_t code = 0; code < (std::uint64_t{1} << space.free_bits()); ++code) {
            space.decode_into(code, M);
            if (search.moved_mask(M) != want) continue;
            // Count M under the first sequence it respects.
            bool earlier = false;
            for (std::size_t j = 0; j < k && !earlier; ++j) earlier = respects(M, sc.X, seqs[j]);
            if (!earlier) ++count;
        }
    }
    return count;
}

bool in_Sn_AH(const Structure& M, const Structure& A, const PermutationGroup& H) {
    int n = M.n(), p = A.n();
    AutomorphismSearch search(n, M.arities());
    std::uint64_t moved = search.moved_mask(M);
    if (__builtin_popcountll(moved) != p) return false;
    std::vector<int> X;
    for (int i = 0; i < n; ++i)
        if ((moved >> i) & 1) X.push_back(i);
    auto MX = M.induced(X);
    for (auto& sigma : all_permutations(p)) {
        if (!(apply_permutation(sigma, A) == MX)) continue;
        auto Hf = conjugate(H, sigma);
        bool ok = true;
        for (auto& h : Hf.generators())
            if (!(apply_permutation(extend(h, X, n), M) == M)) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

BigInt count_Sn_AH_exact(const Vocabulary& voc, const Structure& A, const PermutationGroup& H, int n, AHMethod method,
                         unsigned jobs, const CensusGuard& guard) {
    int p = A.n();
    if (n < p) return 0;
    validate_scenario(make_scenario(A, H));
    if (method == AHMethod::full_scan) {
        if (n > guard.scan_n) throw GuardError("scan-n", "full scan limited to n <= " + std::to_string(guard.scan_n));
        StructureSpace space(voc, n);
        if (space.free_cells() > guard.scan_cells)
            throw GuardError("scan-cells", std::to_string(space.free_cells()) + " free cells exceed " + std::to_string(guard.scan_cells));
        auto parts = StructureStream::ranges(space.size_u64(), std::max(1u, jobs) * 8);
        return detail::parallel_sum(parts.size(), jobs, [&](std::size_t i) {
            std::uint64_t c = 0;
            space.for_each(parts[i].first, parts[i].second, [&](std::uint64_t, const Structure& M) {
                if (in_Sn_AH(M, A, H)) ++c;
            });
            return BigInt(c);
        });
    }
    auto subsets = detail::combinations(n, p);
    auto copies = labelled_copies(A);
    return detail::parallel_sum(subsets.size() * copies.size(), jobs, [&](std::size_t i) {
        auto sc = make_scenario(A, H, subsets[i / copies.size()], copies[i % copies.size()]);
        return count_Sn_AX_H_exact(voc, sc, n, guard);
    });
}

bool approx_equivalent(const Structure& A, const PermutationGroup& H, const PermutationGroup& H2) {
    auto aut = automorphism_group(A);
    if (!H.is_subgroup_of(aut) || !H2.is_subgroup_of(aut)) throw Error("approx_equivalent: groups must lie in Aut(A)");
    int r = 0;
    for (int a : A.arities()) r = std::max(r, a);
    std::vector<OrbitPartition> target;
    for (int t = 1; t < r; ++t) target.push_back(orbits_on_tuples(H2, t));
    for (auto& g : aut.elements()) {
        auto gH = conjugate(H, g);
        bool same = true;
        for (int t = 1; t < r && same; ++t) same = orbits_on_tuples(gH, t) == target[t - 1];
        if (same) return true;
    }
    return false;
}

// ---------------------------------------------------------------- unlabelled counts

namespace {

struct WordsHash {
    std::size_t operator()(const std::vector<std::uint64_t>& w) const {
        std::size_t h = 1469598103934665603ull;
        for (auto x : w) h = (h ^ x) * 1099511628211ull;
        return h;
    }
};

using ClassSet = std::unordered_set<std::vector<std::uint64_t>, WordsHash>;

StructureSpace scan_space(const Vocabulary& voc, int n, const CensusGuard& guard) {
    if (n > guard.scan_n) throw GuardError("scan-n", "full scan limited to n <= " + std::to_string(guard.scan_n));
    StructureSpace space(voc, n);
    if (space.free_cells() > guard.scan_cells)
        throw GuardError("scan-cells", std::to_string(space.free_cells()) + " free cells exceed " + std::to_string(guard.scan_cells));
    return space;
}

ClassSet collect_classes(const StructureSpace& space, const StructureFilter& filter, unsigned jobs) {
    auto parts = StructureStream::ranges(space.size_u64(), std::max(1u, jobs) * 8);
    ClassSet all;
    std::mutex m;
    detail::parallel_sum(parts.size(), jobs, [&](std::size_t i) {
        ClassSet local;
        space.for_each(parts[i].first, parts[i].second, [&](std::uint64_t, const Structure& M) {
            if (!filter || filter(M)) local.insert(canonical_form(M).words());
        });
        std::lock_guard<std::mutex> lock(m);
        all.insert(local.begin(), local.end());
        return BigInt(0);
    });
    return all;
}

}  // namespace

BigInt unlabelled_count(const Vocabulary& voc, int n, const StructureFilter& filter, unsigned jobs,
                        const CensusGuard& guard) {
    auto space = scan_space(voc, n, guard);
    return collect_classes(space, filter, jobs).size();
}

BigInt unlabelled_bridge(const Vocabulary& voc, int n) {
    if (n > 10) throw GuardError("bridge-n", "bridge sums over Sym_n, n <= 10");
    std::map<std::vector<int>, BigInt> by_type;
    BigInt total = 0;
    for (auto& pi : all_permutations(n)) {
        std::vector<int> type;
        for (auto& c : pi.cycles()) type.push_back(static_cast<int>(c.size()));
        std::sort(type.begin(), type.end());
        auto it = by_type.find(type);
        if (it == by_type.end()) it = by_type.emplace(type, count_fixing(voc, n, {pi})).first;
        total += it->second;
    }
    auto nf = factorial(static_cast<unsigned>(n));
    if (total % nf != 0) throw Error("bridge: sum not divisible by n!");
    return total / nf;
}

BigInt unlabelled_bridge(const Vocabulary& voc, int n, const StructureFilter& filter, unsigned jobs,
                         const CensusGuard& guard) {
    auto space = scan_space(voc, n, guard);
    AutomorphismSearch search(n, voc.arities());
    auto parts = StructureStream::ranges(space.size_u64(), std::max(1u, jobs) * 8);
    BigInt total = detail::parallel_sum(parts.size(), jobs, [&](std::size_t i) {
        BigInt c = 0;
        space.for_each(parts[i].first, parts[i].second, [&](std::uint64_t, const Structure& M) {
            if (!filter || filter(M)) c += search.count(M);
        });
        return c;
    });
    auto nf = factorial(static_cast<unsigned>(n));
    if (total % nf != 0) throw Error("bridge: sum not divisible by n!");
    return total / nf;
}

LabelledUnlabelled spt_star_census(const Vocabulary& voc, int n, int p, const StructureFilter& filter,
                                   const CensusGuard& guard) {
    auto space = scan_space(voc, n, guard);
    AutomorphismSearch search(n, voc.arities());
    std::uint64_t labelled = 0;
    auto keep = [&](const Structure& M) {
        if (filter && !filter(M)) return false;
        return __builtin_popcountll(search.moved_mask(M)) <= p;
    };
    space.for_each(0, space.size_u64(), [&](std::uint64_t, const Structure& M) {
        if (keep(M)) ++labelled;
    });
    return {labelled, collect_classes(space, keep, 1).size()};
}

// ---------------------------------------------------------------- cache

namespace {

using json = nlohmann::ordered_json;

// Holds an flock for the lifetime of the object.
class FileLock {
public:
    FileLock(const std::filesystem::path& path, int flags, int op) : fd_(::open(path.c_str(), flags, 0644)) {
        if (fd_ >= 0) ::flock(fd_, op);
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    int fd() const { return fd_; }

private:
    int fd_;
};

}  // namespace

CountCache::CountCache(std::filesystem::path dir) {
    std::filesystem::create_directories(dir);
    file_ = dir / "counts.jsonl";
}

std::optional<BigInt> CountCache::lookup(const std::string& digest, const std::string& query, int n,
                                         const std::string& method) const {
    if (!std::filesystem::exists(file_)) return std::nullopt;
    FileLock lock(file_, O_RDONLY, LOCK_SH);
    std::ifstream in(file_);
    std::string line;
    std::optional<BigInt> hit;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;
        if (j.value("digest", "") == digest && j.value("query", "") == query && j.value("n", -1) == n &&
            j.value("method", "") == method && !hit)
            hit = BigInt(j.value("value", std::string("0")));
    }
    return hit;
}

void CountCache::append(const CountRecord& rec) const {
    if (rec.value < 0) throw Error("cache: negative count");
    json j;
    j["digest"] = rec.digest;
    j["query"] = rec.query;
    j["n"] = rec.n;
    j["value"] = to_string(rec.value);
    j["method"] = rec.method;
    std::string line = j.dump() + "\n";
    FileLock lock(file_, O_WRONLY | O_CREAT | O_APPEND, LOCK_EX);
    if (lock.fd() < 0) throw Error("cache: cannot open " + file_.string());
    if (::write(lock.fd(), line.data(), line.size()) != static_cast<ssize_t>(line.size()))
        throw Error("cache: short write to " + file_.string());
}

}  // namespace autocensus
