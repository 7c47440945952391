#include "autocensus/perm_group.hpp"

#include "autocensus/error.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace autocensus {

namespace {

struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = 1469598103934665603ULL;
        for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ULL;
        return h;
    }
};

std::uint64_t ipow64(int n, int d) {
    std::uint64_t r = 1;
    for (int i = 0; i < d; ++i) r *= static_cast<std::uint64_t>(n);
    return r;
}

}  // namespace

bool PermutationGroup::contains(const Permutation& p) const {
    return p.degree() == degree_ && std::binary_search(elems_.begin(), elems_.end(), p);
}

bool PermutationGroup::is_subgroup_of(const PermutationGroup& G) const {
    if (degree_ != G.degree_) return false;
    for (const auto& g : gens_)
        if (!G.contains(g)) return false;
    return true;
}

std::vector<int> PermutationGroup::support() const { return support_of(gens_.empty() ? elems_ : gens_); }

std::vector<int> PermutationGroup::fixed_points() const {
    std::vector<char> moved(degree_, 0);
    for (const auto& g : gens_)
        for (int x : g.support()) moved[x] = 1;
    std::vector<int> out;
    for (int i = 0; i < degree_; ++i)
        if (!moved[i]) out.push_back(i);
    return out;
}

std::string PermutationGroup::to_string() const {
    std::string s = "<";
    for (std::size_t i = 0; i < gens_.size(); ++i) s += (i ? ", " : "") + gens_[i].to_string();
    return s + "> on [" + std::to_string(degree_) + "], order " + std::to_string(order());
}

PermutationGroup generate(const std::vector<Permutation>& gens, int degree) {
    if (degree < 0) {
        if (gens.empty()) throw Error("generate: no generators and no degree");
        degree = gens[0].degree();
    }
    for (const auto& g : gens)
        if (g.degree() != degree) throw Error("generate: generators of mixed degree");
    PermutationGroup G;
    G.degree_ = degree;
    for (const auto& g : gens)
        if (!g.is_identity() && std::find(G.gens_.begin(), G.gens_.end(), g) == G.gens_.end()) G.gens_.push_back(g);
    std::set<Permutation> seen;
    std::deque<Permutation> queue;
    auto id = Permutation::identity(degree);
    seen.insert(id);
    queue.push_back(id);
    while (!queue.empty()) {
        auto x = queue.front();
        queue.pop_front();
        for (const auto& g : G.gens_) {
            auto y = g * x;
            if (seen.insert(y).second) queue.push_back(std::move(y));
        }
    }
    G.elems_.assign(seen.begin(), seen.end());
    return G;
}

PermutationGroup symmetric_group(int n) {
    std::vector<Permutation> gens;
    if (n >= 2) gens.push_back(Permutation::cycle(n, {0, 1}));
    if (n >= 3) {
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        gens.push_back(Permutation::cycle(n, all));
    }
    return generate(gens, n);
}

PermutationGroup conjugate(const PermutationGroup& G, const Permutation& f) {
    auto fi = f.inverse();
    std::vector<Permutation> gens;
    for (const auto& g : G.generators()) gens.push_back(f * g * fi);
    return generate(gens, G.degree());
}

PermutationGroup parse_group(const std::string& text) {
    std::size_t i = text.find_first_not_of(" \t");
    if (i == std::string::npos || text[i] != '[') throw ParseError("group must start with [degree]: '" + text + "'");
    auto close = text.find(']', i);
    if (close == std::string::npos) throw ParseError("missing ']' in '" + text + "'");
    auto deg = text.substr(i + 1, close - i - 1);
    if (deg.empty() || deg.size() > 3 || deg.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("bad degree in '" + text + "'");
    int n = std::stoi(deg);
    if (n < 1) throw ParseError("degree must be positive in '" + text + "'");
    std::vector<Permutation> gens;
    std::string rest = text.substr(close + 1), cur;
    int depth = 0;
    for (char c : rest + ";") {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (depth == 0 && (c == ',' || c == ';')) {
            if (cur.find_first_not_of(" \t") != std::string::npos) gens.push_back(parse_permutation(cur, n));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return generate(gens, n);
}

std::string group_text(const PermutationGroup& G) {
    std::string s = "[" + std::to_string(G.degree()) + "]";
    for (std::size_t i = 0; i < G.generators().size(); ++i) s += (i ? "," : "") + G.generators()[i].to_string();
    return s;
}

std::vector<int> support_of(const std::vector<Permutation>& gens) {
    if (gens.empty()) return {};
    int n = gens[0].degree();
    std::vector<char> moved(n, 0);
    for (const auto& g : gens) {
        if (g.degree() != n) throw Error("support_of: permutations of mixed degree");
        for (int x : g.support()) moved[x] = 1;
    }
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (moved[i]) out.push_back(i);
    return out;
}

std::vector<std::vector<int>> OrbitPartition::blocks() const {
    std::vector<std::vector<int>> out(block_count);
    for (std::size_t t = 0; t < block_of.size(); ++t) out[block_of[t]].push_back(static_cast<int>(t));
    return out;
}

void normalize_labels(std::vector<int>& labels, int* count) {
    std::unordered_map<int, int> remap;
    for (auto& l : labels) {
        auto [it, fresh] = remap.emplace(l, static_cast<int>(remap.size()));
        l = it->second;
    }
    if (count) *count = static_cast<int>(remap.size());
}

OrbitPartition orbits_on_tuples(const PermutationGroup& G, int d) {
    if (d < 1) throw Error("orbits_on_tuples: d must be >= 1");
    int n = G.degree();
    std::uint64_t total = ipow64(n, d);
    if (total > (std::uint64_t{1} << 26)) throw GuardError("tuples", "n^d too large");
    std::vector<int> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<int> t(d);
    for (const auto& g : G.generators()) {
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            std::uint64_t x = idx, img = 0, mul = 1;
            for (int j = d - 1; j >= 0; --j) {
                t[j] = static_cast<int>(x % n);
                x /= n;
            }
            for (int j = d - 1; j >= 0; --j) {
                img += static_cast<std::uint64_t>(g(t[j])) * mul;
                mul *= n;
            }
            int a = find(static_cast<int>(idx)), b = find(static_cast<int>(img));
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    OrbitPartition P;
    P.n = n;
    P.arity = d;
    P.block_of.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) P.block_of[i] = find(static_cast<int>(i));
    normalize_labels(P.block_of, &P.block_count);
    return P;
}

std::uint64_t burnside_count(const PermutationGroup& G, int d) {
    if (d < 1) throw Error("burnside_count: d must be >= 1");
    BigInt sum = 0;
    for (const auto& g : G.elements()) {
        int fixed = 0;
        for (int i = 0; i < g.degree(); ++i) fixed += g(i) == i;
        sum += ipow(BigInt(fixed), static_cast<unsigned>(d));
    }
    if (sum % G.order() != 0) throw Error("burnside_count: non-integral average");
    return static_cast<std::uint64_t>(sum / G.order());
}

std::pair<Rational, Rational> orbit_count_bounds(int p, int n, int d) {
    if (p < 0 || p > n || d < 1) throw Error("orbit_count_bounds: need 0 <= p <= n and d >= 1");
    BigInt pf = factorial(static_cast<unsigned>(p));
    BigInt nd = ipow(BigInt(n), static_cast<unsigned>(d));
    Rational lower(nd + (pf - 1) * ipow(BigInt(n - p), static_cast<unsigned>(d)), pf);
    Rational upper = Rational(nd) - Rational(BigInt(p) * ipow(BigInt(n), static_cast<unsigned>(d - 1)), 2);
    return {lower, upper};
}

namespace {

// Element-indexed view of a group used by the subgroup and isomorphism searches.
struct IndexedGroup {
    const PermutationGroup* G;
    std::unordered_map<std::vector<int>, int, VecHash> index;
    std::vector<int> table;  // multiplication table when small enough
    int size;

    explicit IndexedGroup(const PermutationGroup& g) : G(&g), size(static_cast<int>(g.order())) {
        for (int i = 0; i < size; ++i) index.emplace(g.elements()[i].images(), i);
        if (size <= 2048) {
            table.resize(static_cast<std::size_t>(size) * size);
            for (int a = 0; a < size; ++a)
                for (int b = 0; b < size; ++b)
                    table[static_cast<std::size_t>(a) * size + b] = index.at((g.elements()[a] * g.elements()[b]).images());
        }
    }
    int mul(int a, int b) const {
        if (!table.empty()) return table[static_cast<std::size_t>(a) * size + b];
        return index.at((G->elements()[a] * G->elements()[b]).images());
    }
    int id_of(const Permutation& p) const { return index.at(p.images()); }
};

using Bits = std::vector<std::uint64_t>;

bool test(const Bits& b, int i) { return (b[i >> 6] >> (i & 63)) & 1; }
void put(Bits& b, int i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }

// Closure of a set of generator indices; returns the element bitset.
Bits close_indices(const IndexedGroup& IG, const std::vector<int>& gens) {
    Bits b((IG.size + 63) / 64, 0);
    std::vector<int> members{0};
    put(b, 0);
    for (std::size_t k = 0; k < members.size(); ++k)
        for (int g : gens) {
            int y = IG.mul(g, members[k]);
            if (!test(b, y)) {
                put(b, y);
                members.push_back(y);
            }
        }
    return b;
}

PermutationGroup from_bits(const IndexedGroup& IG, const std::vector<int>& gens) {
    std::vector<Permutation> g;
    for (int i : gens) g.push_back(IG.G->elements()[i]);
    return generate(g, IG.G->degree());
}

}  // namespace

std::vector<PermutationGroup> subgroups(const PermutationGroup& G, std::size_t guard) {
    if (G.order() > guard) throw GuardError("subgroup-order", "|G|=" + std::to_string(G.order()) + " exceeds " + std::to_string(guard));
    IndexedGroup IG(G);
    std::map<Bits, std::vector<int>> found;  // element set -> generator indices
    std::vector<Bits> cyclic_sets;
    std::vector<int> cyclic_gen;
    {
        std::set<Bits> seen;
        for (int i = 1; i < IG.size; ++i) {
            auto b = close_indices(IG, {i});
            if (seen.insert(b).second) {
                cyclic_sets.push_back(b);
                cyclic_gen.push_back(i);
            }
        }
    }
    std::deque<Bits> queue;
    auto trivial = close_indices(IG, {});
    found.emplace(trivial, std::vector<int>{});
    queue.push_back(trivial);
    while (!queue.empty()) {
        Bits K = queue.front();
        queue.pop_front();
        auto gens = found.at(K);
        for (std::size_t c = 0; c < cyclic_sets.size(); ++c) {
            if (test(K, cyclic_gen[c])) continue;
            auto g2 = gens;
            g2.push_back(cyclic_gen[c]);
            auto J = close_indices(IG, g2);
            if (found.emplace(J, g2).second) queue.push_back(J);
        }
    }
    std::vector<std::pair<std::size_t, PermutationGroup>> out;
    for (const auto& [bits, gens] : found) out.emplace_back(0, from_bits(IG, gens));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second.order() != b.second.order()) return a.second.order() < b.second.order();
        return a.second.elements() < b.second.elements();
    });
    std::vector<PermutationGroup> res;
    for (auto& [k, g] : out) res.push_back(std::move(g));
    return res;
}

std::optional<Permutation> perm_isomorphic(const PermutationGroup& H, const PermutationGroup& H2) {
    if (H.degree() != H2.degree() || H.order() != H2.order()) return std::nullopt;
    int n = H.degree();
    if (n > 10) throw GuardError("degree", "perm_isomorphic limited to degree 10");
    std::vector<int> img(n);
    std::iota(img.begin(), img.end(), 0);
    do {
        Permutation f(img);
        auto fi = f.inverse();
        bool ok = true;
        for (const auto& h : H.generators())
            if (!H2.contains(f * h * fi)) {
                ok = false;
                break;
            }
        if (ok) return f;
    } while (std::next_permutation(img.begin(), img.end()));
    return std::nullopt;
}

namespace {

std::vector<int> element_orders(const PermutationGroup& G) {
    std::vector<int> o;
    for (const auto& g : G.elements()) o.push_back(g.order());
    return o;
}

// Greedy generating set: add elements of largest order not yet in the generated subgroup.
std::vector<int> greedy_generators(const IndexedGroup& IG, const std::vector<int>& orders) {
    std::vector<int> idx(IG.size);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return orders[a] > orders[b]; });
    std::vector<int> gens;
    auto cur = close_indices(IG, gens);
    for (int i : idx) {
        if (test(cur, i)) continue;
        gens.push_back(i);
        cur = close_indices(IG, gens);
    }
    return gens;
}

// Tries to extend gens[k] -> images into a homomorphism; checks all Cayley-graph edges.
bool is_isomorphism(const IndexedGroup& A, const IndexedGroup& B, const std::vector<int>& gens, const std::vector<int>& imgs) {
    std::vector<int> phi(A.size, -1);
    std::vector<char> used(B.size, 0);
    phi[0] = 0;
    used[0] = 1;
    std::vector<int> members{0};
    for (std::size_t k = 0; k < members.size(); ++k) {
        int x = members[k];
        for (std::size_t j = 0; j < gens.size(); ++j) {
            int y = A.mul(gens[j], x);
            int fy = B.mul(imgs[j], phi[x]);
            if (phi[y] < 0) {
                if (used[fy]) return false;
                phi[y] = fy;
                used[fy] = 1;
                members.push_back(y);
            } else if (phi[y] != fy) {
                return false;
            }
        }
    }
    return static_cast<int>(members.size()) == A.size;
}

}  // namespace

bool abstract_isomorphic(const PermutationGroup& G, const PermutationGroup& G2, std::size_t guard) {
    if (G.order() > guard || G2.order() > guard)
        throw GuardError("iso-order", "group order exceeds " + std::to_string(guard));
    if (G.order() != G2.order()) return false;
    auto oa = element_orders(G), ob = element_orders(G2);
    {
        auto sa = oa, sb = ob;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return false;
    }
    IndexedGroup A(G), B(G2);
    auto gens = greedy_generators(A, oa);
    std::vector<std::vector<int>> cand(gens.size());
    for (std::size_t j = 0; j < gens.size(); ++j)
        for (int b = 0; b < B.size; ++b)
            if (ob[b] == oa[gens[j]]) cand[j].push_back(b);
    std::vector<int> imgs(gens.size());
    std::function<bool(std::size_t)> rec = [&](std::size_t j) -> bool {
        if (j == gens.size()) return is_isomorphism(A, B, gens, imgs);
        for (int b : cand[j]) {
            imgs[j] = b;
            if (rec(j + 1)) return true;
        }
        return false;
    };
    return rec(0);
}

bool embeds_in(const PermutationGroup& G, const PermutationGroup& H) {
    if (H.order() % G.order() != 0) return false;
    if (G.order() == 1) return true;
    for (const auto& K : subgroups(H))
        if (K.order() == G.order() && abstract_isomorphic(G, K)) return true;
    return false;
}

}  // namespace autocensus
