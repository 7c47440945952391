#pragma once

// Naive reference implementations used as test oracles. They share no code with the
// library apart from the conversions at the bottom.

#include "autocensus/structure.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using Tuple = std::vector<int>;
using Perm = std::vector<int>;

struct OStruct {
    int n = 0;
    std::vector<std::set<Tuple>> rels;
    bool operator==(const OStruct&) const = default;
    bool operator<(const OStruct& o) const { return std::tie(n, rels) < std::tie(o.n, o.rels); }
};

std::vector<Tuple> all_tuples(int n, int arity);
// Every structure on [n] for the given arities, relations interpreted freely.
std::vector<OStruct> all_structures(int n, const std::vector<int>& arities);
std::vector<Perm> all_perms(int n);
Perm compose(const Perm& a, const Perm& b);  // a after b
Perm inverse(const Perm& a);
OStruct image(const Perm& p, const OStruct& M);
bool is_aut(const Perm& p, const OStruct& M);
std::vector<Perm> aut(const OStruct& M);
// Points moved by some automorphism.
std::set<int> spt_star(const OStruct& M);
std::vector<Perm> closure(const std::vector<Perm>& gens, int n);
// Number of orbits on d-tuples, by explicit orbit walking.
int orbit_count(const std::vector<Perm>& group, int n, int d);
// Number of isomorphism classes by pairwise isomorphism testing.
std::size_t iso_classes(const std::vector<OStruct>& ms);

// Structures in general mode as bit codes: bit c is the c-th (symbol, tuple) pair in
// all_tuples order. Fast enough for exhaustive scans at n = 4 over one binary symbol.
class CodeSpace {
public:
    CodeSpace(int n, std::vector<int> arities);
    int n() const { return n_; }
    int cells() const { return static_cast<int>(cells_.size()); }
    std::uint64_t total() const { return std::uint64_t{1} << cells_.size(); }
    // cell_map(p)[c] is the cell of p applied to cell c.
    std::vector<int> cell_map(const Perm& p) const;
    static std::uint64_t apply(const std::vector<int>& map, std::uint64_t code);
    OStruct to_struct(std::uint64_t code) const;
    std::uint64_t from_struct(const OStruct& M) const;
    int cell_of(int s, const Tuple& t) const;

private:
    int n_;
    std::vector<int> arities_;
    std::vector<std::pair<int, Tuple>> cells_;
};

// Perms of [n] together with their cell maps, for repeated scans.
struct PermTable {
    std::vector<Perm> perms;
    std::vector<std::vector<int>> maps;
    explicit PermTable(const CodeSpace& cs);
};

std::vector<Perm> aut(const PermTable& T, std::uint64_t code);
std::set<int> spt_star(const PermTable& T, std::uint64_t code);

// Membership in S_n(A,H) by the definition: Spt*(M) = X carries a copy of A via some
// bijection f with every f h f^-1, extended by the identity off X, an automorphism.
bool in_S_AH(const CodeSpace& cs, const PermTable& T, std::uint64_t code, const OStruct& A,
             const std::vector<Perm>& H);

// Condition (a): mixed tuples that agree off X and whose X-parts lie in the same part of
// Pi_i agree in membership, under every reordering of coordinates. labels[i-1] maps
// i-tuples over X (global elements) to part labels.
bool respects(const OStruct& M, const std::vector<int>& X, const std::vector<std::map<Tuple, int>>& labels);
// Orbit labels of a group on X^t, by orbit walking.
std::map<Tuple, int> orbit_labels(const std::vector<Perm>& group, const std::vector<int>& X, int t);

// Orbits of Sym_n on all codes, by marking.
std::size_t unlabelled(const CodeSpace& cs, const PermTable& T);

OStruct from_lib(const autocensus::Structure& M);
autocensus::Structure to_lib(const OStruct& M, const std::vector<int>& arities);
autocensus::Permutation to_perm(const Perm& p);

}  // namespace oracle
