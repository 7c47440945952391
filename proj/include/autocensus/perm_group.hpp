#pragma once

#include "autocensus/bigint.hpp"
#include "autocensus/permutation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace autocensus {

// A permutation group with its elements materialized (sorted, identity first).
class PermutationGroup {
public:
    PermutationGroup() = default;

    int degree() const { return degree_; }
    const std::vector<Permutation>& generators() const { return gens_; }
    const std::vector<Permutation>& elements() const { return elems_; }
    std::size_t order() const { return elems_.size(); }
    bool contains(const Permutation& p) const;
    bool is_trivial() const { return elems_.size() == 1; }
    bool is_subgroup_of(const PermutationGroup& G) const;
    // Points moved by some element, ascending.
    std::vector<int> support() const;
    std::vector<int> fixed_points() const;
    bool has_fixed_point() const { return !fixed_points().empty(); }
    std::string to_string() const;

    bool operator==(const PermutationGroup& o) const { return degree_ == o.degree_ && elems_ == o.elems_; }

    friend PermutationGroup generate(const std::vector<Permutation>& gens, int degree);

private:
    int degree_ = 0;
    std::vector<Permutation> gens_;
    std::vector<Permutation> elems_;
};

// Closure of gens together with the identity. degree < 0 takes it from the generators.
PermutationGroup generate(const std::vector<Permutation>& gens, int degree = -1);
PermutationGroup symmetric_group(int n);
// f G f^{-1}.
PermutationGroup conjugate(const PermutationGroup& G, const Permutation& f);
// "[3](1 2 3)" or "[4](1 2),(3 4)"; "[n]" alone is the trivial group.
PermutationGroup parse_group(const std::string& text);
std::string group_text(const PermutationGroup& G);

std::vector<int> support_of(const std::vector<Permutation>& gens);

// Orbits of a group on d-tuples under the diagonal action. Tuples are indexed
// lexicographically; blocks are numbered by first appearance in that order.
struct OrbitPartition {
    int n = 0;
    int arity = 0;
    std::vector<int> block_of;
    int block_count = 0;

    std::vector<std::vector<int>> blocks() const;
    bool operator==(const OrbitPartition& o) const = default;
};

OrbitPartition orbits_on_tuples(const PermutationGroup& G, int d);
// Renumber a labelling of tuples so blocks appear in first-occurrence order.
void normalize_labels(std::vector<int>& labels, int* count = nullptr);
std::uint64_t burnside_count(const PermutationGroup& G, int d);
// Bounds on the number of d-tuple orbits of any group with support size p on [n].
std::pair<Rational, Rational> orbit_count_bounds(int p, int n, int d);

std::vector<PermutationGroup> subgroups(const PermutationGroup& G, std::size_t guard = 10000);
std::optional<Permutation> perm_isomorphic(const PermutationGroup& H, const PermutationGroup& H2);
bool abstract_isomorphic(const PermutationGroup& G, const PermutationGroup& G2, std::size_t guard = 1000);
// True when G is isomorphic to some subgroup of H (abstractly).
bool embeds_in(const PermutationGroup& G, const PermutationGroup& H);

}  // namespace autocensus
