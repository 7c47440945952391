#pragma once

#include "autocensus/bigint.hpp"
#include "autocensus/perm_group.hpp"
#include "autocensus/structure.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace autocensus {

// Backtracking automorphism search. Images are assigned to 0,1,2,... in turn; after each
// assignment every tuple whose largest coordinate is the new point is checked, and a
// multiset hash of per-point incidence patterns prunes candidate images.
class AutomorphismSearch {
public:
    AutomorphismSearch(int n, std::vector<int> arities);

    // fn receives each automorphism as an image vector; returning false stops the search.
    void run(const Structure& M, const std::function<bool(const std::vector<int>&)>& fn) const;
    std::vector<Permutation> all(const Structure& M) const;
    std::size_t count(const Structure& M) const;
    // Points moved by some automorphism (Spt*), as a bit mask.
    std::uint64_t moved_mask(const Structure& M) const;
    bool is_rigid(const Structure& M) const;
    void invariants(const Structure& M, std::vector<std::uint64_t>& sig) const;

private:
    int n_;
    std::vector<int> arities_;
    // checks_[i]: (symbol, tuple) pairs over {0..i} whose largest coordinate is i.
    struct Check {
        int symbol;
        std::vector<int> tuple;
    };
    std::vector<std::vector<Check>> checks_;
};

PermutationGroup automorphism_group(const Structure& M, int guard = 8);

struct SupportProfile {
    int spt = 0;
    std::vector<int> spt_star_set;
    int spt_star = 0;
};

SupportProfile support_profile(const Structure& M, int guard = 8);
SupportProfile support_profile(const PermutationGroup& aut);

// Automorphisms whose support is maximal under inclusion, in lexicographic order.
std::vector<Permutation> maximal_automorphisms(const Structure& M, int guard = 8);
std::vector<Permutation> maximal_elements(const PermutationGroup& aut);

struct SpecialSequence {
    std::vector<Permutation> autos;
    // cumulative_supports[k] = Spt(f_0, ..., f_k).
    std::vector<std::vector<int>> cumulative_supports;
    // deficits[k] = d_k(f_{k+1}).
    std::vector<int> deficits;
};

// |Spt(f) \ X|.
int deficit(const Permutation& f, const std::vector<int>& X);
SpecialSequence special_sequence(const Structure& M, int guard = 8);
SpecialSequence special_sequence(const PermutationGroup& aut);

BigInt support_bound(int k);
// 2r(m!-1)m/m! + 1, and the least integer strictly above it.
Rational spt_threshold_bound(int m, int r);
BigInt spt_threshold(int m, int r);

}  // namespace autocensus
