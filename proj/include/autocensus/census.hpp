#pragma once

#include "autocensus/bigint.hpp"
#include "autocensus/perm_group.hpp"
#include "autocensus/structure.hpp"
#include "autocensus/vocabulary.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace autocensus {

// A support template A with a group H, placed on X inside [n].
// A_X lives on local positions 0..p-1; position i stands for element X[i].
struct EmbeddedScenario {
    Structure A;
    PermutationGroup H;
    std::vector<int> X;
    Structure A_X;

    int p() const { return A.n(); }
};

// Checks every scenario invariant; throws Error naming the broken one.
void validate_scenario(const EmbeddedScenario& sc);
EmbeddedScenario make_scenario(const Structure& A, const PermutationGroup& H, std::vector<int> X,
                               std::optional<Structure> A_X = std::nullopt);
// X = {0..p-1}, A_X = A.
EmbeddedScenario make_scenario(const Structure& A, const PermutationGroup& H);

// partitions[t-1] is Pi_t on X^t, in local coordinates.
struct PartitionSequence {
    std::vector<OrbitPartition> partitions;

    const OrbitPartition& pi(int t) const { return partitions.at(t - 1); }
    bool operator==(const PartitionSequence& o) const = default;
};

// Orbit partitions of H_f on X^t, t = 1..r-1, where f is the local relabelling sigma.
PartitionSequence partition_sequence_of(const PermutationGroup& H, const Permutation& sigma, int r);
std::vector<PartitionSequence> partition_sequences(const EmbeddedScenario& sc, int r);

// Exponent of 2 in |S_n(f_1..f_s)|.
BigInt fixing_exponent(const Vocabulary& voc, int n, const std::vector<Permutation>& perms);
BigInt count_fixing(const Vocabulary& voc, int n, const std::vector<Permutation>& perms);

// Number of free bits of T_n(A_X, Pi), from the closed form.
BigInt Tn_exponent(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n);
BigInt count_Tn(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n);

// The free bits of T_n(A_X, Pi). Cells inside X are fixed by A_X; every other cell
// belongs to exactly one free bit or is forced off by the mode.
class TnSpace {
public:
    TnSpace(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n);

    int n() const { return base_.n(); }
    const std::vector<int>& X() const { return X_; }
    std::uint64_t X_mask() const;
    std::size_t free_bits() const { return start_.size() - 1; }
    const Structure& base() const { return base_; }

    // Flat cells carrying free bit b.
    const std::size_t* cells_begin(std::size_t b) const { return cells_.data() + start_[b]; }
    const std::size_t* cells_end(std::size_t b) const { return cells_.data() + start_[b + 1]; }
    void set_bit(Structure& M, std::size_t b, bool v) const;

    // Requires free_bits() <= 63; bit b of code drives free bit b.
    void decode_into(std::uint64_t code, Structure& M) const;
    Structure decode(std::uint64_t code) const;

private:
    std::vector<int> X_;
    Structure base_;
    std::vector<std::size_t> cells_;
    std::vector<std::size_t> start_;
};

bool respects(const Structure& M, const std::vector<int>& X, const PartitionSequence& Pi);

// Brute-force guards: free bits of a T_n space, and n for full scans of S_n.
struct CensusGuard {
    std::size_t free_bits = 40;
    int scan_n = 5;
    std::size_t scan_cells = 40;
};

BigInt count_Sn_AX_Pi_exact(const Vocabulary& voc, const EmbeddedScenario& sc, const PartitionSequence& Pi, int n,
                            const CensusGuard& guard = {});

// |S_n(A_X, H)| for one placement: union over the partition sequences.
BigInt count_Sn_AX_H_exact(const Vocabulary& voc, const EmbeddedScenario& sc, int n, const CensusGuard& guard = {});

enum class AHMethod { by_placement, full_scan };

// |S_n(A,H)|. by_placement sums count_Sn_AX_H_exact over every X and every labelled
// copy A_X; full_scan tests the definition on every member of S_n.
BigInt count_Sn_AH_exact(const Vocabulary& voc, const Structure& A, const PermutationGroup& H, int n,
                         AHMethod method = AHMethod::by_placement, unsigned jobs = 1, const CensusGuard& guard = {});

// Membership in S_n(A,H) straight from the definition, for a single M.
bool in_Sn_AH(const Structure& M, const Structure& A, const PermutationGroup& H);

// r is taken from the arities of A.
bool approx_equivalent(const Structure& A, const PermutationGroup& H, const PermutationGroup& H2);

using StructureFilter = std::function<bool(const Structure&)>;

// Isomorphism classes of filtered members of S_n, by canonical-form dedup.
BigInt unlabelled_count(const Vocabulary& voc, int n, const StructureFilter& filter = {}, unsigned jobs = 1,
                        const CensusGuard& guard = {});
// Sum over pi of |S_n(pi)| divided by n!, from the closed form.
BigInt unlabelled_bridge(const Vocabulary& voc, int n);
// Sum over filtered M of |Aut(M)|, divided by n!; throws if the sum is not divisible.
BigInt unlabelled_bridge(const Vocabulary& voc, int n, const StructureFilter& filter, unsigned jobs = 1,
                         const CensusGuard& guard = {});

// Labelled and unlabelled counts of {M : spt*(M) <= p, filter(M)}.
struct LabelledUnlabelled {
    BigInt labelled;
    BigInt unlabelled;
};
LabelledUnlabelled spt_star_census(const Vocabulary& voc, int n, int p, const StructureFilter& filter = {},
                                   const CensusGuard& guard = {});

// Append-only JSON-lines cache of counts.
struct CountRecord {
    std::string digest;
    std::string query;
    int n = 0;
    BigInt value;
    std::string method;
};

class CountCache {
public:
    explicit CountCache(std::filesystem::path dir);

    std::optional<BigInt> lookup(const std::string& digest, const std::string& query, int n,
                                 const std::string& method) const;
    void append(const CountRecord& rec) const;
    const std::filesystem::path& file() const { return file_; }

private:
    std::filesystem::path file_;
};

}  // namespace autocensus
