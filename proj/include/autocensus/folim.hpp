#pragma once

#include "autocensus/bigint.hpp"
#include "autocensus/census.hpp"
#include "autocensus/perm_group.hpp"
#include "autocensus/structure.hpp"
#include "autocensus/vocabulary.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace autocensus {

// Immutable first-order formula over a relational vocabulary. Nodes are shared, so
// copying a Formula is cheap.
class Formula {
public:
    enum class Kind { truth, falsity, atom, equal, negation, conjunction, disjunction, implication, equivalence, exists, forall };

    struct Node {
        Kind kind = Kind::truth;
        int symbol = -1;                // atoms
        std::vector<std::string> args;  // atoms and equalities
        std::string var;                // quantifiers
        std::vector<Formula> kids;
        std::vector<std::string> free;  // sorted
        int rank = 0;
    };

    Formula();

    static Formula truth();
    static Formula falsity();
    static Formula atom(int symbol, std::vector<std::string> args);
    static Formula equal(std::string a, std::string b);
    static Formula negation(Formula f);
    // Empty conjunction is truth, empty disjunction is falsity.
    static Formula conjunction(std::vector<Formula> fs);
    static Formula disjunction(std::vector<Formula> fs);
    static Formula implication(Formula a, Formula b);
    static Formula equivalence(Formula a, Formula b);
    static Formula exists(std::string var, Formula body);
    static Formula forall(std::string var, Formula body);
    static Formula exists(const std::vector<std::string>& vars, Formula body);
    static Formula forall(const std::vector<std::string>& vars, Formula body);

    Kind kind() const { return node_->kind; }
    const Node& node() const { return *node_; }
    const std::vector<std::string>& free_variables() const { return node_->free; }
    bool is_sentence() const { return node_->free.empty(); }
    int quantifier_rank() const { return node_->rank; }
    std::size_t size() const;

    std::string to_string(const Vocabulary& voc) const;

private:
    explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Formula make(Node n);
    std::shared_ptr<const Node> node_;
};

// Grammar: `exists x. F`, `forall x. F`, `!F`, `F & G`, `F | G`, `F -> G`, `F <-> G`,
// `R(x,y)`, `x = y`, `x != y`, `true`, `false`, parentheses. Quantifier bodies extend
// as far right as possible.
Formula parse_formula(const Vocabulary& voc, const std::string& text);

using Assignment = std::map<std::string, int>;

// Satisfaction with memoization of quantified subformulas that have at most two free
// variables. One Evaluator per structure; it may be reused across formulas.
class Evaluator {
public:
    explicit Evaluator(const Structure& M);
    ~Evaluator();
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    bool operator()(const Formula& phi, const Assignment& a = {});
    // Elements a with M |= phi(a), for phi with exactly one free variable.
    std::vector<int> satisfying(const Formula& phi);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

bool evaluate(const Structure& M, const Formula& phi, const Assignment& a = {});

// `displayed` quantifies the m-1 witnesses directly and costs about n^(m+1) to evaluate.
// `counting` is the equivalent form "some w != x disagrees with x on at most m-2 other
// elements, and there are m-2 spare elements", which costs about n^2 for random structures.
enum class ThetaForm { displayed, counting };

// theta(x): x lies in a set of m elements whose members agree with x on every outside z.
Formula theta(const Vocabulary& voc, int m, const std::string& x = "x", ThetaForm form = ThetaForm::displayed);
// xi(x1, x2): no element outside theta tells x1 and x2 apart.
Formula xi(const Vocabulary& voc, int m, const std::string& x1 = "x1", const std::string& x2 = "x2",
           ThetaForm form = ThetaForm::displayed);
// chi_A(x_1..x_p): the isomorphism type of A, variables named x1..xp.
Formula chi(const Vocabulary& voc, const Structure& A);
// The sentence psi for (A, H), with p = |A| witnesses.
Formula psi(const Vocabulary& voc, const Structure& A, const PermutationGroup& H, ThetaForm form = ThetaForm::displayed);

// The k-extension property of M relative to X and the partition sequence. Every
// configuration of a fresh element c over X-classes and a k-set B outside X must be
// realized by some c outside X and B.
bool has_k_extension(const Vocabulary& voc, const Structure& M, const std::vector<int>& X, const PartitionSequence& Pi,
                     int k);
// Number of configuration bits for a fresh element against X and a k-set B.
std::size_t extension_bits(const Vocabulary& voc, const std::vector<int>& X, const PartitionSequence& Pi, int k);

struct Sampler {
    Vocabulary voc;
    EmbeddedScenario scenario;
    PartitionSequence Pi;
    int n = 0;
    std::uint64_t seed = 0;
};

// Stream seed for trial `index` of a run with seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Uniform draws from T_n(A_X, Pi); the T_n space is built once.
class TnSampler {
public:
    explicit TnSampler(const Sampler& s);
    const TnSpace& space() const { return space_; }
    const Sampler& config() const { return cfg_; }
    // The trial-th structure of the stream; reproducible.
    Structure draw(std::uint64_t trial) const;

private:
    Sampler cfg_;
    TnSpace space_;
};

Structure sample_Tn(const Sampler& s);

struct WeightedScenario {
    Structure A;
    PermutationGroup H;
    Rational weight;
};

struct McOptions {
    bool decision = false;
    // Witness draws tried per scenario in decision mode before giving up.
    int witness_attempts = 8;
    unsigned jobs = 1;
};

struct McScenarioReport {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    // Decision mode only.
    std::optional<bool> verdict;
    bool extension_verified = false;
    bool theta_verified = false;
    int rejected_witnesses = 0;
};

struct McResult {
    Rational estimate;
    double standard_error = 0;
    std::vector<McScenarioReport> scenarios;
    // Decision mode: sum of weight * verdict, when every scenario produced a verdict.
    std::optional<Rational> decision_value;
};

// Trials per scenario: largest-remainder apportionment of `trials` by weight, at least one each.
std::vector<std::uint64_t> allocate_trials(const std::vector<Rational>& weights, std::uint64_t trials);

McResult mc_sentence_probability(const Vocabulary& voc, const std::vector<WeightedScenario>& scenarios, const Formula& phi,
                                 int n, std::uint64_t trials, std::uint64_t seed, const McOptions& opt = {});

}  // namespace autocensus
