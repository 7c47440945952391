#pragma once

#include "autocensus/bigint.hpp"
#include "autocensus/perm_group.hpp"
#include "autocensus/structure.hpp"
#include "autocensus/vocabulary.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace autocensus {

struct OrbitSignature {
    int p = 0;
    // q_list[i-1] = number of orbits of H on A^i, i = 1..r-1.
    std::vector<std::uint64_t> q_list;

    std::uint64_t q() const { return q_list.at(0); }
    std::uint64_t s() const { return q_list.at(1); }
};

OrbitSignature orbit_signature(const Vocabulary& voc, const Structure& A, const PermutationGroup& H);

// Integer polynomial in n, stored sparsely by degree; zero coefficients are dropped.
class ExponentPolynomial {
public:
    ExponentPolynomial() = default;
    explicit ExponentPolynomial(std::map<int, BigInt> coefficients);

    const std::map<int, BigInt>& coefficients() const { return coeffs_; }
    BigInt coefficient(int degree) const;
    int degree() const { return coeffs_.empty() ? -1 : coeffs_.rbegin()->first; }
    bool is_zero() const { return coeffs_.empty(); }
    BigInt evaluate(const BigInt& n) const;
    // The polynomial without its constant term.
    ExponentPolynomial nonconstant() const;
    // Sign of the leading coefficient, 0 for the zero polynomial.
    int leading_sign() const;

    ExponentPolynomial operator+(const ExponentPolynomial& o) const;
    ExponentPolynomial operator-(const ExponentPolynomial& o) const;
    bool operator==(const ExponentPolynomial& o) const { return coeffs_ == o.coeffs_; }

    // "n^2 - 2n + 1"
    std::string to_string() const;

private:
    std::map<int, BigInt> coeffs_;
};

// (n - a)^e expanded.
ExponentPolynomial shifted_power(long long a, int e);

// |S_n(A,H)| ~ constant * C(n, binom_p) * 2^{expo(n)}.
struct AsymptoticEstimate {
    BigInt constant;
    int binom_p = 0;
    ExponentPolynomial expo;
    BigInt c_A;
    BigInt d;
};

// Exponent of the estimate for a signature; general mode only.
ExponentPolynomial estimate_exponent(const Vocabulary& voc, const OrbitSignature& sig);
AsymptoticEstimate asymptotic_estimate(const Vocabulary& voc, const Structure& A, const PermutationGroup& H);

// For r = 2: the constant term of the direct expansion and the one displayed by the
// two-arity corollary; they differ by 2 k_2 q p.
struct R2Constants {
    BigInt direct;
    BigInt corollary;
};
R2Constants r2_constants(const Vocabulary& voc, const OrbitSignature& sig);

BigInt beta(const Vocabulary& voc, const BigInt& p, const BigInt& q, const BigInt& s);

struct LimitValue {
    enum class Kind { finite, infinite };
    Kind kind = Kind::finite;
    Rational value = 0;

    static LimitValue finite(Rational v) { return {Kind::finite, std::move(v)}; }
    static LimitValue infinite() { return {Kind::infinite, 0}; }
    bool is_finite() const { return kind == Kind::finite; }
    bool operator==(const LimitValue& o) const { return kind == o.kind && value == o.value; }
    // "1/2", "0", "inf"
    std::string to_string() const;
};

// Orders estimates by growth: nonconstant exponent, then binomial degree. Returns -1, 0, 1.
int compare_growth(const AsymptoticEstimate& a, const AsymptoticEstimate& b);
LimitValue quotient_limit(const AsymptoticEstimate& num, const AsymptoticEstimate& den);
LimitValue aggregate_limit(const std::vector<AsymptoticEstimate>& num, const std::vector<AsymptoticEstimate>& den);

struct ClassSpec {
    enum class Kind { spt_star_eq, spt_star_geq, spt_geq, subgroup, iso_group };
    Kind kind = Kind::spt_star_eq;
    int m = 2;
    PermutationGroup G;
    int cap = 6;

    std::string to_string() const;
};

// "spt*=2", "spt*>=3", "spt>=2", "sub:[3](1 2 3)", "iso:[3](1 2 3)".
ClassSpec parse_class_spec(const std::string& text, int cap = 6);

// The largest subgroup of Aut(A) whose orbits on A^t equal those of H, t = 1..r-1.
PermutationGroup orbit_closure(const Structure& A, const PermutationGroup& H, int r);
int full_group_limit(const Vocabulary& voc, const Structure& A, const PermutationGroup& H);

struct ClassEntry {
    Structure A;
    // Representative group: the orbit closure, which is also the almost-sure automorphism group.
    PermutationGroup K;
    OrbitSignature sig;
    AsymptoticEstimate est;
};

struct Decomposition {
    ClassSpec spec;
    // Classes of the dominant stratum, in canonical order.
    std::vector<ClassEntry> dominant;
    // Every class found that matches the spec, up to max_p_searched.
    std::vector<ClassEntry> all;
    int delta = 0;
    int max_p_searched = 0;
    bool certified = false;

    // c * 2^{expo(0)} of each dominant class, normalized to sum 1.
    std::vector<Rational> weights() const;
};

Decomposition decompose(const Vocabulary& voc, const ClassSpec& spec, std::size_t structure_guard = 1u << 22);
// Throws GuardError("cap") when either side is not certified.
LimitValue class_limit(const Vocabulary& voc, const ClassSpec& num, const ClassSpec& den);

}  // namespace autocensus
