#pragma once

#include "autocensus/bigint.hpp"
#include "autocensus/permutation.hpp"
#include "autocensus/vocabulary.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace autocensus {

// A finite structure on {0..n-1}; relation s is a dense bit table over n^arity tuples,
// tuples indexed lexicographically. All relations share one flat bit vector.
class Structure {
public:
    Structure() = default;
    Structure(int n, std::vector<int> arities);

    int n() const { return n_; }
    int symbol_count() const { return static_cast<int>(arities_.size()); }
    int arity(int s) const { return arities_[s]; }
    const std::vector<int>& arities() const { return arities_; }

    std::size_t cell_count() const { return cells_; }
    std::size_t offset(int s) const { return offsets_[s]; }
    std::size_t cell(int s, const int* t) const;
    std::size_t cell(int s, const std::vector<int>& t) const { return cell(s, t.data()); }
    // Inverse of cell(): symbol and tuple of a flat cell index.
    int symbol_of(std::size_t cell) const;
    void tuple_of(std::size_t cell, int* t) const;

    bool bit(std::size_t c) const { return (words_[c >> 6] >> (c & 63)) & 1; }
    void set_bit(std::size_t c, bool v) {
        if (v) words_[c >> 6] |= std::uint64_t{1} << (c & 63);
        else words_[c >> 6] &= ~(std::uint64_t{1} << (c & 63));
    }
    bool has(int s, const std::vector<int>& t) const { return bit(cell(s, t)); }
    void set(int s, const std::vector<int>& t, bool v = true) { set_bit(cell(s, t), v); }
    void clear();

    // 0-based tuples of relation s in lexicographic order.
    std::vector<std::vector<int>> tuples(int s) const;
    std::size_t tuple_count() const;
    // Substructure induced on elems; element i of the result is elems[i].
    Structure induced(const std::vector<int>& elems) const;

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }
    std::size_t hash() const;

    bool same_shape(const Structure& o) const { return n_ == o.n_ && arities_ == o.arities_; }
    bool operator==(const Structure& o) const { return same_shape(o) && words_ == o.words_; }
    // Order used for canonical forms: the flat bit vector read as a binary number,
    // highest cell most significant. Only meaningful between same-shaped structures.
    bool operator<(const Structure& o) const;

private:
    int n_ = 0;
    std::vector<int> arities_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> pow_;
    std::size_t cells_ = 0;
    std::vector<std::uint64_t> words_;
};

Structure empty_structure(const Vocabulary& voc, int n);
// Throws ParseError when M breaks an arity or mode constraint of voc.
void validate(const Vocabulary& voc, const Structure& M);

// {"n": int, "rels": {name: [[...], ...]}}, 1-based tuples.
Structure parse_structure(const Vocabulary& voc, const std::string& text);
std::string serialize(const Vocabulary& voc, const Structure& M);
// Human-readable one-line description, 1-based.
std::string describe(const Vocabulary& voc, const Structure& M);

// pi(M): the unique N such that pi is an isomorphism M -> N.
Structure apply_permutation(const Permutation& pi, const Structure& M);
// Least pi(M) over pi in Sym_n; guarded by n <= bound.
Structure canonical_form(const Structure& M, int bound = 8);

// The free cells of S_n for a vocabulary: one cell per ordered tuple in general mode,
// per injective tuple in irreflexive mode and per injective tuple up to order in
// symmetric mode. A code assigns one bit to each free cell.
class StructureSpace {
public:
    StructureSpace(const Vocabulary& voc, int n);

    int n() const { return n_; }
    std::size_t free_cells() const { return groups_.size(); }
    BigInt size() const;
    // Codes fit in 64 bits when free_cells() <= 63.
    bool fits_u64() const { return groups_.size() <= 63; }
    std::uint64_t size_u64() const;

    Structure decode(std::uint64_t code) const;
    void decode_into(std::uint64_t code, Structure& M) const;
    Structure decode(const BigInt& code) const;
    BigInt encode(const Structure& M) const;
    Structure blank() const { return blank_; }
    // Flat cells making up free cell g (one, or all orderings in symmetric mode).
    const std::vector<std::size_t>& group(std::size_t g) const { return groups_[g]; }

    // Calls fn on every structure with code in [begin, end); reuses one Structure.
    void for_each(std::uint64_t begin, std::uint64_t end,
                  const std::function<void(std::uint64_t, const Structure&)>& fn) const;

private:
    int n_;
    Structure blank_;
    std::vector<std::vector<std::size_t>> groups_;
};

// Lazy stream over S_n; `ranges` splits the index space into disjoint parts.
class StructureStream {
public:
    StructureStream(const Vocabulary& voc, int n, std::uint64_t begin = 0, std::uint64_t end = UINT64_MAX);
    bool next(Structure& out);
    std::uint64_t position() const { return pos_; }
    static std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges(std::uint64_t total, unsigned parts);

private:
    StructureSpace space_;
    std::uint64_t pos_, end_;
};

StructureStream enumerate_structures(const Vocabulary& voc, int n);

}  // namespace autocensus
