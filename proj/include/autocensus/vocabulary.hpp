#pragma once

#include <map>
#include <string>
#include <vector>

namespace autocensus {

// How a relation symbol may be interpreted.
enum class Mode { general, irreflexive, symmetric };

const char* mode_name(Mode m);

struct Symbol {
    std::string name;
    int arity = 0;
    Mode mode = Mode::general;
};

class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<Symbol> symbols);

    const std::vector<Symbol>& symbols() const { return symbols_; }
    const Symbol& symbol(int i) const { return symbols_.at(i); }
    int rho() const { return static_cast<int>(symbols_.size()); }
    int r() const { return r_; }
    // k_i: number of symbols of arity i (0 when absent).
    int k(int arity) const;
    const std::map<int, int>& arity_counts() const { return arity_counts_; }
    std::vector<int> arities() const;
    // Index of the named symbol, or -1.
    int index_of(const std::string& name) const;
    bool all_general() const;

    // Normalized text form; parse_vocabulary(to_text()) reproduces the vocabulary.
    std::string to_text() const;
    // Stable 64-bit FNV-1a digest of to_text(), as 16 hex digits.
    std::string digest() const;

    bool operator==(const Vocabulary& o) const { return to_text() == o.to_text(); }

private:
    std::vector<Symbol> symbols_;
    std::map<int, int> arity_counts_;
    int r_ = 0;
};

// Lines `NAME/ARITY [gen|irr|sym]`, `#` starts a comment.
Vocabulary parse_vocabulary(const std::string& text);

}  // namespace autocensus
