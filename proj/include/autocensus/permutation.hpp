#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace autocensus {

// A permutation of {0..n-1}; printed and parsed 1-based in cycle notation.
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<int> images);
    static Permutation identity(int n);
    // Transposition / cycle helpers, 0-based points.
    static Permutation cycle(int n, const std::vector<int>& points);

    int degree() const { return static_cast<int>(img_.size()); }
    int operator()(int x) const { return img_[x]; }
    const std::vector<int>& images() const { return img_; }

    bool is_identity() const;
    Permutation inverse() const;
    // (a * b)(x) = a(b(x)).
    Permutation operator*(const Permutation& b) const;
    // Moved points, ascending.
    std::vector<int> support() const;
    int support_size() const;
    std::uint64_t support_mask() const;
    int order() const;
    std::vector<std::vector<int>> cycles() const;

    std::string to_string() const;

    auto operator<=>(const Permutation&) const = default;

private:
    std::vector<int> img_;
};

// "(1 2)(3 4 5)" or "e"; degree 0 means the largest moved point.
Permutation parse_permutation(const std::string& text, int degree = 0);

// All permutations of {0..n-1} in lexicographic order of image sequences.
std::vector<Permutation> all_permutations(int n);

}  // namespace autocensus
