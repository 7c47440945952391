#include "autocensus/permutation.hpp"

#include "autocensus/error.hpp"

#include <algorithm>
#include <numeric>

namespace autocensus {

Permutation::Permutation(std::vector<int> images) : img_(std::move(images)) {
    std::vector<char> seen(img_.size(), 0);
    for (int v : img_) {
        if (v < 0 || v >= degree() || seen[v]) throw Error("images do not form a bijection");
        seen[v] = 1;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return Permutation(std::move(v));
}

Permutation Permutation::cycle(int n, const std::vector<int>& points) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) v.at(points[i]) = points[(i + 1) % points.size()];
    return Permutation(std::move(v));
}

bool Permutation::is_identity() const {
    for (int i = 0; i < degree(); ++i)
        if (img_[i] != i) return false;
    return true;
}

Permutation Permutation::inverse() const {
    std::vector<int> v(img_.size());
    for (int i = 0; i < degree(); ++i) v[img_[i]] = i;
    Permutation p;
    p.img_ = std::move(v);
    return p;
}

Permutation Permutation::operator*(const Permutation& b) const {
    if (b.degree() != degree()) throw Error("composing permutations of different degree");
    Permutation p;
    p.img_.resize(img_.size());
    for (int i = 0; i < degree(); ++i) p.img_[i] = img_[b.img_[i]];
    return p;
}

std::vector<int> Permutation::support() const {
    std::vector<int> s;
    for (int i = 0; i < degree(); ++i)
        if (img_[i] != i) s.push_back(i);
    return s;
}

int Permutation::support_size() const {
    int c = 0;
    for (int i = 0; i < degree(); ++i) c += img_[i] != i;
    return c;
}

std::uint64_t Permutation::support_mask() const {
    std::uint64_t m = 0;
    for (int i = 0; i < degree() && i < 64; ++i)
        if (img_[i] != i) m |= std::uint64_t{1} << i;
    return m;
}

std::vector<std::vector<int>> Permutation::cycles() const {
    std::vector<std::vector<int>> out;
    std::vector<char> seen(img_.size(), 0);
    for (int i = 0; i < degree(); ++i) {
        if (seen[i] || img_[i] == i) continue;
        std::vector<int> c;
        for (int j = i; !seen[j]; j = img_[j]) {
            seen[j] = 1;
            c.push_back(j);
        }
        out.push_back(std::move(c));
    }
    return out;
}

int Permutation::order() const {
    int o = 1;
    for (const auto& c : cycles()) o = std::lcm(o, static_cast<int>(c.size()));
    return o;
}

std::string Permutation::to_string() const {
    auto cs = cycles();
    if (cs.empty()) return "e";
    std::string s;
    for (const auto& c : cs) {
        s += "(";
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) s += " ";
            s += std::to_string(c[i] + 1);
        }
        s += ")";
    }
    return s;
}

Permutation parse_permutation(const std::string& text, int degree) {
    std::vector<std::vector<int>> cycles;
    std::size_t i = 0;
    auto skip = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip();
    if (i < text.size() && text[i] == 'e') {
        ++i;
        skip();
        if (i != text.size()) throw ParseError("trailing text after identity in '" + text + "'");
    } else {
        while (true) {
            skip();
            if (i == text.size()) break;
            if (text[i] != '(') throw ParseError("expected '(' in permutation '" + text + "'");
            ++i;
            std::vector<int> c;
            while (true) {
                skip();
                if (i < text.size() && text[i] == ')') {
                    ++i;
                    break;
                }
                if (i < text.size() && text[i] == ',') {
                    ++i;
                    continue;
                }
                std::size_t j = i;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
                if (j == i || j - i > 6) throw ParseError("bad point in permutation '" + text + "'");
                int v = std::stoi(text.substr(i, j - i));
                if (v < 1) throw ParseError("points are 1-based in '" + text + "'");
                c.push_back(v - 1);
                i = j;
            }
            if (!c.empty()) cycles.push_back(std::move(c));
        }
    }
    int maxpt = 0;
    for (const auto& c : cycles)
        for (int v : c) maxpt = std::max(maxpt, v + 1);
    if (degree == 0) degree = std::max(maxpt, 1);
    if (maxpt > degree) throw ParseError("point exceeds degree " + std::to_string(degree) + " in '" + text + "'");
    std::vector<int> img(degree);
    std::iota(img.begin(), img.end(), 0);
    std::vector<char> used(degree, 0);
    for (const auto& c : cycles) {
        for (int v : c) {
            if (used[v]) throw ParseError("cycles are not disjoint in '" + text + "'");
            used[v] = 1;
        }
        for (std::size_t k = 0; k < c.size(); ++k) img[c[k]] = c[(k + 1) % c.size()];
    }
    return Permutation(std::move(img));
}

std::vector<Permutation> all_permutations(int n) {
    std::vector<Permutation> out;
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    do out.emplace_back(v);
    while (std::next_permutation(v.begin(), v.end()));
    return out;
}

}  // namespace autocensus
