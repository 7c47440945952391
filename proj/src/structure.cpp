#include "autocensus/structure.hpp"

#include "autocensus/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace autocensus {

using json = nlohmann::ordered_json;

Structure::Structure(int n, std::vector<int> arities) : n_(n), arities_(std::move(arities)) {
    if (n < 0) throw Error("negative universe size");
    int r = 0;
    for (int a : arities_) r = std::max(r, a);
    pow_.assign(r + 1, 1);
    for (int i = 1; i <= r; ++i) {
        if (pow_[i - 1] > (std::size_t{1} << 40) / std::max(n, 1)) throw GuardError("cells", "structure too large");
        pow_[i] = pow_[i - 1] * static_cast<std::size_t>(n);
    }
    for (int a : arities_) {
        offsets_.push_back(cells_);
        cells_ += pow_[a];
    }
    words_.assign((cells_ + 63) / 64, 0);
}

std::size_t Structure::cell(int s, const int* t) const {
    std::size_t idx = 0;
    for (int j = 0; j < arities_[s]; ++j) idx = idx * n_ + t[j];
    return offsets_[s] + idx;
}

int Structure::symbol_of(std::size_t c) const {
    int s = symbol_count() - 1;
    while (s > 0 && offsets_[s] > c) --s;
    return s;
}

void Structure::tuple_of(std::size_t c, int* t) const {
    int s = symbol_of(c);
    std::size_t idx = c - offsets_[s];
    for (int j = arities_[s] - 1; j >= 0; --j) {
        t[j] = static_cast<int>(idx % n_);
        idx /= n_;
    }
}

void Structure::clear() { std::fill(words_.begin(), words_.end(), 0); }

std::vector<std::vector<int>> Structure::tuples(int s) const {
    std::vector<std::vector<int>> out;
    std::vector<int> t(arities_[s]);
    for (std::size_t c = offsets_[s]; c < offsets_[s] + pow_[arities_[s]]; ++c) {
        if (!bit(c)) continue;
        tuple_of(c, t.data());
        out.push_back(t);
    }
    return out;
}

std::size_t Structure::tuple_count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
}

Structure Structure::induced(const std::vector<int>& elems) const {
    Structure out(static_cast<int>(elems.size()), arities_);
    std::vector<int> t, u;
    for (int s = 0; s < symbol_count(); ++s) {
        int a = arities_[s];
        t.assign(a, 0);
        u.assign(a, 0);
        std::size_t total = out.pow_[a];
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t x = idx;
            for (int j = a - 1; j >= 0; --j) {
                t[j] = static_cast<int>(x % out.n_);
                x /= out.n_;
                u[j] = elems[t[j]];
            }
            if (bit(cell(s, u.data()))) out.set_bit(out.offsets_[s] + idx, true);
        }
    }
    return out;
}

std::size_t Structure::hash() const {
    std::size_t h = static_cast<std::size_t>(n_) * 0x9e3779b97f4a7c15ULL;
    for (auto w : words_) h = (h ^ w) * 0x100000001b3ULL + (h >> 29);
    return h;
}

bool Structure::operator<(const Structure& o) const {
    for (std::size_t i = words_.size(); i-- > 0;)
        if (words_[i] != o.words_[i]) return words_[i] < o.words_[i];
    return false;
}

Structure empty_structure(const Vocabulary& voc, int n) { return Structure(n, voc.arities()); }

static bool injective(const std::vector<int>& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j)
            if (t[i] == t[j]) return false;
    return true;
}

void validate(const Vocabulary& voc, const Structure& M) {
    if (M.arities() != voc.arities()) throw ParseError("structure does not match the vocabulary");
    for (int s = 0; s < voc.rho(); ++s) {
        Mode mode = voc.symbol(s).mode;
        if (mode == Mode::general) continue;
        for (auto& t : M.tuples(s)) {
            if (!injective(t)) throw ParseError("mode violation: repeated coordinate in " + voc.symbol(s).name);
            if (mode == Mode::symmetric) {
                auto u = t;
                std::sort(u.begin(), u.end());
                do
                    if (!M.has(s, u)) throw ParseError("mode violation: " + voc.symbol(s).name + " not symmetric");
                while (std::next_permutation(u.begin(), u.end()));
            }
        }
    }
}

Structure parse_structure(const Vocabulary& voc, const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("structure JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
        throw ParseError("structure JSON needs an integer field \"n\"");
    long long n = j["n"].get<long long>();
    if (n < 1 || n > 4096) throw ParseError("universe size out of range");
    Structure M = empty_structure(voc, static_cast<int>(n));
    if (j.contains("rels")) {
        if (!j["rels"].is_object()) throw ParseError("\"rels\" must be an object");
        for (auto& [name, arr] : j["rels"].items()) {
            int s = voc.index_of(name);
            if (s < 0) throw ParseError("unknown symbol '" + name + "'");
            if (!arr.is_array()) throw ParseError("relation '" + name + "' must be an array");
            for (auto& tj : arr) {
                if (!tj.is_array() || static_cast<int>(tj.size()) != voc.symbol(s).arity)
                    throw ParseError("tuple arity mismatch in '" + name + "'");
                std::vector<int> t;
                for (auto& v : tj) {
                    if (!v.is_number_integer()) throw ParseError("non-integer element in '" + name + "'");
                    long long x = v.get<long long>();
                    if (x < 1 || x > n) throw ParseError("element " + std::to_string(x) + " out of range in '" + name + "'");
                    t.push_back(static_cast<int>(x - 1));
                }
                M.set(s, t);
            }
        }
    }
    validate(voc, M);
    return M;
}

std::string serialize(const Vocabulary& voc, const Structure& M) {
    json j;
    j["n"] = M.n();
    json rels = json::object();
    for (int s = 0; s < voc.rho(); ++s) {
        json arr = json::array();
        for (auto& t : M.tuples(s)) {
            json tj = json::array();
            for (int v : t) tj.push_back(v + 1);
            arr.push_back(tj);
        }
        rels[voc.symbol(s).name] = arr;
    }
    j["rels"] = rels;
    return j.dump();
}

std::string describe(const Vocabulary& voc, const Structure& M) {
    std::string out = "n=" + std::to_string(M.n());
    for (int s = 0; s < voc.rho(); ++s) {
        out += " " + voc.symbol(s).name + "={";
        bool first = true;
        for (auto& t : M.tuples(s)) {
            if (!first) out += ",";
            first = false;
            out += "(";
            for (std::size_t i = 0; i < t.size(); ++i) out += (i ? " " : "") + std::to_string(t[i] + 1);
            out += ")";
        }
        out += "}";
    }
    return out;
}

Structure apply_permutation(const Permutation& pi, const Structure& M) {
    if (pi.degree() != M.n()) throw Error("apply_permutation: domain size mismatch");
    Structure out(M.n(), M.arities());
    std::vector<int> t(8), u(8);
    for (std::size_t w = 0; w < M.words().size(); ++w) {
        std::uint64_t bits = M.words()[w];
        while (bits) {
            std::size_t c = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
            bits &= bits - 1;
            int s = M.symbol_of(c);
            t.resize(M.arity(s));
            u.resize(M.arity(s));
            M.tuple_of(c, t.data());
            for (int j = 0; j < M.arity(s); ++j) u[j] = pi(t[j]);
            out.set_bit(out.cell(s, u.data()), true);
        }
    }
    return out;
}

Structure canonical_form(const Structure& M, int bound) {
    if (M.n() > bound) throw GuardError("canonical-bound", "n=" + std::to_string(M.n()) + " exceeds " + std::to_string(bound));
    std::vector<int> img(M.n());
    std::iota(img.begin(), img.end(), 0);
    Structure best = M;
    do {
        Structure c = apply_permutation(Permutation(img), M);
        if (c < best) best = std::move(c);
    } while (std::next_permutation(img.begin(), img.end()));
    return best;
}

StructureSpace::StructureSpace(const Vocabulary& voc, int n) : n_(n), blank_(empty_structure(voc, n)) {
    if (n < 1) throw Error("n must be >= 1");
    for (int s = 0; s < voc.rho(); ++s) {
        int a = voc.symbol(s).arity;
        Mode mode = voc.symbol(s).mode;
        std::vector<int> t(a, 0);
        std::size_t total = 1;
        for (int j = 0; j < a; ++j) total *= static_cast<std::size_t>(n);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t x = idx;
            for (int j = a - 1; j >= 0; --j) {
                t[j] = static_cast<int>(x % n);
                x /= n;
            }
            if (mode == Mode::general) {
                groups_.push_back({blank_.cell(s, t.data())});
                continue;
            }
            if (!injective(t)) continue;
            if (mode == Mode::irreflexive) {
                groups_.push_back({blank_.cell(s, t.data())});
                continue;
            }
            if (!std::is_sorted(t.begin(), t.end())) continue;
            std::vector<std::size_t> g;
            auto u = t;
            do g.push_back(blank_.cell(s, u.data()));
            while (std::next_permutation(u.begin(), u.end()));
            std::sort(g.begin(), g.end());
            groups_.push_back(std::move(g));
        }
    }
}

BigInt StructureSpace::size() const { return pow2(BigInt(groups_.size())); }

std::uint64_t StructureSpace::size_u64() const {
    if (!fits_u64()) throw GuardError("free-cells", "more than 63 free cells");
    return std::uint64_t{1} << groups_.size();
}

void StructureSpace::decode_into(std::uint64_t code, Structure& M) const {
    M.clear();
    while (code) {
        std::size_t g = static_cast<std::size_t>(__builtin_ctzll(code));
        code &= code - 1;
        for (auto c : groups_[g]) M.set_bit(c, true);
    }
}

Structure StructureSpace::decode(std::uint64_t code) const {
    Structure M = blank_;
    decode_into(code, M);
    return M;
}

Structure StructureSpace::decode(const BigInt& code) const {
    Structure M = blank_;
    for (std::size_t g = 0; g < groups_.size(); ++g)
        if (boost::multiprecision::bit_test(code, static_cast<unsigned>(g)))
            for (auto c : groups_[g]) M.set_bit(c, true);
    return M;
}

BigInt StructureSpace::encode(const Structure& M) const {
    BigInt code = 0;
    for (std::size_t g = 0; g < groups_.size(); ++g)
        if (M.bit(groups_[g][0])) boost::multiprecision::bit_set(code, static_cast<unsigned>(g));
    return code;
}

void StructureSpace::for_each(std::uint64_t begin, std::uint64_t end,
                              const std::function<void(std::uint64_t, const Structure&)>& fn) const {
    Structure M = blank_;
    for (std::uint64_t c = begin; c < end; ++c) {
        decode_into(c, M);
        fn(c, M);
    }
}

StructureStream::StructureStream(const Vocabulary& voc, int n, std::uint64_t begin, std::uint64_t end)
    : space_(voc, n), pos_(begin), end_(std::min(end, space_.size_u64())) {}

bool StructureStream::next(Structure& out) {
    if (pos_ >= end_) return false;
    if (!out.same_shape(space_.blank())) out = space_.blank();
    space_.decode_into(pos_++, out);
    return true;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> StructureStream::ranges(std::uint64_t total, unsigned parts) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    if (parts == 0) parts = 1;
    std::uint64_t step = total / parts, extra = total % parts, at = 0;
    for (unsigned i = 0; i < parts; ++i) {
        std::uint64_t len = step + (i < extra ? 1 : 0);
        out.emplace_back(at, at + len);
        at += len;
    }
    return out;
}

StructureStream enumerate_structures(const Vocabulary& voc, int n) { return StructureStream(voc, n); }

}  // namespace autocensus
