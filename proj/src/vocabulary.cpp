#include "autocensus/vocabulary.hpp"

#include "autocensus/error.hpp"

#include <cstdio>
#include <set>
#include <sstream>

namespace autocensus {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::general: return "gen";
        case Mode::irreflexive: return "irr";
        case Mode::symmetric: return "sym";
    }
    return "gen";
}

Vocabulary::Vocabulary(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
    std::set<std::string> seen;
    for (const auto& s : symbols_) {
        if (s.name.empty()) throw ParseError("empty symbol name");
        if (!seen.insert(s.name).second) throw ParseError("duplicate symbol name '" + s.name + "'");
        if (s.arity < 1) throw ParseError("symbol '" + s.name + "' has arity < 1");
        if (s.mode != Mode::general && s.arity < 2)
            throw ParseError("symbol '" + s.name + "': irr/sym modes need arity >= 2");
        ++arity_counts_[s.arity];
        r_ = std::max(r_, s.arity);
    }
    if (r_ < 2) throw ParseError("vocabulary needs at least one symbol of arity >= 2");
}

int Vocabulary::k(int arity) const {
    auto it = arity_counts_.find(arity);
    return it == arity_counts_.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::arities() const {
    std::vector<int> a;
    for (const auto& s : symbols_) a.push_back(s.arity);
    return a;
}

int Vocabulary::index_of(const std::string& name) const {
    for (int i = 0; i < rho(); ++i)
        if (symbols_[i].name == name) return i;
    return -1;
}

bool Vocabulary::all_general() const {
    for (const auto& s : symbols_)
        if (s.mode != Mode::general) return false;
    return true;
}

std::string Vocabulary::to_text() const {
    std::string out;
    for (const auto& s : symbols_) {
        out += s.name + "/" + std::to_string(s.arity);
        if (s.mode != Mode::general) out += std::string(" ") + mode_name(s.mode);
        out += "\n";
    }
    return out;
}

std::string Vocabulary::digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : to_text()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

static bool is_ident(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

Vocabulary parse_vocabulary(const std::string& text) {
    std::vector<Symbol> syms;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string head, mode, extra;
        if (!(ls >> head)) continue;
        ls >> mode >> extra;
        auto where = " (line " + std::to_string(lineno) + ")";
        if (!extra.empty()) throw ParseError("malformed vocabulary line" + where);
        auto slash = head.find('/');
        if (slash == std::string::npos) throw ParseError("expected NAME/ARITY" + where);
        Symbol s;
        s.name = head.substr(0, slash);
        if (!is_ident(s.name)) throw ParseError("bad symbol name '" + s.name + "'" + where);
        auto ar = head.substr(slash + 1);
        if (ar.empty() || ar.find_first_not_of("0123456789") != std::string::npos || ar.size() > 3)
            throw ParseError("bad arity '" + ar + "'" + where);
        s.arity = std::stoi(ar);
        if (s.arity == 0) throw ParseError("arity 0 for '" + s.name + "'" + where);
        if (mode.empty() || mode == "gen") s.mode = Mode::general;
        else if (mode == "irr") s.mode = Mode::irreflexive;
        else if (mode == "sym") s.mode = Mode::symmetric;
        else throw ParseError("unknown mode '" + mode + "'" + where);
        syms.push_back(s);
    }
    return Vocabulary(std::move(syms));
}

}  // namespace autocensus
