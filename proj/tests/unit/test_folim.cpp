#include "oracle.hpp"

#include "autocensus/asymptotics.hpp"
#include "autocensus/census.hpp"
#include "autocensus/error.hpp"
#include "autocensus/folim.hpp"
#include "autocensus/support.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace autocensus;

namespace {

Vocabulary R2() { return parse_vocabulary("R/2"); }
Structure S(const Vocabulary& v, const char* json) { return parse_structure(v, json); }

EmbeddedScenario edgeless_pair() { return make_scenario(empty_structure(R2(), 2), symmetric_group(2)); }

Sampler pair_sampler(int n, std::uint64_t seed) {
    auto sc = edgeless_pair();
    return Sampler{R2(), sc, partition_sequences(sc, 2).front(), n, seed};
}

using Rel = std::set<oracle::Tuple>;
bool R(const Rel& r, int a, int b) { return r.count({a, b}) > 0; }

// Battery of sentences with hand-written satisfaction checks over one binary relation.
struct Case {
    const char* text;
    int qr;
    std::function<bool(int, const Rel&)> check;
};

std::vector<Case> battery() {
    return {
        {"exists x. R(x,x)", 1,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x)
                 if (R(r, x, x)) return true;
             return false;
         }},
        {"forall x. exists y. R(x,y)", 2,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x) {
                 bool any = false;
                 for (int y = 0; y < n; ++y) any = any || R(r, x, y);
                 if (!any) return false;
             }
             return true;
         }},
        {"forall x. forall y. (R(x,y) -> R(y,x))", 2,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x)
                 for (int y = 0; y < n; ++y)
                     if (R(r, x, y) && !R(r, y, x)) return false;
             return true;
         }},
        {"exists x. forall y. R(x,y)", 2,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x) {
                 bool all = true;
                 for (int y = 0; y < n; ++y) all = all && R(r, x, y);
                 if (all) return true;
             }
             return false;
         }},
        {"forall x. !R(x,x)", 1,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x)
                 if (R(r, x, x)) return false;
             return true;
         }},
        {"exists x. exists y. (x != y & R(x,y) & R(y,x))", 2,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x)
                 for (int y = 0; y < n; ++y)
                     if (x != y && R(r, x, y) && R(r, y, x)) return true;
             return false;
         }},
        {"(forall x. exists y. (x != y & R(x,y))) | (exists z. R(z,z))", 2,
         [](int n, const Rel& r) {
             bool all = true;
             for (int x = 0; x < n; ++x) {
                 bool any = false;
                 for (int y = 0; y < n; ++y) any = any || (x != y && R(r, x, y));
                 all = all && any;
             }
             bool loop = false;
             for (int z = 0; z < n; ++z) loop = loop || R(r, z, z);
             return all || loop;
         }},
        {"exists x. forall y. (x = y | !R(y,x))", 2,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x) {
                 bool ok = true;
                 for (int y = 0; y < n; ++y) ok = ok && (x == y || !R(r, y, x));
                 if (ok) return true;
             }
             return false;
         }},
        {"forall x. (R(x,x) -> exists y. (y != x & R(y,x)))", 2,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x) {
                 if (!R(r, x, x)) continue;
                 bool any = false;
                 for (int y = 0; y < n; ++y) any = any || (y != x && R(r, y, x));
                 if (!any) return false;
             }
             return true;
         }},
        {"!exists x. exists y. (R(x,y) & !R(y,x))", 2,
         [](int n, const Rel& r) {
             for (int x = 0; x < n; ++x)
                 for (int y = 0; y < n; ++y)
                     if (R(r, x, y) && !R(r, y, x)) return false;
             return true;
         }},
    };
}

// k-extension straight from the clauses, for one binary relation. part[a] is the Pi_1
// part of X[a].
bool oracle_extension(const Structure& M, const std::vector<int>& X, const std::vector<int>& part, int parts, int k) {
    int n = M.n();
    auto r = [&](int a, int b) { return M.has(0, {a, b}); };
    std::vector<int> outside;
    for (int v = 0; v < n; ++v)
        if (std::find(X.begin(), X.end(), v) == X.end()) outside.push_back(v);
    if (k > static_cast<int>(outside.size())) return true;
    std::vector<std::vector<int>> subsets{{}};
    for (int step = 0; step < k; ++step) {
        std::vector<std::vector<int>> next;
        for (auto& s : subsets)
            for (int v : outside)
                if (s.empty() || v > s.back()) {
                    next.push_back(s);
                    next.back().push_back(v);
                }
        subsets = std::move(next);
    }
    for (auto& bi : subsets) {
        for (int i = 0; i < 2; ++i)
            for (int E = 0; E < (1 << parts); ++E)
                for (int E2 = 0; E2 < (1 << parts); ++E2)
                    for (int Y = 0; Y < (1 << k); ++Y)
                        for (int Y2 = 0; Y2 < (1 << k); ++Y2) {
                            bool found = false;
                            for (int c : outside) {
                                if (std::find(bi.begin(), bi.end(), c) != bi.end()) continue;
                                bool ok = r(c, c) == (i == 1);
                                for (std::size_t a = 0; ok && a < X.size(); ++a)
                                    ok = r(c, X[a]) == bool(E >> part[a] & 1) && r(X[a], c) == bool(E2 >> part[a] & 1);
                                for (int j = 0; ok && j < k; ++j)
                                    ok = r(c, bi[j]) == bool(Y >> j & 1) && r(bi[j], c) == bool(Y2 >> j & 1);
                                if (ok) {
                                    found = true;
                                    break;
                                }
                            }
                            if (!found) return false;
                        }
    }
    return true;
}

}  // namespace

TEST_CASE("parse_formula examples and errors") {
    auto v = R2();
    auto f = parse_formula(v, "exists x. R(x,x)");
    CHECK(f.is_sentence());
    CHECK(f.quantifier_rank() == 1);
    CHECK(parse_formula(v, "forall x. forall y. (R(x,y) -> R(y,x))").quantifier_rank() == 2);
    auto g = parse_formula(v, "R(x,y)");
    CHECK(g.free_variables() == std::vector<std::string>{"x", "y"});
    CHECK(g.quantifier_rank() == 0);
    CHECK(parse_formula(v, "exists x y. R(x,y)").quantifier_rank() == 2);
    CHECK(parse_formula(v, "exists x. R(x,x) & x = x").is_sentence());

    CHECK_THROWS_AS(parse_formula(v, "exists x R(x,x)"), ParseError);
    CHECK_THROWS_AS(parse_formula(v, "exists x. Q(x,x)"), ParseError);
    CHECK_THROWS_AS(parse_formula(v, "exists x. R(x)"), ParseError);
    CHECK_THROWS_AS(parse_formula(v, "(R(x,y)"), ParseError);
    CHECK_THROWS_AS(parse_formula(v, "R(x,y) &"), ParseError);
    CHECK_THROWS_AS(parse_formula(v, "exists x. exists x. R(x,x)"), ParseError);

    // Printing round-trips.
    for (auto& c : battery()) {
        auto h = parse_formula(v, c.text);
        CHECK(parse_formula(v, h.to_string(v)).to_string(v) == h.to_string(v));
    }
}

TEST_CASE("evaluate examples") {
    auto v = R2();
    auto loop = parse_formula(v, "exists x. R(x,x)");
    CHECK_FALSE(evaluate(empty_structure(v, 3), loop));
    CHECK(evaluate(S(v, R"({"n":3,"rels":{"R":[[1,1]]}})"), loop));
    auto cyc = S(v, R"({"n":3,"rels":{"R":[[1,2],[2,3],[3,1]]}})");
    CHECK(evaluate(cyc, parse_formula(v, "forall x. exists y. R(x,y)")));
    auto open = parse_formula(v, "R(x,y)");
    CHECK(evaluate(cyc, open, {{"x", 0}, {"y", 1}}));
    CHECK_FALSE(evaluate(cyc, open, {{"x", 1}, {"y", 0}}));
    CHECK_THROWS_AS(evaluate(cyc, open, {{"x", 0}}), Error);
    CHECK_THROWS_AS(evaluate(cyc, open, {{"x", 0}, {"y", 7}}), Error);
}

TEST_CASE("evaluate agrees with hand-written checks on every structure on [3]") {
    auto v = R2();
    auto cases = battery();
    std::vector<Formula> fs;
    for (auto& c : cases) {
        fs.push_back(parse_formula(v, c.text));
        CHECK(fs.back().quantifier_rank() == c.qr);
    }
    auto all = oracle::all_structures(3, {2});
    REQUIRE(all.size() == 512);
    for (auto& M : all) {
        auto lib = oracle::to_lib(M, {2});
        Evaluator ev(lib);
        for (std::size_t i = 0; i < cases.size(); ++i) CHECK(ev(fs[i]) == cases[i].check(3, M.rels[0]));
    }
}

TEST_CASE("theta and xi") {
    auto v = R2();
    CHECK_THROWS_AS(theta(v, 1), Error);
    CHECK_THROWS_AS(xi(v, 0), Error);
    auto th = theta(v, 2);
    CHECK(th.free_variables() == std::vector<std::string>{"x"});
    CHECK(th.quantifier_rank() == 2);
    CHECK(th.to_string(v) ==
          "(exists x_w1. (!x = x_w1 & (forall x_z. ((!x_z = x & !x_z = x_w1) -> (R(x,x_z) <-> R(x_w1,x_z))))))");
    CHECK(theta(v, 4).quantifier_rank() == 4);

    // Edgeless [3]: every element has a twin.
    CHECK(Evaluator(empty_structure(v, 3)).satisfying(th) == std::vector<int>{0, 1, 2});

    auto x = xi(v, 2);
    CHECK(x.free_variables() == std::vector<std::string>{"x1", "x2"});
    auto M = S(v, R"({"n":3,"rels":{"R":[[3,3]]}})");
    Evaluator ev(M);
    CHECK(ev(x, {{"x1", 0}, {"x2", 1}}));
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t) {
        Structure N = empty_structure(v, 5);
        for (auto& w : N.words()) w = rng();
        N.words().back() &= (std::uint64_t{1} << 25) - 1;
        Evaluator e(N);
        for (int a = 0; a < 5; ++a) CHECK(e(x, {{"x1", a}, {"x2", a}}));
    }
}

TEST_CASE("the two forms of theta agree") {
    auto v = R2();
    auto t3 = theta(v, 3), c3 = theta(v, 3, "x", ThetaForm::counting);
    for (std::uint64_t code = 0; code < (1u << 16); code += 7) {
        Structure M = empty_structure(v, 4);
        M.words()[0] = code;
        Evaluator ev(M);
        REQUIRE(ev.satisfying(t3) == ev.satisfying(c3));
    }
    auto v2 = parse_vocabulary("R/2\nT/3\nP/1");
    std::mt19937_64 rng(23);
    for (int m : {2, 3, 4})
        for (int t = 0; t < 150; ++t) {
            Structure M = empty_structure(v2, 5);
            for (auto& w : M.words()) w = rng() & rng();
            std::size_t cells = M.cell_count();
            if (cells % 64) M.words().back() &= (std::uint64_t{1} << (cells % 64)) - 1;
            Evaluator ev(M);
            CHECK(ev.satisfying(theta(v2, m)) == ev.satisfying(theta(v2, m, "x", ThetaForm::counting)));
            auto a = xi(v2, m), b = xi(v2, m, "x1", "x2", ThetaForm::counting);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) CHECK(ev(a, {{"x1", i}, {"x2", j}}) == ev(b, {{"x1", i}, {"x2", j}}));
        }
    // At n = |X| there is no room for the spare witnesses.
    CHECK(Evaluator(empty_structure(v, 2)).satisfying(theta(v, 3, "x", ThetaForm::counting)).empty());
}

TEST_CASE("chi and psi") {
    auto v = R2();
    auto A = S(v, R"({"n":2,"rels":{"R":[[1,2]]}})");
    auto c = chi(v, A);
    CHECK(c.free_variables() == std::vector<std::string>{"x1", "x2"});
    auto M = S(v, R"({"n":4,"rels":{"R":[[3,1]]}})");
    CHECK(evaluate(M, c, {{"x1", 2}, {"x2", 0}}));
    CHECK_FALSE(evaluate(M, c, {{"x1", 0}, {"x2", 2}}));

    auto ps = psi(v, empty_structure(v, 2), symmetric_group(2));
    CHECK(ps.is_sentence());
    // Rigid structure on [3]: theta holds nowhere.
    auto rigid = S(v, R"({"n":3,"rels":{"R":[[1,2],[1,3],[2,1]]}})");
    REQUIRE(automorphism_group(rigid).is_trivial());
    CHECK(Evaluator(rigid).satisfying(theta(v, 2)).empty());
    CHECK_FALSE(evaluate(rigid, ps));
    CHECK_THROWS_AS(psi(v, A, symmetric_group(2)), Error);

    // A moderately large sample from the pair scenario satisfies psi.
    auto M60 = sample_Tn(pair_sampler(60, 11));
    Evaluator ev(M60);
    REQUIRE(ev.satisfying(theta(v, 2)) == std::vector<int>{0, 1});
    CHECK(ev(ps));
    // Two orbits: the relation xi must separate them.
    auto A4 = empty_structure(v, 4);
    PermutationGroup H = generate({parse_permutation("(1 2)(3 4)", 4)});
    auto sc = make_scenario(A4, H);
    auto N = TnSampler(Sampler{v, sc, partition_sequences(sc, 2).front(), 70, 3}).draw(0);
    CHECK(evaluate(N, psi(v, A4, H, ThetaForm::counting)));
    CHECK_FALSE(evaluate(N, psi(v, A4, symmetric_group(4), ThetaForm::counting)));
}

TEST_CASE("has_k_extension examples") {
    auto v = R2();
    auto sc = edgeless_pair();
    auto Pi = partition_sequences(sc, 2).front();
    CHECK_FALSE(has_k_extension(v, empty_structure(v, 2), {0, 1}, Pi, 0));
    CHECK(extension_bits(v, {0, 1}, Pi, 0) == 3);
    CHECK(extension_bits(v, {0, 1}, Pi, 1) == 5);
    CHECK(extension_bits(v, {0, 1}, Pi, 2) == 7);
    for (std::uint64_t code = 0; code < 8; ++code)
        CHECK_FALSE(has_k_extension(v, TnSpace(v, sc, Pi, 3).decode(code), {0, 1}, Pi, 0));
}

TEST_CASE("has_k_extension agrees with the clause-by-clause check") {
    auto v = R2();
    struct Setup {
        EmbeddedScenario sc;
        std::vector<int> part;
        int parts;
    };
    PermutationGroup H22 = generate({parse_permutation("(1 2)(3 4)", 4)});
    std::vector<Setup> setups{{edgeless_pair(), {0, 0}, 1}, {make_scenario(empty_structure(v, 4), H22), {0, 0, 1, 1}, 2}};
    std::mt19937_64 rng(17);
    int trues = 0, falses = 0;
    for (auto& st : setups) {
        auto Pi = partition_sequences(st.sc, 2).front();
        for (int k = 0; k <= 1; ++k)
            for (int n : {14, 20, 40, 70}) {
                if (k == 1 && st.parts == 2 && n < 70) continue;
                Sampler cfg{v, st.sc, Pi, n, rng()};
                TnSampler sm(cfg);
                for (int t = 0; t < 4; ++t) {
                    auto M = sm.draw(static_cast<std::uint64_t>(t));
                    bool lib = has_k_extension(v, M, st.sc.X, Pi, k);
                    CHECK(lib == oracle_extension(M, st.sc.X, st.part, st.parts, k));
                    (lib ? trues : falses)++;
                }
            }
        // Structures outside T_n: mixed rows need not be uniform on a part.
        for (int t = 0; t < 10; ++t) {
            Structure M = empty_structure(v, 16);
            for (auto& w : M.words()) w = rng();
            CHECK(has_k_extension(v, M, st.sc.X, Pi, 0) == oracle_extension(M, st.sc.X, st.part, st.parts, 0));
        }
    }
    CHECK(trues > 0);
    CHECK(falses > 0);
}

TEST_CASE("sampler basics") {
    auto v = R2();
    auto s2 = pair_sampler(2, 1);
    CHECK(sample_Tn(s2) == empty_structure(v, 2));
    auto s = pair_sampler(9, 42);
    CHECK(sample_Tn(s) == sample_Tn(s));
    TnSampler sm(s);
    CHECK(sm.draw(3) == sm.draw(3));
    CHECK_FALSE(sm.draw(3) == sm.draw(4));
    CHECK_THROWS_AS(sample_Tn(pair_sampler(1, 0)), Error);
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("sampler is uniform on the 8-element pair space at n = 3") {
    auto v = R2();
    TnSampler sm(pair_sampler(3, 2024));
    REQUIRE(sm.space().free_bits() == 3);
    std::map<Structure, int> freq;
    const int draws = 8000;
    for (int t = 0; t < draws; ++t) freq[sm.draw(static_cast<std::uint64_t>(t))]++;
    CHECK(freq.size() == 8);
    double mean = draws / 8.0, sd = std::sqrt(draws * (1.0 / 8) * (7.0 / 8));
    for (auto& [M, c] : freq) {
        CHECK(respects(M, {0, 1}, partition_sequences(edgeless_pair(), 2).front()));
        CHECK(std::abs(c - mean) < 3 * sd);
    }
}

TEST_CASE("sampler marginals are fair on every free bit") {
    auto v = parse_vocabulary("R/2\nE/2 sym\nT/3");
    auto A = empty_structure(v, 3);
    auto sc = make_scenario(A, generate({parse_permutation("(1 2 3)", 3)}));
    auto Pi = partition_sequences(sc, v.r()).front();
    TnSampler sm(Sampler{v, sc, Pi, 4, 99});
    std::size_t bits = sm.space().free_bits();
    REQUIRE(bits == static_cast<std::size_t>(Tn_exponent(v, sc, Pi, 4)));
    std::vector<int> ones(bits, 0);
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        auto M = sm.draw(static_cast<std::uint64_t>(t));
        for (std::size_t b = 0; b < bits; ++b) ones[b] += M.bit(*sm.space().cells_begin(b));
    }
    double sd = std::sqrt(draws * 0.25);
    for (std::size_t b = 0; b < bits; ++b) CHECK(std::abs(ones[b] - draws / 2.0) < 5 * sd);
}

TEST_CASE("theta and xi recover X and Pi_1 on samples with the extension property") {
    auto v = R2();
    PermutationGroup H22 = generate({parse_permutation("(1 2)(3 4)", 4)});
    std::vector<EmbeddedScenario> scs{edgeless_pair(), make_scenario(empty_structure(v, 4), H22),
                                      make_scenario(S(v, R"({"n":3,"rels":{"R":[[1,2],[2,3],[3,1]]}})"),
                                                    generate({parse_permutation("(1 2 3)", 3)}))};
    for (auto& sc : scs) {
        auto Pi = partition_sequences(sc, 2).front();
        TnSampler sm(Sampler{v, sc, Pi, 90, 7});
        Formula th = theta(v, sc.p(), "x", ThetaForm::counting), x = xi(v, sc.p(), "x1", "x2", ThetaForm::counting);
        for (int t = 0; t < 5; ++t) {
            auto M = sm.draw(static_cast<std::uint64_t>(t));
            bool ext = has_k_extension(v, M, sc.X, Pi, 2);
            Evaluator ev(M);
            auto sel = ev.satisfying(th);
            // Expected with overwhelming probability at this size, and required under 2-extension.
            CHECK(sel == sc.X);
            for (int a = 0; a < sc.p(); ++a)
                for (int b = 0; b < sc.p(); ++b) {
                    bool same = Pi.pi(1).block_of[a] == Pi.pi(1).block_of[b];
                    if (ext) REQUIRE(ev(x, {{"x1", a}, {"x2", b}}) == same);
                    CHECK(ev(x, {{"x1", a}, {"x2", b}}) == same);
                }
        }
    }
}

TEST_CASE("allocate_trials") {
    CHECK(allocate_trials({Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}, 400) ==
          std::vector<std::uint64_t>{100, 100, 100, 100});
    CHECK(allocate_trials({Rational(1, 3), Rational(2, 3)}, 10) == std::vector<std::uint64_t>{3, 7});
    CHECK(allocate_trials({Rational(1, 3), Rational(1, 3), Rational(1, 3)}, 10) == std::vector<std::uint64_t>{4, 3, 3});
    CHECK(allocate_trials({Rational(1, 100), Rational(99, 100)}, 10) == std::vector<std::uint64_t>{1, 10});
}

TEST_CASE("mc_sentence_probability") {
    auto v = R2();
    auto dec = decompose(v, parse_class_spec("spt*=2"));
    auto w = dec.weights();
    std::vector<WeightedScenario> scs;
    for (std::size_t i = 0; i < dec.dominant.size(); ++i) scs.push_back({dec.dominant[i].A, dec.dominant[i].K, w[i]});
    REQUIRE(scs.size() == 4);

    auto valid = mc_sentence_probability(v, scs, parse_formula(v, "exists x. x = x"), 30, 40, 1);
    CHECK(valid.estimate == 1);
    CHECK(valid.standard_error == 0.0);

    auto phi = parse_formula(v, "exists x. (" + theta(v, 2).to_string(v) + " & R(x,x))");
    auto res = mc_sentence_probability(v, scs, phi, 60, 80, 3);
    CHECK(res.estimate > Rational(2, 5));
    CHECK(res.estimate < Rational(3, 5));
    CHECK(res.scenarios.size() == 4);

    McOptions opt;
    opt.decision = true;
    auto d = mc_sentence_probability(v, scs, phi, 60, 8, 3, opt);
    REQUIRE(d.decision_value);
    CHECK(*d.decision_value == Rational(1, 2));
    for (auto& r : d.scenarios) CHECK(r.theta_verified);

    // The pair's own psi.
    std::vector<WeightedScenario> own{{empty_structure(v, 2), symmetric_group(2), 1}};
    auto pr = mc_sentence_probability(v, own, psi(v, empty_structure(v, 2), symmetric_group(2)), 50, 10, 9);
    CHECK(pr.estimate == 1);

    CHECK_THROWS_AS(mc_sentence_probability(v, scs, phi, 20, 0, 1), Error);
    auto bad = scs;
    bad[0].weight = Rational(1, 2);
    CHECK_THROWS_AS(mc_sentence_probability(v, bad, phi, 20, 10, 1), Error);
    CHECK_THROWS_AS(mc_sentence_probability(v, scs, parse_formula(v, "R(x,x)"), 20, 10, 1), Error);
    opt.decision = true;
    CHECK_THROWS_AS(mc_sentence_probability(v, scs, parse_formula(v, "exists a b c d. R(a,b) & R(c,d)"), 20, 10, 1, opt),
                    GuardError);
}
