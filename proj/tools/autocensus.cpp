// autocensus: command-line front end for the census, asymptotics and logic modules.

#include "autocensus/asymptotics.hpp"
#include "autocensus/census.hpp"
#include "autocensus/error.hpp"
#include "autocensus/folim.hpp"
#include "autocensus/perm_group.hpp"
#include "autocensus/structure.hpp"
#include "autocensus/support.hpp"

#include "criteria.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace autocensus;
using json = nlohmann::ordered_json;

namespace {

// A report is a list of flat rows; every value is a string so JSON and CSV carry the
// same payload.
struct Report {
    std::string command;
    std::vector<json> rows;

    json& row() {
        rows.emplace_back(json::object());
        return rows.back();
    }
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

void emit(const Report& rep, const std::string& format, std::ostream& os) {
    if (format == "json") {
        json j;
        j["command"] = rep.command;
        if (rep.rows.size() == 1)
            for (auto& [k, v] : rep.rows[0].items()) j[k] = v;
        else
            j["rows"] = rep.rows;
        os << j.dump(2) << "\n";
    } else if (format == "csv") {
        std::vector<std::string> keys;
        for (auto& r : rep.rows)
            for (auto& [k, v] : r.items())
                if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
        for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << csv_field(keys[i]);
        os << "\n";
        for (auto& r : rep.rows) {
            for (std::size_t i = 0; i < keys.size(); ++i)
                os << (i ? "," : "") << csv_field(r.contains(keys[i]) ? r[keys[i]].get<std::string>() : "");
            os << "\n";
        }
    } else {
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            if (i) os << "\n";
            for (auto& [k, v] : rep.rows[i].items()) os << k << ": " << v.get<std::string>() << "\n";
        }
    }
}

std::string decimal(const Rational& q) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", to_double(q));
    return buf;
}

void put_rational(json& row, const std::string& key, const Rational& q) {
    row[key] = to_string(q);
    row[key + "_num"] = to_string(numerator(q));
    row[key + "_den"] = to_string(denominator(q));
    row[key + "_decimal"] = decimal(q);
}

// Inline text when it starts with inline_start, otherwise a path.
std::string read_arg(const std::string& arg, const std::string& inline_start) {
    if (arg.rfind(inline_start, 0) == 0) return arg;
    std::ifstream in(arg);
    if (!in) throw ParseError("cannot read " + arg);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Global {
    std::string vocab;
    int n = 0;
    std::string format = "text";
    std::string cache;
    unsigned jobs = 1;
    std::uint64_t seed = 42;
    int cap = 6;
};

Vocabulary load_vocab(const Global& g) {
    if (g.vocab.empty()) throw ParseError("--vocab is required");
    if (std::filesystem::is_regular_file(g.vocab)) return parse_vocabulary(read_arg(g.vocab, "{"));
    return parse_vocabulary(g.vocab);
}

int need_n(const Global& g) {
    if (g.n < 1) throw ParseError("-n must be given and at least 1");
    return g.n;
}

// Count with an optional cache; the key is (vocabulary digest, query, n, method).
BigInt cached(const Global& g, const Vocabulary& voc, const std::string& query, int n, const std::string& method,
              const std::function<BigInt()>& compute) {
    if (g.cache.empty()) return compute();
    CountCache cache(g.cache);
    if (auto hit = cache.lookup(voc.digest(), query, n, method)) return *hit;
    BigInt v = compute();
    cache.append({voc.digest(), query, n, v, method});
    return v;
}

// Scenario options shared by several commands.
struct ScenarioArgs {
    std::string A;
    std::string H;
    std::string X;
    std::string A_X;
    int pi = 1;

    Structure structure(const Vocabulary& voc) const {
        if (A.empty()) throw ParseError("--struct is required");
        return parse_structure(voc, read_arg(A, "{"));
    }
    PermutationGroup group(const Structure& a) const {
        if (H.empty()) return symmetric_group(a.n());
        auto G = parse_group(H);
        if (G.degree() != a.n()) throw ParseError("--group degree differs from |A|");
        return G;
    }
    EmbeddedScenario scenario(const Vocabulary& voc) const {
        auto a = structure(voc);
        auto h = group(a);
        if (X.empty() && A_X.empty()) return make_scenario(a, h);
        std::vector<int> xs;
        if (X.empty())
            for (int i = 0; i < a.n(); ++i) xs.push_back(i);
        std::stringstream ss(X);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                xs.push_back(std::stoi(tok) - 1);
            } catch (const std::exception&) {
                throw ParseError("bad --X entry '" + tok + "'");
            }
        }
        std::optional<Structure> ax;
        if (!A_X.empty()) ax = parse_structure(voc, read_arg(A_X, "{"));
        return make_scenario(a, h, xs, ax);
    }
    PartitionSequence sequence(const Vocabulary& voc, const EmbeddedScenario& sc) const {
        auto all = partition_sequences(sc, voc.r());
        if (pi < 1 || pi > static_cast<int>(all.size()))
            throw ParseError("--pi must lie in 1.." + std::to_string(all.size()));
        return all[pi - 1];
    }
    std::string key(const Vocabulary& voc, const EmbeddedScenario& sc) const {
        std::string x;
        for (int v : sc.X) x += (x.empty() ? "" : ",") + std::to_string(v + 1);
        return "A=" + serialize(voc, sc.A) + " H=" + group_text(sc.H) + " X=" + x + " AX=" + serialize(voc, sc.A_X);
    }
};

void add_scenario_options(CLI::App* c, ScenarioArgs& s, bool placement) {
    c->add_option("--struct", s.A, "support template A: JSON file or inline JSON");
    c->add_option("--group", s.H, "group H on A, e.g. \"[2](1 2)\"; default Sym(A)");
    if (placement) {
        c->add_option("--X", s.X, "support X as 1-based elements, e.g. \"1,2\"");
        c->add_option("--ax", s.A_X, "copy A_X of A on X, local positions");
        c->add_option("--pi", s.pi, "partition sequence index (1-based)");
    }
}

std::string describe_estimate(const AsymptoticEstimate& e) {
    return to_string(e.constant) + " * C(n," + std::to_string(e.binom_p) + ") * 2^(" + e.expo.to_string() + ")";
}

void put_estimate(json& row, const AsymptoticEstimate& e) {
    row["estimate"] = describe_estimate(e);
    row["constant"] = to_string(e.constant);
    row["binom_p"] = std::to_string(e.binom_p);
    row["exponent"] = e.expo.to_string();
    row["c_A"] = to_string(e.c_A);
    row["d"] = to_string(e.d);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"autocensus: censuses of finite structures by automorphism support"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--vocab", g.vocab, "vocabulary file (or inline text such as \"R/2\")");
    app.add_option("-n", g.n, "universe size")->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--cache", g.cache, "directory holding the count cache");
    app.add_option("--jobs", g.jobs, "worker threads for counting kernels")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "seed for sampling commands");
    app.add_option("--cap", g.cap, "largest support size searched by class specs")->check(CLI::PositiveNumber);

    Report rep;
    std::function<void()> action;

    auto* census = app.add_subcommand("census", "exact labelled counts");
    census->require_subcommand(1);

    census->add_subcommand("all", "|S_n|")->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            int n = need_n(g);
            rep.command = "census all";
            auto& r = rep.row();
            r["n"] = std::to_string(n);
            r["value"] = to_string(StructureSpace(voc, n).size());
        };
    });

    std::vector<std::string> perms;
    auto* fixing = census->add_subcommand("fixing", "|S_n(f_1..f_s)|: structures fixed by every given permutation");
    fixing->add_option("--perm", perms, "permutation in cycle notation, repeatable")->required();
    fixing->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            int n = need_n(g);
            std::vector<Permutation> ps;
            std::string q = "fixing";
            for (auto& s : perms) {
                ps.push_back(parse_permutation(s, n));
                q += " " + ps.back().to_string();
            }
            rep.command = "census fixing";
            auto& r = rep.row();
            r["n"] = std::to_string(n);
            r["exponent"] = to_string(fixing_exponent(voc, n, ps));
            r["value"] = to_string(cached(g, voc, q, n, "closed-form", [&] { return count_fixing(voc, n, ps); }));
        };
    });

    ScenarioArgs ah_args;
    std::string ah_method = "placement";
    auto* ah = census->add_subcommand("ah", "|S_n(A,H)| by exhaustive counting");
    add_scenario_options(ah, ah_args, false);
    ah->add_option("--method", ah_method, "placement or scan")->check(CLI::IsMember({"placement", "scan"}));
    ah->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            int n = need_n(g);
            auto A = ah_args.structure(voc);
            auto H = ah_args.group(A);
            auto m = ah_method == "scan" ? AHMethod::full_scan : AHMethod::by_placement;
            std::string q = "ah A=" + serialize(voc, A) + " H=" + group_text(H);
            rep.command = "census ah";
            auto& r = rep.row();
            r["n"] = std::to_string(n);
            r["value"] = to_string(cached(g, voc, q, n, ah_method, [&] { return count_Sn_AH_exact(voc, A, H, n, m, g.jobs); }));
        };
    });

    ScenarioArgs axpi_args;
    bool tn_only = false;
    auto* axpi = census->add_subcommand("axpi", "|T_n(A_X,Pi)| and the exact |S_n(A_X,Pi)|");
    add_scenario_options(axpi, axpi_args, true);
    axpi->add_flag("--tn-only", tn_only, "skip the exhaustive count");
    axpi->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            int n = need_n(g);
            auto sc = axpi_args.scenario(voc);
            auto Pi = axpi_args.sequence(voc, sc);
            std::string q = "axpi " + axpi_args.key(voc, sc) + " pi=" + std::to_string(axpi_args.pi);
            rep.command = "census axpi";
            auto& r = rep.row();
            r["n"] = std::to_string(n);
            r["partition_sequences"] = std::to_string(partition_sequences(sc, voc.r()).size());
            r["tn_exponent"] = to_string(Tn_exponent(voc, sc, Pi, n));
            r["tn_value"] = to_string(cached(g, voc, q, n, "tn-closed-form", [&] { return count_Tn(voc, sc, Pi, n); }));
            if (!tn_only)
                r["value"] = to_string(cached(g, voc, q, n, "exhaustive", [&] { return count_Sn_AX_Pi_exact(voc, sc, Pi, n); }));
        };
    });

    std::string ul_method = "bridge";
    auto* ul = app.add_subcommand("unlabelled", "isomorphism classes of S_n");
    ul->add_option("--method", ul_method, "bridge, dedup or both")->check(CLI::IsMember({"bridge", "dedup", "both"}));
    ul->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            int n = need_n(g);
            rep.command = "unlabelled";
            auto& r = rep.row();
            r["n"] = std::to_string(n);
            BigInt bridge, dedup;
            if (ul_method != "dedup")
                bridge = cached(g, voc, "unlabelled", n, "bridge", [&] { return unlabelled_bridge(voc, n); });
            if (ul_method != "bridge")
                dedup = cached(g, voc, "unlabelled", n, "dedup", [&] { return unlabelled_count(voc, n, {}, g.jobs); });
            if (ul_method == "both" && bridge != dedup)
                throw Error("bridge " + to_string(bridge) + " and dedup " + to_string(dedup) + " disagree");
            r["value"] = to_string(ul_method == "dedup" ? dedup : bridge);
        };
    });

    auto* asym = app.add_subcommand("asym", "asymptotic estimates and limits");
    asym->require_subcommand(1);
    ScenarioArgs est_args;
    auto* est = asym->add_subcommand("estimate", "|S_n(A,H)| ~ c C(n,p) 2^lambda(n)");
    add_scenario_options(est, est_args, false);
    est->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            auto A = est_args.structure(voc);
            auto H = est_args.group(A);
            rep.command = "asym estimate";
            auto& r = rep.row();
            auto e = asymptotic_estimate(voc, A, H);
            put_estimate(r, e);
            if (g.n >= 1) {
                r["n"] = std::to_string(g.n);
                r["approximation"] = to_string(e.constant * binomial(g.n, e.binom_p) * pow2(e.expo.evaluate(BigInt(g.n))));
            }
        };
    });
    std::string num_spec, den_spec;
    auto* lim = asym->add_subcommand("limit", "lim |C_n| / |D_n| for two class specs");
    lim->add_option("--num", num_spec, "numerator class spec")->required();
    lim->add_option("--den", den_spec, "denominator class spec")->required();
    lim->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            auto v = class_limit(voc, parse_class_spec(num_spec, g.cap), parse_class_spec(den_spec, g.cap));
            rep.command = "asym limit";
            auto& r = rep.row();
            r["num"] = num_spec;
            r["den"] = den_spec;
            r["kind"] = v.is_finite() ? "finite" : "infinite";
            if (v.is_finite()) put_rational(r, "value", v.value);
            else r["value"] = "inf";
        };
    });

    std::string dec_spec;
    auto* dec = app.add_subcommand("decompose", "dominant (A,H) classes of a class spec, with weights");
    dec->add_option("--spec", dec_spec, "class spec, e.g. \"spt*=2\"")->required();
    dec->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            auto d = decompose(voc, parse_class_spec(dec_spec, g.cap));
            auto w = d.weights();
            rep.command = "decompose";
            for (std::size_t i = 0; i < d.dominant.size(); ++i) {
                auto& r = rep.row();
                r["class"] = std::to_string(i + 1);
                r["A"] = serialize(voc, d.dominant[i].A);
                r["H"] = group_text(d.dominant[i].K);
                put_rational(r, "weight", w[i]);
                put_estimate(r, d.dominant[i].est);
                r["delta"] = std::to_string(d.delta);
                r["certified"] = d.certified ? "true" : "false";
            }
        };
    });

    ScenarioArgs smp_args;
    int count = 1;
    auto* smp = app.add_subcommand("sample", "uniform draws from T_n(A_X,Pi)");
    add_scenario_options(smp, smp_args, true);
    smp->add_option("--count", count, "number of draws")->check(CLI::PositiveNumber);
    smp->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            int n = need_n(g);
            auto sc = smp_args.scenario(voc);
            TnSampler s(Sampler{voc, sc, smp_args.sequence(voc, sc), n, g.seed});
            rep.command = "sample";
            for (int t = 0; t < count; ++t) {
                auto& r = rep.row();
                r["trial"] = std::to_string(t);
                r["structure"] = json::parse(serialize(voc, s.draw(static_cast<std::uint64_t>(t)))).dump();
            }
        };
    });

    auto* check = app.add_subcommand("check", "checks on a given structure");
    check->require_subcommand(1);
    ScenarioArgs ext_args;
    std::string model;
    int k = 1;
    auto* ext = check->add_subcommand("ext", "k-extension property of M relative to X and Pi");
    add_scenario_options(ext, ext_args, true);
    ext->add_option("--model", model, "structure M: JSON file or inline JSON")->required();
    ext->add_option("-k", k, "extension size")->check(CLI::NonNegativeNumber);
    ext->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            auto sc = ext_args.scenario(voc);
            auto M = parse_structure(voc, read_arg(model, "{"));
            auto Pi = ext_args.sequence(voc, sc);
            rep.command = "check ext";
            auto& r = rep.row();
            r["k"] = std::to_string(k);
            r["configuration_bits"] = std::to_string(extension_bits(voc, sc.X, Pi, k));
            r["holds"] = has_k_extension(voc, M, sc.X, Pi, k) ? "true" : "false";
        };
    });

    std::string mc_spec, formula;
    std::uint64_t trials = 400;
    bool decision = false;
    auto* mc = app.add_subcommand("mc", "Monte Carlo probability of a sentence over a class spec");
    mc->add_option("--spec", mc_spec, "class spec whose dominant classes are sampled")->required();
    mc->add_option("--formula", formula, "first-order sentence")->required();
    mc->add_option("--trials", trials, "total trials")->check(CLI::PositiveNumber);
    mc->add_flag("--decision", decision, "also decide each scenario on a verified witness");
    mc->callback([&] {
        action = [&] {
            auto voc = load_vocab(g);
            int n = need_n(g);
            auto d = decompose(voc, parse_class_spec(mc_spec, g.cap));
            auto w = d.weights();
            std::vector<WeightedScenario> scs;
            for (std::size_t i = 0; i < d.dominant.size(); ++i) scs.push_back({d.dominant[i].A, d.dominant[i].K, w[i]});
            McOptions opt;
            opt.decision = decision;
            opt.jobs = g.jobs;
            auto res = mc_sentence_probability(voc, scs, parse_formula(voc, formula), n, trials, g.seed, opt);
            rep.command = "mc";
            auto& r = rep.row();
            r["n"] = std::to_string(n);
            r["trials"] = std::to_string(trials);
            put_rational(r, "estimate", res.estimate);
            char se[32];
            std::snprintf(se, sizeof se, "%.6f", res.standard_error);
            r["standard_error"] = se;
            if (res.decision_value) put_rational(r, "decision_value", *res.decision_value);
            for (std::size_t i = 0; i < res.scenarios.size(); ++i) {
                auto& s = rep.row();
                const auto& sr = res.scenarios[i];
                s["scenario"] = std::to_string(i + 1);
                s["A"] = serialize(voc, scs[i].A);
                s["H"] = group_text(scs[i].H);
                put_rational(s, "weight", scs[i].weight);
                s["trials"] = std::to_string(sr.trials);
                s["successes"] = std::to_string(sr.successes);
                if (decision) {
                    s["verdict"] = sr.verdict ? (*sr.verdict ? "true" : "false") : "none";
                    s["theta_verified"] = sr.theta_verified ? "true" : "false";
                    s["extension_verified"] = sr.extension_verified ? "true" : "false";
                    s["rejected_witnesses"] = std::to_string(sr.rejected_witnesses);
                }
            }
        };
    });

    std::string level = "quick";
    bool failed = false;
    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    verify->callback([&] {
        action = [&] {
            acceptance::Options opt;
            opt.level = level == "full" ? acceptance::Level::full : acceptance::Level::quick;
            opt.seed = g.seed;
            opt.jobs = g.jobs;
            rep.command = "verify";
            for (int id = 1; id <= acceptance::criterion_count; ++id) {
                auto res = acceptance::run_criterion(id, opt);
                auto& r = rep.row();
                r["criterion"] = std::to_string(id);
                r["title"] = res.title;
                r["status"] = res.pass ? "pass" : "fail";
                r["observed"] = res.observed;
                r["expected"] = res.expected;
                r["tolerance"] = res.tolerance;
                failed = failed || !res.pass;
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        action();
    } catch (const GuardError& e) {
        std::cerr << "autocensus: guard '" << e.guard() << "' exceeded: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "autocensus: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "autocensus: " << e.what() << "\n";
        return 1;
    }
    emit(rep, g.format, std::cout);
    return failed ? 1 : 0;
}
