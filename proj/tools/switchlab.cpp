// switchlab: sample, enumerate, and verify the three weighted
// random-restriction distributions and their switching lemmas.
//
// Exit codes: 0 = success / all checks passed, 1 = a check failed
// (bound violated, precondition unmet, injectivity violation),
// 2 = input or usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "switchlab/corpus.hpp"
#include "switchlab/verify.hpp"

using namespace switchlab;
using nlohmann::json;

namespace {

constexpr long long kIndepGuardMaxN = 12;        // 3^12 outcomes
constexpr long long kBlockGuardMaxOutcomes = 10000000;
constexpr int kPhpGuardMaxHoles = 5;

struct Options {
    int lemma = 0;
    std::string dnf_path;
    std::string blocks_path;
    std::string php_path;
    std::string p_text;
    std::string q_text;
    int s = 1;
    std::string mode = "exact";
    long long trials = 100000;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string format = "json";
    bool unsafe_sizes = false;
    // corpus controls (roundtrip), distribution controls (sample/enumerate)
    std::string dist;
    int n = 0;
    int r = 2;
    int max_terms = 2;
    long long samples = 10;
    std::string s_list;
    std::string p_list;
    std::string q_list;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Rational parse_rational(const std::string& text, const char* flag) {
    try {
        return Rational::from_string(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(flag) + ": " + e.what());
    }
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

std::vector<Rational> parse_rational_list(const std::string& text, const char* flag) {
    std::vector<Rational> out;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) out.push_back(parse_rational(tok, flag));
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json report_to_json(const LemmaReport& rep) {
    json params;
    params["n"] = rep.n;
    params["r"] = rep.r;
    params["s"] = rep.s;
    if (rep.p) params["p"] = rep.p->to_string();
    if (rep.q) params["q"] = rep.q->to_string();
    if (!rep.blocks_desc.empty()) params["blocks"] = rep.blocks_desc;
    params["mode"] = rep.mode == CheckMode::Exact ? "exact" : "sample";
    if (rep.mc) {
        params["trials"] = rep.mc->trials;
    }
    json out;
    out["lemma"] = rep.lemma;
    out["params"] = params;
    out["precondition_ok"] = rep.precondition_ok;
    if (!rep.precondition_note.empty()) out["precondition_note"] = rep.precondition_note;
    if (rep.exact_weight) out["exact_weight"] = rep.exact_weight->to_string();
    if (rep.exception_mass) out["exception_mass"] = rep.exception_mass->to_string();
    if (rep.mc) {
        out["estimate"] = rep.mc->estimate;
        out["half_width"] = rep.mc->half_width;
        out["interval_lower"] = rep.mc->lower;
        out["interval_upper"] = rep.mc->upper;
        out["failures"] = rep.mc->failures;
    }
    if (rep.bound.half_exponent) {
        // (128 r^2 n^3 q^4)^{s/2}: the base is exact, the power may be
        // irrational, so the comparisons square both sides internally.
        out["bound_base"] = rep.bound.loose.to_string();
        out["bound_exponent"] = std::to_string(rep.s) + "/2";
        out["bound_loose"] = bound_approx(rep.bound.loose, true, rep.s);
        out["bound_tight"] = bound_approx(rep.bound.tight, true, rep.s);
    } else {
        out["bound_loose"] = rep.bound.loose.to_string();
        out["bound_tight"] = rep.bound.tight.to_string();
    }
    out["pass"] = rep.pass;
    return out;
}

const char* kCsvHeader =
    "lemma,n,r,blocks,p,q,s,mode,trials,seed,value,value_exact,half_width,"
    "bound_loose,bound_tight,exception_mass,pass";

std::string report_to_csv_row(const LemmaReport& rep, std::uint64_t seed) {
    std::ostringstream row;
    row << rep.lemma << ',' << rep.n << ',' << rep.r << ',' << rep.blocks_desc << ','
        << (rep.p ? rep.p->to_string() : "") << ',' << (rep.q ? rep.q->to_string() : "") << ','
        << rep.s << ',' << (rep.mode == CheckMode::Exact ? "exact" : "sample") << ','
        << (rep.mc ? std::to_string(rep.mc->trials) : "") << ','
        << (rep.mode == CheckMode::Sample ? std::to_string(seed) : "") << ',';
    if (rep.exact_weight)
        row << fmt_double(rep.exact_weight->to_double()) << ',' << rep.exact_weight->to_string()
            << ',';
    else if (rep.mc)
        row << fmt_double(rep.mc->estimate) << ",,";
    else
        row << ",,";
    row << (rep.mc ? fmt_double(rep.mc->half_width) : "") << ','
        << fmt_double(bound_approx(rep.bound.loose, rep.bound.half_exponent, rep.s)) << ','
        << fmt_double(bound_approx(rep.bound.tight, rep.bound.half_exponent, rep.s)) << ','
        << (rep.exception_mass ? rep.exception_mass->to_string() : "") << ','
        << (rep.pass ? "true" : "false");
    return row.str();
}

Dnf load_dnf(const std::string& path) { return parse_dnf(read_file(path)); }

std::pair<PhpInstance, Dnf> load_php(const std::string& path) {
    return parse_php_dnf(read_file(path));
}

void guard_indep(int n, bool unsafe) {
    if (!unsafe && n > kIndepGuardMaxN)
        throw std::runtime_error("enumeration over 3^" + std::to_string(n) +
                                 " restrictions exceeds the size guard (use --unsafe-sizes)");
}

void guard_block(const BlockStructure& bs, bool unsafe) {
    if (!unsafe && block_outcome_count(bs) > kBlockGuardMaxOutcomes)
        throw std::runtime_error("block outcome space exceeds the size guard (use --unsafe-sizes)");
}

void guard_php(int holes, bool unsafe) {
    if (!unsafe && holes > kPhpGuardMaxHoles)
        throw std::runtime_error("php enumeration beyond n=5 exceeds the size guard "
                                 "(use --unsafe-sizes)");
}

LemmaReport run_one_check(const Options& opt, const Rational& p, const Rational& q, int s) {
    CheckMode mode = opt.mode == "sample" ? CheckMode::Sample : CheckMode::Exact;
    if (opt.lemma == 1) {
        if (opt.dnf_path.empty()) throw std::runtime_error("lemma 1 needs --dnf");
        Dnf f = load_dnf(opt.dnf_path);
        f.validate();
        if (mode == CheckMode::Exact) guard_indep(f.n, opt.unsafe_sizes);
        return check_lemma1(f, p, s, mode, opt.trials, opt.seed, opt.threads);
    }
    if (opt.lemma == 2) {
        if (opt.dnf_path.empty() || opt.blocks_path.empty())
            throw std::runtime_error("lemma 2 needs --dnf and --blocks");
        Dnf f = load_dnf(opt.dnf_path);
        f.validate();
        BlockStructure bs = parse_blocks(read_file(opt.blocks_path));
        if (bs.n != f.n) throw std::runtime_error("blocks file universe does not match formula");
        if (mode == CheckMode::Exact) guard_block(bs, opt.unsafe_sizes);
        return check_lemma2(f, bs, p, q, s, mode, opt.trials, opt.seed, opt.threads);
    }
    if (opt.php_path.empty()) throw std::runtime_error("lemma 3 needs --php");
    auto [inst, f] = load_php(opt.php_path);
    f.validate();
    if (mode == CheckMode::Exact) guard_php(inst.holes, opt.unsafe_sizes);
    return check_lemma3(f, inst, q, s, mode, opt.trials, opt.seed, opt.threads);
}

int run_check(const Options& opt) {
    Rational p = opt.p_text.empty() ? Rational(1, 16) : parse_rational(opt.p_text, "--p");
    Rational q = opt.q_text.empty() ? Rational(1, 16) : parse_rational(opt.q_text, "--q");
    if (opt.lemma == 1 && opt.p_text.empty()) throw std::runtime_error("check --lemma 1 needs --p");
    if (opt.lemma == 2 && (opt.p_text.empty() || opt.q_text.empty()))
        throw std::runtime_error("check --lemma 2 needs --p and --q");
    if (opt.lemma == 3 && opt.q_text.empty()) throw std::runtime_error("check --lemma 3 needs --q");
    LemmaReport rep = run_one_check(opt, p, q, opt.s);
    if (opt.format == "csv") {
        std::cout << kCsvHeader << "\n" << report_to_csv_row(rep, opt.seed) << "\n";
    } else {
        std::cout << report_to_json(rep).dump(2) << "\n";
    }
    if (!rep.precondition_ok) {
        std::cerr << "precondition violated: " << rep.precondition_note << "\n";
        return 1;
    }
    return rep.pass ? 0 : 1;
}

int run_sweep(const Options& opt) {
    std::vector<int> s_values = opt.s_list.empty() ? std::vector<int>{opt.s}
                                                   : parse_int_list(opt.s_list);
    std::vector<Rational> p_values =
        !opt.p_list.empty() ? parse_rational_list(opt.p_list, "--p-list")
        : !opt.p_text.empty() ? std::vector<Rational>{parse_rational(opt.p_text, "--p")}
                              : std::vector<Rational>{Rational(1, 16)};
    std::vector<Rational> q_values =
        !opt.q_list.empty() ? parse_rational_list(opt.q_list, "--q-list")
        : !opt.q_text.empty() ? std::vector<Rational>{parse_rational(opt.q_text, "--q")}
                              : std::vector<Rational>{Rational(1, 16)};
    std::cout << kCsvHeader << "\n";
    bool all_pass = true;
    for (const Rational& p : p_values) {
        for (const Rational& q : q_values) {
            for (int s : s_values) {
                LemmaReport rep = run_one_check(opt, p, q, s);
                all_pass &= rep.pass;
                std::cout << report_to_csv_row(rep, opt.seed) << "\n";
            }
        }
    }
    return all_pass ? 0 : 1;
}

int run_roundtrip(const Options& opt) {
    Rational p = opt.p_text.empty() ? Rational(1, 16) : parse_rational(opt.p_text, "--p");
    Rational q = opt.q_text.empty()
                     ? (opt.lemma == 3 ? Rational(1, 4) : Rational(1, 16))
                     : parse_rational(opt.q_text, "--q");
    long long formulas = 0, members = 0, violations = 0, duplicates = 0;
    bool class_ok = true;
    std::string first;

    auto absorb = [&](const InjectivityReport& rep) {
        ++formulas;
        members += rep.s_size;
        violations += rep.violations;
        duplicates += rep.duplicate_witnesses;
        if (!rep.class_bounds_ok) class_ok = false;
        if (first.empty()) {
            if (!rep.first_violation.empty()) first = rep.first_violation;
            else if (!rep.class_bounds_ok) first = rep.class_note;
        }
    };

    if (opt.lemma == 1) {
        std::vector<Dnf> corpus;
        if (!opt.dnf_path.empty()) {
            corpus.push_back(load_dnf(opt.dnf_path));
            corpus.back().validate();
        } else {
            if (opt.n < 1) throw std::runtime_error("roundtrip --lemma 1 needs --dnf or --n");
            corpus = canonical_dnfs(opt.n, opt.r, opt.max_terms);
        }
        guard_indep(corpus.front().n, opt.unsafe_sizes);
        for (const Dnf& f : corpus) absorb(sweep_injectivity_l1(f, IndepParams{f.n, p}, opt.s));
    } else if (opt.lemma == 2) {
        std::vector<Dnf> corpus;
        BlockStructure bs;
        if (!opt.dnf_path.empty()) {
            if (opt.blocks_path.empty())
                throw std::runtime_error("roundtrip --lemma 2 needs --blocks with --dnf");
            corpus.push_back(load_dnf(opt.dnf_path));
            corpus.back().validate();
            bs = parse_blocks(read_file(opt.blocks_path));
            if (bs.n != corpus.back().n)
                throw std::runtime_error("blocks file universe does not match formula");
        } else {
            if (opt.n < 1) throw std::runtime_error("roundtrip --lemma 2 needs --dnf or --n");
            std::vector<std::vector<VarId>> blocks;
            for (int v = 0; v < opt.n; v += 2) {
                if (v + 1 < opt.n) blocks.push_back({v, v + 1});
                else blocks.push_back({v});
            }
            bs = BlockStructure(opt.n, blocks);
            corpus = canonical_dnfs(opt.n, opt.r, opt.max_terms);
        }
        guard_block(bs, opt.unsafe_sizes);
        BlockParams params{bs, p, q};
        for (const Dnf& f : corpus) absorb(sweep_injectivity_l2(f, params, opt.s));
    } else {
        std::vector<Dnf> corpus;
        int holes;
        if (!opt.php_path.empty()) {
            auto [inst, f] = load_php(opt.php_path);
            f.validate();
            holes = inst.holes;
            corpus.push_back(php_preprocess(f, inst));
        } else {
            if (opt.n < 1) throw std::runtime_error("roundtrip --lemma 3 needs --php or --n");
            holes = opt.n;
            corpus = canonical_php_dnfs(PhpInstance(holes), opt.r, opt.max_terms, true);
        }
        guard_php(holes, opt.unsafe_sizes);
        PhpInstance inst(holes);
        PhpParams params{holes, q};
        for (const Dnf& f : corpus) absorb(sweep_injectivity_l3(f, inst, params, opt.s));
    }

    std::cout << "formulas " << formulas << "\nfailure-set members " << members
              << "\nround-trip violations " << violations << "\nduplicate witnesses " << duplicates
              << "\nclass bounds " << (class_ok ? "ok" : "violated") << "\n";
    if (violations || duplicates || !class_ok) {
        std::cout << "first counterexample:\n" << first;
        return 1;
    }
    return 0;
}

int run_sample(const Options& opt) {
    if (opt.dist == "indep") {
        Rational p = parse_rational(opt.p_text.empty() ? "1/2" : opt.p_text, "--p");
        IndepParams params{opt.n, p};
        params.validate();
        for (long long i = 0; i < opt.samples; ++i) {
            Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
            std::cout << sample_indep(params, rng).to_string() << "\n";
        }
        return 0;
    }
    if (opt.dist == "block") {
        BlockStructure bs = parse_blocks(read_file(opt.blocks_path));
        Rational p = parse_rational(opt.p_text.empty() ? "1/2" : opt.p_text, "--p");
        Rational q = parse_rational(opt.q_text.empty() ? "1/2" : opt.q_text, "--q");
        BlockParams params{bs, p, q};
        params.validate();
        for (long long i = 0; i < opt.samples; ++i) {
            Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
            std::cout << sample_block(params, rng).to_string() << "\n";
        }
        return 0;
    }
    if (opt.dist == "php") {
        Rational q = parse_rational(opt.q_text.empty() ? "1/2" : opt.q_text, "--q");
        PhpParams params{opt.n, q};
        params.validate();
        for (long long i = 0; i < opt.samples; ++i) {
            Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
            std::cout << sample_php(params, rng).to_string() << "\n";
        }
        return 0;
    }
    throw std::runtime_error("--dist must be indep, block, or php");
}

int run_enumerate(const Options& opt) {
    if (opt.dist == "indep") {
        Rational p = parse_rational(opt.p_text.empty() ? "1/2" : opt.p_text, "--p");
        guard_indep(opt.n, opt.unsafe_sizes);
        IndepParams params{opt.n, p};
        Rational sum(0);
        enumerate_indep(opt.n, [&](const Restriction& rho) {
            Rational w = weight_indep(rho, params);
            sum += w;
            std::cout << rho.to_string() << " " << w.to_string() << "\n";
        });
        std::cerr << "total " << sum.to_string() << "\n";
        return 0;
    }
    if (opt.dist == "block") {
        BlockStructure bs = parse_blocks(read_file(opt.blocks_path));
        Rational p = parse_rational(opt.p_text.empty() ? "1/2" : opt.p_text, "--p");
        Rational q = parse_rational(opt.q_text.empty() ? "1/2" : opt.q_text, "--q");
        guard_block(bs, opt.unsafe_sizes);
        BlockParams params{bs, p, q};
        Rational sum(0);
        enumerate_block(bs, [&](const BlockOutcome& o) {
            Rational w = weight_block(o, params);
            sum += w;
            std::cout << o.to_string() << " " << w.to_string() << "\n";
        });
        std::cerr << "total " << sum.to_string() << "\n";
        return 0;
    }
    if (opt.dist == "php") {
        Rational q = parse_rational(opt.q_text.empty() ? "1/2" : opt.q_text, "--q");
        guard_php(opt.n, opt.unsafe_sizes);
        PhpParams params{opt.n, q};
        Rational sum(0);
        // Second weight column: the q^{n+1-m} exponent variant, which does
        // not normalize to 1 under this sampling procedure.
        for (const PartialInjection& rho : enumerate_php(opt.n)) {
            Rational w = weight_php(rho, params);
            sum += w;
            std::cout << rho.to_string() << " " << w.to_string() << " "
                      << weight_php_alt(rho, params).to_string() << "\n";
        }
        std::cerr << "total " << sum.to_string() << "\n";
        return 0;
    }
    throw std::runtime_error("--dist must be indep, block, or php");
}

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--p", opt.p_text, "probability p as an exact rational a/b");
    cmd->add_option("--q", opt.q_text, "probability q as an exact rational a/b");
    cmd->add_option("--s", opt.s, "tree depth threshold s")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "rng seed (64-bit)");
    cmd->add_option("--threads", opt.threads, "worker cap for enumeration and sampling")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--unsafe-sizes", opt.unsafe_sizes, "override the enumeration size guards");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"switchlab: random restrictions, canonical trees, and switching-lemma checks"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* check = app.add_subcommand("check", "check one lemma bound against exact or sampled |S|");
    check->add_option("--lemma", opt.lemma, "lemma id: 1, 2 or 3")->required()->check(CLI::Range(1, 3));
    check->add_option("--dnf", opt.dnf_path, "DNF file (lemmas 1 and 2)");
    check->add_option("--blocks", opt.blocks_path, "blocks file (lemma 2)");
    check->add_option("--php", opt.php_path, "PHP formula file (lemma 3)");
    check->add_option("--mode", opt.mode, "exact or sample")
        ->check(CLI::IsMember({"exact", "sample"}));
    check->add_option("--trials", opt.trials, "sample mode trial count")->check(CLI::PositiveNumber);
    check->add_option("--format", opt.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    add_common(check, opt);

    CLI::App* roundtrip =
        app.add_subcommand("roundtrip", "verify decode(encode(rho)) = rho over a failure set");
    roundtrip->add_option("--lemma", opt.lemma, "lemma id")->required()->check(CLI::Range(1, 3));
    roundtrip->add_option("--dnf", opt.dnf_path, "DNF file (else a built-in corpus is used)");
    roundtrip->add_option("--blocks", opt.blocks_path, "blocks file (lemma 2 with --dnf)");
    roundtrip->add_option("--php", opt.php_path, "PHP formula file (lemma 3)");
    roundtrip->add_option("--n", opt.n, "corpus universe size / number of holes");
    roundtrip->add_option("--r", opt.r, "corpus width bound");
    roundtrip->add_option("--max-terms", opt.max_terms, "corpus term count cap");
    add_common(roundtrip, opt);

    CLI::App* sweep = app.add_subcommand("sweep", "CSV sweep over s (and p/q) grids");
    sweep->add_option("--lemma", opt.lemma, "lemma id")->required()->check(CLI::Range(1, 3));
    sweep->add_option("--dnf", opt.dnf_path, "DNF file (lemmas 1 and 2)");
    sweep->add_option("--blocks", opt.blocks_path, "blocks file (lemma 2)");
    sweep->add_option("--php", opt.php_path, "PHP formula file (lemma 3)");
    sweep->add_option("--mode", opt.mode, "exact or sample")
        ->check(CLI::IsMember({"exact", "sample"}));
    sweep->add_option("--trials", opt.trials, "sample mode trial count");
    sweep->add_option("--s-list", opt.s_list, "comma separated s values, e.g. 1,2,3");
    sweep->add_option("--p-list", opt.p_list, "comma separated rationals for p");
    sweep->add_option("--q-list", opt.q_list, "comma separated rationals for q");
    add_common(sweep, opt);

    CLI::App* sample = app.add_subcommand("sample", "draw restrictions from a distribution");
    sample->add_option("--dist", opt.dist, "indep, block, or php")->required();
    sample->add_option("--n", opt.n, "universe size (indep) / holes (php)");
    sample->add_option("--blocks", opt.blocks_path, "blocks file (block)");
    sample->add_option("--trials", opt.samples, "number of samples")->check(CLI::PositiveNumber);
    add_common(sample, opt);

    CLI::App* enumerate =
        app.add_subcommand("enumerate", "list every outcome with its exact weight");
    enumerate->add_option("--dist", opt.dist, "indep, block, or php")->required();
    enumerate->add_option("--n", opt.n, "universe size (indep) / holes (php)");
    enumerate->add_option("--blocks", opt.blocks_path, "blocks file (block)");
    add_common(enumerate, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(check)) return run_check(opt);
        if (app.got_subcommand(roundtrip)) return run_roundtrip(opt);
        if (app.got_subcommand(sweep)) return run_sweep(opt);
        if (app.got_subcommand(sample)) return run_sample(opt);
        if (app.got_subcommand(enumerate)) return run_enumerate(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
