// gpte: command-line front end

#include "gpte/bounds.hpp"
#include "gpte/catalog.hpp"
#include "gpte/core.hpp"
#include "gpte/prunec.hpp"
#include "gpte/search.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <sys/stat.h>
#include <thread>

using namespace gpte;

namespace {

enum exit_code { ok = 0, failed = 1, usage = 2, solver = 3 };

std::atomic<bool> interrupted{false};

void on_signal(int) { interrupted = true; }

int exit_for(const error& e) {
    switch (e.code()) {
    case errc::verification_failed:
    case errc::trivial_solution:
        return failed;
    case errc::no_convergence:
    case errc::out_of_domain:
    case errc::singular_base:
    case errc::empty_interval:
        return solver;
    default:
        return usage;
    }
}

bool exists(const std::string& p) {
    struct stat st;
    return ::stat(p.c_str(), &st) == 0;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

bool skip(std::string_view l) {
    l = trim(l);
    return l.empty() || l.front() == '#';
}

// digits of x rounded toward zero, so every printed digit is a prefix of the true value
std::string truncated(const real& x, int digits) {
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, size_t(digits), x.backend().data(), MPFR_RNDZ);
    std::string m = s;
    mpfr_free_str(s);
    std::string sign;
    if (!m.empty() && m[0] == '-') {
        sign = "-";
        m.erase(0, 1);
    }
    if (e <= 0) return sign + "0." + std::string(size_t(-e), '0') + m;
    if (size_t(e) >= m.size()) return sign + m + std::string(size_t(e) - m.size(), '0');
    return sign + m.substr(0, size_t(e)) + "." + m.substr(size_t(e));
}

struct verify_opts {
    std::string in, k, lhs, rhs;
};

int cmd_verify(const verify_opts& o) {
    size_t total = 0, pass = 0;
    bool parse_bad = false;
    auto one = [&](const std::string& line, const std::string& where) {
        ++total;
        try {
            auto r = parse_record(line);
            ++pass;
            std::cout << "PASS " << where << format_record(r.sol) << "\n";
        } catch (const error& e) {
            if (e.code() == errc::parse_error) parse_bad = true;
            std::cout << "FAIL " << where << trim(line) << " (" << errc_name(e.code()) << ": " << e.what() << ")\n";
        }
    };
    if (!o.in.empty()) {
        auto lines = read_lines(o.in);
        for (size_t i = 0; i < lines.size(); ++i)
            if (!skip(lines[i])) one(lines[i], "line " + std::to_string(i + 1) + ": ");
    } else {
        one("k=" + o.k + " | " + o.lhs + " | " + o.rhs, "");
    }
    std::cout << pass << "/" << total << " passed\n";
    if (parse_bad) return usage;
    return pass == total ? ok : failed;
}

struct search_opts {
    std::string k, mode = "audit", fmax = "off", table, resume, out, timing;
    int64_t max = 0;
    unsigned threads = 0;
};

int cmd_search(const search_opts& o) {
    SearchConfig c;
    c.spec = ExponentSpec::parse(o.k);
    c.max_value = o.max;
    c.mode = parse_mode(o.mode);
    if (o.fmax == "auto") {
        c.fmax_half = true;
    } else if (o.fmax != "off") {
        try {
            size_t used = 0;
            long long f = std::stoll(o.fmax, &used);
            if (used != o.fmax.size() || f < 1) throw std::invalid_argument("fmax");
            c.fmax = uint64_t(f);
        } catch (const std::logic_error&) {
            throw error(errc::config_error, "--fmax takes a positive integer, auto or off");
        }
    }
    if (c.fmax_half && c.mode == SearchMode::Audit) throw error(errc::config_error, "fmax needs fast mode");
    if (!o.table.empty()) c.bound_table = BoundTable::load(o.table);
    c.worker_count = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    c.timing_log = o.timing;
    std::vector<GpteSolution> prior;
    if (!o.resume.empty()) {
        c.progress_path = o.resume;
        if (exists(o.resume)) {
            c.resume = load_progress(o.resume);
            if (exists(o.out))
                for (auto& l : read_lines(o.out))
                    if (!skip(l)) prior.push_back(parse_record(l).sol);
        }
    }
    interrupted = false;
    c.cancel = &interrupted;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    SearchStats st;
    auto sols = search_all(c, &st);
    std::map<std::string, GpteSolution> merged;
    for (auto* v : {&prior, &sols})
        for (auto& s : *v) merged.emplace(format_record(canonical(s)), canonical(s));
    std::vector<GpteSolution> all;
    for (auto& [key, s] : merged) all.push_back(s);
    std::sort(all.begin(), all.end(), solution_less);
    std::ofstream out(o.out);
    if (!out) throw error(errc::io_error, "cannot write " + o.out);
    for (auto& s : all) out << format_record(s) << "\n";
    out.close();
    auto cs = census(all);
    std::cout << "records " << all.size() << "\n";
    std::cout << "census total=" << cs.total << " coprime=" << cs.coprime_classes << " symmetric=" << cs.symmetric
              << " non_symmetric=" << cs.non_symmetric << "\n";
    if (st.interlace_violations) std::cout << "interlace_violations " << st.interlace_violations << "\n";
    if (st.cancelled) {
        std::cout << "interrupted after " << st.completed << "\n";
        return failed;
    }
    return ok;
}

struct bounds_opts {
    std::string k, beta, out;
    bool table = false;
    double res = 1e-4;
    int precision = 20;
    unsigned threads = 0;
};

int cmd_bounds(const bounds_opts& o) {
    ExponentSpec spec = ExponentSpec::parse(o.k);
    if (o.precision < 1) throw error(errc::config_error, "--precision must be positive");
    int digits = std::max(default_digits(spec), o.precision + 20);
    if (o.table) {
        if (o.out.empty()) throw error(errc::config_error, "--table needs --out");
        unsigned w = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
        auto t = build_bound_table(spec, o.res, 0, w);
        t.save(o.out);
        std::cout << "table " << o.out << " rows " << t.entries.size() << "\n";
        return ok;
    }
    real top = solve_beta_top_min(spec, digits);
    std::cout << "beta_top_min " << truncated(top, o.precision) << "\n";
    if (!o.beta.empty()) {
        real::default_precision(unsigned(digits));
        real b(o.beta);
        real next = solve_beta_next_min(spec, b, digits);
        std::cout << "beta_next_min " << truncated(next, o.precision) << "\n";
    }
    return ok;
}

template <class F>
int per_record(const std::string& in, F&& f) {
    auto lines = read_lines(in);
    int rc = ok;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (skip(lines[i])) continue;
        std::cout << "line " << i + 1 << ": ";
        try {
            auto r = parse_record(lines[i]);
            f(r);
        } catch (const error& e) {
            std::cout << "error " << errc_name(e.code()) << ": " << e.what() << "\n";
            rc = std::max(rc, exit_for(e));
        }
    }
    return rc;
}

int cmd_constc(const std::string& in) {
    return per_record(in, [](const SolutionRecord& r) {
        bigint c = constant_c(r.sol);
        std::cout << format_record(r.sol) << " C=" << c.get_str() << " = " << factorization_str(c) << "\n";
    });
}

int cmd_primes(const std::string& in) {
    return per_record(in, [](const SolutionRecord& r) {
        std::cout << format_record(r.sol) << " ";
        try {
            auto p = is_prime_solution(r.sol);
            std::cout << (!p.all_prime ? "not-prime" : p.probable ? "probable-prime" : "prime") << "\n";
        } catch (const error& e) {
            if (e.code() != errc::not_applicable) throw;
            std::cout << "n/a\n";
        }
    });
}

int cmd_chains(const std::string& in, int min_len) {
    auto lines = read_lines(in);
    std::map<std::string, std::vector<GpteSolution>> by_spec;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (skip(lines[i])) continue;
        auto r = parse_record(lines[i]);
        by_spec[r.sol.spec.str()].push_back(r.sol);
    }
    size_t count = 0;
    for (auto& [spec, sols] : by_spec)
        for (auto& c : find_chains(sols)) {
            if (int(c.length()) < min_len) continue;
            ++count;
            std::cout << "k=" << spec << " j=" << c.length() << " |";
            for (auto& s : c.sides) std::cout << " [" << s.str() << "]";
            std::cout << "\n";
        }
    std::cout << "chains " << count << "\n";
    return ok;
}

struct gen_opts {
    std::string family, variant = "halves", out;
    std::vector<std::string> params;
    bool raw = false;
};

int cmd_gen(const gen_opts& o) {
    std::vector<bigint> p;
    for (auto& s : o.params) {
        bigint v;
        if (v.set_str(s, 10) != 0) throw error(errc::parse_error, "not an integer: " + s);
        p.push_back(v);
    }
    auto need = [&](size_t n) {
        if (p.size() != n)
            throw error(errc::config_error, o.family + " takes " + std::to_string(n) + " parameters");
    };
    Generated g;
    if (o.family == "choudhry4" || o.family == "choudhry6") {
        need(4);
        g = gen_choudhry(p[0], p[1], p[2], p[3], o.family == "choudhry4" ? 4 : 6);
    } else if (o.family == "prime-k23") {
        need(2);
        g = gen_prime_k23(p[0], p[1]);
    } else if (o.family == "k15") {
        need(3);
        g = gen_k15(p[0], p[1], p[2]);
    } else if (o.family == "pell") {
        need(2);
        PellVariant v = o.variant == "halves" ? PellVariant::Halves
                        : o.variant == "quarters" ? PellVariant::Quarters
                                                  : throw error(errc::config_error, "unknown variant " + o.variant);
        g = gen_pell(p[0], int(p[1].get_si()), v);
    } else {
        throw error(errc::config_error, "unknown family " + o.family);
    }
    SolutionRecord rec{o.raw ? g.raw : g.normalized, g.family, 0};
    try {
        if (is_prime_solution(rec.sol).all_prime) rec.tag += " +all-prime";
    } catch (const error&) {
    }
    std::string line = emit_record(rec);
    std::cout << line << "\n";
    if (!o.out.empty()) {
        std::ofstream f(o.out, std::ios::app);
        if (!f) throw error(errc::io_error, "cannot write " + o.out);
        f << line << "\n";
    }
    return ok;
}

int cmd_catalog_check(const std::string& in, unsigned threads, bool json) {
    auto rep = verify_catalog(in, threads ? threads : std::max(1u, std::thread::hardware_concurrency()));
    if (json) {
        nlohmann::json j;
        j["total"] = rep.total;
        j["passed"] = rep.passed;
        j["failed"] = nlohmann::json::array();
        for (auto& f : rep.failed) j["failed"].push_back(f.line);
        std::cout << j.dump() << "\n";
    } else {
        for (auto& f : rep.failed) std::cout << "FAIL line " << f.line << ": " << f.text << " (" << f.reason << ")\n";
        std::cout << rep.passed << "/" << rep.total << " passed\n";
    }
    return rep.failed.empty() ? ok : failed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gpte: equal power sums workbench"};
    app.require_subcommand(1);

    verify_opts vo;
    auto* verify = app.add_subcommand("verify", "verify records from a file or one solution given by flags");
    auto* vin = verify->add_option("--in", vo.in, "record file")->check(CLI::ExistingFile);
    auto* vk = verify->add_option("--k", vo.k, "exponents, e.g. 1,2,3");
    auto* vl = verify->add_option("--lhs", vo.lhs, "left side values");
    auto* vr = verify->add_option("--rhs", vo.rhs, "right side values");
    vin->excludes(vk)->excludes(vl)->excludes(vr);
    vk->needs(vl)->needs(vr);
    vl->needs(vk);
    vr->needs(vk);

    search_opts so;
    auto* search = app.add_subcommand("search", "enumerate solutions up to a maximum element");
    search->add_option("--k", so.k, "exponents")->required();
    search->add_option("--max", so.max, "largest element allowed")->required();
    search->add_option("--mode", so.mode, "fast or audit")->check(CLI::IsMember({"fast", "audit"}));
    search->add_option("--fmax", so.fmax, "divisor prime limit: a number, auto (half the top value) or off");
    search->add_option("--table", so.table, "bound table file (fast mode)")->check(CLI::ExistingFile);
    search->add_option("--resume", so.resume, "progress file, read if present and rewritten per outer value");
    search->add_option("--threads", so.threads, "worker count (default: all cores)");
    search->add_option("--timing", so.timing, "append '<value> <iso8601>' per outer value");
    search->add_option("--out", so.out, "sorted solution records")->required();

    bounds_opts bo;
    auto* bounds = app.add_subcommand("bounds", "exact bound constants and lookup tables");
    bounds->add_option("--k", bo.k, "exponents")->required();
    auto* bbeta = bounds->add_option("--beta", bo.beta, "beta_top value for the next bound");
    auto* btab = bounds->add_flag("--table", bo.table, "write the lookup table instead");
    bounds->add_option("--res", bo.res, "table grid step, 1e-4 or 1e-3")->check(CLI::IsMember({1e-4, 1e-3}));
    bounds->add_option("--out", bo.out, "table output path");
    bounds->add_option("--precision", bo.precision, "significant digits printed (truncated)");
    bounds->add_option("--threads", bo.threads, "table workers (default: all cores)");
    btab->excludes(bbeta);

    std::string cin_path;
    auto* constc = app.add_subcommand("constc", "constant C with factorization per record");
    constc->add_option("--in", cin_path, "record file")->required()->check(CLI::ExistingFile);

    std::string chin;
    int min_len = 3;
    auto* chains = app.add_subcommand("chains", "multigrade chains among the records of each spec");
    chains->add_option("--in", chin, "record file")->required()->check(CLI::ExistingFile);
    chains->add_option("--min-length", min_len, "shortest chain printed (default 3)");

    std::string pin;
    auto* primes = app.add_subcommand("primes", "prime solution check per record");
    primes->add_option("--in", pin, "record file")->required()->check(CLI::ExistingFile);

    gen_opts go;
    auto* gen = app.add_subcommand("gen", "parametric families: choudhry4 m n p q, choudhry6 m n p q, "
                                          "prime-k23 m n, k15 r s t, pell u0 i");
    gen->add_option("family", go.family, "family name")
        ->required()
        ->check(CLI::IsMember({"choudhry4", "choudhry6", "prime-k23", "k15", "pell"}));
    gen->add_option("params", go.params, "integer parameters")->required();
    gen->add_option("--variant", go.variant, "pell recurrence: halves (3u^2-11) or quarters (3u^2-8)");
    gen->add_flag("--raw", go.raw, "print values before removing the common factor");
    gen->add_option("--out", go.out, "append the record to this file");

    std::string kin;
    unsigned kthreads = 0;
    bool kjson = false;
    auto* check = app.add_subcommand("catalog-check", "re-verify a record corpus");
    check->add_option("--in", kin, "record file")->required();
    check->add_option("--threads", kthreads, "workers (default: all cores)");
    check->add_flag("--json", kjson, "print a JSON summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*verify) {
            if (vo.in.empty() && vo.k.empty()) throw error(errc::config_error, "verify needs --in or --k/--lhs/--rhs");
            return cmd_verify(vo);
        }
        if (*search) return cmd_search(so);
        if (*bounds) return cmd_bounds(bo);
        if (*constc) return cmd_constc(cin_path);
        if (*chains) return cmd_chains(chin, min_len);
        if (*primes) return cmd_primes(pin);
        if (*gen) return cmd_gen(go);
        if (*check) return cmd_catalog_check(kin, kthreads, kjson);
    } catch (const error& e) {
        std::cerr << "error " << errc_name(e.code()) << ": " << e.what() << "\n";
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return usage;
}
