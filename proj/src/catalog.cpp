#include "gpte/catalog.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <thread>

namespace gpte {

SolutionRecord parse_record(std::string_view line) {
    SolutionRecord r;
    std::string_view body = line;
    if (auto h = line.find('#'); h != std::string_view::npos) {
        r.tag = std::string(trim(line.substr(h + 1)));
        body = line.substr(0, h);
    }
    r.sol = parse_record_line(trim(body));
    if (is_trivial(r.sol.lhs, r.sol.rhs)) throw error(errc::verification_failed, "trivial solution");
    if (!verify(r.sol)) throw error(errc::verification_failed, "power sums differ");
    return r;
}

std::string emit_record(const SolutionRecord& rec) {
    std::string s = format_record(rec.sol);
    if (!rec.tag.empty()) s += " # " + rec.tag;
    return s;
}

static bool skip_line(std::string_view s) {
    s = trim(s);
    return s.empty() || s.front() == '#';
}

static std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open " + path);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    return lines;
}

CatalogReport verify_catalog_lines(const std::vector<std::string>& lines, unsigned workers) {
    std::vector<int> idx;
    for (size_t i = 0; i < lines.size(); ++i)
        if (!skip_line(lines[i])) idx.push_back(int(i));
    std::vector<std::string> why(idx.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t j; (j = next++) < idx.size();) {
            try {
                parse_record(lines[idx[j]]);
            } catch (const error& e) {
                why[j] = std::string(errc_name(e.code())) + ": " + e.what();
            }
        }
    };
    workers = std::max(1u, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    CatalogReport rep;
    rep.total = idx.size();
    for (size_t j = 0; j < idx.size(); ++j) {
        if (why[j].empty()) ++rep.passed;
        else rep.failed.push_back({idx[j] + 1, lines[idx[j]], why[j]});
    }
    return rep;
}

CatalogReport verify_catalog(const std::string& path, unsigned workers) {
    return verify_catalog_lines(read_lines(path), workers);
}

std::vector<SolutionRecord> load_catalog(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<SolutionRecord> out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (skip_line(lines[i])) continue;
        try {
            auto r = parse_record(lines[i]);
            r.line = int(i) + 1;
            out.push_back(std::move(r));
        } catch (const error& e) {
            throw error(e.code(), path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

// ---- chains

static std::string signature(const Side& s, const ExponentSpec& spec) {
    std::string key = std::to_string(s.size());
    for (auto& v : power_sums(s, spec)) key += ";" + v.get_str();
    return key;
}

static bool chain_less(const Chain& x, const Chain& y) {
    if (x.length() != y.length()) return x.length() > y.length();
    return x.sides.front() < y.sides.front();
}

std::vector<Chain> find_chains(const ExponentSpec& spec, const std::vector<Side>& sides) {
    std::map<std::string, std::vector<Side>> groups;
    for (auto& s : sides) groups[signature(s, spec)].push_back(s);
    std::vector<Chain> out;
    for (auto& [key, g] : groups) {
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        if (g.size() >= 2) out.push_back({spec, std::move(g)});
    }
    std::sort(out.begin(), out.end(), chain_less);
    return out;
}

std::vector<Chain> find_chains(const std::vector<GpteSolution>& sols) {
    if (sols.empty()) return {};
    std::vector<Side> sides;
    for (auto& s : sols) {
        if (!(s.spec == sols.front().spec)) throw error(errc::precondition_violated, "chains need one spec");
        sides.push_back(s.lhs);
        sides.push_back(s.rhs);
    }
    return find_chains(sols.front().spec, sides);
}

// ---- primes

using u128 = unsigned __int128;

static uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) { return uint64_t(u128(a) * b % m); }

static uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
    uint64_t r = 1;
    for (a %= m; e; e >>= 1, a = mulmod(a, a, m))
        if (e & 1) r = mulmod(r, a, m);
    return r;
}

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    static const uint64_t small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (uint64_t p : small) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int s = 0;
    while (!(d & 1)) d >>= 1, ++s;
    // these twelve bases are enough for every 64-bit n
    for (uint64_t a : small) {
        uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int i = 1; i < s && comp; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) comp = false;
        }
        if (comp) return false;
    }
    return true;
}

Primality primality(const bigint& v) {
    if (v < 2) return Primality::Composite;
    if (mpz_sizeinbase(v.get_mpz_t(), 2) <= 64) {
        uint64_t x = 0;
        mpz_export(&x, nullptr, -1, sizeof x, 0, 0, v.get_mpz_t());
        return is_prime_u64(x) ? Primality::Prime : Primality::Composite;
    }
    int r = mpz_probab_prime_p(v.get_mpz_t(), 64);
    return r == 0 ? Primality::Composite : r == 2 ? Primality::Prime : Primality::ProbablePrime;
}

PrimeReport is_prime_solution(const GpteSolution& sol) {
    if (!sol.spec.all_positive()) throw error(errc::not_applicable, "prime solutions need positive exponents");
    PrimeReport rep;
    for (auto* side : {&sol.lhs, &sol.rhs})
        for (auto& x : side->v)
            if (x < 0) throw error(errc::not_applicable, "prime solutions need nonnegative elements");
    rep.all_prime = true;
    for (auto* side : {&sol.lhs, &sol.rhs})
        for (auto& x : side->v) {
            auto p = primality(x);
            if (p == Primality::Composite) {
                rep.all_prime = false;
                rep.probable = false;
                return rep;
            }
            if (p == Primality::ProbablePrime) rep.probable = true;
        }
    return rep;
}

// ---- generators

static Generated finish(std::string family, ExponentSpec spec, std::vector<bigint> a, std::vector<bigint> b) {
    Generated g;
    g.family = std::move(family);
    g.raw = {spec, Side(a), Side(b)};
    GpteSolution n = g.raw;
    bool odd = true;
    for (int k : spec.k) odd = odd && (k % 2 != 0);
    auto negs = [](const Side& s) { return std::count_if(s.v.begin(), s.v.end(), [](const bigint& x) { return x < 0; }); };
    if (odd && negs(n.lhs) == negs(n.rhs) && negs(n.lhs) > 0) {
        // x^k = -(-x)^k for odd k: a negative element crosses to the other side
        std::vector<bigint> l, r;
        for (auto& x : g.raw.lhs.v) (x < 0 ? r : l).push_back(x < 0 ? bigint(-x) : x);
        for (auto& x : g.raw.rhs.v) (x < 0 ? l : r).push_back(x < 0 ? bigint(-x) : x);
        n = {spec, Side(l), Side(r)};
    }
    g.normalized = normalize(n);
    if (!verify(g.raw)) throw error(errc::verification_failed, g.family + " output does not verify");
    return g;
}

static void require_distinct_nonzero(const std::vector<bigint>& a, const std::vector<bigint>& b) {
    std::vector<bigint> all = a;
    all.insert(all.end(), b.begin(), b.end());
    for (auto& x : all)
        if (x == 0) throw error(errc::degenerate_parameters, "zero element");
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw error(errc::degenerate_parameters, "repeated element");
}

Generated gen_choudhry(const bigint& m, const bigint& n, const bigint& p, const bigint& q, int size) {
    std::vector<bigint> a, b;
    if (size == 4) {
        bigint fa = p * p + q * q, fb = m * m + n * n;
        a = {m * (m - n) * fa, n * (m + n) * fa, (n - m) * n * fa, m * (m + n) * fa};
        b = {p * (p - q) * fb, q * (p + q) * fb, (q - p) * q * fb, p * (p + q) * fb};
    } else if (size == 6) {
        bigint fa = p * p + p * q + q * q, fb = m * m + m * n + n * n;
        a = {m * (m - n) * fa, n * (m + 2 * n) * fa, (m + n) * (2 * m + n) * fa,
             n * (n - m) * fa, m * (2 * m + n) * fa, (m + n) * (m + 2 * n) * fa};
        b = {p * (p - q) * fb, q * (p + 2 * q) * fb, (p + q) * (2 * p + q) * fb,
             q * (q - p) * fb, p * (2 * p + q) * fb, (p + q) * (p + 2 * q) * fb};
    } else {
        throw error(errc::precondition_violated, "choudhry size is 4 or 6");
    }
    require_distinct_nonzero(a, b);
    return finish(size == 4 ? "choudhry4" : "choudhry6",
                  ExponentSpec(size == 4 ? std::vector<int>{-1, 1, 2, 3} : std::vector<int>{-1, 1, 2, 3, 4, 5}), a, b);
}

Generated gen_prime_k23(const bigint& m, const bigint& n) {
    // 0.50146073 < m/n < 0.50764144
    bigint mm = m * 100000000, lo = n * 50146073, hi = n * 50764144;
    bool inside = n > 0 ? (mm > lo && mm < hi) : (n < 0 && mm < lo && mm > hi);
    if (!inside) throw error(errc::out_of_positivity_window, "m/n outside (0.50146073, 0.50764144)");
    bigint m2 = m * m, mn = m * n, n2 = n * n;
    std::vector<bigint> a{668607 * m2 - 606430 * mn + 135971 * n2, 3 * (331215 * m2 - 356278 * mn + 95579 * n2),
                          -140793 * m2 + 157762 * mn - 43109 * n2};
    std::vector<bigint> b{971067 * m2 - 1050038 * mn + 282799 * n2, 3 * (237495 * m2 - 218822 * mn + 50083 * n2),
                          -59853 * m2 + 39050 * mn - 3817 * n2};
    return finish("prime-k23", ExponentSpec({2, 3}), a, b);
}

static bigint pw(const bigint& x, unsigned e) {
    bigint r;
    mpz_pow_ui(r.get_mpz_t(), x.get_mpz_t(), e);
    return r;
}

static rational pw(const rational& x, unsigned e) {
    rational r = 1;
    for (unsigned i = 0; i < e; ++i) r *= x;
    return r;
}

Generated gen_k15(const bigint& r, const bigint& s, const bigint& t) {
    bigint r4 = pw(r, 4), s4 = pw(s, 4), t4 = pw(t, 4);
    if (r4 == t4) throw error(errc::degenerate_parameters, "r^4 = t^4");
    bigint p = (r + s) * (r * r + s * s) * (s + t) * (s * s + t * t) * (r * r + r * t + t * t);
    bigint q = (r4 - t4) * (r * r * s * s + r * r * s * t + r * s * s * t + r * r * t * t + r * s * t * t + s * s * t * t);
    if (p == q) throw error(errc::degenerate_parameters, "p = q");
    rational m(p + q, p - q);
    m.canonicalize();
    rational n = (rational(r4) * m - rational(s4) * m + rational(s4 - t4)) / rational(r4 - t4);
    rational R(r), S(s), T(t);
    rational u = rational(s * s - t * t) + R * R * pw(m, 3) - S * S * pw(m, 3) - R * R * pw(n, 3) + T * T * pw(n, 3);
    rational v = S - T + R * pw(m, 4) - S * pw(m, 4) - R * pw(n, 4) + T * pw(n, 4);
    std::vector<rational> qa{-2 * m * u + R * v, 2 * n * u - R * v, -2 * n * u + T * v};
    std::vector<rational> qb{-2 * m * u + S * v, -2 * u + T * v, 2 * u - S * v};
    bigint l = 1;
    for (auto* vec : {&qa, &qb})
        for (auto& x : *vec) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    std::vector<bigint> a, b;
    for (auto& x : qa) a.push_back(bigint(x * l));
    for (auto& x : qb) b.push_back(bigint(x * l));
    bigint g = 0;
    for (auto* vec : {&a, &b})
        for (auto& x : *vec) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g == 0) throw error(errc::degenerate_parameters, "all elements vanish");
    int neg = 0;
    for (auto* vec : {&a, &b})
        for (auto& x : *vec) neg += x < 0;
    // odd exponents only, so the whole system may be negated
    if (2 * neg > int(a.size() + b.size())) g = -g;
    for (auto* vec : {&a, &b})
        for (auto& x : *vec) x /= g;
    if (Side(a) == Side(b)) throw error(errc::degenerate_parameters, "trivial output");
    return finish("k15", ExponentSpec({1, 5}), a, b);
}

const char* pell_variant_name(PellVariant v) { return v == PellVariant::Halves ? "halves" : "quarters"; }

Generated gen_pell(const bigint& u0, int iterations, PellVariant variant) {
    if (iterations < 0) throw error(errc::precondition_violated, "negative iteration count");
    const long c = variant == PellVariant::Halves ? 11 : 8;
    auto root = [&](const bigint& u) {
        bigint d = 3 * u * u - c, w;
        if (d < 0 || !mpz_perfect_square_p(d.get_mpz_t())) throw error(errc::non_square_seed, "3u^2 - " + std::to_string(c) + " is not a square");
        mpz_sqrt(w.get_mpz_t(), d.get_mpz_t());
        return w;
    };
    bigint u = u0;
    bigint w = root(u);
    for (int i = 0; i < iterations; ++i) {
        u = 7 * u + 4 * w;
        w = root(u);
    }
    if (w % 2 != 0) throw error(errc::non_square_seed, "sqrt(3u^2 - c) is odd");
    bigint v = w / 2;
    std::vector<bigint> a, b;
    if (variant == PellVariant::Halves) {
        if (u % 2 == 0) throw error(errc::degenerate_parameters, "u must be odd");
        a = {0, (u - 1) / 2, (u + 1) / 2, (3 * u - 1) / 2, (3 * u + 1) / 2, 2 * u};
        b = {u - v - 1, u - v + 1, u - 2, u + 2, u + v - 1, u + v + 1};
    } else {
        if (u % 4 != 2 || (u - v) % 2 == 0) throw error(errc::degenerate_parameters, "u must be 2 mod 4 and u - v odd");
        a = {0, (u - 2) / 4, (u + 2) / 4, (3 * u - 2) / 4, (3 * u + 2) / 4, u};
        b = {(u - v - 1) / 2, (u - v + 1) / 2, (u - 2) / 2, (u + 2) / 2, (u + v - 1) / 2, (u + v + 1) / 2};
    }
    if (Side(a) == Side(b)) throw error(errc::degenerate_parameters, "trivial output");
    return finish(std::string("pell-") + pell_variant_name(variant), ExponentSpec({1, 2, 3, 4, 5}), a, b);
}

} // namespace gpte
