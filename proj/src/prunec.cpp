#include "gpte/prunec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gpte {

const char* family_name(CFamilyKind k) {
    switch (k) {
    case CFamilyKind::PTE: return "PTE";
    case CFamilyKind::ShiftedConsecutive: return "ShiftedConsecutive";
    case CFamilyKind::GapConsecutive: return "GapConsecutive";
    case CFamilyKind::OddSpaced: return "OddSpaced";
    case CFamilyKind::None: break;
    }
    return "None";
}

CFamily family_of(const ExponentSpec& spec) {
    const auto& k = spec.k;
    int n = int(k.size());
    CFamily f;
    f.n = n;
    if (n == 0) return f;
    int k1 = k[0];

    auto steps = [&](int from, int to, int d) {
        for (int i = from; i < to; ++i)
            if (k[i + 1] - k[i] != d) return false;
        return true;
    };

    if (steps(0, n - 1, 1)) {
        if (k1 == 1) return {CFamilyKind::PTE, 0, n};
        if (k1 <= 0 && k1 >= 1 - n) return {CFamilyKind::ShiftedConsecutive, 1 - k1, n};
        return f;
    }
    // k=1,3 fits both the odd and the gap pattern; odd wins
    if (n >= 2 && steps(0, n - 1, 2) && (k1 % 2 != 0) && k1 <= 1 && k1 >= 1 - 2 * n)
        return {CFamilyKind::OddSpaced, 2 - k1, n};
    if (n >= 2 && steps(0, n - 2, 1) && k[n - 1] - k[n - 2] == 2 && k1 <= 1 && k1 >= 2 - n)
        return {CFamilyKind::GapConsecutive, 1 - k1, n};
    return f;
}

namespace {

// coefficients of prod (x + sign*r), index = power of x
std::vector<bigint> poly_from_roots(const std::vector<bigint>& roots, int sign) {
    std::vector<bigint> c{1};
    for (auto& r : roots) {
        std::vector<bigint> next(c.size() + 1, 0);
        for (size_t j = 0; j < c.size(); ++j) {
            next[j + 1] += c[j];
            next[j] += sign * r * c[j];
        }
        c = std::move(next);
    }
    return c;
}

std::vector<bigint> poly_mul(const std::vector<bigint>& p, const std::vector<bigint>& q) {
    std::vector<bigint> r(p.size() + q.size() - 1, 0);
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

CFamily checked_family(const GpteSolution& sol) {
    CFamily f = family_of(sol.spec);
    if (f.kind == CFamilyKind::None)
        throw error(errc::unsupported_family, "no constant-C family for k=" + sol.spec.str());
    size_t want = size_t(f.n) + 1;
    if (sol.lhs.size() != want || sol.rhs.size() != want)
        throw error(errc::unsupported_family, "constant C needs sides of size n+1");
    return f;
}

bigint raw_c(const GpteSolution& sol, const CFamily& f) {
    if (f.kind == CFamilyKind::OddSpaced) {
        auto F = poly_mul(poly_from_roots(sol.lhs.v, 1), poly_from_roots(sol.rhs.v, -1));
        return F[f.m];
    }
    auto A = poly_from_roots(sol.lhs.v, -1);
    auto B = poly_from_roots(sol.rhs.v, -1);
    if (f.kind == CFamilyKind::GapConsecutive) return -(A[f.m + 1] - B[f.m + 1]);
    return A[f.m] - B[f.m];
}

rational pow_q(const bigint& x, int m) {
    bigint r;
    mpz_pow_ui(r.get_mpz_t(), x.get_mpz_t(), unsigned(m));
    return rational(r);
}

} // namespace

rational half_sum(const GpteSolution& sol) {
    bigint t = 0;
    for (auto& v : sol.lhs.v) t += v;
    for (auto& v : sol.rhs.v) t += v;
    rational s(t, 2);
    s.canonicalize();
    return s;
}

bigint signed_constant_c(const GpteSolution& sol) {
    CFamily f = checked_family(sol);
    bigint c = raw_c(sol, f);
    if (c == 0) throw error(errc::trivial_solution, "C = 0");
    return c;
}

bigint constant_c(const GpteSolution& sol) {
    bigint c = signed_constant_c(sol);
    return c < 0 ? bigint(-c) : c;
}

Residues c_divisibility_residues(const GpteSolution& sol) {
    CFamily f = checked_family(sol);
    Residues r;
    r.c = raw_c(sol, f);
    const auto& a = sol.lhs.v;
    const auto& b = sol.rhs.v;

    if (f.kind == CFamilyKind::OddSpaced) {
        r.lhs_sign = 1;
        r.rhs_sign = 1;
        for (auto& x : a) {
            if (x == 0) continue;
            bigint p = 1;
            for (size_t i = 0; i < a.size(); ++i) p *= (x + a[i]) * (x - b[i]);
            r.lhs.push_back(rational(p) / (2 * pow_q(x, f.m)));
        }
        for (auto& y : b) {
            if (y == 0) continue;
            bigint p = 1;
            for (size_t i = 0; i < b.size(); ++i) p *= (y - a[i]) * (y + b[i]);
            r.rhs.push_back(-rational(p) / (2 * pow_q(y, f.m)));
        }
        return r;
    }

    rational s = half_sum(sol);
    bool gap = f.kind == CFamilyKind::GapConsecutive;
    auto side = [&](const std::vector<bigint>& self, const std::vector<bigint>& other,
                    std::vector<rational>& out) {
        for (auto& x : self) {
            if (f.m > 0 && x == 0) continue;
            if (gap && rational(x) == s) continue;
            bigint p = 1;
            for (auto& y : other) p *= x - y;
            rational q(p);
            if (f.m > 0) q /= pow_q(x, f.m);
            if (gap) q /= s - x;
            out.push_back(q);
        }
    };
    side(a, b, r.lhs);
    side(b, a, r.rhs);
    return r;
}

bool differences_divide_c(const GpteSolution& sol) {
    CFamily f = checked_family(sol);
    if (f.kind != CFamilyKind::PTE)
        throw error(errc::unsupported_family, "difference divisibility is a PTE-family property");
    bigint c = raw_c(sol, f);
    if (c == 0) throw error(errc::trivial_solution, "C = 0");
    for (auto& x : sol.lhs.v)
        for (auto& y : sol.rhs.v) {
            bigint d = x - y;
            if (d == 0 || !mpz_divisible_p(c.get_mpz_t(), d.get_mpz_t())) return false;
        }
    return true;
}

namespace {

bigint pollard_brent(const bigint& n) {
    if (mpz_even_p(n.get_mpz_t())) return 2;
    bigint c = 1;
    for (;; ++c) {
        bigint y = 2, x, g = 1, q = 1, ys;
        unsigned long r = 1, m = 128;
        auto f = [&](const bigint& v) -> bigint {
            bigint t = v * v + c;
            mpz_mod(t.get_mpz_t(), t.get_mpz_t(), n.get_mpz_t());
            return t;
        };
        do {
            x = y;
            for (unsigned long i = 0; i < r; ++i) y = f(y);
            unsigned long k = 0;
            do {
                ys = y;
                for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    bigint d = abs(x - y);
                    q = q * d;
                    mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                k += m;
            } while (k < r && g == 1);
            r *= 2;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                bigint d = abs(x - ys);
                mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

void split(const bigint& n, std::vector<bigint>& out) {
    if (n == 1) return;
    if (mpz_probab_prime_p(n.get_mpz_t(), 30)) {
        out.push_back(n);
        return;
    }
    bigint d = pollard_brent(n);
    split(d, out);
    split(n / d, out);
}

} // namespace

std::vector<std::pair<bigint, unsigned>> factorize(bigint v) {
    if (v < 0) v = -v;
    std::vector<bigint> primes;
    if (v == 0) return {};
    for (unsigned long p = 2; p < 10000 && p * p <= v; p += (p == 2 ? 1 : 2))
        while (mpz_divisible_ui_p(v.get_mpz_t(), p)) {
            primes.push_back(p);
            v /= p;
        }
    split(v, primes);
    std::sort(primes.begin(), primes.end());
    std::vector<std::pair<bigint, unsigned>> out;
    for (auto& p : primes) {
        if (!out.empty() && out.back().first == p)
            ++out.back().second;
        else
            out.push_back({p, 1});
    }
    return out;
}

std::string factorization_str(const bigint& v) {
    if (v == 0) return "0";
    std::ostringstream os;
    if (v < 0) os << "-";
    auto fs = factorize(v);
    if (fs.empty()) os << "1";
    for (size_t i = 0; i < fs.size(); ++i) {
        if (i) os << " * ";
        os << fs[i].first.get_str();
        if (fs[i].second > 1) os << "^" << fs[i].second;
    }
    return os.str();
}

uint32_t FactorTable::at(uint64_t v) const {
    if (v < 1 || v > limit())
        throw error(errc::out_of_table, "value " + std::to_string(v) + " outside factor table 1.." +
                                            std::to_string(limit()));
    return lpf_[v];
}

void FactorTable::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw error(errc::io_error, "cannot write " + path);
    for (uint64_t v = 1; v <= limit(); ++v) f << lpf_[v] << "\n";
    if (!f) throw error(errc::io_error, "write failed: " + path);
}

FactorTable FactorTable::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw error(errc::io_error, "cannot read " + path);
    std::vector<uint32_t> t{0};
    std::string tok;
    while (f >> tok) {
        uint64_t x = 0;
        try {
            size_t used = 0;
            x = std::stoull(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw error(errc::parse_error, path + ": bad factor entry '" + tok + "'");
        }
        if (x == 0 || x > t.size())
            throw error(errc::parse_error, path + ": entry " + tok + " impossible at row " +
                                               std::to_string(t.size()));
        t.push_back(uint32_t(x));
    }
    return FactorTable(std::move(t));
}

FactorTable build_factor_table(uint64_t n) {
    if (n < 1) throw error(errc::precondition_violated, "factor table limit must be >= 1");
    std::vector<uint32_t> t(n + 1, 0);
    t[1] = 1;
    for (uint64_t p = 2; p <= n; ++p) {
        if (t[p]) continue;
        for (uint64_t q = p; q <= n; q += p) t[q] = uint32_t(p);
    }
    return FactorTable(std::move(t));
}

bool fmax_admissible(int64_t v, uint64_t fmax, const FactorTable& table) {
    uint64_t a = v < 0 ? uint64_t(-v) : uint64_t(v);
    return table.at(a) <= fmax;
}

bool fmax_admissible(const bigint& v, uint64_t fmax, const FactorTable& table) {
    bigint a = abs(v);
    if (a < 1 || a > bigint(std::to_string(table.limit())))
        throw error(errc::out_of_table, "value " + v.get_str() + " outside factor table");
    return table[a.get_ui()] <= fmax;
}

} // namespace gpte
