#include "gpte/search.hpp"

#include "gpte/prunec.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include <sys/stat.h>

namespace gpte {

const char* mode_name(SearchMode m) { return m == SearchMode::Fast ? "fast" : "audit"; }

SearchMode parse_mode(std::string_view s) {
    s = trim(s);
    if (s == "fast" || s == "Fast") return SearchMode::Fast;
    if (s == "audit" || s == "Audit") return SearchMode::Audit;
    throw error(errc::config_error, "unknown search mode '" + std::string(s) + "'");
}

const char* recover_status_name(RecoverStatus s) {
    switch (s) {
    case RecoverStatus::Ok: return "Ok";
    case RecoverStatus::NonSquareDiscriminant: return "NonSquareDiscriminant";
    case RecoverStatus::NonIntegerRoot: return "NonIntegerRoot";
    case RecoverStatus::OutOfRange: return "OutOfRange";
    }
    return "?";
}

namespace {

using i128 = __int128;

// arithmetic shims so the engines compile for both i128 and bigint

inline i128 absv(i128 x) { return x < 0 ? -x : x; }
inline bigint absv(const bigint& x) { return abs(x); }

inline bool exact_sqrt(i128 v, i128& r) {
    if (v < 0) return false;
    r = (i128)sqrtl((long double)v);
    while (r > 0 && r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r * r == v;
}
inline bool exact_sqrt(const bigint& v, bigint& r) {
    if (v < 0) return false;
    mpz_sqrt(r.get_mpz_t(), v.get_mpz_t());
    return r * r == v;
}

inline i128 gcdv(i128 a, i128 b) {
    a = absv(a);
    b = absv(b);
    while (b) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}
inline bigint gcdv(const bigint& a, const bigint& b) {
    bigint g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline i128 mod_pos(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + m : r;
}
inline bigint mod_pos(const bigint& a, const bigint& m) {
    bigint r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

// a^-1 mod m, gcd(a, m) = 1, m >= 1
inline i128 invmod(i128 a, i128 m) {
    if (m == 1) return 0;
    i128 r0 = mod_pos(a, m), r1 = m, s0 = 1, s1 = 0;
    while (r1) {
        i128 q = r0 / r1, t = r0 - q * r1;
        r0 = r1;
        r1 = t;
        t = s0 - q * s1;
        s0 = s1;
        s1 = t;
    }
    return mod_pos(s0, m);
}
inline bigint invmod(const bigint& a, const bigint& m) {
    if (m == 1) return 0;
    bigint r;
    mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline int64_t to_i64(i128 x) { return (int64_t)x; }
inline int64_t to_i64(const bigint& x) { return x.get_si(); }

inline long double log_of(i128 x) { return logl((long double)x); }
inline long double log_of(const bigint& x) {
    long e;
    double m = mpz_get_d_2exp(&e, x.get_mpz_t());
    return logl((long double)m) + (long double)e * logl(2.0L);
}

template <class I> I from_i64(int64_t v) { return I(v); }
template <> bigint from_i64<bigint>(int64_t v) { return bigint((long)v); }

// monic, descending: c[0] = 1
template <class I> std::vector<I> poly_from_roots(const std::vector<I>& roots) {
    std::vector<I> c{I(1)};
    for (const I& r : roots) {
        c.push_back(I(0));
        for (size_t j = c.size() - 1; j > 0; --j) c[j] -= r * c[j - 1];
    }
    return c;
}

template <class I> I horner(const std::vector<I>& c, const I& x) {
    I p = c[0];
    for (size_t j = 1; j < c.size(); ++j) p = p * x + c[j];
    return p;
}

template <class I> void horner2(const std::vector<I>& c, const I& x, I& p, I& d) {
    p = c[0];
    d = 0;
    for (size_t j = 1; j < c.size(); ++j) {
        d = d * x + p;
        p = p * x + c[j];
    }
}

template <class I> bool deflate(std::vector<I>& c, const I& r) {
    for (size_t j = 1; j < c.size(); ++j) c[j] += r * c[j - 1];
    bool exact = c.back() == 0;
    c.pop_back();
    return exact;
}

// all roots of a monic polynomial as integers in [lo, hi], ascending; real-rootedness is
// not assumed, anything else is reported as a non-integer root
template <class I>
RecoverStatus integer_roots(std::vector<I> c, const I& lo, const I& hi, std::vector<I>& out) {
    out.clear();
    I x = hi;
    bool fresh = true;
    int iter = 0;
    while (c.size() > 3) {
        I p, d;
        horner2(c, x, p, d);
        if (p == 0) {
            out.push_back(x);
            deflate(c, x);
            fresh = false;
            continue;
        }
        if (p < 0) return fresh && x == hi ? RecoverStatus::OutOfRange : RecoverStatus::NonIntegerRoot;
        if (d <= 0) return RecoverStatus::NonIntegerRoot;
        // the Newton iterate stays above the largest real root; p != 0 leaves at least one step
        I step = p / d;
        if (step == 0) step = 1;
        x -= step;
        if (x < lo) return RecoverStatus::OutOfRange;
        if (++iter > 100000) return RecoverStatus::NonIntegerRoot;
    }
    if (c.size() == 3) {
        I disc = c[1] * c[1] - 4 * c[2];
        I s;
        if (!exact_sqrt(disc, s)) return RecoverStatus::NonSquareDiscriminant;
        I t = s - c[1];
        if (t % 2 != 0) return RecoverStatus::NonIntegerRoot;
        I r1 = t / 2;
        I r2 = r1 - s;
        if (r1 > hi || r2 < lo) return RecoverStatus::OutOfRange;
        out.push_back(r1);
        out.push_back(r2);
    } else if (c.size() == 2) {
        I r = -c[1];
        if (r > hi || r < lo) return RecoverStatus::OutOfRange;
        out.push_back(r);
    }
    std::reverse(out.begin(), out.end());
    return RecoverStatus::Ok;
}

template <class I> I det_bareiss(std::vector<std::vector<I>> a) {
    const size_t n = a.size();
    if (n == 0) return I(1);
    I sign = 1, prev = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            size_t i = k + 1;
            while (i < n && a[i][k] == 0) ++i;
            if (i == n) return I(0);
            std::swap(a[i], a[k]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

// P[k-1] = P_k for k = 1..u+v; T is the power series of prod(1 - y t) / prod(1 - x t),
// which has integer coefficients whenever the block is integral
template <class I> bool integrality_impl(const std::vector<I>& P, int u, int v, std::vector<I>& e) {
    const int n = u + v;
    std::vector<I> T(n + 1);
    T[0] = 1;
    for (int k = 1; k <= n; ++k) {
        I acc = P[k - 1];
        for (int i = 1; i < k; ++i) acc += T[i] * P[k - i - 1];
        if (acc % k != 0) return false;
        T[k] = acc / k;
    }
    e.clear();
    if (u == 0) return true;
    auto W = [&](int r) {
        std::vector<std::vector<I>> m;
        for (int o = 0; o <= u; ++o) {
            if (o == u - r) continue;
            std::vector<I> row;
            for (int j = 0; j < u; ++j) {
                int idx = v + o - j;
                row.push_back(idx < 0 ? I(0) : T[idx]);
            }
            m.push_back(row);
        }
        return det_bareiss(m);
    };
    I base = W(0);
    if (base == 0) return false;
    for (int r = 1; r <= u; ++r) {
        I w = W(r);
        if (w % base != 0) return false;
        e.push_back(w / base);
    }
    return true;
}

template <class I>
RecoverStatus recover_impl(const std::vector<I>& e, const std::vector<I>& P, int v, const I& lo, const I& hi,
                           std::vector<I>& zs, std::vector<I>& os) {
    std::vector<I> cz{I(1)};
    for (size_t j = 0; j < e.size(); ++j) cz.push_back(j % 2 == 0 ? I(-e[j]) : e[j]);
    RecoverStatus st = integer_roots(cz, lo, hi, zs);
    os.clear();
    if (st != RecoverStatus::Ok || v == 0) return st;
    std::vector<I> po(v + 1), E(v + 1);
    for (int k = 1; k <= v; ++k) {
        I s = 0;
        for (const I& z : zs) {
            I t = 1;
            for (int i = 0; i < k; ++i) t *= z;
            s += t;
        }
        po[k] = s - P[k - 1];
    }
    E[0] = 1;
    for (int k = 1; k <= v; ++k) {
        I acc = 0;
        for (int i = 1; i <= k; ++i) {
            if (i % 2) acc += E[k - i] * po[i];
            else acc -= E[k - i] * po[i];
        }
        if (acc % k != 0) return RecoverStatus::NonIntegerRoot;
        E[k] = acc / k;
    }
    std::vector<I> co{I(1)};
    for (int j = 1; j <= v; ++j) co.push_back(j % 2 ? I(-E[j]) : E[j]);
    return integer_roots(co, lo, hi, os);
}

char zero_side(int n) { return interlace_order(n).back().side; }

struct ThresholdTerm {
    int ki_index;
    int ki;
    int lower;
    long double ln_ceiling;
};

struct Shared {
    SearchConfig cfg;
    int n = 0;
    std::vector<Role> order;
    char zside = 'b';
    std::vector<int> ks;
    bool fast = false;
    bool fmax_on = false;
    FactorTable factors;
    long double beta_top = 0;
    std::vector<std::vector<ThresholdTerm>> thresholds;   // by depth
    int kn_index = 0;
    int stop = 0;            // prefix depth handed to the tail solver
    bool shortcut = false;   // two-unknown congruence at depth n
};

using Emit = std::function<void(const GpteSolution&, bool interlaced)>;

template <class I> class PteEngine {
public:
    PteEngine(const Shared& sh, SearchStats& st, const Emit& emit) : sh_(sh), st_(st), emit_(emit) {
        n_ = sh.n;
        nk_ = int(sh.ks.size());
        M_ = sh.cfg.max_value;
        pw_.assign(nk_, std::vector<I>(M_ + 1));
        for (int i = 0; i < nk_; ++i)
            for (int64_t v = 0; v <= M_; ++v) {
                I t = 1;
                for (int j = 0; j < sh.ks[i]; ++j) t *= from_i64<I>(v);
                pw_[i][v] = t;
            }
        x_.assign(2 * n_ + 2, 0);
        S_.assign(nk_, I(0));
        for (int p = 0; p < 2 * n_ + 2; ++p) sign_.push_back(sh.order[p].side == 'a' ? 1 : -1);
    }

    void run_top(int64_t top) {
        if (sh_.fmax_on && sh_.order[0].side != sh_.zside && !fmax_ok(top, fmax_limit(top))) return;
        x_[0] = top;
        add(0, top, 1);
        dfs(1, sh_.stop);
        add(0, top, -1);
    }

private:
    const Shared& sh_;
    SearchStats& st_;
    const Emit& emit_;
    int n_, nk_;
    int64_t M_;
    std::vector<std::vector<I>> pw_;
    std::vector<int64_t> x_;
    std::vector<I> S_;   // sum over fixed slots, a positive
    std::vector<int> sign_;
    I fz_[16];
    int nz_ = 0;

    uint64_t fmax_limit(int64_t top) const { return sh_.cfg.fmax_half ? uint64_t(top / 2) : *sh_.cfg.fmax; }
    bool fmax_ok(int64_t v, uint64_t f) const { return v > 0 && sh_.factors[uint64_t(v)] <= f; }

    void add(int p, int64_t v, int s) {
        for (int i = 0; i < nk_; ++i) {
            if (sign_[p] * s > 0) S_[i] += pw_[i][v];
            else S_[i] -= pw_[i][v];
        }
    }

    // remainder that the slots from p on have to produce, in slot p's orientation
    I rem(int p, int i) const { return sh_.order[p].side == 'b' ? S_[i] : I(-S_[i]); }

    // smallest v with mult * v^k >= R
    int64_t least(int i, int mult, const I& R) const {
        if (R <= 0) return 0;
        const auto& col = pw_[i];
        auto it = std::partition_point(col.begin(), col.end(), [&](const I& w) { return mult * w < R; });
        return int64_t(it - col.begin());
    }
    // largest v with v^k <= R, R >= 0
    int64_t floor_root(int i, const I& R) const {
        const auto& col = pw_[i];
        auto it = std::partition_point(col.begin(), col.end(), [&](const I& w) { return w <= R; });
        return int64_t(it - col.begin()) - 1;
    }

    bool fmax_slot_ok(int p, int64_t v) const {
        uint64_t f = fmax_limit(x_[0]);
        bool other = sh_.order[p].side != sh_.zside;
        if (other && !fmax_ok(v, f)) return false;
        for (int s = 0; s < p; ++s) {
            if (sh_.order[s].side == sh_.order[p].side) continue;
            if (!fmax_ok(std::abs(v - x_[s]), f)) return false;
        }
        return true;
    }

    bool threshold_ok(int depth) const {
        if (depth >= int(sh_.thresholds.size())) return true;
        const auto& rows = sh_.thresholds[depth];
        if (rows.empty()) return true;
        I rn = rem(depth, sh_.kn_index);
        if (rn <= 0) return false;
        long double lrn = log_of(rn);
        int kn = sh_.ks[sh_.kn_index];
        for (auto& r : rows) {
            I ri = rem(depth, r.ki_index);
            if (ri <= 0) return false;
            long double lq = kn * log_of(ri) - r.ki * lrn;
            if (r.lower == 1 && !(lq > 0)) return false;
            if (lq > r.ln_ceiling) return false;
        }
        return true;
    }

    // proven necessary conditions for the slot after the prefix
    bool window_open(int d) const {
        const bool first = d % 2 == 1;
        for (int i = 0; i < nk_; ++i) {
            I R = rem(d, i);
            const I& cap = pw_[i][x_[d - 1]];
            if (first) {
                if (R < 0 || R > 2 * cap) return false;
            } else if (R > cap) {
                return false;
            }
        }
        return true;
    }

    // candidate range for slot p given the slots before it; false if empty by a sign argument
    bool slot_range(int p, int64_t& lo, int64_t& hi) const {
        const int64_t top = x_[0];
        hi = p == 1 ? top - 1 : x_[p - 1];
        lo = 1;
        const bool first = p % 2 == 1;
        for (int i = 0; i < nk_; ++i) {
            I R = rem(p, i);
            if (first) {
                if (R < 0) return false;
                if (sh_.fast) hi = std::min(hi, floor_root(i, R));
                lo = std::max(lo, least(i, 2, R));
            } else {
                lo = std::max(lo, least(i, 1, R));
            }
        }
        if (sh_.fast) {
            if (p == 1) lo = std::max<int64_t>(lo, (int64_t)floorl(sh_.beta_top * top * (1 - 1e-12L)));
            if (p == 2 && sh_.cfg.bound_table) {
                auto e = sh_.cfg.bound_table->lookup(bigint((long)x_[1]), bigint((long)top));
                if (e) lo = std::max<int64_t>(lo, int64_t((i128)top * *e / 1000000));
            }
        }
        return lo <= hi;
    }

    void dfs(int p, int stop) {
        ++st_.nodes;
        int64_t lo, hi;
        if (!slot_range(p, lo, hi)) return;
        for (int64_t v = hi; v >= lo; --v) {
            if (sh_.fmax_on && !fmax_slot_ok(p, v)) continue;
            x_[p] = v;
            add(p, v, 1);
            if (!sh_.fast || threshold_ok(p + 1)) {
                if (p + 1 < stop) dfs(p + 1, stop);
                else if (stop == n_ && sh_.shortcut) tail();
                else leaf();
            }
            add(p, v, -1);
        }
    }

    // the fast-mode filters dfs would have applied to slot p holding v
    bool fast_slot_ok(int p, int64_t v) {
        int64_t lo, hi;
        if (!slot_range(p, lo, hi) || v < lo || v > hi) return false;
        if (sh_.fmax_on && !fmax_slot_ok(p, v)) return false;
        x_[p] = v;
        add(p, v, 1);
        bool ok = threshold_ok(p + 1);
        add(p, v, -1);
        return ok;
    }

    // n+1 slots fixed: W-ratio integrality, then the two blocks from their symmetric functions
    void leaf() {
        ++st_.leaves;
        const int d = n_ + 1;
        if (!window_open(d)) return;
        std::vector<I> P(n_);
        for (int i = 0; i < n_; ++i) P[i] = sh_.zside == 'b' ? S_[i] : I(-S_[i]);
        int u = 0;
        for (int s = d; s < 2 * n_ + 1; ++s) u += sh_.order[s].side == sh_.zside;
        std::vector<I> e, zs, os;
        if (!integrality_impl(P, u, n_ - u, e)) return;
        if (recover_impl(e, P, n_ - u, I(1), from_i64<I>(x_[n_]), zs, os) != RecoverStatus::Ok) return;
        place(d, zs, os);
    }

    // n slots fixed with exactly two known values on the other side: the unknown zero-side pair
    // F(x) = x^2 - s x + c satisfies K(o1) F(o1) = K(o2) F(o2), linear in (s, c)
    void tail() {
        ++st_.leaves;
        const int d = n_;
        if (!window_open(d)) return;
        nz_ = 0;
        int no = 0;
        I fo[2];
        for (int s = 0; s < d; ++s) {
            if (sh_.order[s].side == sh_.zside) fz_[nz_++] = from_i64<I>(x_[s]);
            else fo[no++] = from_i64<I>(x_[s]);
        }
        const I& o1 = fo[0];
        const I& o2 = fo[1];
        I K1 = o1, K2 = o2;
        for (int j = 0; j < nz_; ++j) {
            K1 *= o1 - fz_[j];
            K2 *= o2 - fz_[j];
        }
        I a1 = K1 * o1 - K2 * o2;
        I a2 = K1 - K2;
        I g = K1 * o1 * o1 - K2 * o2 * o2;
        if (a2 == 0) {
            // the relation does not pin c; enumerate the next slot instead
            dfs(d, n_ + 1);
            return;
        }
        const int64_t hz = x_[d - 1];
        // c a2 = s a1 - g, s = z1 + z2 in [2, 2 hz]
        int64_t s0, step;
        if (!congruence(a1, g, a2, s0, step)) return;
        int64_t s = s0;
        if (s < 2) s += ((2 - s + step - 1) / step) * step;
        for (; s <= 2 * hz; s += step) candidate_pair(s, a1, g, a2, o1, o2, hz);
    }

    static bool fits64(const I& v) { return v > -(I(1) << 62) && v < (I(1) << 62); }

    // solutions of s a1 = g (mod a2) as s0 + k step
    bool congruence(const I& a1, const I& g, const I& a2, int64_t& s0, int64_t& step) const {
        if constexpr (std::is_same_v<I, i128>) {
            if (fits64(a1) && fits64(a2) && fits64(g)) {
                int64_t m = std::abs(int64_t(a2)), x = int64_t(a1), y = int64_t(g);
                int64_t gg = std::gcd(std::abs(x), m);
                if (y % gg != 0) return false;
                int64_t mm = m / gg;
                step = mm;
                if (mm == 1) {
                    s0 = 0;
                    return true;
                }
                int64_t yr = ((y / gg) % mm + mm) % mm;
                int64_t inv = int64_t(invmod(i128(x / gg), i128(mm)));
                s0 = int64_t((i128)yr * inv % mm);
                return true;
            }
        }
        const I m = absv(a2);
        const I gg = gcdv(a1, m);
        if (mod_pos(g, gg) != 0) return false;
        const I mm = m / gg;
        if (mm > I(int64_t(1) << 62)) {
            // wider than any range of s
            I r = mod_pos(mod_pos(I(g / gg), mm) * invmod(I(a1 / gg), mm), mm);
            if (r > I(int64_t(1) << 62)) return false;
            s0 = to_i64(r);
            step = int64_t(1) << 62;
            return true;
        }
        step = to_i64(mm);
        s0 = mm == 1 ? 0 : to_i64(mod_pos(mod_pos(I(g / gg), mm) * invmod(I(a1 / gg), mm), mm));
        return true;
    }

    void candidate_pair(int64_t s64, const I& a1, const I& g, const I& a2, const I& o1, const I& o2, int64_t hz) {
        const I s = from_i64<I>(s64);
        const I hzz = from_i64<I>(hz);
        I c = (s * a1 - g) / a2;
        if (c < 1 || c > hzz * hzz) return;
        I r;
        if (!exact_sqrt(I(s * s - 4 * c), r)) return;
        if ((s + r) % 2 != 0) return;
        I z1 = (s + r) / 2, z2 = (s - r) / 2;
        if (z2 < 1 || z1 > hzz) return;
        std::vector<I> all{I(0)};
        for (int j = 0; j < nz_; ++j) all.push_back(fz_[j]);
        all.push_back(z1);
        all.push_back(z2);
        std::vector<I> poly = poly_from_roots(all);
        poly.back() -= horner(poly, o1);
        if (!deflate(poly, o1) || !deflate(poly, o2)) return;
        std::vector<I> os;
        if (integer_roots(poly, I(1), hzz, os) != RecoverStatus::Ok) return;
        std::vector<I> zs{z2, z1};
        place(n_, zs, os);
    }

    // fill the slots from d on, check the interlaced order and verify exactly
    void place(int d, const std::vector<I>& zs, const std::vector<I>& os) {
        const int slots = 2 * n_ + 2;
        std::vector<int64_t> full(x_.begin(), x_.begin() + d);
        size_t zi = zs.size(), oi = os.size();
        for (int s = d; s < slots - 1; ++s) {
            if (sh_.order[s].side == sh_.zside) {
                if (zi == 0) return;
                full.push_back(to_i64(zs[--zi]));
            } else {
                if (oi == 0) return;
                full.push_back(to_i64(os[--oi]));
            }
        }
        if (zi || oi) return;
        full.push_back(0);
        for (int s = 1; s < slots; ++s)
            if (full[s] > full[s - 1]) return;
        if (sh_.fast && d == n_ && !fast_slot_ok(n_, full[n_])) return;
        std::vector<bigint> a, b;
        for (int s = 0; s < slots; ++s) (sh_.order[s].side == 'a' ? a : b).push_back(bigint((long)full[s]));
        Side A{std::vector<bigint>(a.rbegin(), a.rend())};
        Side B{std::vector<bigint>(b.rbegin(), b.rend())};
        if (is_trivial(A, B) || !verify_equal(A, B, sh_.cfg.spec)) return;
        emit_(canonical({sh_.cfg.spec, A, B}), true);
    }
};

template <class I> class GenericEngine {
public:
    GenericEngine(const Shared& sh, SearchStats& st, const Emit& emit) : sh_(sh), st_(st), emit_(emit) {
        nk_ = int(sh.ks.size());
        m_ = sh.cfg.spec.m();
        M_ = sh.cfg.max_value;
        pw_.assign(nk_, std::vector<I>(M_ + 1));
        for (int i = 0; i < nk_; ++i)
            for (int64_t v = 0; v <= M_; ++v) {
                I t = 1;
                for (int j = 0; j < sh.ks[i]; ++j) t *= from_i64<I>(v);
                pw_[i][v] = t;
            }
        A_.assign(m_, 0);
        B_.assign(m_, 0);
        D_.assign(nk_, I(0));
        use_pairs_ = M_ <= 2000 && m_ >= 2;
        if (use_pairs_) {
            for (int64_t x = 0; x <= M_; ++x)
                for (int64_t y = 0; y <= x; ++y) pairs_.push_back({I(pw_[0][x] + pw_[0][y]), int32_t(x), int32_t(y)});
            std::sort(pairs_.begin(), pairs_.end(), [](const Pair& p, const Pair& q) {
                return p.sum < q.sum || (p.sum == q.sum && p.x < q.x);
            });
        }
    }

    void run_top(int64_t top) {
        A_[m_ - 1] = top;
        gen_a(m_ - 2, top);
    }

private:
    struct Pair {
        I sum;
        int32_t x, y;
    };
    const Shared& sh_;
    SearchStats& st_;
    const Emit& emit_;
    int nk_, m_;
    int64_t M_;
    std::vector<std::vector<I>> pw_;
    std::vector<int64_t> A_, B_;
    std::vector<I> D_;
    bool use_pairs_ = false;
    std::vector<Pair> pairs_;

    void gen_a(int j, int64_t cap) {
        if (j < 0) {
            for (int i = 0; i < nk_; ++i) {
                I s = 0;
                for (int64_t a : A_) s += pw_[i][a];
                D_[i] = s;
            }
            gen_b(m_, A_[m_ - 1] - 1);
            return;
        }
        for (int64_t v = cap; v >= 0; --v) {
            A_[j] = v;
            gen_a(j - 1, v);
        }
    }

    int64_t least(int i, int mult, const I& R) const {
        if (R <= 0) return 0;
        const auto& col = pw_[i];
        auto it = std::partition_point(col.begin(), col.end(), [&](const I& w) { return mult * w < R; });
        return int64_t(it - col.begin());
    }
    int64_t floor_root(int i, const I& R) const {
        const auto& col = pw_[i];
        auto it = std::partition_point(col.begin(), col.end(), [&](const I& w) { return w <= R; });
        return int64_t(it - col.begin()) - 1;
    }

    bool rest_match(int64_t x, int64_t y) const {
        for (int i = 1; i < nk_; ++i)
            if (pw_[i][x] + pw_[i][y] != D_[i]) return false;
        return true;
    }

    // r values still open on the b side, each at most cap
    void gen_b(int r, int64_t cap) {
        ++st_.nodes;
        if (cap < 0) return;
        for (int i = 0; i < nk_; ++i)
            if (D_[i] < 0) return;
        if (r == 1) {
            int64_t v = floor_root(0, D_[0]);
            if (v > cap || pw_[0][v] != D_[0]) return;
            for (int i = 1; i < nk_; ++i)
                if (pw_[i][v] != D_[i]) return;
            B_[0] = v;
            candidate();
            return;
        }
        if (r == 2) {
            ++st_.leaves;
            if (use_pairs_) {
                Pair key{D_[0], 0, 0};
                auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key,
                                           [](const Pair& p, const Pair& q) { return p.sum < q.sum; });
                for (; it != pairs_.end() && it->sum == D_[0] && it->x <= cap; ++it)
                    if (rest_match(it->x, it->y)) {
                        B_[1] = it->x;
                        B_[0] = it->y;
                        candidate();
                    }
            } else {
                for (int64_t y = 0; y <= cap && 2 * pw_[0][y] <= D_[0]; ++y) {
                    I rest = D_[0] - pw_[0][y];
                    int64_t x = floor_root(0, rest);
                    if (x > cap || x < y || pw_[0][x] != rest || !rest_match(x, y)) continue;
                    B_[1] = x;
                    B_[0] = y;
                    candidate();
                }
            }
            return;
        }
        int64_t hi = cap, lo = 0;
        for (int i = 0; i < nk_; ++i) {
            hi = std::min(hi, floor_root(i, D_[i]));
            lo = std::max(lo, least(i, r, D_[i]));
        }
        for (int64_t v = hi; v >= lo; --v) {
            B_[r - 1] = v;
            for (int i = 0; i < nk_; ++i) D_[i] -= pw_[i][v];
            gen_b(r - 1, v);
            for (int i = 0; i < nk_; ++i) D_[i] += pw_[i][v];
        }
    }

    void candidate() {
        long g = 0;
        for (int64_t v : A_) g = std::gcd(g, long(v));
        for (int64_t v : B_) g = std::gcd(g, long(v));
        if (g != 1) return;
        std::vector<bigint> a, b;
        for (int64_t v : A_) a.push_back(bigint((long)v));
        for (int64_t v : B_) b.push_back(bigint((long)v));
        Side SA(a), SB(b);
        if (is_trivial(SA, SB) || !verify_equal(SA, SB, sh_.cfg.spec)) return;
        GpteSolution s{sh_.cfg.spec, SA, SB};
        emit_(canonical(s), is_interlaced(s));
    }
};

std::string iso_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    return buf;
}

// rough bit sizes of the largest intermediate values of each engine
double pte_bits(int n, int64_t M) {
    auto order = interlace_order(n);
    int u = 0;
    for (int s = n + 1; s < 2 * n + 1; ++s) u += order[s].side == order.back().side;
    double b = std::log2(double(M) + 1);
    double w = u * n * std::log2((2.0 * n + 2) * (double(M) + 1)) + std::lgamma(u + 1.0) / std::log(2.0);
    double t = (n + 2) * (b + 1) + 8;
    return std::max(w, t) + 4;
}

double generic_bits(const ExponentSpec& spec, int64_t M) {
    return spec.max_k() * std::log2(double(M) + 1) + std::log2(spec.m() + 2.0) + 4;
}

template <class Engine>
void run_workers(const Shared& sh, int64_t start, int64_t end, SearchStats& total, const SolutionSink& sink) {
    std::mutex mu;
    int64_t next = start;
    int64_t frontier = start - 1;
    std::vector<char> done(size_t(std::max<int64_t>(end - start + 1, 0)), 0);
    const unsigned W = std::max(1u, sh.cfg.worker_count);
    const int64_t span = end - start + 1;
    const int64_t chunk = std::max<int64_t>(1, span / (int64_t(W) * 32));
    auto emit_fn = [&](const GpteSolution& s, bool interlaced) {
        std::lock_guard<std::mutex> lock(mu);
        ++total.emitted;
        if (!interlaced) {
            ++total.interlace_violations;
            total.counterexamples.push_back(s);
        }
        sink(s);
    };
    auto finish = [&](int64_t top) {
        std::lock_guard<std::mutex> lock(mu);
        done[size_t(top - start)] = 1;
        while (frontier < end && done[size_t(frontier + 1 - start)]) ++frontier;
        if (!sh.cfg.timing_log.empty()) {
            std::ofstream log(sh.cfg.timing_log, std::ios::app);
            log << top << ' ' << iso_now() << '\n';
        }
        if (!sh.cfg.progress_path.empty()) save_progress({frontier, end, iso_now()}, sh.cfg.progress_path);
    };
    auto work = [&]() {
        SearchStats local;
        Emit emit = emit_fn;
        Engine eng(sh, local, emit);
        for (;;) {
            int64_t lo, hi;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (sh.cfg.cancel && sh.cfg.cancel->load()) {
                    total.cancelled = true;
                    break;
                }
                if (next > end) break;
                lo = next;
                hi = std::min(end, next + chunk - 1);
                next = hi + 1;
            }
            for (int64_t top = lo; top <= hi; ++top) {
                eng.run_top(top);
                finish(top);
            }
        }
        std::lock_guard<std::mutex> lock(mu);
        total.nodes += local.nodes;
        total.leaves += local.leaves;
    };
    if (W == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < W; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    total.completed = frontier;
}

} // namespace

bool uses_interlaced_engine(const ExponentSpec& spec) {
    return !spec.k.empty() && spec.consecutive_from_one() && spec.m() == spec.degree() + 1;
}

SearchStats search(SearchConfig cfg, const SolutionSink& sink) {
    const ExponentSpec& spec = cfg.spec;
    if (spec.k.empty()) throw error(errc::config_error, "empty exponent set");
    if (spec.min_k() < 1) throw error(errc::config_error, "search needs exponents >= 1");
    if (cfg.max_value < 1) throw error(errc::config_error, "max_value must be positive");
    if (cfg.worker_count == 0) cfg.worker_count = 1;
    const bool pte = uses_interlaced_engine(spec);
    const bool want_fmax = cfg.fmax.has_value() || cfg.fmax_half;
    if (want_fmax && cfg.mode == SearchMode::Audit)
        throw error(errc::config_error, "fmax is a fast-mode filter");
    if (want_fmax && !pte) throw error(errc::config_error, "fmax needs exponents 1..n");

    Shared sh;
    sh.n = spec.degree();
    sh.ks = spec.k;
    sh.fast = cfg.mode == SearchMode::Fast && pte;
    if (pte) {
        sh.order = interlace_order(sh.n);
        sh.zside = zero_side(sh.n);
    }
    if (sh.fast) {
        if (!cfg.bound_table)
            cfg.bound_table = build_bound_table(spec, sh.n <= 4 ? 1e-4 : 1e-3, 0, cfg.worker_count);
        if (!cfg.threshold) cfg.threshold = threshold_params(spec);
        if (!(cfg.bound_table->spec == spec) || !(cfg.threshold->spec == spec))
            throw error(errc::config_error, "bound table or threshold built for another exponent set");
        sh.beta_top = cfg.threshold->config.at('b', sh.n + 1).convert_to<long double>();
        sh.kn_index = int(spec.k.size()) - 1;
        sh.thresholds.assign(2 * sh.n + 2, {});
        for (auto& r : cfg.threshold->rows) {
            if (r.depth < 0 || r.depth >= int(sh.thresholds.size())) continue;
            int idx = int(std::find(spec.k.begin(), spec.k.end(), r.ki) - spec.k.begin());
            sh.thresholds[r.depth].push_back({idx, r.ki, r.lower, logl(r.ceiling_ld) + log1pl(1e-12L)});
        }
        if (want_fmax) {
            sh.fmax_on = true;
            sh.factors = build_factor_table(uint64_t(cfg.max_value));
        }
    }
    sh.shortcut = pte && sh.n >= 3 && sh.n <= 5;
    sh.stop = sh.shortcut ? sh.n : sh.n + 1;

    int64_t start = 1;
    if (cfg.resume) {
        if (cfg.resume->end != cfg.max_value)
            throw error(errc::config_error, "progress end " + std::to_string(cfg.resume->end) +
                                                " does not match max_value " + std::to_string(cfg.max_value));
        start = cfg.resume->current + 1;
    }
    sh.cfg = cfg;

    SearchStats st;
    st.generic = !pte;
    st.completed = start - 1;
    if (start > cfg.max_value) return st;
    if (pte) {
        if (pte_bits(sh.n, cfg.max_value) < 124) run_workers<PteEngine<i128>>(sh, start, cfg.max_value, st, sink);
        else run_workers<PteEngine<bigint>>(sh, start, cfg.max_value, st, sink);
    } else {
        if (generic_bits(spec, cfg.max_value) < 124)
            run_workers<GenericEngine<i128>>(sh, start, cfg.max_value, st, sink);
        else run_workers<GenericEngine<bigint>>(sh, start, cfg.max_value, st, sink);
    }
    return st;
}

bool solution_less(const GpteSolution& x, const GpteSolution& y) {
    const bigint& mx = std::max(x.lhs.max(), x.rhs.max());
    const bigint& my = std::max(y.lhs.max(), y.rhs.max());
    if (mx != my) return mx < my;
    if (!(x.lhs == y.lhs)) return x.lhs < y.lhs;
    return x.rhs < y.rhs;
}

std::vector<GpteSolution> search_all(const SearchConfig& cfg, SearchStats* stats) {
    std::vector<GpteSolution> out;
    SearchStats st = search(cfg, [&](const GpteSolution& s) { out.push_back(s); });
    std::sort(out.begin(), out.end(), solution_less);
    if (stats) *stats = st;
    return out;
}

bool is_interlaced(const GpteSolution& s) {
    const int n = s.spec.degree();
    if (int(s.lhs.size()) != n + 1 || int(s.rhs.size()) != n + 1) return false;
    if (s.lhs.max() == s.rhs.max()) return false;
    const Side& a = s.lhs.max() > s.rhs.max() ? s.lhs : s.rhs;
    const Side& b = s.lhs.max() > s.rhs.max() ? s.rhs : s.lhs;
    size_t ia = a.size(), ib = b.size();
    bigint prev = a.max();
    for (auto& r : interlace_order(n)) {
        const bigint& v = r.side == 'a' ? a[--ia] : b[--ib];
        if (v > prev) return false;
        prev = v;
    }
    return true;
}

std::optional<std::vector<bigint>> integrality_test(const std::vector<bigint>& fixed, const ExponentSpec& spec) {
    if (!spec.consecutive_from_one())
        throw error(errc::unsupported_gap_pattern, "integrality test needs exponents 1..n, got " + spec.str());
    const int n = spec.degree();
    if (int(fixed.size()) != n + 1)
        throw error(errc::precondition_violated, "need the top n+1 = " + std::to_string(n + 1) + " values");
    auto order = interlace_order(n);
    const char z = order.back().side;
    std::vector<bigint> P(n);
    for (int k = 1; k <= n; ++k) {
        bigint s = 0;
        for (int i = 0; i <= n; ++i) {
            bigint t;
            mpz_pow_ui(t.get_mpz_t(), fixed[i].get_mpz_t(), k);
            if (order[i].side == z) s -= t;
            else s += t;
        }
        P[k - 1] = s;
    }
    int u = 0;
    for (int s = n + 1; s < 2 * n + 1; ++s) u += order[s].side == z;
    std::vector<bigint> e;
    if (!integrality_impl(P, u, n - u, e)) return std::nullopt;
    return e;
}

RecoverResult recover_remaining(const std::vector<bigint>& symfuncs, const std::vector<bigint>& power_diff,
                                int other_count, const bigint& lo, const bigint& hi) {
    if (other_count < 0 || int(power_diff.size()) < other_count)
        throw error(errc::precondition_violated, "need P_1..P_v for the other block");
    RecoverResult r;
    r.status = recover_impl(symfuncs, power_diff, other_count, lo, hi, r.zero_block, r.other_block);
    if (!r) {
        r.zero_block.clear();
        r.other_block.clear();
    }
    return r;
}

Census census(const std::vector<GpteSolution>& sols) {
    Census c;
    c.total = sols.size();
    std::map<std::string, GpteSolution> classes;
    for (auto& s : sols) {
        GpteSolution nm = normalize(s);
        classes.emplace(format_record(nm), nm);
    }
    c.coprime_classes = classes.size();
    for (auto& [key, s] : classes) {
        bool sym = false;
        try {
            sym = classify_symmetry(s) == Symmetry::Symmetric;
        } catch (const error&) {
        }
        (sym ? c.symmetric : c.non_symmetric)++;
    }
    return c;
}

void save_progress(const Progress& p, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw error(errc::io_error, "cannot write " + tmp);
        f << p.current << ' ' << p.end << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw error(errc::io_error, "cannot replace " + path + ": " + ec.message());
}

Progress load_progress(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw error(errc::io_error, "cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    std::istringstream in(text);
    Progress p;
    std::string extra;
    if (!(in >> p.current >> p.end) || (in >> extra) || p.current > p.end)
        throw error(errc::corrupt_progress_file, "progress file " + path + " is not '<current> <end>'");
    for (char ch : text)
        if (!(std::isdigit((unsigned char)ch) || std::isspace((unsigned char)ch) || ch == '-'))
            throw error(errc::corrupt_progress_file, "progress file " + path + " is not '<current> <end>'");
    struct stat sb {};
    std::time_t tt = ::stat(path.c_str(), &sb) == 0 ? sb.st_mtime : std::time(nullptr);
    std::tm tm{};
    localtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    p.timestamp = buf;
    return p;
}

} // namespace gpte
