#include "gpte/newton.hpp"

#include <functional>

namespace gpte {

const rational& PowerSeq::operator()(int k) const {
    if (!has(k)) throw error(errc::precondition_violated, "P_" + std::to_string(k) + " not supplied");
    return v_[k - lo_];
}

rational& PowerSeq::at(int k) {
    if (!has(k)) throw error(errc::precondition_violated, "P_" + std::to_string(k) + " not supplied");
    return v_[k - lo_];
}

PowerSeq power_seq(const Side& s, int lo, int hi) {
    std::vector<rational> v;
    for (int k = lo; k <= hi; ++k) v.push_back(extended_power_sum(s, k));
    return PowerSeq(lo, v);
}

PowerSeq two_sided_power_seq(const Side& a, const Side& b, int lo, int hi) {
    std::vector<rational> v;
    for (int k = lo; k <= hi; ++k) {
        if (k == 0) {
            rational pa = extended_power_sum(a, 0), pb = extended_power_sum(b, 0);
            if (pa == 0) throw error(errc::zero_element, "P_0 undefined");
            v.push_back(-pb / pa);
        } else {
            v.push_back(extended_power_sum(a, k) - extended_power_sum(b, k));
        }
    }
    return PowerSeq(lo, v);
}

rational SymmetricSeq::operator()(int k) const {
    if (has(k)) return v_[k - lo_];
    if (lo_ == 0 && k < 0) return 0;
    throw error(errc::precondition_violated, "S_" + std::to_string(k) + " outside window");
}

static rational pw(const rational& x, int e) {
    rational r = 1;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

static rational fact(int n) {
    bigint f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return rational(f);
}

SymmetricSeq elementary_recursive(const PowerSeq& P) {
    int K = P.hi();
    std::vector<rational> S(K + 1);
    S[0] = 1;
    for (int k = 1; k <= K; ++k) {
        rational acc = P(k);
        for (int i = 1; i < k; ++i) acc += S[i] * P(k - i);
        S[k] = -acc / k;
    }
    return SymmetricSeq(0, S);
}

rational det(std::vector<std::vector<rational>> m) {
    const size_t n = m.size();
    rational d = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        while (p < n && m[p][c] == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            std::swap(m[p], m[c]);
            d = -d;
        }
        d *= m[c][c];
        for (size_t r = c + 1; r < n; ++r) {
            if (m[r][c] == 0) continue;
            rational f = m[r][c] / m[c][c];
            for (size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
        }
    }
    return d;
}

rational elementary_determinant(const PowerSeq& P, int k) {
    if (k == 0) return 1;
    // Hessenberg matrix: row i = P_{i+1} .. P_1, then i+1 on the superdiagonal
    std::vector<std::vector<rational>> m(k, std::vector<rational>(k, 0));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) m[i][j] = P(i - j + 1);
        if (i + 1 < k) m[i][i + 1] = i + 1;
    }
    rational d = det(m) / fact(k);
    return k % 2 ? rational(-d) : d;
}

// multiplicity vectors mult[1..k] with sum j*mult[j] = k
static void partitions(int k, int maxmult1, bool distinct,
                       const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> mult(k + 1, 0);
    std::function<void(int, int)> rec = [&](int part, int left) {
        if (left == 0) {
            f(mult);
            return;
        }
        if (part == 0) return;
        int cap = left / part;
        if (distinct) cap = std::min(cap, 1);
        if (part == 1) cap = std::min(cap, maxmult1);
        for (int c = cap; c >= 0; --c) {
            mult[part] = c;
            rec(part - 1, left - c * part);
        }
        mult[part] = 0;
    };
    rec(k, k);
}

static std::vector<rational> f_terms(const PowerSeq& P, int K) {
    std::vector<rational> F(K + 1);
    if (K >= 1) F[1] = -P(1);
    for (int k = 2; k <= K; ++k) F[k] = (pw(P(1), k) - P(k)) / k;
    return F;
}

SymmetricSeq elementary_factorial(const PowerSeq& P) {
    int K = P.hi();
    auto F = f_terms(P, K);
    std::vector<rational> S(K + 1);
    S[0] = 1;
    for (int k = 1; k <= K; ++k) {
        rational acc = 0;
        partitions(k, 1, false, [&](const std::vector<int>& mu) {
            rational t = 1;
            for (int j = 1; j <= k; ++j)
                if (mu[j]) t *= pw(F[j], mu[j]) / fact(mu[j]);
            acc += t;
        });
        S[k] = acc;
    }
    return SymmetricSeq(0, S);
}

SymmetricSeq elementary_inclusion_exclusion(const PowerSeq& P) {
    int K = P.hi();
    auto F = f_terms(P, K);
    std::vector<rational> D(K + 1);
    if (K >= 1) D[1] = -P(1);
    for (int k = 2; k <= K; ++k) {
        D[k] = F[k];
        for (int f = 2; f < k; ++f) {
            if (k % f) continue;
            rational t = pw(D[k / f], f) / f;
            D[k] += f % 2 ? rational(-t) : t;
        }
    }
    std::vector<rational> S(K + 1);
    S[0] = 1;
    for (int k = 1; k <= K; ++k) {
        rational acc = 0;
        partitions(k, 1, true, [&](const std::vector<int>& mu) {
            rational t = 1;
            for (int j = 1; j <= k; ++j)
                if (mu[j]) t *= D[j];
            acc += t;
        });
        S[k] = acc;
    }
    return SymmetricSeq(0, S);
}

rational predict_power_sum(const PowerSeq& P, int n) {
    auto S = elementary_recursive(P);
    rational acc = 0;
    for (int i = 1; i <= n; ++i) acc -= S(i) * P(n + 1 - i);
    return acc;
}

bool ExtendedResult::all_zero() const {
    for (auto& [k, t] : T)
        if (t != 0) return false;
    return true;
}

ExtendedResult extended_elementary(const PowerSeq& P, int n) {
    if (!P.has(0) || P(0) == 0) throw error(errc::zero_element, "P_0 undefined or zero");
    const int lo = P.lo(), hi = P.hi();
    std::map<int, rational> S;
    if (hi >= 1) {
        std::vector<rational> v;
        for (int k = 1; k <= hi; ++k) v.push_back(P(k));
        auto sp = elementary_recursive(PowerSeq::positive(v));
        for (int k = 1; k <= hi; ++k) S[k] = sp(k);
    }
    const rational& P0 = P(0);
    S[0] = -P0;
    if (lo <= -1) S[-1] = P0 * P(-1);
    for (int k = -2; k >= lo; --k) {
        rational acc = -P0 * P(k);
        for (int j = 1; j <= -k - 1; ++j) acc += S[-j] * P(k + j);
        S[k] = acc / k;
    }
    ExtendedResult r;
    std::vector<rational> sv;
    for (int k = lo; k <= hi; ++k) sv.push_back(S[k]);
    r.S = SymmetricSeq(lo, sv);
    const rational sg = n % 2 ? -1 : 1;
    auto Sk = [&](int k) -> std::optional<rational> {
        if (k < lo || k > hi) return std::nullopt;
        return S[k];
    };
    for (int k = lo; k <= hi + n; ++k) {
        std::optional<rational> t;
        if (k <= -1) {
            if (auto s = Sk(k - n)) t = sg * *s;
        } else if (k == 0) {
            if (auto s = Sk(-n)) t = 1 + sg * *s;
        } else if (k <= n) {
            auto a = Sk(k), b = Sk(k - n);
            if (a && b) t = *a + sg * *b;
        } else {
            if (auto s = Sk(k)) t = *s;
        }
        if (t) r.T[k] = *t;
    }
    return r;
}

SymmetricSeq two_sided_T(const PowerSeq& P) {
    const int lo = std::min(P.lo(), 0), hi = P.hi();
    std::map<int, rational> T;
    T[0] = P.has(0) ? P(0) : rational(1);
    for (int k = 1; k <= hi; ++k) {
        rational acc = P(k);
        for (int i = 1; i < k; ++i) acc += T[i] * P(k - i);
        T[k] = acc / k;
    }
    for (int k = -1; k >= lo; --k) {
        rational acc = T[0] * P(k);
        for (int j = 1; j <= -k - 1; ++j) acc += T[-j] * P(k + j);
        T[k] = acc / (-k);
    }
    std::vector<rational> v;
    for (int k = lo; k <= hi; ++k) v.push_back(T[k]);
    return SymmetricSeq(lo, v);
}

SymmetricSeq two_sided_symmetric(const PowerSeq& P, int n, int m) {
    auto T = two_sided_T(P);
    const int d = m - n;
    const rational sg = d % 2 ? -1 : 1;
    // S_k needs T_{k-d} when k <= d
    int lo = T.lo() + std::max(d, 0);
    lo = std::min(lo, 1);
    std::vector<rational> v;
    for (int k = lo; k <= T.hi(); ++k) {
        rational g = k < 0 ? rational(0) : k == 0 ? rational(1) : T(k);
        if (k <= d) g += sg * T(k - d);
        v.push_back(g);
    }
    return SymmetricSeq(lo, v);
}

rational hankel_w(const SymmetricSeq& S, int n, int w) {
    // w = n*k + r with 0 <= r < n
    int k = w >= 0 ? w / n : -((-w + n - 1) / n);
    int r = w - n * k;
    std::vector<std::vector<rational>> m;
    for (int o = 0; o <= n; ++o) {
        if (o == n - r) continue;
        std::vector<rational> row;
        for (int j = 0; j < n; ++j) row.push_back(S(k + o - j));
        m.push_back(row);
    }
    return det(m);
}

rational hankel_ratio(const SymmetricSeq& S, int n, int k, int r) {
    rational base = hankel_w(S, n, n * k);
    if (base == 0) throw error(errc::singular_base, "W_" + std::to_string(n * k) + " = 0");
    return hankel_w(S, n, n * k + r) / base;
}

rational OddPowerSeq::g(int idx) const {
    if (idx < 1 || idx % 2 == 0) return 0;
    size_t t = size_t(idx / 2);
    if (t >= G.size()) throw error(errc::precondition_violated, "G_" + std::to_string(idx) + " outside window");
    return G[t];
}

rational OddPowerSeq::V(int idx) const {
    if (idx == 0) return 1;
    rational g1 = G.at(0), acc = 0;
    for (int l = 1; l <= idx; l += 2) acc += g(l) * pw(g1, idx - l);
    return acc;
}

OddPowerSeq odd_g_sequence(const std::vector<rational>& odd_p) {
    OddPowerSeq r;
    r.P = odd_p;
    const int T = int(odd_p.size()) - 1;
    if (T < 0) return r;
    r.G.resize(T + 1);
    r.G[0] = -odd_p[0];
    // Z_s: multisets of odd parts in [3, s-3] summing to s, multinomial weight
    auto Z = [&](int s) {
        rational acc = 0;
        std::vector<int> mult(s + 1, 0);
        std::function<void(int, int)> rec = [&](int part, int left) {
            if (left == 0) {
                int tot = 0;
                rational w = 1;
                for (int p = 3; p <= s - 3; p += 2)
                    if (mult[p]) {
                        tot += mult[p];
                        w *= pw(r.G[p / 2], mult[p]) / fact(mult[p]);
                    }
                acc += w * fact(tot);
                return;
            }
            if (part < 3) return;
            for (int c = left / part; c >= 0; --c) {
                mult[part] = c;
                rec(part - 2, left - c * part);
            }
            mult[part] = 0;
        };
        int top = s - 3;
        if (top % 2 == 0) --top;
        rec(top, s);
        return acc;
    };
    const rational& P1 = odd_p[0];
    for (int t = 1; t <= T; ++t) {
        const int e = 2 * t + 1;
        rational v = (pw(P1, e) - odd_p[t]) / e;
        rational corr = 0;
        for (int j = 1; j <= t - 3; ++j) corr += rational(2 * j + 1) * r.G[j] * Z(2 * t - 2 * j);
        r.G[t] = v - corr / e;
    }
    return r;
}

int odd_window(int n) { return 2 * n + 1; }

// even n: size n/2, entries G_{n-1+2i-2j}, last column V_{2i+1}
// odd n: size (n+1)/2, entries G_{n-2+2i-2j}, last column V_{2i}
static rational odd_u(const OddPowerSeq& G, int n, int which) {
    const bool even = n % 2 == 0;
    const int sz = even ? n / 2 : (n + 1) / 2;
    auto entry = [&](int i, int j) -> rational {
        if (j == sz - 1) return even ? G.V(2 * i + 1) : G.V(2 * i);
        if (j == 0 && which > 0) return G.g(even ? n + 1 + 2 * i : n + 2 * i);
        int idx = even ? n - 1 + 2 * i - 2 * j : n - 2 + 2 * i - 2 * j;
        return idx <= 1 ? rational(0) : G.g(idx);
    };
    std::vector<std::vector<rational>> m(sz, std::vector<rational>(sz));
    for (int i = 0; i < sz; ++i) {
        int ri = (which == 4 && i == sz - 1) ? sz : i;
        for (int j = 0; j < sz; ++j) m[i][j] = entry(ri, j);
    }
    // a single column is both the first and the V column
    if (sz == 1 && which > 0) {
        int ri = which == 4 ? 1 : 0;
        m[0][0] = G.g(even ? n + 1 + 2 * ri : n + 2 * ri);
    }
    return det(m);
}

rational odd_square_recovery(const OddPowerSeq& G, int n) {
    if (n == 1) return G.G.at(0) * G.G.at(0);
    rational u0 = odd_u(G, n, 0);
    if (u0 == 0) throw error(errc::singular_base, "U_{n,0} = 0");
    rational g1 = G.G.at(0);
    return g1 * g1 + 2 * odd_u(G, n, 2) / u0;
}

rational odd_square_squared(const OddPowerSeq& G, int n) {
    if (n == 1) return pw(G.G.at(0), 4);
    rational u0 = odd_u(G, n, 0);
    if (u0 == 0) throw error(errc::singular_base, "U_{n,0} = 0");
    rational g1 = G.G.at(0);
    return pw(g1, 4) + 4 * odd_u(G, n, 4) / u0;
}

rational check_6_10_8(const Side& A, const Side& B) {
    if (A.size() != 3 || B.size() != 3) throw error(errc::precondition_violated, "need |A| = |B| = 3");
    auto P = [&](int k) -> rational { return extended_power_sum(A, k) - extended_power_sum(B, k); };
    std::string bad;
    for (int k : {1, 2, 4})
        if (P(k) != 0) bad += (bad.empty() ? "" : ",") + std::string("P") + std::to_string(k);
    if (P(3) == 0) bad += (bad.empty() ? "" : ",") + std::string("P3=0");
    if (!bad.empty()) throw error(errc::precondition_violated, "6-10-8 precondition: " + bad);
    return 64 * P(6) * P(10) - 45 * P(8) * P(8);
}

} // namespace gpte
