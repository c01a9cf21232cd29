#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpte/newton.hpp"

#include <algorithm>
#include <map>
#include <random>

using namespace gpte;

static PowerSeq pos(std::vector<long> v) {
    std::vector<rational> r;
    for (long x : v) r.emplace_back(x);
    return PowerSeq::positive(r);
}

// brute-force e_k with sign: S_k = (-1)^k e_k
static std::vector<rational> brute_s(const std::vector<bigint>& a, int K) {
    std::vector<rational> e(K + 1, 0);
    e[0] = 1;
    for (auto& x : a)
        for (int k = K; k >= 1; --k) e[k] += e[k - 1] * rational(x);
    for (int k = 1; k <= K; k += 2) e[k] = -e[k];
    return e;
}

static std::vector<bigint> rand_set(std::mt19937_64& rng, int n, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    std::vector<bigint> r;
    for (int i = 0; i < n; ++i) r.push_back(d(rng));
    return r;
}

TEST_CASE("recursive form") {
    auto S = elementary_recursive(pos({3, 5}));
    CHECK(S(1) == -3);
    CHECK(S(2) == 2);
    auto S3 = elementary_recursive(pos({6, 14, 36}));
    CHECK(S3(1) == -6);
    CHECK(S3(2) == 11);
    CHECK(S3(3) == -6);
}

TEST_CASE("determinant form") {
    CHECK(elementary_determinant(pos({3, 5}), 2) == 2);
    CHECK(elementary_determinant(pos({6, 14, 36}), 3) == -6);
}

TEST_CASE("factorial and inclusion-exclusion forms") {
    auto F = elementary_factorial(pos({3, 5}));
    CHECK(F(1) == -3);
    CHECK(F(2) == 2);
    auto F2 = elementary_factorial(power_seq(Side{2, 2, 2}, 1, 3));
    CHECK(F2(1) == -6);
    CHECK(F2(2) == 12);
    CHECK(F2(3) == -8);
    auto D = elementary_inclusion_exclusion(power_seq(Side{1, 2, 3, 4}, 1, 4));
    CHECK(D(4) == 24);
    auto D2 = elementary_inclusion_exclusion(pos({3, 5}));
    CHECK(D2(1) == -3);
    CHECK(D2(2) == 2);
}

TEST_CASE("S7 vanishes for six numbers, all forms") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 100; ++it) {
        auto a = rand_set(rng, 6, -9, 9);
        auto P = power_seq(Side(a), 1, 7);
        CHECK(elementary_recursive(P)(7) == 0);
        CHECK(elementary_factorial(P)(7) == 0);
        CHECK(elementary_inclusion_exclusion(P)(7) == 0);
        CHECK(elementary_determinant(P, 7) == 0);
    }
}

TEST_CASE("property: four-form agreement") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> len(1, 8);
    for (int it = 0; it < 500; ++it) {
        int n = len(rng);
        auto a = rand_set(rng, n, -20, 20);
        int K = std::min(8, n + 1);
        auto P = power_seq(Side(a), 1, K);
        auto R = elementary_recursive(P);
        auto oracle = brute_s(a, K);
        CHECK(elementary_factorial(P) == R);
        CHECK(elementary_inclusion_exclusion(P) == R);
        for (int k = 1; k <= K; ++k) {
            CHECK(R(k) == oracle[k]);
            if (k <= 6) CHECK(elementary_determinant(P, k) == R(k));
        }
    }
}

TEST_CASE("property: S_k vanishes above n") {
    std::mt19937_64 rng(3);
    for (int it = 0; it < 500; ++it) {
        int n = 1 + it % 6;
        auto a = rand_set(rng, n, -15, 15);
        auto S = elementary_recursive(power_seq(Side(a), 1, n + 3));
        for (int k = n + 1; k <= n + 3; ++k) CHECK(S(k) == 0);
    }
}

TEST_CASE("predict power sum") {
    auto P = power_seq(Side{1, 2, 3, 4, 5, 6}, 1, 6);
    CHECK(predict_power_sum(P, 6) == 376761);
    CHECK(predict_power_sum(pos({7}), 1) == 49);
    // equal k=1..6 data forces equal P7
    auto a = power_seq(Side{0, 18, 19, 50, 56, 79, 81}, 1, 6);
    auto b = power_seq(Side{1, 11, 30, 39, 68, 70, 84}, 1, 6);
    CHECK(predict_power_sum(a, 6) == predict_power_sum(b, 6));
}

// explicit polynomial identities as independent oracles
// the P1 P6 term carries a plus sign (a minus sign does not vanish on data)
static rational p40(const PowerSeq& P) {
    return P(1) * P(1) * P(1) * P(1) / 24 - P(1) * P(1) * P(2) / 4 + P(1) * P(3) / 3 + P(2) * P(2) / 8 - P(4) / 4;
}

static rational s7p0(const PowerSeq& P) {
    auto p = [&](int k) { return P(k); };
    auto q = [](const rational& x, int e) {
        rational r = 1;
        for (int i = 0; i < e; ++i) r *= x;
        return r;
    };
    return -q(p(1), 7) / 5040 + q(p(1), 5) * p(2) / 240 - q(p(1), 3) * q(p(2), 2) / 48 + p(1) * q(p(2), 3) / 48 -
           q(p(1), 4) * p(3) / 72 + q(p(1), 2) * p(2) * p(3) / 12 - q(p(2), 2) * p(3) / 24 - p(1) * q(p(3), 2) / 18 +
           q(p(1), 3) * p(4) / 24 - p(1) * p(2) * p(4) / 8 + p(3) * p(4) / 12 - q(p(1), 2) * p(5) / 10 +
           p(2) * p(5) / 10 + p(1) * p(6) / 6 - p(7) / 7;
}

TEST_CASE("property: closed-form P40 and S7P0 identities") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 500; ++it) {
        auto a3 = rand_set(rng, 3, -30, 30);
        CHECK(p40(power_seq(Side(a3), 1, 4)) == 0);
        auto a6 = rand_set(rng, 6, -30, 30);
        CHECK(s7p0(power_seq(Side(a6), 1, 7)) == 0);
    }
}

TEST_CASE("property: P6 eliminated through the S7 relation") {
    std::mt19937_64 rng(23);
    int done = 0;
    while (done < 500) {
        auto a = rand_set(rng, 6, -25, 25);
        auto P = power_seq(Side(a), 1, 7);
        if (P(1) == 0) continue;
        ++done;
        // the only P6 term is P1 P6 / 6
        rational rest = s7p0(P) - P(1) * P(6) / 6;
        CHECK(-6 * rest / P(1) == P(6));
    }
    // with P1 = 0 the relation loses P6, so h=1,2,3,4,5,7 admits P6 != P6'
    Side A{-71, -44, -20, 31, 37, 67}, B{-68, -53, 1, 4, 55, 61};
    CHECK(verify_equal(A, B, ExponentSpec({1, 2, 3, 4, 5, 7})));
    CHECK(extended_power_sum(A, 1) == 0);
    CHECK(extended_power_sum(A, 6) != extended_power_sum(B, 6));
}

TEST_CASE("extended elementary: all-integer exponents") {
    auto r = extended_elementary(power_seq(Side{-7, 14, 28, 70, 84, 105}, -1, 5), 6);
    REQUIRE(r.T.count(5));
    CHECK(r.T.at(5) == 0);
    CHECK(r.all_zero());
    auto P = power_seq(Side{1, 2, 3}, 0, 3);
    auto r3 = extended_elementary(P, 3);
    CHECK(r3.T.at(3) == 0);
    CHECK(P(0) - P(1) * P(1) * P(1) / 6 + P(1) * P(2) / 2 - P(3) / 3 == 0);
    auto r1 = extended_elementary(power_seq(Side{5}, -3, 3), 1);
    CHECK(r1.all_zero());
    CHECK_THROWS_AS(extended_elementary(pos({1, 2}), 1), error);
}

TEST_CASE("property: T residuals vanish") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> d(-12, 12);
    for (int it = 0; it < 500; ++it) {
        int n = 1 + it % 6;
        std::vector<bigint> a;
        while ((int)a.size() < n) {
            int v = d(rng);
            if (v) a.push_back(v);
        }
        auto r = extended_elementary(power_seq(Side(a), -n - 2, n + 2), n);
        CHECK(r.T.size() >= size_t(n + 2));
        CHECK(r.all_zero());
    }
}

TEST_CASE("W determinants: worked example") {
    auto P = two_sided_power_seq(Side{63, 72, 88, 95}, Side{53, 81, 82, 96}, 1, 7);
    auto T = two_sided_T(P);
    CHECK(hankel_ratio(T, 3, 4, 1) == 80);
    CHECK(hankel_ratio(T, 3, 4, 2) == 1661);
    CHECK(hankel_ratio(T, 3, 4, 3) == 8050);
    auto P2 = two_sided_power_seq(Side{63, 72, 88, 95}, Side{54, 81, 82, 96}, 1, 7);
    CHECK(hankel_ratio(two_sided_T(P2), 3, 4, 1) == rational(815091, 11000));
    auto P3 = two_sided_power_seq(Side{1, 2, 3}, Side{1, 2, 3}, 1, 7);
    CHECK_THROWS_AS(hankel_ratio(two_sided_T(P3), 3, 4, 1), error);
}

TEST_CASE("property: W ratio law and base product") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> d(1, 12);
    int done = 0;
    while (done < 500) {
        std::vector<bigint> a, b;
        for (int i = 0; i < 3; ++i) a.push_back(d(rng));
        for (int i = 0; i < 4; ++i) b.push_back(d(rng));
        bool disjoint = true;
        for (auto& x : a)
            for (auto& y : b)
                if (x == y) disjoint = false;
        if (!disjoint) continue;
        ++done;
        auto S = two_sided_symmetric(two_sided_power_seq(Side(a), Side(b), 0, 8), 3, 4);
        bigint e1 = a[0] + a[1] + a[2], e2 = a[0] * a[1] + a[0] * a[2] + a[1] * a[2], e3 = a[0] * a[1] * a[2];
        CHECK(hankel_ratio(S, 3, 4, 1) == e1);
        CHECK(hankel_ratio(S, 3, 4, 2) == e2);
        CHECK(hankel_ratio(S, 3, 4, 3) == e3);
        bigint prod = 1;
        for (auto& x : a)
            for (auto& y : b) prod *= x - y;
        CHECK(hankel_w(S, 3, 12) == prod);
    }
}

TEST_CASE("property: W law at negative and small k with the delta terms") {
    std::mt19937_64 rng(78);
    std::uniform_int_distribution<int> d(1, 9);
    for (int it = 0; it < 60; ++it) {
        std::vector<bigint> a, b;
        for (int i = 0; i < 3; ++i) a.push_back(d(rng));
        for (int i = 0; i < 5; ++i) b.push_back(d(rng) + 10);
        auto P = two_sided_power_seq(Side(a), Side(b), -10, 10);
        auto S = two_sided_symmetric(P, 3, 5);
        bigint e1 = a[0] + a[1] + a[2];
        for (int k = -1; k <= 7; ++k) {
            if (hankel_w(S, 3, 3 * k) == 0) continue;
            CHECK(hankel_ratio(S, 3, k, 1) == e1);
        }
        bigint prod = 1;
        for (auto& x : a)
            for (auto& y : b) prod *= x - y;
        CHECK(hankel_w(S, 3, 15) == prod);
    }
}

TEST_CASE("odd G sequence") {
    auto G = odd_g_sequence({3, 9});
    CHECK(G.G[0] == -3);
    CHECK(G.G[1] == 6);
    auto one = odd_g_sequence({5, 125});
    CHECK(one.G[0] == -5);
    CHECK(one.G[1] == 0);
    // G9 and G11 correction terms on {1,2,3}
    std::vector<rational> P;
    for (int k = 1; k <= 17; k += 2) P.push_back(extended_power_sum(Side{1, 2, 3}, k));
    auto g = odd_g_sequence(P);
    auto q = [](const rational& x, int e) {
        rational r = 1;
        for (int i = 0; i < e; ++i) r *= x;
        return r;
    };
    CHECK(g.G[4] == (q(P[0], 9) - P[4]) / 9 - q(g.G[1], 3) / 3);
    CHECK(g.G[5] == (q(P[0], 11) - P[5]) / 11 - q(g.G[1], 2) * g.G[2]);
    CHECK(g.G[6] == (q(P[0], 13) - P[6]) / 13 - (g.G[3] * q(g.G[1], 2) + q(g.G[2], 2) * g.G[1]));
    CHECK(g.G[7] == (q(P[0], 15) - P[7]) / 15 -
                        (q(g.G[1], 5) / 5 + g.G[4] * q(g.G[1], 2) + 2 * g.G[2] * g.G[3] * g.G[1] + q(g.G[2], 3) / 3));
}

static OddPowerSeq g_of(const std::vector<bigint>& a, int n) {
    std::vector<rational> P;
    for (int k = 1; k <= odd_window(n); k += 2) P.push_back(extended_power_sum(Side(a), k));
    return odd_g_sequence(P);
}

TEST_CASE("odd square recovery") {
    CHECK(odd_square_recovery(g_of({1, 2}, 2), 2) == 5);
    CHECK(odd_square_recovery(g_of({3, 9, 21, 21}, 4), 4) == 972);
    CHECK(odd_square_recovery(g_of({7}, 1), 1) == 49);
}

TEST_CASE("property: odd square recovery on random sets") {
    std::mt19937_64 rng(101);
    int checked = 0;
    for (int it = 0; it < 2000 && checked < 500; ++it) {
        int n = 1 + it % 6;
        auto a = rand_set(rng, n, 1, 15);
        auto G = g_of(a, n);
        rational s2 = 0;
        for (auto& x : a) s2 += rational(x * x);
        INFO("n=", n, " set=", Side(a).str());
        try {
            CHECK(odd_square_recovery(G, n) == s2);
            CHECK(odd_square_squared(G, n) == s2 * s2);
            ++checked;
        } catch (const error& e) {
            CHECK(e.code() == errc::singular_base);
        }
    }
    CHECK(checked >= 500);
}

TEST_CASE("6-10-8") {
    CHECK(check_6_10_8(Side{-48, 23, 25}, Side{-47, 15, 32}) == 0);
    CHECK(check_6_10_8(Side{-43, 3, 40}, Side{-45, 8, 37}) == 0);
    CHECK_THROWS_AS(check_6_10_8(Side{1, 2, 3}, Side{1, 2, 3}), error);
    CHECK_THROWS_AS(check_6_10_8(Side{0, 1, 5}, Side{1, 2, 3}), error);
}

TEST_CASE("property: 6-10-8 on h=1,2,4 pairs") {
    // zero-sum triples with equal square sums agree at h=1,2,4
    std::map<long, std::vector<Side>> by_sq;
    for (long a = -60; a <= 60; ++a)
        for (long b = a; b <= 60; ++b) {
            long c = -a - b;
            if (c < b || c > 60) continue;
            by_sq[a * a + b * b + c * c].push_back(Side{a, b, c});
        }
    std::mt19937_64 rng(608);
    std::vector<std::pair<Side, Side>> pairs;
    for (auto& [sq, v] : by_sq)
        for (size_t i = 0; i < v.size(); ++i)
            for (size_t j = i + 1; j < v.size(); ++j) pairs.emplace_back(v[i], v[j]);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    int done = 0;
    for (auto& [A, B] : pairs) {
        if (extended_power_sum(A, 3) == extended_power_sum(B, 3)) continue;
        REQUIRE(verify_equal(A, B, ExponentSpec({1, 2, 4})));
        CHECK(check_6_10_8(A, B) == 0);
        if (++done == 600) break;
    }
    CHECK(done == 600);
}
