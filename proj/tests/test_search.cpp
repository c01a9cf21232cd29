#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpte/newton.hpp"
#include "gpte/search.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <set>

using namespace gpte;

static std::vector<bigint> ints(std::vector<long> v) {
    std::vector<bigint> out;
    for (long x : v) out.emplace_back(x);
    return out;
}

static std::set<std::string> keys(const std::vector<GpteSolution>& sols) {
    std::set<std::string> out;
    for (auto& s : sols) out.insert(format_record(canonical(s)));
    return out;
}

static SearchConfig config(std::vector<int> k, int64_t max, SearchMode mode = SearchMode::Audit) {
    SearchConfig c;
    c.spec = ExponentSpec(k);
    c.max_value = max;
    c.mode = mode;
    return c;
}

static errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return errc::io_error;
}

// every sorted m-tuple over [0, max], bucketed by power sums
static void tuples(int m, long max, std::vector<long>& cur, const std::function<void(const std::vector<long>&)>& f) {
    if (int(cur.size()) == m) {
        f(cur);
        return;
    }
    for (long x = cur.empty() ? 0 : cur.back(); x <= max; ++x) {
        cur.push_back(x);
        tuples(m, max, cur, f);
        cur.pop_back();
    }
}

// consecutive specs keep solutions whose smallest element is 0; other specs keep gcd-1 solutions
static std::set<std::string> naive(std::vector<int> k, long max) {
    ExponentSpec spec(k);
    const int m = spec.m();
    const bool pte = spec.consecutive_from_one();
    std::map<std::vector<long long>, std::vector<std::vector<long>>> buckets;
    std::vector<long> cur;
    tuples(m, max, cur, [&](const std::vector<long>& t) {
        std::vector<long long> key;
        for (int e : k) {
            long long s = 0;
            for (long x : t) {
                long long p = 1;
                for (int i = 0; i < e; ++i) p *= x;
                s += p;
            }
            key.push_back(s);
        }
        buckets[key].push_back(t);
    });
    std::set<std::string> out;
    for (auto& [key, group] : buckets)
        for (size_t i = 0; i < group.size(); ++i)
            for (size_t j = i + 1; j < group.size(); ++j) {
                auto& x = group[i];
                auto& y = group[j];
                if (pte && std::min(x[0], y[0]) != 0) continue;
                if (x.back() == y.back()) continue;
                long g = 0;
                for (long v : x) g = std::gcd(g, v);
                for (long v : y) g = std::gcd(g, v);
                if (!pte && g != 1) continue;
                GpteSolution s{spec, Side(ints(x)), Side(ints(y))};
                REQUIRE(verify(s));
                out.insert(format_record(canonical(s)));
            }
    return out;
}

TEST_CASE("integrality_test examples") {
    auto r = integrality_test(ints({18, 17, 16, 14, 10}), ExponentSpec({1, 2, 3, 4}));
    REQUIRE(r);
    CHECK(*r == ints({12, 32}));

    ExponentSpec k7({1, 2, 3, 4, 5, 6, 7});
    auto e = integrality_test(ints({96, 95, 88, 82, 81, 72, 63, 53}), k7);
    REQUIRE(e);
    CHECK(*e == ints({80, 1661, 8050}));
    CHECK_FALSE(integrality_test(ints({96, 95, 88, 82, 81, 72, 63, 54}), k7));

    CHECK(code_of([] { integrality_test(ints({21, 19, 16, 14}), ExponentSpec({1, 2, 4})); }) ==
          errc::unsupported_gap_pattern);
    CHECK(code_of([] { integrality_test(ints({18, 17, 16}), ExponentSpec({1, 2, 3, 4})); }) ==
          errc::precondition_violated);
}

TEST_CASE("integrality_test agrees with the W ratios") {
    auto P = two_sided_power_seq(Side{63, 72, 88, 95}, Side{53, 81, 82, 96}, 1, 7);
    auto T = two_sided_T(P);
    auto e = integrality_test(ints({96, 95, 88, 82, 81, 72, 63, 53}), ExponentSpec({1, 2, 3, 4, 5, 6, 7}));
    REQUIRE(e);
    for (int r = 1; r <= 3; ++r) CHECK(rational((*e)[r - 1]) == hankel_ratio(T, 3, 4, r));
}

TEST_CASE("integrality_test on known solutions") {
    // every audit solution: the top n+1 values pass and return the zero-side block
    for (std::vector<int> k : {std::vector<int>{1, 2, 3}, std::vector<int>{1, 2, 3, 4}}) {
        auto sols = search_all(config(k, 80));
        REQUIRE(!sols.empty());
        ExponentSpec spec(k);
        const int n = spec.degree();
        auto order = interlace_order(spec);
        for (auto& s : sols) {
            const Side& a = s.lhs.max() > s.rhs.max() ? s.lhs : s.rhs;
            const Side& b = s.lhs.max() > s.rhs.max() ? s.rhs : s.lhs;
            std::vector<bigint> fixed;
            for (int i = 0; i <= n; ++i) {
                auto& role = order[i];
                fixed.push_back((role.side == 'a' ? a : b).v[role.index - 1]);
            }
            auto r = integrality_test(fixed, spec);
            REQUIRE(r);
            const Side& z = order.back().side == 'a' ? a : b;
            // unknown zero-side block is the values below the fixed ones, without the final 0
            std::set<int> fixed_idx;
            for (int i = 0; i <= n; ++i)
                if (order[i].side == order.back().side) fixed_idx.insert(order[i].index);
            std::vector<bigint> block;
            for (int idx = 2; idx <= n + 1; ++idx)
                if (!fixed_idx.count(idx)) block.push_back(z.v[idx - 1]);
            bigint e1 = 0;
            for (auto& x : block) e1 += x;
            REQUIRE(!r->empty());
            CHECK((*r)[0] == e1);
        }
    }
}

TEST_CASE("recover_remaining examples") {
    auto r = recover_remaining(ints({12, 32}), ints({9, 75}), 2, 0, 18);
    REQUIRE(r);
    CHECK(Side(r.zero_block) == Side{4, 8});
    CHECK(Side(r.other_block) == Side{1, 2});
    // first-power residue of the other block
    CHECK(r.other_block[0] + r.other_block[1] == 3);

    auto ns = recover_remaining(ints({5, 7}), {}, 0, 0, 100);
    CHECK(ns.status == RecoverStatus::NonSquareDiscriminant);
    CHECK_FALSE(ns);

    auto c = recover_remaining(ints({6, 11, 6}), {}, 0, 0, 100);
    REQUIRE(c);
    CHECK(Side(c.zero_block) == Side{1, 2, 3});

    CHECK(recover_remaining(ints({6, 11, 6}), {}, 0, 0, 2).status == RecoverStatus::OutOfRange);
    // x^2 - 5x + 5: discriminant 5
    CHECK(recover_remaining(ints({5, 5}), {}, 0, 0, 100).status == RecoverStatus::NonSquareDiscriminant);
    // zero block {2, 3} leaves x^2 - 4x + 2 for the other block
    CHECK_FALSE(recover_remaining(ints({5, 6}), ints({1, 1}), 2, 0, 100));
    CHECK(std::string(recover_status_name(RecoverStatus::NonIntegerRoot)) == "NonIntegerRoot");
}

TEST_CASE("examples k=1,2,3 max 22 and k=1,2,4 max 21") {
    auto a = keys(search_all(config({1, 2, 3}, 22)));
    CHECK(a.count("k=1,2,3 | 0,4,7,11 | 1,2,9,10"));
    CHECK(a.count("k=1,2,3 | 0,9,11,22 | 2,4,15,21"));
    SearchStats st;
    auto b = keys(search_all(config({1, 2, 4}, 21), &st));
    CHECK(st.generic);
    CHECK(b.count("k=1,2,4 | 0,7,14,19 | 1,5,16,18"));
    CHECK(b.count("k=1,2,4 | 5,14,14,21 | 6,10,19,19"));
}

TEST_CASE("audit completeness against naive enumeration") {
    for (auto [k, max] : std::vector<std::pair<std::vector<int>, long>>{{{1, 2}, 60}, {{1, 3}, 70}, {{1, 2, 3}, 60}}) {
        auto want = naive(k, max);
        SearchStats st;
        auto got = keys(search_all(config(k, max), &st));
        CHECK(got == want);
        CHECK(!want.empty());
        INFO("k=" << ExponentSpec(k).str());
    }
}

TEST_CASE("generic engine against naive enumeration") {
    for (auto [k, max] : std::vector<std::pair<std::vector<int>, long>>{{{1, 2, 4}, 30}, {{2, 3}, 40}, {{1, 2, 3, 5}, 22}}) {
        SearchStats st;
        auto got = keys(search_all(config(k, max), &st));
        CHECK(st.generic);
        CHECK(got == naive(k, max));
    }
}

TEST_CASE("fast agrees with audit and exceptions on small ranges") {
    for (auto [k, max] : std::vector<std::pair<std::vector<int>, long>>{{{1, 2}, 60}, {{1, 2, 3}, 60}, {{1, 2, 3, 4}, 100}}) {
        auto audit = keys(search_all(config(k, max)));
        auto fast = keys(search_all(config(k, max, SearchMode::Fast)));
        // fast drops candidates only on conjectured bounds; it never adds solutions
        for (auto& s : fast) CHECK(audit.count(s));
        CHECK(fast.size() <= audit.size());
        CHECK(fast.size() * 10 >= audit.size() * 9);
    }
}

TEST_CASE("emission soundness and interlacing") {
    SearchStats st;
    auto sols = search_all(config({1, 2, 3, 4}, 120), &st);
    CHECK(st.emitted == sols.size());
    CHECK(st.interlace_violations == 0);
    CHECK(st.counterexamples.empty());
    for (auto& s : sols) {
        REQUIRE(verify(s));
        REQUIRE_FALSE(is_trivial(s.lhs, s.rhs));
        CHECK(is_interlaced(s));
    }
    CHECK(is_interlaced({ExponentSpec({1, 2, 3}), Side{0, 4, 7, 11}, Side{1, 2, 9, 10}}));
    CHECK_FALSE(is_interlaced({ExponentSpec({1, 2, 3}), Side{0, 1, 7, 11}, Side{2, 4, 9, 10}}));
}

TEST_CASE("fast output is identical across worker counts") {
    auto c1 = config({1, 2, 3, 4}, 150, SearchMode::Fast);
    auto c3 = c1;
    c3.worker_count = 3;
    auto a = search_all(c1), b = search_all(c3);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(format_record(a[i]) == format_record(b[i]));
    auto g1 = config({1, 2, 4}, 24), g3 = g1;
    g3.worker_count = 3;
    CHECK(keys(search_all(g1)) == keys(search_all(g3)));
}

TEST_CASE("fmax monotonicity") {
    auto audit = keys(search_all(config({1, 2, 3, 4}, 200)));
    std::set<std::string> prev;
    for (uint64_t f : {5, 13, 29, 60, 100}) {
        auto c = config({1, 2, 3, 4}, 200, SearchMode::Fast);
        c.fmax = f;
        auto s = keys(search_all(c));
        for (auto& x : prev) CHECK(s.count(x));
        for (auto& x : s) CHECK(audit.count(x));
        prev = s;
    }
    auto half = config({1, 2, 3, 4}, 200, SearchMode::Fast);
    half.fmax_half = true;
    auto h = keys(search_all(half));
    for (auto& x : h) CHECK(audit.count(x));
}

TEST_CASE("progress files") {
    std::string p = "/tmp/gpte_test_progress.txt";
    save_progress({2500, 3000, ""}, p);
    auto q = load_progress(p);
    CHECK(q.current == 2500);
    CHECK(q.end == 3000);
    CHECK(!q.timestamp.empty());
    for (const char* junk : {"hello world\n", "12\n", "5 3\n", "1 2 3\n", "1 x2\n", ""}) {
        std::ofstream(p) << junk;
        CHECK(code_of([&] { load_progress(p); }) == errc::corrupt_progress_file);
    }
    CHECK(code_of([] { load_progress("/nonexistent/progress.txt"); }) == errc::io_error);
}

TEST_CASE("resume yields the same union as an uninterrupted run") {
    auto full = keys(search_all(config({1, 2, 3}, 120)));
    auto low = keys(search_all(config({1, 2, 3}, 70)));
    auto hc = config({1, 2, 3}, 120);
    hc.resume = Progress{70, 120, ""};
    auto high = keys(search_all(hc));
    std::set<std::string> u = low;
    u.insert(high.begin(), high.end());
    CHECK(u == full);
    for (auto& s : high) CHECK(!low.count(s));

    // interrupted by cancellation, then resumed from the written progress file
    std::string pp = "/tmp/gpte_test_resume.txt";
    std::remove(pp.c_str());
    std::atomic<bool> cancel{false};
    auto c = config({1, 2, 3}, 120);
    c.progress_path = pp;
    c.cancel = &cancel;
    std::set<std::string> got;
    size_t seen = 0;
    auto st = search(c, [&](const GpteSolution& s) {
        got.insert(format_record(canonical(s)));
        if (++seen == 100) cancel = true;
    });
    CHECK(st.cancelled);
    auto prog = load_progress(pp);
    CHECK(prog.current == st.completed);
    CHECK(prog.current < 120);
    CHECK(prog.end == 120);
    auto rc = config({1, 2, 3}, 120);
    rc.resume = prog;
    search(rc, [&](const GpteSolution& s) { got.insert(format_record(canonical(s))); });
    CHECK(got == full);

    auto bad = config({1, 2, 3}, 100);
    bad.resume = Progress{50, 120, ""};
    CHECK(code_of([&] { search_all(bad); }) == errc::config_error);
}

TEST_CASE("timing log format") {
    std::string t = "/tmp/gpte_test_timing.txt";
    std::remove(t.c_str());
    auto c = config({1, 2, 3}, 30);
    c.timing_log = t;
    search_all(c);
    std::ifstream in(t);
    std::regex line(R"(^\d+ \d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z?$)");
    int count = 0;
    for (std::string l; std::getline(in, l); ++count) CHECK(std::regex_match(l, line));
    CHECK(count > 0);
}

TEST_CASE("config errors") {
    CHECK(code_of([] { search_all(config({0, 1, 2}, 20)); }) == errc::config_error);
    CHECK(code_of([] { search_all(config({-1, 1}, 20)); }) == errc::config_error);
    CHECK(code_of([] { search_all(config({1, 2}, 0)); }) == errc::config_error);
    CHECK(code_of([] {
              SearchConfig c;
              c.max_value = 10;
              search_all(c);
          }) == errc::config_error);
    CHECK(code_of([] {
              auto c = config({1, 2, 3}, 20);
              c.fmax = 10;
              search_all(c);
          }) == errc::config_error);
    CHECK(code_of([] {
              auto c = config({1, 2, 4}, 20, SearchMode::Fast);
              c.fmax = 10;
              search_all(c);
          }) == errc::config_error);
    CHECK(parse_mode("fast") == SearchMode::Fast);
    CHECK(parse_mode("audit") == SearchMode::Audit);
    CHECK_THROWS_AS(parse_mode("slow"), error);
}

TEST_CASE("census") {
    CHECK(census({}) == Census{0, 0, 0, 0});
    GpteSolution s{ExponentSpec({1, 2, 3}), Side{0, 4, 7, 11}, Side{1, 2, 9, 10}};
    CHECK(census({s}) == Census{1, 1, 1, 0});
    GpteSolution t{ExponentSpec({1, 2, 3}), Side{3, 7, 10, 14}, Side{4, 5, 12, 13}};
    GpteSolution d{ExponentSpec({1, 2, 3}), Side{0, 8, 14, 22}, Side{2, 4, 18, 20}};
    CHECK(census({s, t, d}) == Census{3, 1, 1, 0});
    auto sols = search_all(config({1, 2, 3, 4}, 200));
    auto c = census(sols);
    CHECK(c.total == 1024);
    CHECK(c.coprime_classes == c.symmetric + c.non_symmetric);
    CHECK(c.coprime_classes <= c.total);
}

TEST_CASE("cancel before start stops at once") {
    std::atomic<bool> cancel{true};
    auto c = config({1, 2, 3, 4}, 300);
    c.cancel = &cancel;
    auto st = search(c, [](const GpteSolution&) {});
    CHECK(st.cancelled);
    CHECK(st.completed < 300);
}
