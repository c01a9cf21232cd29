#include "gpte/core.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace gpte {

const char* errc_name(errc c) {
    switch (c) {
    case errc::zero_with_nonpositive_exponent: return "ZeroWithNonpositiveExponent";
    case errc::zero_element: return "ZeroElement";
    case errc::not_applicable: return "NotApplicable";
    case errc::parse_error: return "ParseError";
    case errc::verification_failed: return "VerificationFailed";
    case errc::singular_base: return "SingularBase";
    case errc::unsupported_gap_pattern: return "UnsupportedGapPattern";
    case errc::precondition_violated: return "PreconditionViolated";
    case errc::unsupported_family: return "UnsupportedFamily";
    case errc::trivial_solution: return "TrivialSolution";
    case errc::out_of_table: return "OutOfTable";
    case errc::no_convergence: return "NoConvergence";
    case errc::unsupported_spec: return "UnsupportedSpec";
    case errc::out_of_domain: return "OutOfDomain";
    case errc::empty_interval: return "EmptyInterval";
    case errc::config_error: return "ConfigError";
    case errc::corrupt_progress_file: return "CorruptProgressFile";
    case errc::degenerate_parameters: return "DegenerateParameters";
    case errc::out_of_positivity_window: return "OutOfPositivityWindow";
    case errc::non_square_seed: return "NonSquareSeed";
    case errc::io_error: return "IoError";
    }
    return "?";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace((unsigned char)s.front())) s.remove_prefix(1);
    while (!s.empty() && std::isspace((unsigned char)s.back())) s.remove_suffix(1);
    return s;
}

ExponentSpec::ExponentSpec(std::vector<int> ks, int side) : k(std::move(ks)), side_size(side) {
    std::sort(k.begin(), k.end());
    if (k.empty()) throw error(errc::unsupported_spec, "empty exponent set");
    if (std::adjacent_find(k.begin(), k.end()) != k.end())
        throw error(errc::parse_error, "repeated exponent");
}

bool ExponentSpec::contains(int e) const { return std::binary_search(k.begin(), k.end(), e); }

bool ExponentSpec::consecutive_from_one() const {
    for (size_t i = 0; i < k.size(); ++i)
        if (k[i] != int(i) + 1) return false;
    return true;
}

ExponentSpec ExponentSpec::negated() const {
    std::vector<int> r;
    for (int e : k) r.push_back(-e);
    return ExponentSpec(r, side_size);
}

std::string ExponentSpec::str() const {
    std::string s;
    for (size_t i = 0; i < k.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(k[i]);
    }
    return s;
}

ExponentSpec ExponentSpec::parse(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && (s[0] == 'k' || s[0] == 'h' || s[0] == 'r') && s[1] == '=') s.remove_prefix(2);
    return ExponentSpec(parse_small_list(s));
}

Side::Side(std::vector<bigint> vals) : v(std::move(vals)) { std::sort(v.begin(), v.end()); }

Side::Side(std::initializer_list<long> vals) {
    for (long x : vals) v.emplace_back(x);
    std::sort(v.begin(), v.end());
}

bool Side::has_zero() const {
    for (auto& x : v)
        if (x == 0) return true;
    return false;
}

std::string Side::str() const {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i].get_str();
    }
    return s;
}

bool Side::operator<(const Side& o) const {
    return std::lexicographical_compare(v.begin(), v.end(), o.v.begin(), o.v.end());
}

std::string GpteSolution::str() const { return "[" + lhs.str() + "]=[" + rhs.str() + "] k=" + spec.str(); }

PowerValue extended_power_sum(const Side& side, int k) {
    if (k <= 0 && side.has_zero())
        throw error(errc::zero_with_nonpositive_exponent, "zero element with exponent " + std::to_string(k));
    if (k == 0) {
        bigint p = 1;
        for (auto& x : side.v) p *= x;
        return PowerValue(p);
    }
    if (k > 0) {
        bigint s = 0, t;
        for (auto& x : side.v) {
            mpz_pow_ui(t.get_mpz_t(), x.get_mpz_t(), (unsigned long)k);
            s += t;
        }
        return PowerValue(s);
    }
    PowerValue s = 0;
    bigint t;
    for (auto& x : side.v) {
        mpz_pow_ui(t.get_mpz_t(), x.get_mpz_t(), (unsigned long)(-k));
        PowerValue q(bigint(1), t);
        q.canonicalize();
        s += q;
    }
    return s;
}

PowerSumVector power_sums(const Side& side, const ExponentSpec& spec) {
    PowerSumVector r;
    r.reserve(spec.k.size());
    for (int e : spec.k) r.push_back(extended_power_sum(side, e));
    return r;
}

bool verify_equal(const Side& lhs, const Side& rhs, const ExponentSpec& spec) {
    for (int e : spec.k)
        if (extended_power_sum(lhs, e) != extended_power_sum(rhs, e)) return false;
    return true;
}

bool verify(const GpteSolution& s) { return !is_trivial(s.lhs, s.rhs) && verify_equal(s.lhs, s.rhs, s.spec); }

bool is_trivial(const Side& lhs, const Side& rhs) { return lhs.v == rhs.v; }

Symmetry classify_symmetry(const GpteSolution& sol) {
    const int n = sol.spec.degree();
    if (!sol.spec.consecutive_from_one() || int(sol.lhs.size()) != n + 1 || int(sol.rhs.size()) != n + 1)
        throw error(errc::not_applicable, "symmetry defined only for ideal PTE with k=1..n");
    const auto& a = sol.lhs.v;
    const auto& b = sol.rhs.v;
    const int m = n + 1;
    if (n % 2) {
        bigint c = a[0] + a[m - 1];
        for (int i = 0; i < m; ++i)
            if (a[i] + a[m - 1 - i] != c || b[i] + b[m - 1 - i] != c) return Symmetry::NonSymmetric;
    } else {
        bigint c = a[0] + b[m - 1];
        for (int i = 0; i < m; ++i)
            if (a[i] + b[m - 1 - i] != c) return Symmetry::NonSymmetric;
    }
    return Symmetry::Symmetric;
}

GpteSolution canonical(GpteSolution s) {
    if (s.rhs < s.lhs) std::swap(s.lhs, s.rhs);
    return s;
}

GpteSolution equivalent_transform(const GpteSolution& sol) {
    if (!sol.spec.consecutive_from_one())
        throw error(errc::not_applicable, "equivalent transform needs k=1..n");
    bigint top = std::max(sol.lhs.max(), sol.rhs.max());
    auto flip = [&](const Side& s) {
        std::vector<bigint> r;
        for (auto& x : s.v) r.push_back(top - x);
        return Side(r);
    };
    return canonical({sol.spec, flip(sol.lhs), flip(sol.rhs)});
}

GpteSolution normalize(const GpteSolution& sol) {
    GpteSolution s = sol;
    if (sol.spec.consecutive_from_one()) {
        bigint lo = std::min(s.lhs.min(), s.rhs.min());
        for (auto* side : {&s.lhs, &s.rhs})
            for (auto& x : side->v) x -= lo;
    }
    bool scale_ok = !(sol.spec.contains(0) && sol.lhs.size() != sol.rhs.size());
    if (scale_ok) {
        bigint g = 0;
        for (auto* side : {&s.lhs, &s.rhs})
            for (auto& x : side->v) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
        if (g > 1)
            for (auto* side : {&s.lhs, &s.rhs})
                for (auto& x : side->v) x /= g;
    }
    return canonical(s);
}

GpteSolution mirror_transform(const GpteSolution& sol) {
    if (sol.lhs.has_zero() || sol.rhs.has_zero()) throw error(errc::zero_element, "mirror needs nonzero elements");
    bigint l = 1;
    for (auto* side : {&sol.lhs, &sol.rhs})
        for (auto& x : side->v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_mpz_t());
    auto inv = [&](const Side& s) {
        std::vector<bigint> r;
        for (auto& x : s.v) r.push_back(l / x);
        return Side(r);
    };
    return canonical({sol.spec.negated(), inv(sol.lhs), inv(sol.rhs)});
}

std::vector<bigint> parse_int_list(std::string_view s) {
    std::vector<bigint> r;
    s = trim(s);
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t c = s.find(',', pos);
        if (c == std::string_view::npos) c = s.size();
        auto tok = trim(s.substr(pos, c - pos));
        if (tok.empty()) throw error(errc::parse_error, "empty list element");
        std::string t(tok);
        if (t[0] == '+') t.erase(0, 1);
        bigint x;
        if (t.empty() || x.set_str(t, 10) != 0) throw error(errc::parse_error, "bad integer '" + std::string(tok) + "'");
        r.push_back(x);
        pos = c + 1;
    }
    return r;
}

std::vector<int> parse_small_list(std::string_view s) {
    std::vector<int> r;
    for (auto& x : parse_int_list(s)) {
        if (!x.fits_sint_p()) throw error(errc::parse_error, "exponent out of range");
        r.push_back(int(x.get_si()));
    }
    return r;
}

std::string format_record(const GpteSolution& s) {
    return "k=" + s.spec.str() + " | " + s.lhs.str() + " | " + s.rhs.str();
}

GpteSolution parse_record_line(std::string_view line) {
    auto h = line.find('#');
    if (h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    auto p1 = line.find('|');
    auto p2 = p1 == std::string_view::npos ? p1 : line.find('|', p1 + 1);
    if (p2 == std::string_view::npos || line.find('|', p2 + 1) != std::string_view::npos)
        throw error(errc::parse_error, "expected 'k=.. | lhs | rhs'");
    auto ks = trim(line.substr(0, p1));
    if (ks.size() < 2 || ks[1] != '=' || (ks[0] != 'k' && ks[0] != 'h' && ks[0] != 'r'))
        throw error(errc::parse_error, "missing k= prefix");
    GpteSolution s;
    s.spec = ExponentSpec::parse(ks);
    s.lhs = Side(parse_int_list(line.substr(p1 + 1, p2 - p1 - 1)));
    s.rhs = Side(parse_int_list(line.substr(p2 + 1)));
    if (s.lhs.size() == s.rhs.size()) s.spec.side_size = int(s.lhs.size());
    return s;
}

} // namespace gpte
