#pragma once
// constant-C families and largest-prime-factor pruning

#include "gpte/core.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gpte {

enum class CFamilyKind { PTE, ShiftedConsecutive, GapConsecutive, OddSpaced, None };

const char* family_name(CFamilyKind k);

struct CFamily {
    CFamilyKind kind = CFamilyKind::None;
    int m = 0;   // power of x in the denominator
    int n = 0;   // number of exponents

    bool operator==(const CFamily& o) const { return kind == o.kind && m == o.m && n == o.n; }
};

CFamily family_of(const ExponentSpec& spec);

// C for the given orientation of lhs/rhs (lhs plays a, rhs plays b)
bigint signed_constant_c(const GpteSolution& sol);
// |C|, independent of which side is written first
bigint constant_c(const GpteSolution& sol);

// s = (sum a + sum b)/2, used by the gap family
rational half_sum(const GpteSolution& sol);

struct Residues {
    bigint c;                    // signed C for this orientation
    std::vector<rational> lhs;   // one value per nonzero lhs element
    std::vector<rational> rhs;
    int lhs_sign = -1;           // lhs values are expected to equal lhs_sign * c
    int rhs_sign = 1;
};
// per-element products; PTE-type families give prod(a_j - b_i)/a_j^m [/(s - a_j)],
// the odd family gives the (1/2a^m) prod (a_j + a_i)(a_j - b_i) forms
Residues c_divisibility_residues(const GpteSolution& sol);

// PTE family: every a_i - b_j divides C
bool differences_divide_c(const GpteSolution& sol);

std::vector<std::pair<bigint, unsigned>> factorize(bigint v);
std::string factorization_str(const bigint& v);   // "2^6 * 3^3 * 5^2"

class FactorTable {
public:
    FactorTable() = default;
    explicit FactorTable(std::vector<uint32_t> lpf) : lpf_(std::move(lpf)) {}

    uint64_t limit() const { return lpf_.empty() ? 0 : lpf_.size() - 1; }
    // largest prime factor of v, 1 <= v <= limit
    uint32_t operator[](uint64_t v) const { return lpf_[v]; }
    uint32_t at(uint64_t v) const;

    void save(const std::string& path) const;
    static FactorTable load(const std::string& path);

private:
    std::vector<uint32_t> lpf_;   // index 0 unused
};

FactorTable build_factor_table(uint64_t n);

bool fmax_admissible(const bigint& v, uint64_t fmax, const FactorTable& table);
bool fmax_admissible(int64_t v, uint64_t fmax, const FactorTable& table);

} // namespace gpte
