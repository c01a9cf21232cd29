#pragma once
// power sums <-> elementary symmetric functions, and the generalized forms

#include "gpte/core.hpp"

#include <map>
#include <optional>
#include <vector>

namespace gpte {

// P_k over a contiguous index window lo..hi; P_0 is the product (or the
// product ratio in the two-sided case)
class PowerSeq {
public:
    PowerSeq() = default;
    PowerSeq(int lo, std::vector<rational> vals) : lo_(lo), v_(std::move(vals)) {}
    // P_1..P_K from a plain list
    static PowerSeq positive(std::vector<rational> p1k) { return PowerSeq(1, std::move(p1k)); }

    int lo() const { return lo_; }
    int hi() const { return lo_ + int(v_.size()) - 1; }
    bool has(int k) const { return k >= lo_ && k <= hi(); }
    const rational& operator()(int k) const;
    rational& at(int k);

private:
    int lo_ = 1;
    std::vector<rational> v_;
};

// one side: P_k = sum v^k for lo..hi, P_0 = product
PowerSeq power_seq(const Side& s, int lo, int hi);
// two sides: P_k = sum a^k - sum b^k, P_0 = -prod b / prod a
PowerSeq two_sided_power_seq(const Side& a, const Side& b, int lo, int hi);

// S_k indexed from lo; S_0 = 1 in the plain forms
class SymmetricSeq {
public:
    SymmetricSeq() = default;
    SymmetricSeq(int lo, std::vector<rational> vals) : lo_(lo), v_(std::move(vals)) {}
    int lo() const { return lo_; }
    int hi() const { return lo_ + int(v_.size()) - 1; }
    bool has(int k) const { return k >= lo_ && k <= hi(); }
    // below a lo of 0 the plain sequence is 0
    rational operator()(int k) const;
    const std::vector<rational>& values() const { return v_; }
    bool operator==(const SymmetricSeq& o) const { return lo_ == o.lo_ && v_ == o.v_; }

private:
    int lo_ = 0;
    std::vector<rational> v_;
};

SymmetricSeq elementary_recursive(const PowerSeq& P);
rational elementary_determinant(const PowerSeq& P, int k);
SymmetricSeq elementary_factorial(const PowerSeq& P);
SymmetricSeq elementary_inclusion_exclusion(const PowerSeq& P);

// P_{n+1} forced by S_{n+1} = 0
rational predict_power_sum(const PowerSeq& P, int n);

// all-integer exponents, one side of n nonzero numbers
struct ExtendedResult {
    SymmetricSeq S;                 // S_k over the supplied window
    std::map<int, rational> T;      // residuals that could be formed
    bool all_zero() const;
};
ExtendedResult extended_elementary(const PowerSeq& P, int n);

// two-sided T_k and S_k = gamma_k + delta_k over the supplied window
SymmetricSeq two_sided_T(const PowerSeq& P);
SymmetricSeq two_sided_symmetric(const PowerSeq& P, int n, int m);

// W_{nk+r}, 0 <= r <= n
rational hankel_w(const SymmetricSeq& S, int n, int w);
// W_{nk+r}/W_{nk}; throws singular_base
rational hankel_ratio(const SymmetricSeq& S, int n, int k, int r);

rational det(std::vector<std::vector<rational>> m);

// odd exponents
struct OddPowerSeq {
    std::vector<rational> P;   // P[t] = P_{2t+1}
    std::vector<rational> G;   // G[t] = G_{2t+1}
    rational g(int idx) const; // G_idx for odd idx, 0 for idx <= 1 handled by caller
    rational V(int idx) const;
};
OddPowerSeq odd_g_sequence(const std::vector<rational>& odd_p);
// sum a_i^2 from G; also (sum a_i^2)^2 via U4
rational odd_square_recovery(const OddPowerSeq& G, int n);
rational odd_square_squared(const OddPowerSeq& G, int n);
// G window needed: G_1..G_{2n+1}
int odd_window(int n);

rational check_6_10_8(const Side& A, const Side& B);

} // namespace gpte
