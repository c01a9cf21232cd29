#pragma once
// normalized boundary systems, bound tables, interlacing and threshold windows

#include "gpte/core.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gpte {

using real = boost::multiprecision::mpfr_float;

// 80 digits, or 120 when the spec needs an epsilon element
int default_digits(const ExponentSpec& spec);

// one slot of the descending interlaced order
struct Role {
    char side;   // 'a' or 'b'
    int index;   // 1-based, a_{n+1} is the largest
    bool operator==(const Role& o) const { return side == o.side && index == o.index; }
};

// a_{n+1}, b_{n+1}, b_n, a_n, a_{n-1}, b_{n-1}, ... (2n+2 slots)
std::vector<Role> interlace_order(const ExponentSpec& spec);
std::vector<Role> interlace_order(int n);
std::string role_str(const Role& r);   // "a5"

struct SolverOptions {
    int digits = 0;        // 0 -> default_digits
    int eps_exp = -50;     // epsilon = 10^eps_exp for specs with k <= 0
    int max_starts = 16;
};

// a solved boundary configuration, values listed along interlace_order
struct BoundaryConfig {
    ExponentSpec spec;
    std::vector<real> value;   // 2n+2 entries
    real epsilon;              // 0 for all-positive specs
    int digits = 0;
    int newton_steps = 0;
    int starts = 0;

    real at(char side, int index) const;
    // max over the spec of |sum_a v^k - sum_b v^k| / sum |v^k| (log form for k = 0)
    real residual() const;
};

// pairs equal within sides, top a = 1, smallest element 0 or epsilon
BoundaryConfig doubled_configuration(const ExponentSpec& spec, const SolverOptions& opt = {});
real solve_beta_top_min(const ExponentSpec& spec, int digits = 0);

// b_{n+1} fixed, b_n free, remaining pairs doubled
BoundaryConfig next_configuration(const ExponentSpec& spec, const real& beta_top,
                                  const SolverOptions& opt = {});
real solve_beta_next_min(const ExponentSpec& spec, const real& beta_top, int digits = 0);

// b_{n+1}, b_n fixed, a_n and a_{n-1} free singles, epsilon at the bottom
BoundaryConfig alpha_max_configuration(const ExponentSpec& spec, const real& beta_top,
                                       const real& beta_next, const SolverOptions& opt = {});

struct BoundTable {
    ExponentSpec spec;
    int step = 1;   // grid step in units of 1e-4
    std::vector<std::pair<int, int64_t>> entries;   // (beta*1e4, floor(bound*1e6)), ascending

    int first_key() const { return entries.empty() ? 0 : entries.front().first; }
    int last_key() const { return entries.empty() ? 0 : entries.back().first; }
    std::optional<int64_t> entry(int key) const;
    // safe lower bound of b_n/a_{n+1} for b_{n+1}/a_{n+1} = num/den: the entry of the
    // first grid point >= num/den; nullopt above the last grid point
    std::optional<int64_t> lookup(const bigint& num, const bigint& den) const;

    std::string str() const;
    void save(const std::string& path) const;
    static BoundTable load(const std::string& path);
    static BoundTable parse(const std::string& text);
};

// res is the grid step: 0.0001 or 0.001
BoundTable build_bound_table(const ExponentSpec& spec, double res = 1e-4, int digits = 0,
                             unsigned threads = 1);

// open/closed interval on the next element's k-th power
struct PowerInterval {
    rational low, high;
    bool low_closed = false;
    bool high_closed = false;
    bool contains(const rational& x) const {
        return (low_closed ? x >= low : x > low) && (high_closed ? x <= high : x < high);
    }
};

// fixed = values already assigned along interlace_order (a_{n+1} first)
PowerInterval conservative_interval(const ExponentSpec& spec, int k, const std::vector<bigint>& fixed);

struct ThresholdRow {
    int depth;      // prefix length along interlace_order
    int ki;
    int lower;      // strict lower bound: 1 at odd depth, 0 at even depth
    real ceiling;
    long double ceiling_ld;
};

struct ThresholdParams {
    ExponentSpec spec;
    BoundaryConfig config;
    std::vector<real> alpha;   // alpha_n, alpha_{n-2}, ...
    std::vector<real> beta;    // beta_{n+1}, beta_{n-1}, ...
    std::vector<ThresholdRow> rows;

    const ThresholdRow* row(int depth, int ki) const;
    int max_depth() const;
};

ThresholdParams threshold_params(const ExponentSpec& spec, const SolverOptions& opt = {});

// signed partial sum (positive orientation) of the first depth values at exponent k
bigint threshold_partial(int depth, int k, const std::vector<bigint>& prefix);

// D(ki)^kn / D(kn)^ki
long double threshold_ratio(const bigint& d_ki, const bigint& d_kn, int ki, int kn);

// every row with depth <= prefix.size() holds on the prefix
bool threshold_check(const ThresholdParams& p, const std::vector<bigint>& prefix);
// rows at exactly this depth, from precomputed partial sums indexed like spec.k
bool threshold_check_depth(const ThresholdParams& p, int depth, const std::vector<bigint>& partial);

} // namespace gpte
