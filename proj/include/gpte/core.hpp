#pragma once
// exact types and verification for equal-power-sum systems

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gpte {

using bigint = mpz_class;
using rational = mpq_class;
using PowerValue = mpq_class;
using PowerSumVector = std::vector<rational>;

enum class errc {
    zero_with_nonpositive_exponent,
    zero_element,
    not_applicable,
    parse_error,
    verification_failed,
    singular_base,
    unsupported_gap_pattern,
    precondition_violated,
    unsupported_family,
    trivial_solution,
    out_of_table,
    no_convergence,
    unsupported_spec,
    out_of_domain,
    empty_interval,
    config_error,
    corrupt_progress_file,
    degenerate_parameters,
    out_of_positivity_window,
    non_square_seed,
    io_error,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
public:
    error(errc c, const std::string& what) : std::runtime_error(what), code_(c) {}
    errc code() const noexcept { return code_; }
private:
    errc code_;
};

struct ExponentSpec {
    std::vector<int> k;   // ascending, distinct
    int side_size = 0;    // 0 -> n+1

    ExponentSpec() = default;
    explicit ExponentSpec(std::vector<int> ks, int side = 0);

    int degree() const { return int(k.size()); }
    int m() const { return side_size ? side_size : degree() + 1; }
    int min_k() const { return k.front(); }
    int max_k() const { return k.back(); }
    bool contains(int e) const;
    bool has_nonpositive() const { return k.front() <= 0; }
    bool all_positive() const { return k.front() > 0; }
    // k = 1..n
    bool consecutive_from_one() const;
    ExponentSpec negated() const;
    std::string str() const;   // "1,2,3"
    static ExponentSpec parse(std::string_view s);

    bool operator==(const ExponentSpec& o) const { return k == o.k; }
};

struct Side {
    std::vector<bigint> v;   // ascending

    Side() = default;
    explicit Side(std::vector<bigint> vals);
    Side(std::initializer_list<long> vals);

    size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }
    const bigint& operator[](size_t i) const { return v[i]; }
    const bigint& min() const { return v.front(); }
    const bigint& max() const { return v.back(); }
    bool has_zero() const;
    std::string str() const;   // "0,4,7,11"

    bool operator==(const Side& o) const { return v == o.v; }
    bool operator<(const Side& o) const;
};

struct GpteSolution {
    ExponentSpec spec;
    Side lhs, rhs;

    std::string str() const;
};

// k = 0 means the product
PowerValue extended_power_sum(const Side& side, int k);
PowerSumVector power_sums(const Side& side, const ExponentSpec& spec);

bool verify_equal(const Side& lhs, const Side& rhs, const ExponentSpec& spec);
bool verify(const GpteSolution& s);

bool is_trivial(const Side& lhs, const Side& rhs);

enum class Symmetry { Symmetric, NonSymmetric };
Symmetry classify_symmetry(const GpteSolution& sol);

// lhs <= rhs lexicographically
GpteSolution canonical(GpteSolution s);

GpteSolution equivalent_transform(const GpteSolution& sol);
GpteSolution normalize(const GpteSolution& sol);
GpteSolution mirror_transform(const GpteSolution& sol);

// record line: "k=1,2,3 | 0,4,7,11 | 1,2,9,10"
std::string format_record(const GpteSolution& s);
GpteSolution parse_record_line(std::string_view line);   // no verification
std::vector<bigint> parse_int_list(std::string_view s);
std::vector<int> parse_small_list(std::string_view s);

std::string_view trim(std::string_view s);

} // namespace gpte
