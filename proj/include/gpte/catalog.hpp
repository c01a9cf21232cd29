#pragma once
// solution corpus, multigrade chains, primes and parametric families

#include "gpte/core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gpte {

struct SolutionRecord {
    GpteSolution sol;
    std::string tag;   // text after '#', may be empty
    int line = 0;
};

// "k=... | lhs | rhs [# tag]"; throws parse_error, or verification_failed for unequal or trivial sides
SolutionRecord parse_record(std::string_view line);
std::string emit_record(const SolutionRecord& rec);

struct CatalogFailure {
    int line = 0;
    std::string text;
    std::string reason;
};

struct CatalogReport {
    size_t total = 0;
    size_t passed = 0;
    std::vector<CatalogFailure> failed;   // by line
};

// blank lines and lines starting with '#' are skipped
CatalogReport verify_catalog(const std::string& path, unsigned workers = 1);
CatalogReport verify_catalog_lines(const std::vector<std::string>& lines, unsigned workers = 1);
std::vector<SolutionRecord> load_catalog(const std::string& path);

struct Chain {
    ExponentSpec spec;
    std::vector<Side> sides;   // sorted, pairwise distinct
    size_t length() const { return sides.size(); }
};

// groups of at least two distinct sides with identical power sums, longest first
std::vector<Chain> find_chains(const ExponentSpec& spec, const std::vector<Side>& sides);
std::vector<Chain> find_chains(const std::vector<GpteSolution>& sols);

enum class Primality { Composite, Prime, ProbablePrime };

// deterministic below 2^64, 64 Miller-Rabin rounds above
Primality primality(const bigint& v);
bool is_prime_u64(uint64_t v);

struct PrimeReport {
    bool all_prime = false;
    bool probable = false;   // some element above 2^64
    explicit operator bool() const { return all_prime; }
};

// throws not_applicable for nonpositive exponents or negative elements; 0 counts as not prime
PrimeReport is_prime_solution(const GpteSolution& sol);

struct Generated {
    std::string family;
    GpteSolution raw;
    GpteSolution normalized;   // common factor removed
};

// size 4 for h=-1,1,2,3; size 6 uses the h=-1,1,2,3,4,5 companion
Generated gen_choudhry(const bigint& m, const bigint& n, const bigint& p, const bigint& q, int size = 4);
Generated gen_prime_k23(const bigint& m, const bigint& n);
Generated gen_k15(const bigint& r, const bigint& s, const bigint& t);

enum class PellVariant { Halves, Quarters };

// Halves: u <- 7u + 4 sqrt(3u^2 - 11), Quarters: u <- 7u + 4 sqrt(3u^2 - 8)
Generated gen_pell(const bigint& u0, int iterations, PellVariant variant = PellVariant::Halves);
const char* pell_variant_name(PellVariant v);

} // namespace gpte
