#pragma once
// interlaced enumeration, integrality testing and back-solving of the remaining block

#include "gpte/bounds.hpp"
#include "gpte/core.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gpte {

enum class SearchMode { Fast, Audit };

const char* mode_name(SearchMode m);
SearchMode parse_mode(std::string_view s);

struct Progress {
    int64_t current = 0;   // last fully searched outer value
    int64_t end = 0;
    std::string timestamp;
};

void save_progress(const Progress& p, const std::string& path);
Progress load_progress(const std::string& path);

struct SearchConfig {
    ExponentSpec spec;
    int64_t max_value = 0;   // inclusive limit on the largest element
    SearchMode mode = SearchMode::Audit;
    // Fast only: largest prime factor allowed in C-divisors; fmax_half uses floor(top/2)
    std::optional<uint64_t> fmax;
    bool fmax_half = false;
    std::optional<BoundTable> bound_table;
    std::optional<ThresholdParams> threshold;
    std::optional<Progress> resume;
    unsigned worker_count = 1;

    std::string progress_path;   // rewritten after each outer value
    std::string timing_log;      // "<value> <iso8601>" appended per outer value
    const std::atomic<bool>* cancel = nullptr;
};

struct SearchStats {
    uint64_t nodes = 0;
    uint64_t leaves = 0;
    uint64_t emitted = 0;
    uint64_t interlace_violations = 0;
    std::vector<GpteSolution> counterexamples;   // verified solutions that do not interlace
    int64_t completed = 0;                        // every outer value <= this is done
    bool cancelled = false;
    bool generic = false;                         // the pruned enumerator was used
};

using SolutionSink = std::function<void(const GpteSolution&)>;

// k = 1..n with n+1 elements per side runs the interlaced engine, everything else the generic one
bool uses_interlaced_engine(const ExponentSpec& spec);

// streams solutions as they are found; with several workers the order is not fixed
SearchStats search(SearchConfig cfg, const SolutionSink& sink);
// collected and sorted by solution_less
std::vector<GpteSolution> search_all(const SearchConfig& cfg, SearchStats* stats = nullptr);

// largest element, then lhs, then rhs
bool solution_less(const GpteSolution& x, const GpteSolution& y);

// merged descending order follows a_{n+1}, b_{n+1}, b_n, a_n, ... with a the side holding the maximum
bool is_interlaced(const GpteSolution& s);

// W-ratio test on the top n+1 interlaced values; returns e_1..e_u of the unknown block on the zero side
std::optional<std::vector<bigint>> integrality_test(const std::vector<bigint>& fixed, const ExponentSpec& spec);

enum class RecoverStatus { Ok, NonSquareDiscriminant, NonIntegerRoot, OutOfRange };
const char* recover_status_name(RecoverStatus s);

struct RecoverResult {
    RecoverStatus status = RecoverStatus::Ok;
    std::vector<bigint> zero_block;    // roots of x^u - e1 x^{u-1} + ...
    std::vector<bigint> other_block;   // from p_k(other) = p_k(zero block) - P_k
    explicit operator bool() const { return status == RecoverStatus::Ok; }
};

// symfuncs = e_1..e_u, power_diff = P_1..P_v (zero-block sums minus other-block sums)
RecoverResult recover_remaining(const std::vector<bigint>& symfuncs, const std::vector<bigint>& power_diff,
                                int other_count, const bigint& lo, const bigint& hi);

struct Census {
    uint64_t total = 0;
    uint64_t coprime_classes = 0;
    uint64_t symmetric = 0;
    uint64_t non_symmetric = 0;
    bool operator==(const Census& o) const {
        return total == o.total && coprime_classes == o.coprime_classes && symmetric == o.symmetric &&
               non_symmetric == o.non_symmetric;
    }
};

Census census(const std::vector<GpteSolution>& sols);

} // namespace gpte
