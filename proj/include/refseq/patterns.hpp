#pragma once

// Frequent-subsequence mining (prefix-projected growth) and the constraint
// catalog used to turn mined patterns into reference sequences: gap, minsup,
// the discriminative functions DF1-DF6, uniqueness, closedness, redundancy
// and interestingness.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refseq/seqcore.hpp"
#include "refseq/similarity.hpp"

namespace refseq {

struct Pattern {
    Sequence items;

    std::size_t size() const noexcept { return items.size(); }
    friend bool operator==(const Pattern&, const Pattern&) = default;
};

/// Canonical pattern order: shorter first, then lexicographic by item id.
bool canonical_less(const Pattern& a, const Pattern& b) noexcept;

/// Per-class statistics of one pattern. Every vector is indexed by ClassId.
struct PatternStats {
    std::vector<std::size_t> class_size;
    std::vector<std::size_t> count;                      // sequences containing the pattern
    std::vector<double> support;                         // count / class_size (0 for empty classes)
    std::vector<std::size_t> occount;                    // total non-overlapping occurrences
    std::vector<std::vector<std::size_t>> seq_occount;   // per sequence, in class order
    std::vector<double> mean_window;                     // over supporting sequences, 0 if none
    std::vector<double> cohesion;                        // |t| / mean_window, 0 if unsupported
    std::vector<double> interest;                        // support * cohesion

    std::size_t num_classes() const noexcept { return class_size.size(); }
    std::size_t total_count() const noexcept;
    std::size_t total_size() const noexcept;
    /// count_c / count_D; 0 when the pattern occurs nowhere.
    double confidence(ClassId c) const;
    /// Support in the union of every class except `c`.
    double contrast_support(ClassId c) const;
    /// occount / |D| for class `c` alone and for the rest.
    double occ(ClassId c) const;
    double contrast_occ(ClassId c) const;
};

struct MinedPattern {
    Pattern pattern;
    PatternStats stats;
};

struct MiningConfig {
    double minsup = 0.3;
    std::size_t maxsize = 3;
    std::optional<GapBounds> gap;

    void validate() const;
};

/// Computes all statistics of `pattern` over `train`. When `gap` is set,
/// containment (and hence count/support) is gap-constrained; occurrence
/// counts and windows always use plain containment.
PatternStats compute_stats(const Pattern& pattern, std::span<const LabeledSequence> train, std::size_t num_classes,
                           const std::optional<GapBounds>& gap = std::nullopt);

/// Every pattern of length <= maxsize whose support reaches minsup in at
/// least one class, with full statistics, in canonical order.
/// `num_classes` = 0 infers it as 1 + the largest label.
std::vector<MinedPattern> mine_frequent(std::span<const LabeledSequence> train, const MiningConfig& cfg,
                                        std::size_t num_classes = 0, unsigned threads = 1);

enum class DiscriminativeKind { DF1, DF2, DF3, DF4, DF5, DF6 };

std::string_view to_string(DiscriminativeKind kind);

/// One discriminative constraint. `threshold` is minsup (DF1), mincount
/// (DF2), minsupdiff (DF3), min F-ratio (DF4), minGR (DF5) or the chi-squared
/// significance level (DF6). `min_sig` is DF5's conditional-redundancy bound.
/// `target` is c1; the contrast c2 is every other class. Selection tries
/// every class as the target when it is unset.
struct DiscriminativeSpec {
    DiscriminativeKind kind = DiscriminativeKind::DF3;
    double threshold = 0.0;
    std::optional<double> min_sig;
    std::optional<ClassId> target;

    static DiscriminativeSpec df1(double minsup);
    static DiscriminativeSpec df2(double mincount);
    static DiscriminativeSpec df3(double minsupdiff);
    static DiscriminativeSpec df4(double min_fratio);
    static DiscriminativeSpec df5(double min_gr, double min_sig = 0.0);
    static DiscriminativeSpec df6(double alpha = 0.05);

    void validate() const;
};

struct DiscriminativeResult {
    double score = 0.0;
    bool passes = false;
};

/// Growth rate sup_c1 / sup_c2; +inf when only the target class supports the
/// pattern, 0 when neither does.
double growth_rate(const PatternStats& stats, ClassId target);

/// Pearson chi-squared statistic of the class x {contains, lacks} table over
/// non-empty classes, with its upper-tail p-value (df = classes - 1).
struct ChiSquared {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t dof = 0;
};
ChiSquared chi_squared_containment(std::span<const std::size_t> count, std::span<const std::size_t> class_size);

/// Evaluates one discriminative function. `mined` supplies the candidate
/// sub-patterns for DF5's conditional redundancy and is ignored otherwise.
DiscriminativeResult discriminative_eval(const Pattern& pattern, const PatternStats& stats, const DiscriminativeSpec& spec,
                                         std::span<const MinedPattern> mined = {});

struct Interestingness {
    double support = 0.0;
    double cohesion = 0.0;
    double interest = 0.0;
};

Interestingness interestingness(const Pattern& pattern, std::span<const Sequence> class_seqs);

struct StructuralChecks {
    bool uniqueness = false;
    bool closedness = false;
    bool redundancy = false;

    bool any() const noexcept { return uniqueness || closedness || redundancy; }
};

/// Conjunction of the requested structural constraints. Closedness is judged
/// against `all` (the complete mined set). Redundancy compares conf(t)
/// against the prior of `target`, or of the class where the pattern has the
/// highest support when no target is given.
bool structural_filters(const MinedPattern& p, std::span<const MinedPattern> all, StructuralChecks which,
                        std::optional<ClassId> target = std::nullopt);

/// A full constraint stack: mining parameters, discriminative functions
/// (all must pass for a common target class), structural checks and an
/// optional interestingness floor.
struct PatternSelection {
    std::string name = "custom";
    MiningConfig mining;
    std::vector<DiscriminativeSpec> discriminative;
    StructuralChecks structural;
    std::optional<double> minint;
    /// The similarity the originating method pairs with these patterns.
    SimilaritySpec similarity = SimilaritySpec::of(SimilarityKind::SF1);
};

enum class PatternPreset { FSP, DSP, CDSPM, SCIP, FEATUREMINE, PSO_AB, OCCURRENCE, CONTRAST, GAPPED };

std::string_view to_string(PatternPreset preset);
PatternPreset parse_pattern_preset(std::string_view name);
PatternSelection preset_selection(PatternPreset preset);

/// Mines and filters. An empty result is not an error.
std::vector<MinedPattern> select_pattern_references(std::span<const LabeledSequence> train, const PatternSelection& selection,
                                                    std::size_t num_classes = 0, unsigned threads = 1);

/// Tab-separated export: header `pattern\tlength` followed by
/// count/support/occount/cohesion/interest columns for every class.
void write_patterns_tsv(std::ostream& out, std::span<const MinedPattern> patterns, const Alphabet& alphabet,
                        std::span<const std::string> class_names);

}  // namespace refseq
