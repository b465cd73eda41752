#pragma once

// Reference-point selection: every training sequence, cluster
// representatives from group-average agglomerative clustering, survivors of
// per-class rank-sum testing with FDR control, or mined patterns.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "refseq/patterns.hpp"
#include "refseq/seqcore.hpp"
#include "refseq/similarity.hpp"

namespace refseq {

struct Reference {
    Sequence sequence;
    std::string provenance;                 // "train:<index>" or "pattern:<ids>"
    std::optional<std::size_t> source;      // index into the candidate list
    std::optional<ClassId> source_class;
};

/// The ordered reference list that defines the feature space.
struct ReferenceSet {
    std::vector<Reference> items;
    std::string method;

    std::size_t size() const noexcept { return items.size(); }
    bool empty() const noexcept { return items.empty(); }
    std::vector<Sequence> sequences() const;
};

/// Raised when a selector legitimately ends up with nothing to return.
class NoReferencesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SelectAll {};
struct SelectGahc {
    std::optional<std::size_t> pointnum;  // default ceil(|train| / 10)
};
struct SelectMht {
    double alpha = 0.05;
    bool include_self = true;  // keep S_k's similarity to itself in Sim+
};
struct SelectPatterns {
    PatternSelection selection = preset_selection(PatternPreset::FSP);
};
using SelectionMethod = std::variant<SelectAll, SelectGahc, SelectMht, SelectPatterns>;

std::string describe(const SelectionMethod& method);

ReferenceSet select_all(std::span<const LabeledSequence> train);

struct GahcMerge {
    std::size_t keep;      // surviving cluster id (smallest member index)
    std::size_t absorbed;  // cluster id merged into `keep`
    double similarity;     // group-average similarity at merge time
};

struct GahcResult {
    std::vector<std::vector<std::size_t>> clusters;  // members ascending, clusters ordered by first member
    std::vector<GahcMerge> merges;
};

/// Group-average agglomeration over a square similarity matrix down to
/// `target` clusters. Cluster similarity is the mean over all cross-member
/// pairs of (sim(a,b) + sim(b,a)) / 2. Ties go to the lexicographically
/// smallest (i, j) cluster pair.
GahcResult gahc_cluster(const SimilarityMatrix& sim, std::size_t target);

ReferenceSet select_gahc(std::span<const Sequence> candidates, const SimilaritySpec& spec, std::size_t pointnum,
                         unsigned threads = 1);
/// Same, with sim(a, b) = evaluate(spec, candidates[a], candidates[b]) precomputed.
ReferenceSet select_gahc(std::span<const Sequence> candidates, const SimilarityMatrix& sim, std::size_t pointnum);

/// Two-sided Mann-Whitney U test p-value. Exact null distribution when the
/// pooled sample has at most 12 values and no ties; otherwise the normal
/// approximation with tie-corrected variance and 0.5 continuity correction.
double mann_whitney_p(std::span<const double> first, std::span<const double> second);

/// Benjamini-Hochberg step-up on ascending p-values: the largest 1-based k
/// with p_k <= alpha * k / m, or 0.
std::size_t bh_select(std::span<const double> sorted_pvalues, double alpha);

struct MhtEntry {
    std::size_t candidate;  // index into the training list
    ClassId cls;
    double p_value;
    std::size_t rank;       // 1-based position in the class's ascending p order
    bool kept;
};

struct MhtReport {
    std::vector<MhtEntry> entries;            // ordered by (class, rank)
    std::map<ClassId, std::size_t> maxindex;  // BH cutoff per class
    std::vector<std::string> notes;
};

/// Per-class hypothesis-testing selection. Throws NoReferencesError when no
/// candidate survives in any class.
std::pair<ReferenceSet, MhtReport> select_mht(std::span<const LabeledSequence> train, const SimilaritySpec& spec, double alpha,
                                              bool include_self = true, unsigned threads = 1);
/// Same, with sim(j, k) = evaluate(spec, train[j], train[k]) precomputed.
std::pair<ReferenceSet, MhtReport> select_mht(std::span<const LabeledSequence> train, const SimilarityMatrix& sim, double alpha,
                                              bool include_self = true, unsigned threads = 1);

/// Dispatches on `method`; `spec` drives the similarity used inside GAHC and
/// MHT and is ignored by the other selectors. `train_sim`, when given, is the
/// precomputed train x train matrix under `spec`.
ReferenceSet select_references(std::span<const LabeledSequence> train, const SelectionMethod& method, const SimilaritySpec& spec,
                               std::size_t num_classes = 0, unsigned threads = 1, const SimilarityMatrix* train_sim = nullptr);

/// candidate, class, p-value, rank, kept; one row per entry.
void write_mht_report_tsv(std::ostream& out, const MhtReport& report);

/// provenance<TAB>space-separated item ids, one reference per line.
void write_references(std::ostream& out, const ReferenceSet& refs, const Alphabet* alphabet = nullptr);

}  // namespace refseq
