#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refseq/seqcore.hpp"

namespace refseq {

enum class SimilarityKind {
    SF1,          // containment indicator
    SF2,          // approximate contiguous match (edit distance within gamma*|t|)
    SF3,          // cohesion of t in s
    SF4,          // occurrence count
    SF5,          // non-overlapping occurrence count
    SF6,          // LCS / max length
    JACCARD_LCS,  // LCS / (|s| + |t| - LCS)
    SSK,          // normalized string subsequence kernel
    LCS_MIN,      // LCS / min length
};

std::string_view to_string(SimilarityKind kind);
/// Accepts the canonical names ("sf1" .. "sf6", "jaccard", "ssk", "lcs-min")
/// case-insensitively, plus a few aliases.
SimilarityKind parse_similarity_kind(std::string_view name);

/// Which similarity to evaluate plus its parameters.
///
/// `gamma` is only meaningful for SF2, `lambda` and `n` only for SSK. Use
/// the named constructors; they enforce the parameter ranges.
struct SimilaritySpec {
    SimilarityKind kind = SimilarityKind::JACCARD_LCS;
    std::optional<double> gamma;
    std::optional<double> lambda;
    std::optional<std::size_t> n;

    static SimilaritySpec of(SimilarityKind kind);
    static SimilaritySpec sf2(double gamma);
    static SimilaritySpec ssk(std::size_t n = 1, double lambda = 0.5);

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
    /// True for the kinds whose value does not depend on argument order.
    bool symmetric() const noexcept;
    std::string describe() const;

    friend bool operator==(const SimilaritySpec&, const SimilaritySpec&) = default;
};

std::size_t lcs_len(SequenceView s, SequenceView t);
std::size_t edit_distance(SequenceView a, SequenceView b);

double jaccard_lcs(SequenceView s, SequenceView t);

/// Unnormalized gap-weighted subsequence kernel K_n(s, t): the sum over all
/// common length-n subsequences u and all their embeddings of
/// lambda^(span_s + span_t). O(n |s| |t|).
double ssk_raw(SequenceView s, SequenceView t, std::size_t n, double lambda);

/// K_n(s,t) / sqrt(K_n(s,s) K_n(t,t)); 0 when either self-kernel vanishes.
double ssk_normalized(SequenceView s, SequenceView t, std::size_t n, double lambda);

double lcs_min_norm(SequenceView s, SequenceView t);

/// Evaluates `spec` with `s` as the data sequence and `t` as the reference.
double evaluate(const SimilaritySpec& spec, SequenceView s, SequenceView t);

/// Dense row-major |A| x |B| matrix of evaluate(spec, A[i], B[j]).
struct SimilarityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    SimilaritySpec spec;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
};

/// Builds the matrix row-parallel on `threads` workers. Element failures are
/// rethrown as std::invalid_argument naming the (i, j) location.
SimilarityMatrix similarity_matrix(std::span<const Sequence> a, std::span<const Sequence> b,
                                   const SimilaritySpec& spec, unsigned threads = 1);

}  // namespace refseq
