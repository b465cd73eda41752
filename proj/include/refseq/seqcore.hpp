#pragma once

// Sequence data model plus the containment / occurrence primitives that the
// similarity, mining and selection layers are built on.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace refseq {

using ItemId = std::uint32_t;
using ClassId = std::uint32_t;

/// An ordered list of interned items.
using Sequence = std::vector<ItemId>;
using SequenceView = std::span<const ItemId>;

/// Bijection between item tokens and dense ids 0..size()-1.
///
/// Ids are handed out in first-appearance order. Items that only show up in
/// test data are interned lazily like any other token; since no training
/// sequence contains them they simply never match.
class Alphabet {
public:
    ItemId intern(std::string_view token);
    std::optional<ItemId> find(std::string_view token) const;
    const std::string& token(ItemId id) const;
    std::size_t size() const noexcept { return tokens_.size(); }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, ItemId> ids_;
};

struct LabeledSequence {
    Sequence sequence;
    ClassId label = 0;
};

struct SequenceDataset {
    std::vector<LabeledSequence> instances;
    std::vector<std::string> class_names;  // indexed by ClassId
    Alphabet alphabet;

    std::size_t num_classes() const noexcept { return class_names.size(); }
    std::size_t size() const noexcept { return instances.size(); }
};

/// Inclusive bounds on the number of skipped positions between two
/// consecutive matched items.
struct GapBounds {
    std::size_t mingap = 0;
    std::size_t maxgap = 0;

    GapBounds() = default;
    GapBounds(std::size_t lo, std::size_t hi);
};

struct Support {
    std::size_t count = 0;
    double fraction = 0.0;
};

/// True iff `t` embeds into `s` by increasing indices.
bool is_subsequence(SequenceView t, SequenceView s) noexcept;

/// True iff some embedding of `t` in `s` keeps every consecutive gap inside
/// `gap`. Throws std::invalid_argument on empty `t`.
bool embeds_with_gap(SequenceView t, SequenceView s, const GapBounds& gap);

/// Number of sequences in `seqs` containing `t`, and that count over |seqs|.
Support support(SequenceView t, std::span<const Sequence> seqs);

/// Count of disjoint embeddings found by repeated greedy leftmost matching,
/// each match consuming the positions it used.
std::size_t occount_nonoverlap(SequenceView t, SequenceView s);

/// Smallest i_r - i_1 + 1 over all embeddings of `t` in `s`; nullopt when
/// `t` is not a subsequence of `s`.
std::optional<std::size_t> min_window(SequenceView t, SequenceView s);

/// Order-preserving split of the instances by label.
std::map<ClassId, std::vector<Sequence>> partition_by_class(std::span<const LabeledSequence> instances);
std::map<ClassId, std::vector<Sequence>> partition_by_class(const SequenceDataset& dataset);

/// Space-separated token rendering, used for provenance strings and exports.
std::string render(SequenceView s, const Alphabet& alphabet);
/// Space-separated numeric ids, for when no alphabet is at hand.
std::string render_ids(SequenceView s);

}  // namespace refseq
