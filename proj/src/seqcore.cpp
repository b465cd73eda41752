#include "refseq/seqcore.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace refseq {

ItemId Alphabet::intern(std::string_view token)
{
    std::string key(token);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    const auto id = static_cast<ItemId>(tokens_.size());
    tokens_.push_back(key);
    ids_.emplace(std::move(key), id);
    return id;
}

std::optional<ItemId> Alphabet::find(std::string_view token) const
{
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const std::string& Alphabet::token(ItemId id) const
{
    if (id >= tokens_.size()) throw std::out_of_range(fmt::format("item id {} not in alphabet", id));
    return tokens_[id];
}

GapBounds::GapBounds(std::size_t lo, std::size_t hi) : mingap(lo), maxgap(hi)
{
    if (lo > hi) throw std::invalid_argument(fmt::format("gap bounds require mingap <= maxgap (got {} > {})", lo, hi));
}

bool is_subsequence(SequenceView t, SequenceView s) noexcept
{
    std::size_t k = 0;
    for (std::size_t i = 0; i < s.size() && k < t.size(); ++i)
        if (s[i] == t[k]) ++k;
    return k == t.size();
}

bool embeds_with_gap(SequenceView t, SequenceView s, const GapBounds& gap)
{
    if (t.empty()) throw std::invalid_argument("embeds_with_gap: pattern must be non-empty");
    if (t.size() > s.size()) return false;

    // reach[i]: the first k+1 pattern items can be embedded ending at s[i].
    std::vector<char> reach(s.size(), 0), next(s.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) reach[i] = s[i] == t[0];

    for (std::size_t k = 1; k < t.size(); ++k) {
        // prefix[i] = number of reachable positions in [0, i)
        std::vector<std::size_t> prefix(s.size() + 1, 0);
        for (std::size_t i = 0; i < s.size(); ++i) prefix[i + 1] = prefix[i] + (reach[i] ? 1 : 0);

        bool any = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            next[i] = 0;
            if (s[i] != t[k] || i < gap.mingap + 1) continue;
            // predecessor j must satisfy mingap <= i - j - 1 <= maxgap
            const std::size_t hi = i - gap.mingap - 1;
            const std::size_t lo = (i >= gap.maxgap + 1) ? i - gap.maxgap - 1 : 0;
            if (prefix[hi + 1] - prefix[lo] > 0) {
                next[i] = 1;
                any = true;
            }
        }
        if (!any) return false;
        reach.swap(next);
    }
    return std::any_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
}

Support support(SequenceView t, std::span<const Sequence> seqs)
{
    if (seqs.empty()) throw std::invalid_argument("support: sequence set must be non-empty");
    Support out;
    for (const auto& s : seqs)
        if (is_subsequence(t, s)) ++out.count;
    out.fraction = static_cast<double>(out.count) / static_cast<double>(seqs.size());
    return out;
}

std::size_t occount_nonoverlap(SequenceView t, SequenceView s)
{
    if (t.empty()) throw std::invalid_argument("occount_nonoverlap: pattern must be non-empty");
    std::vector<char> used(s.size(), 0);
    std::vector<std::size_t> matched;
    matched.reserve(t.size());
    std::size_t count = 0;
    while (true) {
        matched.clear();
        for (std::size_t i = 0; i < s.size() && matched.size() < t.size(); ++i)
            if (!used[i] && s[i] == t[matched.size()]) matched.push_back(i);
        if (matched.size() < t.size()) break;
        for (auto i : matched) used[i] = 1;
        ++count;
    }
    return count;
}

std::optional<std::size_t> min_window(SequenceView t, SequenceView s)
{
    if (t.empty()) throw std::invalid_argument("min_window: pattern must be non-empty");
    std::optional<std::size_t> best;
    // For a fixed start, the greedy forward match yields the earliest end.
    for (std::size_t start = 0; start < s.size(); ++start) {
        if (s[start] != t[0]) continue;
        std::size_t k = 1, i = start + 1;
        for (; i < s.size() && k < t.size(); ++i)
            if (s[i] == t[k]) ++k;
        if (k < t.size()) break;  // later starts cannot succeed either
        const std::size_t width = i - start;
        if (!best || width < *best) best = width;
    }
    return best;
}

std::map<ClassId, std::vector<Sequence>> partition_by_class(std::span<const LabeledSequence> instances)
{
    std::map<ClassId, std::vector<Sequence>> groups;
    for (const auto& inst : instances) groups[inst.label].push_back(inst.sequence);
    return groups;
}

std::map<ClassId, std::vector<Sequence>> partition_by_class(const SequenceDataset& dataset)
{
    return partition_by_class(std::span<const LabeledSequence>(dataset.instances));
}

std::string render(SequenceView s, const Alphabet& alphabet)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        out += alphabet.token(s[i]);
    }
    return out;
}

std::string render_ids(SequenceView s)
{
    return fmt::format("{}", fmt::join(s, " "));
}

}  // namespace refseq
