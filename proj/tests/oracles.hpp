#pragma once

// Brute-force reference implementations used only by tests. Everything here
// is written by exhaustive enumeration so that it stays independent of the
// dynamic-programming and projection code paths it is checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string_view>
#include <vector>

#include "refseq/seqcore.hpp"

namespace oracle {

using refseq::Sequence;

/// Maps 'a' -> 0, 'b' -> 1, ...
inline Sequence seq(std::string_view letters)
{
    Sequence s;
    for (char c : letters) s.push_back(static_cast<refseq::ItemId>(c - 'a'));
    return s;
}

/// Calls visit(indices) for every strictly increasing index tuple of length r
/// into a sequence of length len.
inline void for_each_combination(std::size_t len, std::size_t r, const std::function<void(const std::vector<std::size_t>&)>& visit)
{
    std::vector<std::size_t> idx;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (idx.size() == r) {
            visit(idx);
            return;
        }
        for (std::size_t i = start; i < len; ++i) {
            idx.push_back(i);
            rec(i + 1);
            idx.pop_back();
        }
    };
    rec(0);
}

inline bool contains(const Sequence& s, const Sequence& t)
{
    bool found = t.empty();
    if (found) return true;
    for_each_combination(s.size(), t.size(), [&](const std::vector<std::size_t>& idx) {
        if (found) return;
        bool ok = true;
        for (std::size_t k = 0; k < t.size() && ok; ++k) ok = s[idx[k]] == t[k];
        found = ok;
    });
    return found;
}

/// Every distinct subsequence of s with length in [1, maxlen].
inline std::set<Sequence> all_subsequences(const Sequence& s, std::size_t maxlen)
{
    std::set<Sequence> out;
    for (std::size_t r = 1; r <= std::min(maxlen, s.size()); ++r)
        for_each_combination(s.size(), r, [&](const std::vector<std::size_t>& idx) {
            Sequence t;
            for (auto i : idx) t.push_back(s[i]);
            out.insert(t);
        });
    return out;
}

inline std::size_t lcs_bruteforce(const Sequence& s, const Sequence& t)
{
    std::size_t best = 0;
    const std::size_t n = s.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        Sequence sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.push_back(s[i]);
        if (sub.size() <= best) continue;
        // greedy containment check of sub in t
        std::size_t k = 0;
        for (std::size_t j = 0; j < t.size() && k < sub.size(); ++j)
            if (t[j] == sub[k]) ++k;
        if (k == sub.size()) best = sub.size();
    }
    return best;
}

inline double ssk_enumerate(const Sequence& s, const Sequence& t, std::size_t n, double lambda)
{
    double total = 0.0;
    for_each_combination(s.size(), n, [&](const std::vector<std::size_t>& is) {
        for_each_combination(t.size(), n, [&](const std::vector<std::size_t>& js) {
            for (std::size_t k = 0; k < n; ++k)
                if (s[is[k]] != t[js[k]]) return;
            const double span = static_cast<double>((is.back() - is.front() + 1) + (js.back() - js.front() + 1));
            total += std::pow(lambda, span);
        });
    });
    return total;
}

inline bool gap_embed_bruteforce(const Sequence& t, const Sequence& s, std::size_t mingap, std::size_t maxgap)
{
    bool found = false;
    for_each_combination(s.size(), t.size(), [&](const std::vector<std::size_t>& idx) {
        if (found) return;
        for (std::size_t k = 0; k < t.size(); ++k)
            if (s[idx[k]] != t[k]) return;
        for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
            const std::size_t g = idx[k + 1] - idx[k] - 1;
            if (g < mingap || g > maxgap) return;
        }
        found = true;
    });
    return found;
}

inline std::optional<std::size_t> min_window_bruteforce(const Sequence& t, const Sequence& s)
{
    std::optional<std::size_t> best;
    for_each_combination(s.size(), t.size(), [&](const std::vector<std::size_t>& idx) {
        for (std::size_t k = 0; k < t.size(); ++k)
            if (s[idx[k]] != t[k]) return;
        const std::size_t w = idx.back() - idx.front() + 1;
        if (!best || w < *best) best = w;
    });
    return best;
}

/// Greedy consumption expressed on a shrinking copy of s: find the leftmost
/// embedding, erase its items, repeat.
inline std::size_t occount_by_erasure(const Sequence& t, Sequence s)
{
    std::size_t count = 0;
    while (true) {
        std::vector<std::size_t> hit;
        for (std::size_t i = 0; i < s.size() && hit.size() < t.size(); ++i)
            if (s[i] == t[hit.size()]) hit.push_back(i);
        if (hit.size() < t.size()) return count;
        for (auto it = hit.rbegin(); it != hit.rend(); ++it) s.erase(s.begin() + static_cast<std::ptrdiff_t>(*it));
        ++count;
    }
}

/// Frequent-in-at-least-one-class pattern set by exhaustive enumeration.
inline std::set<Sequence> mine_bruteforce(const std::vector<Sequence>& seqs, const std::vector<refseq::ClassId>& labels,
                                          double minsup, std::size_t maxsize)
{
    std::map<refseq::ClassId, std::size_t> class_size;
    for (auto l : labels) ++class_size[l];
    std::set<Sequence> candidates;
    for (const auto& s : seqs) {
        auto subs = all_subsequences(s, maxsize);
        candidates.insert(subs.begin(), subs.end());
    }
    std::set<Sequence> out;
    for (const auto& c : candidates) {
        std::map<refseq::ClassId, std::size_t> count;
        for (std::size_t i = 0; i < seqs.size(); ++i)
            if (contains(seqs[i], c)) ++count[labels[i]];
        for (auto [label, n] : count)
            if (static_cast<double>(n) / static_cast<double>(class_size[label]) >= minsup) {
                out.insert(c);
                break;
            }
    }
    return out;
}

/// Average-linkage agglomeration recomputing every cluster similarity from
/// the raw pairwise matrix at every step. Returns (merge sims, clusters).
struct LinkageResult {
    std::vector<double> merge_sims;
    std::vector<std::vector<std::size_t>> clusters;
};

inline LinkageResult average_linkage_bruteforce(const std::vector<std::vector<double>>& sim, std::size_t target)
{
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < sim.size(); ++i) clusters.push_back({i});
    LinkageResult out;
    while (clusters.size() > target) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double sum = 0.0;
                for (auto a : clusters[i])
                    for (auto b : clusters[j]) sum += 0.5 * (sim[a][b] + sim[b][a]);
                const double avg = sum / static_cast<double>(clusters[i].size() * clusters[j].size());
                if (avg > best + 1e-12) {
                    best = avg;
                    bi = i;
                    bj = j;
                }
            }
        out.merge_sims.push_back(best);
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        std::sort(clusters[bi].begin(), clusters[bi].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    out.clusters = clusters;
    return out;
}

/// Mann-Whitney U of the first sample (midranks for ties).
inline double u_statistic(const std::vector<double>& x, const std::vector<double>& y)
{
    double u = 0.0;
    for (double a : x)
        for (double b : y) u += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    return u;
}

/// Two-sided exact p-value by enumerating every split of the pooled sample.
inline double mann_whitney_exact_enumeration(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const double mu = static_cast<double>(x.size() * y.size()) / 2.0;
    const double observed = std::abs(u_statistic(x, y) - mu);
    std::size_t extreme = 0, total = 0;
    for_each_combination(pooled.size(), x.size(), [&](const std::vector<std::size_t>& idx) {
        std::vector<double> a, b;
        std::vector<char> in(pooled.size(), 0);
        for (auto i : idx) in[i] = 1;
        for (std::size_t i = 0; i < pooled.size(); ++i) (in[i] ? a : b).push_back(pooled[i]);
        if (std::abs(u_statistic(a, b) - mu) >= observed - 1e-12) ++extreme;
        ++total;
    });
    return static_cast<double>(extreme) / static_cast<double>(total);
}

/// Monte-Carlo permutation estimate of the two-sided U-test p-value.
inline double mann_whitney_permutation(const std::vector<double>& x, const std::vector<double>& y, std::size_t rounds, std::uint64_t seed)
{
    std::vector<double> pooled(x);
    pooled.insert(pooled.end(), y.begin(), y.end());
    const double mu = static_cast<double>(x.size() * y.size()) / 2.0;
    const double observed = std::abs(u_statistic(x, y) - mu);
    std::mt19937_64 rng(seed);
    std::size_t extreme = 0;
    std::vector<double> a(x.size()), b(y.size());
    for (std::size_t r = 0; r < rounds; ++r) {
        std::shuffle(pooled.begin(), pooled.end(), rng);
        std::copy(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(x.size()), a.begin());
        std::copy(pooled.begin() + static_cast<std::ptrdiff_t>(x.size()), pooled.end(), b.begin());
        if (std::abs(u_statistic(a, b) - mu) >= observed - 1e-12) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(rounds);
}

inline Sequence random_sequence(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len, std::size_t alphabet)
{
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<refseq::ItemId> item(0, static_cast<refseq::ItemId>(alphabet - 1));
    Sequence s(len(rng));
    for (auto& x : s) x = item(rng);
    return s;
}

}  // namespace oracle
