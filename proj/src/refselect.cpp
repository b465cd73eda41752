#include "refseq/refselect.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "refseq/parallel.hpp"

namespace refseq {

std::vector<Sequence> ReferenceSet::sequences() const
{
    std::vector<Sequence> out;
    out.reserve(items.size());
    for (const auto& r : items) out.push_back(r.sequence);
    return out;
}

std::string describe(const SelectionMethod& method)
{
    struct Visitor {
        std::string operator()(const SelectAll&) const { return "R-A"; }
        std::string operator()(const SelectGahc& m) const
        {
            return m.pointnum ? fmt::format("R-GAHC(pointnum={})", *m.pointnum) : "R-GAHC(pointnum=|train|/10)";
        }
        std::string operator()(const SelectMht& m) const
        {
            return fmt::format("R-MHT(alpha={}{})", m.alpha, m.include_self ? "" : ",exclude-self");
        }
        std::string operator()(const SelectPatterns& m) const { return fmt::format("PATTERN({})", m.selection.name); }
    };
    return std::visit(Visitor{}, method);
}

ReferenceSet select_all(std::span<const LabeledSequence> train)
{
    if (train.empty()) throw std::invalid_argument("select_all: training set must be non-empty");
    ReferenceSet refs;
    refs.method = "R-A";
    for (std::size_t i = 0; i < train.size(); ++i)
        refs.items.push_back({train[i].sequence, fmt::format("train:{}", i), i, train[i].label});
    return refs;
}

GahcResult gahc_cluster(const SimilarityMatrix& sim, std::size_t target)
{
    const std::size_t n = sim.rows;
    if (sim.cols != n) throw std::invalid_argument("gahc_cluster: similarity matrix must be square");
    if (target == 0 || target > n) throw std::invalid_argument(fmt::format("gahc_cluster: pointnum must lie in [1, {}] (got {})", n, target));

    // sum[i*n+j]: total symmetrized similarity over members of clusters i, j.
    std::vector<double> sum(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sum[i * n + j] = 0.5 * (sim(i, j) + sim(j, i));
    std::vector<std::size_t> size(n, 1);
    std::vector<char> active(n, 1);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};

    auto avg = [&](std::size_t i, std::size_t j) { return sum[i * n + j] / static_cast<double>(size[i] * size[j]); };

    // best[i]: partner j > i with the highest average (smallest j on ties).
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> best(n, none);
    std::vector<double> best_val(n, 0.0);
    auto rescan = [&](std::size_t i) {
        best[i] = none;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!active[j]) continue;
            const double v = avg(i, j);
            if (best[i] == none || v > best_val[i]) {
                best[i] = j;
                best_val[i] = v;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) rescan(i);

    GahcResult result;
    for (std::size_t clusters = n; clusters > target; --clusters) {
        std::size_t k = none;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i] && best[i] != none && (k == none || best_val[i] > best_val[k])) k = i;
        const std::size_t l = best[k];
        result.merges.push_back({k, l, best_val[k]});

        active[l] = 0;
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == k) continue;
            sum[k * n + m] += sum[l * n + m];
            sum[m * n + k] = sum[k * n + m];
        }
        size[k] += size[l];
        members[k].insert(members[k].end(), members[l].begin(), members[l].end());
        std::sort(members[k].begin(), members[k].end());
        members[l].clear();

        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] || i == k) continue;
            if (best[i] == l || best[i] == k) {
                rescan(i);
            } else if (i < k) {
                const double v = avg(i, k);
                if (best[i] == none || v > best_val[i] || (v == best_val[i] && k < best[i])) {
                    best[i] = k;
                    best_val[i] = v;
                }
            }
        }
        rescan(k);
    }

    for (std::size_t i = 0; i < n; ++i)
        if (active[i]) result.clusters.push_back(members[i]);
    return result;
}

namespace {

ReferenceSet gahc_references(std::span<const Sequence> candidates, std::size_t pointnum, const std::function<SimilarityMatrix()>& sim)
{
    if (pointnum == 0 || pointnum > candidates.size())
        throw std::invalid_argument(fmt::format("select_gahc: pointnum must lie in [1, {}] (got {})", candidates.size(), pointnum));
    ReferenceSet refs;
    refs.method = fmt::format("R-GAHC(pointnum={})", pointnum);
    std::vector<std::size_t> reps;
    if (pointnum == candidates.size()) {
        reps.resize(candidates.size());
        std::iota(reps.begin(), reps.end(), 0);
    } else {
        for (const auto& cluster : gahc_cluster(sim(), pointnum).clusters) reps.push_back(cluster.front());
    }
    for (auto i : reps) refs.items.push_back({candidates[i], fmt::format("train:{}", i), i, std::nullopt});
    return refs;
}

}  // namespace

ReferenceSet select_gahc(std::span<const Sequence> candidates, const SimilaritySpec& spec, std::size_t pointnum, unsigned threads)
{
    return gahc_references(candidates, pointnum, [&] { return similarity_matrix(candidates, candidates, spec, threads); });
}

ReferenceSet select_gahc(std::span<const Sequence> candidates, const SimilarityMatrix& sim, std::size_t pointnum)
{
    if (sim.rows != candidates.size() || sim.cols != candidates.size())
        throw std::invalid_argument("select_gahc: similarity matrix does not match the candidates");
    return gahc_references(candidates, pointnum, [&] { return sim; });
}

namespace {

// Midranks of the pooled sample; also reports the tie-correction sum
// sum(t^3 - t) over tie groups.
std::vector<double> midranks(std::span<const double> pooled, double& tie_term)
{
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> rank(pooled.size());
    tie_term = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    return rank;
}

// Two-sided exact p-value for the tie-free case. ways[m][w] counts the
// m-subsets of ranks {1..N} whose sum is w.
double exact_two_sided(std::size_t n1, std::size_t n2, std::size_t rank_sum)
{
    const std::size_t n = n1 + n2;
    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t r = 1; r <= n; ++r)
        for (std::size_t m = std::min(r, n1); m >= 1; --m)
            for (std::size_t w = max_sum; w >= r; --w) ways[m][w] += ways[m - 1][w - r];

    double total = 0.0, lower = 0.0, upper = 0.0;
    for (std::size_t w = 0; w <= max_sum; ++w) {
        total += ways[n1][w];
        if (w <= rank_sum) lower += ways[n1][w];
        if (w >= rank_sum) upper += ways[n1][w];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

}  // namespace

double mann_whitney_p(std::span<const double> first, std::span<const double> second)
{
    if (first.empty() || second.empty()) throw std::invalid_argument("mann_whitney_p: both samples must be non-empty");
    const std::size_t n1 = first.size(), n2 = second.size(), n = n1 + n2;
    std::vector<double> pooled(first.begin(), first.end());
    pooled.insert(pooled.end(), second.begin(), second.end());
    for (double v : pooled)
        if (!std::isfinite(v)) throw std::invalid_argument("mann_whitney_p: samples must be finite");

    double tie_term = 0.0;
    const auto rank = midranks(pooled, tie_term);
    const double rank_sum = std::accumulate(rank.begin(), rank.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);

    if (n <= 12 && tie_term == 0.0) return exact_two_sided(n1, n2, static_cast<std::size_t>(std::lround(rank_sum)));

    const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dn = static_cast<double>(n);
    const double u = rank_sum - dn1 * (dn1 + 1.0) / 2.0;
    const double mean = dn1 * dn2 / 2.0;
    const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (!(var > 0.0)) return 1.0;
    const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

std::size_t bh_select(std::span<const double> sorted_pvalues, double alpha)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument(fmt::format("bh_select: alpha must lie in (0,1] (got {})", alpha));
    if (!std::is_sorted(sorted_pvalues.begin(), sorted_pvalues.end()))
        throw std::invalid_argument("bh_select: p-values must be sorted ascending");
    const double m = static_cast<double>(sorted_pvalues.size());
    std::size_t maxindex = 0;
    for (std::size_t k = 1; k <= sorted_pvalues.size(); ++k)
        if (sorted_pvalues[k - 1] <= alpha * static_cast<double>(k) / m) maxindex = k;
    return maxindex;
}

std::pair<ReferenceSet, MhtReport> select_mht(std::span<const LabeledSequence> train, const SimilaritySpec& spec, double alpha,
                                              bool include_self, unsigned threads)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument(fmt::format("select_mht: alpha must lie in (0,1) (got {})", alpha));
    std::vector<Sequence> seqs;
    seqs.reserve(train.size());
    for (const auto& inst : train) seqs.push_back(inst.sequence);
    // Row j, column k: similarity of data sequence j to candidate k.
    return select_mht(train, similarity_matrix(seqs, seqs, spec, threads), alpha, include_self, threads);
}

std::pair<ReferenceSet, MhtReport> select_mht(std::span<const LabeledSequence> train, const SimilarityMatrix& sim, double alpha,
                                              bool include_self, unsigned threads)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument(fmt::format("select_mht: alpha must lie in (0,1) (got {})", alpha));
    if (sim.rows != train.size() || sim.cols != train.size())
        throw std::invalid_argument("select_mht: similarity matrix does not match the training set");
    std::map<ClassId, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < train.size(); ++i) by_class[train[i].label].push_back(i);
    if (by_class.size() < 2) throw std::invalid_argument("select_mht: at least two non-empty classes are required");

    MhtReport report;
    ReferenceSet refs;
    refs.method = fmt::format("R-MHT(alpha={})", alpha);

    for (const auto& [cls, positives] : by_class) {
        if (positives.size() < 2) report.notes.push_back(fmt::format("class {} has {} member(s); degenerate test", cls, positives.size()));

        std::vector<double> pvalues(positives.size(), 1.0);
        parallel_for(positives.size(), threads, [&](std::size_t idx) {
            const std::size_t k = positives[idx];
            std::vector<double> pos, neg;
            for (std::size_t j = 0; j < train.size(); ++j) {
                if (train[j].label == cls) {
                    if (j != k || include_self) pos.push_back(sim(j, k));
                } else {
                    neg.push_back(sim(j, k));
                }
            }
            pvalues[idx] = pos.empty() ? 1.0 : mann_whitney_p(pos, neg);
        });

        std::vector<std::size_t> order(positives.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
        std::vector<double> sorted;
        for (auto o : order) sorted.push_back(pvalues[o]);
        const std::size_t cut = bh_select(sorted, alpha);
        report.maxindex[cls] = cut;

        for (std::size_t r = 0; r < order.size(); ++r) {
            const std::size_t k = positives[order[r]];
            const bool kept = r < cut;
            report.entries.push_back({k, cls, sorted[r], r + 1, kept});
            if (kept) refs.items.push_back({train[k].sequence, fmt::format("train:{}", k), k, cls});
        }
    }

    if (refs.empty())
        throw NoReferencesError(fmt::format("R-MHT selected no references at alpha={}; consider a larger alpha", alpha));
    return {std::move(refs), std::move(report)};
}

ReferenceSet select_references(std::span<const LabeledSequence> train, const SelectionMethod& method, const SimilaritySpec& spec,
                               std::size_t num_classes, unsigned threads, const SimilarityMatrix* train_sim)
{
    if (train.empty()) throw std::invalid_argument("select_references: training set must be non-empty");
    if (std::holds_alternative<SelectAll>(method)) return select_all(train);

    if (const auto* gahc = std::get_if<SelectGahc>(&method)) {
        const std::size_t pointnum = gahc->pointnum.value_or((train.size() + 9) / 10);
        std::vector<Sequence> seqs;
        for (const auto& inst : train) seqs.push_back(inst.sequence);
        auto refs = train_sim ? select_gahc(seqs, *train_sim, pointnum) : select_gahc(seqs, spec, pointnum, threads);
        for (auto& r : refs.items) r.source_class = train[*r.source].label;
        return refs;
    }

    if (const auto* mht = std::get_if<SelectMht>(&method)) {
        if (train_sim) return select_mht(train, *train_sim, mht->alpha, mht->include_self, threads).first;
        return select_mht(train, spec, mht->alpha, mht->include_self, threads).first;
    }

    const auto& pat = std::get<SelectPatterns>(method);
    auto mined = select_pattern_references(train, pat.selection, num_classes, threads);
    ReferenceSet refs;
    refs.method = describe(method);
    for (auto& m : mined) refs.items.push_back({m.pattern.items, fmt::format("pattern:{}", render_ids(m.pattern.items)), std::nullopt, std::nullopt});
    if (refs.empty()) throw NoReferencesError(fmt::format("pattern preset '{}' produced no patterns", pat.selection.name));
    return refs;
}

void write_mht_report_tsv(std::ostream& out, const MhtReport& report)
{
    out << "candidate\tclass\tpvalue\trank\tkept\n";
    for (const auto& e : report.entries) out << fmt::format("{}\t{}\t{:.17g}\t{}\t{}\n", e.candidate, e.cls, e.p_value, e.rank, e.kept ? 1 : 0);
}

void write_references(std::ostream& out, const ReferenceSet& refs, const Alphabet* alphabet)
{
    for (const auto& r : refs.items)
        out << r.provenance << '\t' << (alphabet ? render(r.sequence, *alphabet) : render_ids(r.sequence)) << '\n';
}

}  // namespace refseq
