#include "refseq/patterns.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "refseq/parallel.hpp"

namespace refseq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t infer_num_classes(std::span<const LabeledSequence> train)
{
    ClassId top = 0;
    for (const auto& inst : train) top = std::max(top, inst.label);
    return train.empty() ? 0 : static_cast<std::size_t>(top) + 1;
}

// Pseudo-projection: for every sequence still supporting the prefix, the
// sorted end positions of its embeddings. Without a gap constraint only the
// leftmost end is needed.
struct ProjectedEntry {
    std::size_t seq;
    std::vector<std::size_t> ends;
};
using Projection = std::vector<ProjectedEntry>;

class PrefixGrowth {
public:
    PrefixGrowth(std::span<const LabeledSequence> train, const MiningConfig& cfg, std::size_t num_classes)
        : train_(train), cfg_(cfg), class_size_(num_classes, 0)
    {
        for (const auto& inst : train) ++class_size_[inst.label];
    }

    std::vector<Pattern> run()
    {
        std::map<ItemId, Projection> first;
        for (std::size_t i = 0; i < train_.size(); ++i) {
            const auto& s = train_[i].sequence;
            std::map<ItemId, std::vector<std::size_t>> positions;
            for (std::size_t p = 0; p < s.size(); ++p) {
                auto& ends = positions[s[p]];
                if (cfg_.gap || ends.empty()) ends.push_back(p);
            }
            for (auto& [item, ends] : positions) first[item].push_back({i, std::move(ends)});
        }
        Pattern prefix;
        grow(prefix, first);
        return std::move(out_);
    }

private:
    bool frequent(const Projection& proj) const
    {
        std::vector<std::size_t> count(class_size_.size(), 0);
        for (const auto& e : proj) ++count[train_[e.seq].label];
        for (std::size_t c = 0; c < count.size(); ++c)
            if (class_size_[c] > 0 &&
                static_cast<double>(count[c]) / static_cast<double>(class_size_[c]) >= cfg_.minsup)
                return true;
        return false;
    }

    void grow(Pattern& prefix, const std::map<ItemId, Projection>& extensions)
    {
        for (const auto& [item, proj] : extensions) {
            if (!frequent(proj)) continue;
            prefix.items.push_back(item);
            out_.push_back(prefix);
            if (prefix.size() < cfg_.maxsize) grow(prefix, extend(proj));
            prefix.items.pop_back();
        }
    }

    std::map<ItemId, Projection> extend(const Projection& proj) const
    {
        std::map<ItemId, Projection> next;
        for (const auto& e : proj) {
            const auto& s = train_[e.seq].sequence;
            std::map<ItemId, std::vector<std::size_t>> positions;
            if (!cfg_.gap) {
                for (std::size_t p = e.ends.front() + 1; p < s.size(); ++p) {
                    auto& ends = positions[s[p]];
                    if (ends.empty()) ends.push_back(p);
                }
            } else {
                for (auto end : e.ends) {
                    const std::size_t lo = end + 1 + cfg_.gap->mingap;
                    const std::size_t hi = end + 1 + cfg_.gap->maxgap;
                    for (std::size_t p = lo; p <= hi && p < s.size(); ++p) positions[s[p]].push_back(p);
                }
                for (auto& [item, ends] : positions) {
                    std::sort(ends.begin(), ends.end());
                    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
                }
            }
            for (auto& [item, ends] : positions) next[item].push_back({e.seq, std::move(ends)});
        }
        return next;
    }

    std::span<const LabeledSequence> train_;
    const MiningConfig& cfg_;
    std::vector<std::size_t> class_size_;
    std::vector<Pattern> out_;
};

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

bool canonical_less(const Pattern& a, const Pattern& b) noexcept
{
    if (a.size() != b.size()) return a.size() < b.size();
    return a.items < b.items;
}

std::size_t PatternStats::total_count() const noexcept
{
    std::size_t n = 0;
    for (auto c : count) n += c;
    return n;
}

std::size_t PatternStats::total_size() const noexcept
{
    std::size_t n = 0;
    for (auto c : class_size) n += c;
    return n;
}

double PatternStats::confidence(ClassId c) const
{
    const auto total = total_count();
    return total == 0 ? 0.0 : static_cast<double>(count.at(c)) / static_cast<double>(total);
}

double PatternStats::contrast_support(ClassId c) const
{
    const auto rest_size = total_size() - class_size.at(c);
    const auto rest_count = total_count() - count.at(c);
    return rest_size == 0 ? 0.0 : static_cast<double>(rest_count) / static_cast<double>(rest_size);
}

double PatternStats::occ(ClassId c) const
{
    return class_size.at(c) == 0 ? 0.0 : static_cast<double>(occount[c]) / static_cast<double>(class_size[c]);
}

double PatternStats::contrast_occ(ClassId c) const
{
    std::size_t size = 0, occ_total = 0;
    for (std::size_t i = 0; i < class_size.size(); ++i) {
        if (i == c) continue;
        size += class_size[i];
        occ_total += occount[i];
    }
    return size == 0 ? 0.0 : static_cast<double>(occ_total) / static_cast<double>(size);
}

void MiningConfig::validate() const
{
    if (!(minsup > 0.0 && minsup <= 1.0)) throw std::invalid_argument(fmt::format("minsup must lie in (0,1] (got {})", minsup));
    if (maxsize == 0) throw std::invalid_argument("maxsize must be positive");
    if (gap && gap->mingap > gap->maxgap) throw std::invalid_argument("gap bounds require mingap <= maxgap");
}

PatternStats compute_stats(const Pattern& pattern, std::span<const LabeledSequence> train, std::size_t num_classes,
                           const std::optional<GapBounds>& gap)
{
    if (pattern.items.empty()) throw std::invalid_argument("compute_stats: pattern must be non-empty");
    PatternStats st;
    st.class_size.assign(num_classes, 0);
    st.count.assign(num_classes, 0);
    st.support.assign(num_classes, 0.0);
    st.occount.assign(num_classes, 0);
    st.seq_occount.assign(num_classes, {});
    st.mean_window.assign(num_classes, 0.0);
    st.cohesion.assign(num_classes, 0.0);
    st.interest.assign(num_classes, 0.0);

    std::vector<double> window_sum(num_classes, 0.0);
    for (const auto& inst : train) {
        const auto c = inst.label;
        if (c >= num_classes) throw std::invalid_argument(fmt::format("label {} exceeds class count {}", c, num_classes));
        ++st.class_size[c];
        const auto occ = occount_nonoverlap(pattern.items, inst.sequence);
        st.seq_occount[c].push_back(occ);
        st.occount[c] += occ;
        const bool contains = gap ? embeds_with_gap(pattern.items, inst.sequence, *gap) : occ > 0;
        if (contains) {
            ++st.count[c];
            window_sum[c] += static_cast<double>(*min_window(pattern.items, inst.sequence));
        }
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (st.class_size[c] == 0 || st.count[c] == 0) continue;
        st.support[c] = static_cast<double>(st.count[c]) / static_cast<double>(st.class_size[c]);
        st.mean_window[c] = window_sum[c] / static_cast<double>(st.count[c]);
        st.cohesion[c] = static_cast<double>(pattern.size()) / st.mean_window[c];
        st.interest[c] = st.support[c] * st.cohesion[c];
    }
    return st;
}

std::vector<MinedPattern> mine_frequent(std::span<const LabeledSequence> train, const MiningConfig& cfg,
                                        std::size_t num_classes, unsigned threads)
{
    if (train.empty()) throw std::invalid_argument("mine_frequent: training set must be non-empty");
    cfg.validate();
    if (num_classes == 0) num_classes = infer_num_classes(train);
    for (const auto& inst : train)
        if (inst.label >= num_classes) throw std::invalid_argument(fmt::format("label {} exceeds class count {}", inst.label, num_classes));

    auto patterns = PrefixGrowth(train, cfg, num_classes).run();
    std::sort(patterns.begin(), patterns.end(), canonical_less);

    std::vector<MinedPattern> out(patterns.size());
    parallel_for(patterns.size(), threads, [&](std::size_t i) {
        out[i].pattern = std::move(patterns[i]);
        out[i].stats = compute_stats(out[i].pattern, train, num_classes, cfg.gap);
    });
    return out;
}

std::string_view to_string(DiscriminativeKind kind)
{
    switch (kind) {
    case DiscriminativeKind::DF1: return "df1";
    case DiscriminativeKind::DF2: return "df2";
    case DiscriminativeKind::DF3: return "df3";
    case DiscriminativeKind::DF4: return "df4";
    case DiscriminativeKind::DF5: return "df5";
    case DiscriminativeKind::DF6: return "df6";
    }
    return "?";
}

DiscriminativeSpec DiscriminativeSpec::df1(double minsup) { return {DiscriminativeKind::DF1, minsup, std::nullopt, std::nullopt}; }
DiscriminativeSpec DiscriminativeSpec::df2(double mincount) { return {DiscriminativeKind::DF2, mincount, std::nullopt, std::nullopt}; }
DiscriminativeSpec DiscriminativeSpec::df3(double minsupdiff) { return {DiscriminativeKind::DF3, minsupdiff, std::nullopt, std::nullopt}; }
DiscriminativeSpec DiscriminativeSpec::df4(double min_fratio) { return {DiscriminativeKind::DF4, min_fratio, std::nullopt, std::nullopt}; }
DiscriminativeSpec DiscriminativeSpec::df5(double min_gr, double min_sig) { return {DiscriminativeKind::DF5, min_gr, min_sig, std::nullopt}; }
DiscriminativeSpec DiscriminativeSpec::df6(double alpha) { return {DiscriminativeKind::DF6, alpha, std::nullopt, std::nullopt}; }

void DiscriminativeSpec::validate() const
{
    if (std::isnan(threshold)) throw std::invalid_argument("discriminative threshold must be a number");
    if ((kind == DiscriminativeKind::DF5) != min_sig.has_value())
        throw std::invalid_argument(fmt::format("{}: min_sig is {}", to_string(kind), kind == DiscriminativeKind::DF5 ? "required" : "not applicable"));
    if (kind == DiscriminativeKind::DF6 && !(threshold > 0.0 && threshold <= 1.0))
        throw std::invalid_argument(fmt::format("df6 significance level must lie in (0,1] (got {})", threshold));
    if ((kind == DiscriminativeKind::DF4 || kind == DiscriminativeKind::DF5) && threshold < 0.0)
        throw std::invalid_argument(fmt::format("{} threshold must be non-negative", to_string(kind)));
}

double growth_rate(const PatternStats& stats, ClassId target)
{
    // Computed from counts as (n1 * N2) / (n2 * N1) so that ratios like
    // 0.6 / 0.2 come out exactly.
    const auto own = stats.count.at(target);
    const auto own_size = stats.class_size.at(target);
    const auto rest = stats.total_count() - own;
    const auto rest_size = stats.total_size() - own_size;
    if (rest == 0 || rest_size == 0) return own > 0 ? kInf : 0.0;
    if (own_size == 0) return 0.0;
    return static_cast<double>(own * rest_size) / static_cast<double>(rest * own_size);
}

ChiSquared chi_squared_containment(std::span<const std::size_t> count, std::span<const std::size_t> class_size)
{
    if (count.size() != class_size.size()) throw std::invalid_argument("chi_squared_containment: size mismatch");
    double n = 0.0, contains = 0.0;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < count.size(); ++i) {
        if (class_size[i] == 0) continue;
        ++rows;
        n += static_cast<double>(class_size[i]);
        contains += static_cast<double>(count[i]);
    }
    ChiSquared out;
    if (rows < 2) return out;
    out.dof = rows - 1;
    const double lacks = n - contains;
    if (contains == 0.0 || lacks == 0.0) return out;  // one empty column: no association measurable

    for (std::size_t i = 0; i < count.size(); ++i) {
        if (class_size[i] == 0) continue;
        const double size = static_cast<double>(class_size[i]);
        const double obs_in = static_cast<double>(count[i]);
        const double exp_in = size * contains / n;
        const double exp_out = size * lacks / n;
        out.statistic += (obs_in - exp_in) * (obs_in - exp_in) / exp_in;
        out.statistic += ((size - obs_in) - exp_out) * ((size - obs_in) - exp_out) / exp_out;
    }
    out.p_value = boost::math::gamma_q(static_cast<double>(out.dof) / 2.0, out.statistic / 2.0);
    return out;
}

DiscriminativeResult discriminative_eval(const Pattern& pattern, const PatternStats& stats, const DiscriminativeSpec& spec,
                                         std::span<const MinedPattern> mined)
{
    spec.validate();
    if (!spec.target) throw std::invalid_argument("discriminative_eval: target class is required");
    const ClassId c1 = *spec.target;
    std::size_t populated = 0;
    for (auto size : stats.class_size) populated += size > 0 ? 1 : 0;
    if (populated < 2) throw std::invalid_argument("discriminative_eval: statistics must cover at least two classes");
    if (c1 >= stats.num_classes()) throw std::invalid_argument(fmt::format("target class {} out of range", c1));

    DiscriminativeResult r;
    switch (spec.kind) {
    case DiscriminativeKind::DF1: {
        const double s1 = stats.support[c1], s2 = stats.contrast_support(c1);
        r.score = s1;
        r.passes = s1 > spec.threshold && s2 <= spec.threshold;
        break;
    }
    case DiscriminativeKind::DF2: {
        const double o1 = stats.occ(c1), o2 = stats.contrast_occ(c1);
        r.score = o1;
        r.passes = o1 > spec.threshold && o2 <= spec.threshold;
        break;
    }
    case DiscriminativeKind::DF3: {
        r.score = stats.support[c1] - stats.contrast_support(c1);
        r.passes = r.score >= spec.threshold;
        break;
    }
    case DiscriminativeKind::DF4: {
        const double o1 = stats.occ(c1), o2 = stats.contrast_occ(c1);
        const double mid = (o1 + o2) / 2.0;
        double n1 = 0.0, n2 = 0.0, within = 0.0;
        for (std::size_t c = 0; c < stats.num_classes(); ++c) {
            const double centre = c == c1 ? o1 : o2;
            (c == c1 ? n1 : n2) += static_cast<double>(stats.class_size[c]);
            for (auto v : stats.seq_occount[c]) within += (static_cast<double>(v) - centre) * (static_cast<double>(v) - centre);
        }
        const double between = n1 * (o1 - mid) * (o1 - mid) + n2 * (o2 - mid) * (o2 - mid);
        if (within == 0.0) r.score = between > 0.0 ? kInf : 0.0;
        else r.score = between / within;
        r.passes = r.score >= spec.threshold;
        break;
    }
    case DiscriminativeKind::DF5: {
        const double gr = growth_rate(stats, c1);
        double sig = kInf;
        for (const auto& q : mined) {
            if (q.pattern.size() >= pattern.size() || !is_subsequence(q.pattern.items, pattern.items)) continue;
            const double qgr = growth_rate(q.stats, c1);
            if (qgr < spec.threshold) continue;
            double ratio;
            if (qgr == 0.0) ratio = kInf;
            else if (std::isinf(qgr)) ratio = std::isinf(gr) ? 1.0 : 0.0;
            else ratio = gr / qgr;
            sig = std::min(sig, ratio);
        }
        r.score = gr;
        r.passes = gr >= spec.threshold && sig >= *spec.min_sig;
        break;
    }
    case DiscriminativeKind::DF6: {
        const auto chi = chi_squared_containment(stats.count, stats.class_size);
        r.score = chi.statistic;
        r.passes = chi.p_value <= spec.threshold;
        break;
    }
    }
    return r;
}

Interestingness interestingness(const Pattern& pattern, std::span<const Sequence> class_seqs)
{
    if (pattern.items.empty()) throw std::invalid_argument("interestingness: pattern must be non-empty");
    const auto sup = support(pattern.items, class_seqs);
    Interestingness out;
    if (sup.count == 0) return out;
    double window_sum = 0.0;
    for (const auto& s : class_seqs)
        if (auto w = min_window(pattern.items, s)) window_sum += static_cast<double>(*w);
    out.support = sup.fraction;
    out.cohesion = static_cast<double>(pattern.size()) / (window_sum / static_cast<double>(sup.count));
    out.interest = out.support * out.cohesion;
    return out;
}

bool structural_filters(const MinedPattern& p, std::span<const MinedPattern> all, StructuralChecks which,
                        std::optional<ClassId> target)
{
    if (which.uniqueness) {
        auto items = p.pattern.items;
        std::sort(items.begin(), items.end());
        if (std::adjacent_find(items.begin(), items.end()) != items.end()) return false;
    }
    if (which.closedness) {
        const auto own = p.stats.total_count();
        for (const auto& q : all)
            if (q.pattern.size() > p.pattern.size() && q.stats.total_count() == own &&
                is_subsequence(p.pattern.items, q.pattern.items))
                return false;
    }
    if (which.redundancy) {
        ClassId c = 0;
        if (target) {
            c = *target;
        } else {
            for (ClassId i = 1; i < p.stats.num_classes(); ++i)
                if (p.stats.support[i] > p.stats.support[c]) c = i;
        }
        const auto total = p.stats.total_size();
        const double prior = total == 0 ? 0.0 : static_cast<double>(p.stats.class_size.at(c)) / static_cast<double>(total);
        if (p.stats.confidence(c) < prior) return false;
    }
    return true;
}

std::string_view to_string(PatternPreset preset)
{
    switch (preset) {
    case PatternPreset::FSP: return "fsp";
    case PatternPreset::DSP: return "dsp";
    case PatternPreset::CDSPM: return "cdspm";
    case PatternPreset::SCIP: return "scip";
    case PatternPreset::FEATUREMINE: return "featuremine";
    case PatternPreset::PSO_AB: return "pso-ab";
    case PatternPreset::OCCURRENCE: return "occurrence";
    case PatternPreset::CONTRAST: return "contrast";
    case PatternPreset::GAPPED: return "gapped";
    }
    return "?";
}

PatternPreset parse_pattern_preset(std::string_view name)
{
    const auto key = lower(name);
    for (auto p : {PatternPreset::FSP, PatternPreset::DSP, PatternPreset::CDSPM, PatternPreset::SCIP, PatternPreset::FEATUREMINE,
                   PatternPreset::PSO_AB, PatternPreset::OCCURRENCE, PatternPreset::CONTRAST, PatternPreset::GAPPED})
        if (key == to_string(p)) return p;
    if (key == "psoab") return PatternPreset::PSO_AB;
    throw std::invalid_argument(fmt::format("unknown pattern preset '{}'", name));
}

PatternSelection preset_selection(PatternPreset preset)
{
    PatternSelection sel;
    sel.name = std::string(to_string(preset));
    sel.mining.minsup = 0.3;
    sel.mining.maxsize = 3;
    switch (preset) {
    case PatternPreset::FSP: break;
    case PatternPreset::DSP: sel.discriminative.push_back(DiscriminativeSpec::df5(3.0, 0.0)); break;
    case PatternPreset::CDSPM: sel.discriminative.push_back(DiscriminativeSpec::df5(3.0, 1.0)); break;
    case PatternPreset::SCIP:
        sel.mining.minsup = 0.05;
        sel.minint = 0.02;
        sel.similarity = SimilaritySpec::of(SimilarityKind::SF3);
        break;
    case PatternPreset::FEATUREMINE:
        sel.structural.redundancy = true;
        sel.discriminative.push_back(DiscriminativeSpec::df6(0.05));
        break;
    case PatternPreset::PSO_AB:
        sel.structural.closedness = true;
        sel.similarity = SimilaritySpec::of(SimilarityKind::SF6);
        break;
    case PatternPreset::OCCURRENCE:
        sel.mining.minsup = 0.1;
        sel.mining.gap = GapBounds(0, 4);
        sel.structural.uniqueness = true;
        sel.discriminative.push_back(DiscriminativeSpec::df2(0.5));
        sel.discriminative.push_back(DiscriminativeSpec::df4(1.0));
        sel.similarity = SimilaritySpec::of(SimilarityKind::SF5);
        break;
    case PatternPreset::CONTRAST:
        sel.mining.minsup = 0.1;
        sel.mining.gap = GapBounds(0, 4);
        sel.discriminative.push_back(DiscriminativeSpec::df1(0.3));
        sel.discriminative.push_back(DiscriminativeSpec::df3(0.2));
        sel.similarity = SimilaritySpec::sf2(0.2);
        break;
    case PatternPreset::GAPPED:
        sel.mining.gap = GapBounds(0, 4);
        sel.similarity = SimilaritySpec::of(SimilarityKind::SF4);
        break;
    }
    return sel;
}

std::vector<MinedPattern> select_pattern_references(std::span<const LabeledSequence> train, const PatternSelection& selection,
                                                    std::size_t num_classes, unsigned threads)
{
    for (const auto& d : selection.discriminative) d.validate();
    if (num_classes == 0) num_classes = infer_num_classes(train);
    auto mined = mine_frequent(train, selection.mining, num_classes, threads);

    auto passes_disc = [&](const MinedPattern& m) {
        if (selection.discriminative.empty()) return true;
        std::vector<ClassId> targets;
        if (selection.discriminative.front().target) targets.push_back(*selection.discriminative.front().target);
        else
            for (ClassId c = 0; c < num_classes; ++c)
                if (m.stats.class_size[c] > 0) targets.push_back(c);
        for (auto c : targets) {
            bool all = true;
            for (auto spec : selection.discriminative) {
                if (!spec.target) spec.target = c;
                if (!discriminative_eval(m.pattern, m.stats, spec, mined).passes) {
                    all = false;
                    break;
                }
            }
            if (all) return true;
        }
        return false;
    };

    auto passes_interest = [&](const MinedPattern& m) {
        if (!selection.minint) return true;
        for (std::size_t c = 0; c < num_classes; ++c)
            if (m.stats.class_size[c] > 0 && m.stats.support[c] >= selection.mining.minsup && m.stats.interest[c] >= *selection.minint)
                return true;
        return false;
    };

    std::vector<char> keep(mined.size(), 0);
    parallel_for(mined.size(), threads, [&](std::size_t i) {
        const auto& m = mined[i];
        keep[i] = structural_filters(m, mined, selection.structural) && passes_interest(m) && passes_disc(m);
    });

    std::vector<MinedPattern> out;
    for (std::size_t i = 0; i < mined.size(); ++i)
        if (keep[i]) out.push_back(mined[i]);
    return out;
}

void write_patterns_tsv(std::ostream& out, std::span<const MinedPattern> patterns, const Alphabet& alphabet,
                        std::span<const std::string> class_names)
{
    out << "pattern\tlength";
    for (const auto& name : class_names)
        out << fmt::format("\tcount[{0}]\tsupport[{0}]\toccount[{0}]\tcohesion[{0}]\tinterest[{0}]", name);
    out << '\n';
    for (const auto& m : patterns) {
        out << render(m.pattern.items, alphabet) << '\t' << m.pattern.size();
        for (std::size_t c = 0; c < class_names.size(); ++c) {
            const bool has = c < m.stats.num_classes();
            out << fmt::format("\t{}\t{:.17g}\t{}\t{:.17g}\t{:.17g}", has ? m.stats.count[c] : 0, has ? m.stats.support[c] : 0.0,
                               has ? m.stats.occount[c] : 0, has ? m.stats.cohesion[c] : 0.0, has ? m.stats.interest[c] : 0.0);
        }
        out << '\n';
    }
}

}  // namespace refseq
