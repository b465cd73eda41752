#include "refseq/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "refseq/parallel.hpp"

namespace refseq {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view to_string(SimilarityKind kind)
{
    switch (kind) {
    case SimilarityKind::SF1: return "sf1";
    case SimilarityKind::SF2: return "sf2";
    case SimilarityKind::SF3: return "sf3";
    case SimilarityKind::SF4: return "sf4";
    case SimilarityKind::SF5: return "sf5";
    case SimilarityKind::SF6: return "sf6";
    case SimilarityKind::JACCARD_LCS: return "jaccard";
    case SimilarityKind::SSK: return "ssk";
    case SimilarityKind::LCS_MIN: return "lcs-min";
    }
    return "?";
}

SimilarityKind parse_similarity_kind(std::string_view name)
{
    const auto key = lower(name);
    if (key == "sf1") return SimilarityKind::SF1;
    if (key == "sf2") return SimilarityKind::SF2;
    if (key == "sf3") return SimilarityKind::SF3;
    if (key == "sf4") return SimilarityKind::SF4;
    if (key == "sf5") return SimilarityKind::SF5;
    if (key == "sf6") return SimilarityKind::SF6;
    if (key == "jaccard" || key == "jaccard-lcs" || key == "jaccard_lcs" || key == "j") return SimilarityKind::JACCARD_LCS;
    if (key == "ssk" || key == "s") return SimilarityKind::SSK;
    if (key == "lcs-min" || key == "lcs_min" || key == "nlcs" || key == "n") return SimilarityKind::LCS_MIN;
    throw std::invalid_argument(fmt::format("unknown similarity kind '{}'", name));
}

SimilaritySpec SimilaritySpec::of(SimilarityKind kind)
{
    if (kind == SimilarityKind::SF2) return sf2(0.0);
    if (kind == SimilarityKind::SSK) return ssk();
    SimilaritySpec spec;
    spec.kind = kind;
    return spec;
}

SimilaritySpec SimilaritySpec::sf2(double gamma)
{
    SimilaritySpec spec;
    spec.kind = SimilarityKind::SF2;
    spec.gamma = gamma;
    spec.validate();
    return spec;
}

SimilaritySpec SimilaritySpec::ssk(std::size_t n, double lambda)
{
    SimilaritySpec spec;
    spec.kind = SimilarityKind::SSK;
    spec.n = n;
    spec.lambda = lambda;
    spec.validate();
    return spec;
}

void SimilaritySpec::validate() const
{
    const bool wants_gamma = kind == SimilarityKind::SF2;
    const bool wants_ssk = kind == SimilarityKind::SSK;
    if (wants_gamma != gamma.has_value())
        throw std::invalid_argument(fmt::format("similarity {}: gamma is {}", to_string(kind), wants_gamma ? "required" : "not applicable"));
    if (wants_ssk != lambda.has_value() || wants_ssk != n.has_value())
        throw std::invalid_argument(fmt::format("similarity {}: lambda/n are {}", to_string(kind), wants_ssk ? "required" : "not applicable"));
    if (gamma && !(*gamma >= 0.0 && *gamma <= 1.0))
        throw std::invalid_argument(fmt::format("gamma must lie in [0,1] (got {})", *gamma));
    if (lambda && !(*lambda > 0.0 && *lambda < 1.0))
        throw std::invalid_argument(fmt::format("lambda must lie in (0,1) (got {})", *lambda));
    if (n && *n == 0) throw std::invalid_argument("ssk subsequence length n must be positive");
}

bool SimilaritySpec::symmetric() const noexcept
{
    switch (kind) {
    case SimilarityKind::SF6:
    case SimilarityKind::JACCARD_LCS:
    case SimilarityKind::SSK:
    case SimilarityKind::LCS_MIN: return true;
    default: return false;
    }
}

std::string SimilaritySpec::describe() const
{
    std::string out(to_string(kind));
    if (gamma) out += fmt::format("(gamma={})", *gamma);
    if (n) out += fmt::format("(n={},lambda={})", *n, *lambda);
    return out;
}

std::size_t lcs_len(SequenceView s, SequenceView t)
{
    if (s.size() < t.size()) std::swap(s, t);
    std::vector<std::size_t> row(t.size() + 1, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t diag = 0;  // row[j] of the previous iteration
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = s[i] == t[j - 1] ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return row[t.size()];
}

std::size_t edit_distance(SequenceView a, SequenceView b)
{
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t subst = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, subst});
            diag = up;
        }
    }
    return row[b.size()];
}

double jaccard_lcs(SequenceView s, SequenceView t)
{
    if (s.empty() && t.empty()) throw std::invalid_argument("jaccard_lcs: both sequences are empty");
    const auto common = static_cast<double>(lcs_len(s, t));
    return common / (static_cast<double>(s.size() + t.size()) - common);
}

double ssk_raw(SequenceView s, SequenceView t, std::size_t n, double lambda)
{
    if (n == 0) throw std::invalid_argument("ssk: n must be positive");
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument(fmt::format("ssk: lambda must lie in (0,1) (got {})", lambda));
    if (s.size() < n || t.size() < n) return 0.0;

    const std::size_t rows = s.size() + 1, cols = t.size() + 1;
    const double lambda2 = lambda * lambda;

    // prev holds K'_{i-1}(s[0..a), t[0..b)); K'_0 is identically one.
    std::vector<double> prev(rows * cols, 1.0), cur(rows * cols, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        std::fill(cur.begin(), cur.end(), 0.0);
        for (std::size_t a = 1; a < rows; ++a) {
            double kpp = 0.0;
            for (std::size_t b = 1; b < cols; ++b) {
                kpp *= lambda;
                if (s[a - 1] == t[b - 1]) kpp += lambda2 * prev[(a - 1) * cols + (b - 1)];
                cur[a * cols + b] = lambda * cur[(a - 1) * cols + b] + kpp;
            }
        }
        prev.swap(cur);
    }

    double k = 0.0;
    for (std::size_t a = 1; a < rows; ++a)
        for (std::size_t b = 1; b < cols; ++b)
            if (s[a - 1] == t[b - 1]) k += lambda2 * prev[(a - 1) * cols + (b - 1)];
    return k;
}

double ssk_normalized(SequenceView s, SequenceView t, std::size_t n, double lambda)
{
    const double kss = ssk_raw(s, s, n, lambda);
    const double ktt = ssk_raw(t, t, n, lambda);
    if (kss <= 0.0 || ktt <= 0.0) return 0.0;
    const double value = ssk_raw(s, t, n, lambda) / std::sqrt(kss * ktt);
    return std::min(value, 1.0);
}

double lcs_min_norm(SequenceView s, SequenceView t)
{
    if (s.empty() || t.empty()) throw std::invalid_argument("lcs_min_norm: sequences must be non-empty");
    return static_cast<double>(lcs_len(s, t)) / static_cast<double>(std::min(s.size(), t.size()));
}

namespace {

bool has_similar_window(SequenceView s, SequenceView t, double gamma)
{
    if (s.size() < t.size()) return false;
    const double budget = gamma * static_cast<double>(t.size());
    for (std::size_t start = 0; start + t.size() <= s.size(); ++start)
        if (static_cast<double>(edit_distance(s.subspan(start, t.size()), t)) <= budget) return true;
    return false;
}

}  // namespace

double evaluate(const SimilaritySpec& spec, SequenceView s, SequenceView t)
{
    switch (spec.kind) {
    case SimilarityKind::SF1: return is_subsequence(t, s) ? 1.0 : 0.0;
    case SimilarityKind::SF2: return has_similar_window(s, t, spec.gamma.value_or(0.0)) ? 1.0 : 0.0;
    case SimilarityKind::SF3: {
        const auto window = min_window(t, s);
        return window ? static_cast<double>(t.size()) / static_cast<double>(*window) : 0.0;
    }
    case SimilarityKind::SF4:
    case SimilarityKind::SF5: return static_cast<double>(occount_nonoverlap(t, s));
    case SimilarityKind::SF6:
        if (s.empty() && t.empty()) throw std::invalid_argument("sf6: both sequences are empty");
        return static_cast<double>(lcs_len(s, t)) / static_cast<double>(std::max(s.size(), t.size()));
    case SimilarityKind::JACCARD_LCS: return jaccard_lcs(s, t);
    case SimilarityKind::SSK: return ssk_normalized(s, t, spec.n.value_or(1), spec.lambda.value_or(0.5));
    case SimilarityKind::LCS_MIN: return lcs_min_norm(s, t);
    }
    throw std::logic_error("unhandled similarity kind");
}

SimilarityMatrix similarity_matrix(std::span<const Sequence> a, std::span<const Sequence> b,
                                   const SimilaritySpec& spec, unsigned threads)
{
    if (a.empty() || b.empty()) throw std::invalid_argument("similarity_matrix: both sequence lists must be non-empty");
    spec.validate();

    SimilarityMatrix m;
    m.rows = a.size();
    m.cols = b.size();
    m.spec = spec;
    m.values.assign(m.rows * m.cols, 0.0);

    parallel_for(m.rows, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            try {
                m.values[i * m.cols + j] = evaluate(spec, a[i], b[j]);
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(fmt::format("similarity at ({}, {}): {}", i, j, e.what()));
            }
        }
    });
    return m;
}

}  // namespace refseq
