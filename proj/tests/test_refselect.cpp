#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "refseq/refselect.hpp"

using namespace refseq;
using oracle::seq;

namespace {

SimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows)
{
    SimilarityMatrix m;
    m.rows = rows.size();
    m.cols = rows.size();
    for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
    return m;
}

std::vector<LabeledSequence> two_disjoint_classes()
{
    return {{seq("abc"), 0}, {seq("abc"), 0}, {seq("abc"), 0}, {seq("xyz"), 1}, {seq("xyz"), 1}, {seq("xyz"), 1}};
}

}  // namespace

TEST_CASE("select_all keeps every sequence in order")
{
    std::vector<LabeledSequence> train;
    for (int i = 0; i < 10; ++i) train.push_back({seq(i % 2 ? "ab" : "ab"), static_cast<ClassId>(i % 2)});
    auto refs = select_all(train);
    REQUIRE(refs.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(refs.items[i].source == i);
        CHECK(refs.items[i].provenance == "train:" + std::to_string(i));
    }
    CHECK_THROWS_AS(select_all(std::vector<LabeledSequence>{}), std::invalid_argument);
}

TEST_CASE("gahc on the crafted four-point instance")
{
    const std::vector<std::vector<double>> rows{
        {1.0, 0.9, 0.1, 0.1},
        {0.9, 1.0, 0.1, 0.1},
        {0.1, 0.1, 1.0, 0.8},
        {0.1, 0.1, 0.8, 1.0},
    };
    auto result = gahc_cluster(from_rows(rows), 2);
    REQUIRE(result.merges.size() == 2);
    CHECK(result.merges[0].keep == 0);
    CHECK(result.merges[0].absorbed == 1);
    CHECK(result.merges[0].similarity == doctest::Approx(0.9));
    CHECK(result.merges[1].keep == 2);
    CHECK(result.merges[1].absorbed == 3);
    REQUIRE(result.clusters.size() == 2);
    CHECK(result.clusters[0] == std::vector<std::size_t>{0, 1});
    CHECK(result.clusters[1] == std::vector<std::size_t>{2, 3});

    auto one = gahc_cluster(from_rows(rows), 1);
    CHECK(one.merges.back().similarity == doctest::Approx(0.1));
    CHECK(one.clusters.size() == 1);

    CHECK_THROWS_AS(gahc_cluster(from_rows(rows), 0), std::invalid_argument);
    CHECK_THROWS_AS(gahc_cluster(from_rows(rows), 5), std::invalid_argument);
}

TEST_CASE("gahc matches brute-force average linkage")
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 7;
        std::vector<std::vector<double>> rows(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) rows[i][j] = i == j ? 1.0 : u(rng);
        for (std::size_t target = 1; target <= n; ++target) {
            auto got = gahc_cluster(from_rows(rows), target);
            auto want = oracle::average_linkage_bruteforce(rows, target);
            CHECK(got.merges.size() == n - target);
            REQUIRE(got.merges.size() == want.merge_sims.size());
            for (std::size_t m = 0; m < want.merge_sims.size(); ++m) CHECK(std::abs(got.merges[m].similarity - want.merge_sims[m]) < 1e-9);
            auto clusters = want.clusters;
            std::sort(clusters.begin(), clusters.end());
            CHECK(got.clusters == clusters);
        }
    }
}

TEST_CASE("select_gahc")
{
    std::vector<Sequence> cr{seq("abc"), seq("abd"), seq("xyz"), seq("xyw"), seq("abce")};
    const auto spec = SimilaritySpec::of(SimilarityKind::JACCARD_LCS);
    auto all = select_gahc(cr, spec, cr.size());
    CHECK(all.sequences() == cr);

    auto single = select_gahc(cr, spec, 1);
    REQUIRE(single.size() == 1);
    CHECK(single.items[0].source == 0);

    auto two = select_gahc(cr, spec, 2);
    REQUIRE(two.size() == 2);
    CHECK(two.items[0].source == 0);
    CHECK(two.items[1].source == 2);

    CHECK_THROWS_AS(select_gahc(cr, spec, 0), std::invalid_argument);
    CHECK_THROWS_AS(select_gahc(cr, spec, 6), std::invalid_argument);
}

TEST_CASE("mann_whitney_p")
{
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    CHECK(mann_whitney_p(a, b) == 0.1);
    CHECK(mann_whitney_p(b, a) == 0.1);

    const std::vector<double> same{0.5, 0.5, 0.5};
    CHECK(mann_whitney_p(same, same) == 1.0);
    CHECK(mann_whitney_p(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 1.0);

    // tied samples take the normal path (reference values from scipy)
    CHECK(mann_whitney_p(std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0}) == doctest::Approx(0.046854177603873774).epsilon(1e-12));
    CHECK(mann_whitney_p(std::vector<double>{1, 2, 3.5, 7}, std::vector<double>{2, 5, 6, 8, 9}) ==
          doctest::Approx(0.21874201001089977).epsilon(1e-12));

    CHECK_THROWS_AS(mann_whitney_p(std::vector<double>{}, b), std::invalid_argument);

    SUBCASE("exact path agrees with full split enumeration")
    {
        std::mt19937_64 rng(42);
        std::normal_distribution<double> nd;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n1 = 1 + trial % 6, n2 = 1 + (trial / 6) % 6;
            std::vector<double> x(n1), y(n2);
            for (auto& v : x) v = nd(rng);
            for (auto& v : y) v = nd(rng) + 0.8;
            const double p = mann_whitney_p(x, y);
            CHECK(std::abs(p - oracle::mann_whitney_exact_enumeration(x, y)) < 1e-12);
            CHECK(p > 0.0);
            CHECK(p <= 1.0);
        }
    }

    SUBCASE("invariant under strictly increasing transforms")
    {
        std::mt19937_64 rng(43);
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(7), y(9);
            for (auto& v : x) v = std::round(ud(rng) * 5) / 5;  // plenty of ties
            for (auto& v : y) v = std::round(ud(rng) * 5) / 5;
            auto tx = x, ty = y;
            for (auto& v : tx) v = std::exp(3 * v) + 2;
            for (auto& v : ty) v = std::exp(3 * v) + 2;
            CHECK(mann_whitney_p(x, y) == doctest::Approx(mann_whitney_p(tx, ty)).epsilon(1e-12));
        }
    }
}

TEST_CASE("bh_select")
{
    CHECK(bh_select(std::vector<double>{0.01, 0.02, 0.04, 0.5}, 0.05) == 2);
    CHECK(bh_select(std::vector<double>{0, 0, 0}, 0.05) == 3);
    CHECK(bh_select(std::vector<double>{1, 1}, 0.5) == 0);
    CHECK(bh_select(std::vector<double>{}, 0.5) == 0);
    CHECK_THROWS_AS(bh_select(std::vector<double>{0.2, 0.1}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(bh_select(std::vector<double>{0.1}, 0.0), std::invalid_argument);

    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.0, 0.2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(10);
        for (auto& v : p) v = u(rng);
        std::sort(p.begin(), p.end());
        std::size_t prev = 0;
        for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
            const auto k = bh_select(p, alpha);
            CHECK(k >= prev);
            prev = k;
        }
    }
}

TEST_CASE("select_mht")
{
    SUBCASE("separated classes keep everything")
    {
        auto train = two_disjoint_classes();
        auto [refs, report] = select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.05);
        CHECK(refs.size() == 6);
        REQUIRE(report.entries.size() == 6);
        for (const auto& e : report.entries) {
            CHECK(e.kept);
            CHECK(e.p_value == doctest::Approx(0.046854177603873774).epsilon(1e-12));
        }
        CHECK(report.maxindex.at(0) == 3);
        CHECK(report.maxindex.at(1) == 3);
        // ordered by (class, p-rank) with index tie-breaking
        CHECK(refs.items[0].source == 0);
        CHECK(refs.items[3].source == 3);
        CHECK(refs.items[5].source_class == ClassId{1});

        std::ostringstream os;
        write_mht_report_tsv(os, report);
        CHECK(os.str().rfind("candidate\tclass\tpvalue\trank\tkept\n0\t0\t", 0) == 0);
    }

    SUBCASE("alpha near one keeps every candidate with p < 1")
    {
        std::mt19937_64 rng(45);
        std::vector<LabeledSequence> train;
        for (int i = 0; i < 16; ++i) train.push_back({oracle::random_sequence(rng, 4, 10, 4), static_cast<ClassId>(i % 2)});
        auto [refs, report] = select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.999999999);
        std::size_t below_one = 0;
        for (const auto& e : report.entries) below_one += e.p_value < 0.999999999 ? 1 : 0;
        CHECK(refs.size() >= below_one);
    }

    SUBCASE("excluding self-similarity changes the positive sample")
    {
        auto train = two_disjoint_classes();
        auto with_self = select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.2, true).second;
        auto without = select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.2, false).second;
        CHECK(with_self.entries[0].p_value != without.entries[0].p_value);
    }

    SUBCASE("shuffled labels keep almost nothing")
    {
        std::mt19937_64 rng(46);
        std::size_t kept = 0, total = 0;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<LabeledSequence> train;
            for (int i = 0; i < 30; ++i) train.push_back({oracle::random_sequence(rng, 5, 12, 4), static_cast<ClassId>(i % 2)});
            total += train.size();
            try {
                kept += select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.05).first.size();
            } catch (const NoReferencesError&) {
            }
        }
        CHECK(static_cast<double>(kept) / static_cast<double>(total) < 0.05);
    }

    SUBCASE("errors")
    {
        std::vector<LabeledSequence> one{{seq("ab"), 0}, {seq("ba"), 0}};
        CHECK_THROWS_AS(select_mht(one, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.05), std::invalid_argument);
        CHECK_THROWS_AS(select_mht(two_disjoint_classes(), SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 1.0), std::invalid_argument);
        std::vector<LabeledSequence> flat{{seq("ab"), 0}, {seq("ab"), 0}, {seq("ab"), 1}, {seq("ab"), 1}};
        CHECK_THROWS_AS(select_mht(flat, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.05), NoReferencesError);
    }

    SUBCASE("singleton class is tested degenerately and noted")
    {
        std::vector<LabeledSequence> train{{seq("abc"), 0}, {seq("xyz"), 1}, {seq("xyz"), 1}, {seq("xyy"), 1}};
        auto [refs, report] = select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.5);
        CHECK(!report.notes.empty());
        CHECK(report.entries.size() == 4);
    }

    SUBCASE("deterministic across thread counts")
    {
        std::mt19937_64 rng(47);
        std::vector<LabeledSequence> train;
        for (int i = 0; i < 24; ++i) {
            auto s = oracle::random_sequence(rng, 4, 10, 4);
            if (i % 2) s.push_back(7);
            train.push_back({s, static_cast<ClassId>(i % 2)});
        }
        auto a = select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.05, true, 1);
        auto b = select_mht(train, SimilaritySpec::of(SimilarityKind::JACCARD_LCS), 0.05, true, 5);
        REQUIRE(a.second.entries.size() == b.second.entries.size());
        for (std::size_t i = 0; i < a.second.entries.size(); ++i) {
            CHECK(a.second.entries[i].candidate == b.second.entries[i].candidate);
            CHECK(a.second.entries[i].p_value == b.second.entries[i].p_value);
        }
    }
}

TEST_CASE("select_references dispatch")
{
    std::mt19937_64 rng(48);
    std::vector<LabeledSequence> train;
    for (int i = 0; i < 20; ++i) train.push_back({oracle::random_sequence(rng, 3, 8, 4), static_cast<ClassId>(i % 2)});
    const auto spec = SimilaritySpec::of(SimilarityKind::JACCARD_LCS);

    CHECK(select_references(train, SelectAll{}, spec).size() == 20);
    auto gahc = select_references(train, SelectGahc{}, spec);
    CHECK(gahc.size() == 2);
    CHECK(gahc.items[0].source_class.has_value());
    CHECK(select_references(train, SelectGahc{5}, spec).size() == 5);

    SelectPatterns fsp;
    auto refs = select_references(train, fsp, spec);
    auto direct = select_pattern_references(train, fsp.selection);
    REQUIRE(refs.size() == direct.size());
    for (std::size_t i = 0; i < refs.size(); ++i) CHECK(refs.items[i].sequence == direct[i].pattern.items);

    CHECK(describe(SelectionMethod{SelectMht{0.05, true}}) == "R-MHT(alpha=0.05)");
    CHECK(describe(SelectionMethod{SelectGahc{3}}) == "R-GAHC(pointnum=3)");
}
