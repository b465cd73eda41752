#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "refseq/similarity.hpp"

using namespace refseq;
using oracle::seq;

namespace {

Sequence tokens(std::string_view word)
{
    Sequence s;
    for (char c : word) s.push_back(static_cast<ItemId>(c));
    return s;
}

}  // namespace

TEST_CASE("lcs_len")
{
    CHECK(lcs_len(seq("abcde"), seq("ecdc")) == 2);
    CHECK(lcs_len(seq("abcab"), seq("abcab")) == 5);
    CHECK(lcs_len(seq(""), seq("abc")) == 0);

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        auto s = oracle::random_sequence(rng, 0, 12, 4);
        auto t = oracle::random_sequence(rng, 0, 12, 4);
        const auto l = lcs_len(s, t);
        CHECK(l == oracle::lcs_bruteforce(s, t));
        CHECK(l == lcs_len(t, s));
    }
}

TEST_CASE("edit_distance")
{
    CHECK(edit_distance(seq("abc"), seq("abc")) == 0);
    CHECK(edit_distance(seq("abc"), seq("axc")) == 1);
    CHECK(edit_distance(tokens("kitten"), tokens("sitting")) == 3);
    CHECK(edit_distance(seq(""), seq("abc")) == 3);

    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 300; ++trial) {
        auto a = oracle::random_sequence(rng, 0, 8, 3);
        auto b = oracle::random_sequence(rng, 0, 8, 3);
        auto c = oracle::random_sequence(rng, 0, 8, 3);
        CHECK(edit_distance(a, b) == edit_distance(b, a));
        CHECK(edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c));
    }
}

TEST_CASE("jaccard_lcs")
{
    CHECK(jaccard_lcs(seq("abcde"), seq("ecdc")) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(jaccard_lcs(seq("abc"), seq("abc")) == 1.0);
    CHECK(jaccard_lcs(seq("abc"), seq("def")) == 0.0);
    CHECK(jaccard_lcs(seq(""), seq("a")) == 0.0);
    CHECK_THROWS_AS(jaccard_lcs(seq(""), seq("")), std::invalid_argument);
}

TEST_CASE("ssk_raw")
{
    for (double lambda : {0.1, 0.5, 0.9})
        CHECK(std::abs(ssk_raw(seq("abcde"), seq("ecdc"), 1, lambda) - 4 * lambda * lambda) < 1e-12);
    CHECK(ssk_raw(seq("ab"), seq("abc"), 3, 0.5) == 0.0);
    CHECK_THROWS_AS(ssk_raw(seq("ab"), seq("ab"), 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ssk_raw(seq("ab"), seq("ab"), 1, 1.0), std::invalid_argument);

    SUBCASE("matches explicit embedding enumeration")
    {
        std::mt19937_64 rng(23);
        for (std::size_t n : {1u, 2u, 3u})
            for (int trial = 0; trial < 100; ++trial) {
                auto s = oracle::random_sequence(rng, 0, 10, 3);
                auto t = oracle::random_sequence(rng, 0, 10, 3);
                const double k = ssk_raw(s, t, n, 0.6);
                CHECK(std::abs(k - oracle::ssk_enumerate(s, t, n, 0.6)) < 1e-9);
                CHECK(std::abs(k - ssk_raw(t, s, n, 0.6)) < 1e-9);
            }
    }
}

TEST_CASE("ssk_normalized")
{
    CHECK(std::abs(ssk_normalized(seq("abcde"), seq("ecdc"), 1, 0.3) - 4.0 / std::sqrt(30.0)) < 1e-9);
    CHECK(std::abs(ssk_normalized(seq("abcab"), seq("abcab"), 2, 0.5) - 1.0) < 1e-9);
    CHECK(ssk_normalized(seq("abc"), seq("def"), 1, 0.5) == 0.0);
    // shorter than n: defined as 0 instead of failing
    CHECK(ssk_normalized(seq("a"), seq("abc"), 2, 0.5) == 0.0);
}

TEST_CASE("lcs_min_norm")
{
    CHECK(lcs_min_norm(seq("abcde"), seq("ecdc")) == 0.5);
    CHECK(lcs_min_norm(seq("abc"), seq("abc")) == 1.0);
    CHECK(lcs_min_norm(seq("ac"), seq("xaybc")) == 1.0);
    CHECK_THROWS_AS(lcs_min_norm(seq(""), seq("abc")), std::invalid_argument);
}

TEST_CASE("evaluate the catalog kinds")
{
    const auto s = seq("abcde");
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF1), s, seq("cd")) == 1.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF1), s, seq("dc")) == 0.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF3), s, seq("cd")) == 1.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF3), seq("cadcd"), seq("cd")) == 1.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF3), seq("cad"), seq("cd")) == doctest::Approx(2.0 / 3.0));
    CHECK(evaluate(SimilaritySpec::sf2(0.4), s, seq("abd")) == 1.0);
    CHECK(evaluate(SimilaritySpec::sf2(0.0), s, seq("abd")) == 0.0);
    CHECK(evaluate(SimilaritySpec::sf2(0.4), seq("ab"), seq("abd")) == 0.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF4), seq("abab"), seq("ab")) == 2.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF5), seq("abab"), seq("ba")) == 1.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF5), seq("abab"), seq("c")) == 0.0);
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::SF6), s, seq("ecdc")) == doctest::Approx(0.4));
    CHECK(evaluate(SimilaritySpec::of(SimilarityKind::LCS_MIN), s, seq("ecdc")) == 0.5);
    CHECK(std::abs(evaluate(SimilaritySpec::ssk(1, 0.5), s, seq("ecdc")) - 4.0 / std::sqrt(30.0)) < 1e-9);
}

TEST_CASE("similarity spec validation")
{
    SimilaritySpec spec;
    spec.kind = SimilarityKind::SF2;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    CHECK_THROWS_AS(SimilaritySpec::sf2(1.5), std::invalid_argument);
    CHECK_THROWS_AS(SimilaritySpec::ssk(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(SimilaritySpec::ssk(0, 0.5), std::invalid_argument);
    spec = SimilaritySpec::of(SimilarityKind::SF1);
    spec.lambda = 0.5;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    CHECK(parse_similarity_kind("Jaccard") == SimilarityKind::JACCARD_LCS);
    CHECK(parse_similarity_kind("lcs-min") == SimilarityKind::LCS_MIN);
    CHECK_THROWS_AS(parse_similarity_kind("cosine"), std::invalid_argument);
}

TEST_CASE("similarity ranges and symmetry on random pairs")
{
    std::mt19937_64 rng(24);
    const std::vector<SimilaritySpec> specs{
        SimilaritySpec::of(SimilarityKind::SF1),     SimilaritySpec::sf2(0.3),
        SimilaritySpec::of(SimilarityKind::SF3),     SimilaritySpec::of(SimilarityKind::SF6),
        SimilaritySpec::of(SimilarityKind::JACCARD_LCS), SimilaritySpec::ssk(2, 0.5),
        SimilaritySpec::of(SimilarityKind::LCS_MIN),
    };
    for (int trial = 0; trial < 200; ++trial) {
        auto s = oracle::random_sequence(rng, 1, 10, 3);
        auto t = oracle::random_sequence(rng, 1, 10, 3);
        for (const auto& spec : specs) {
            const double v = evaluate(spec, s, t);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (spec.kind == SimilarityKind::SF1 || spec.kind == SimilarityKind::SF2) CHECK((v == 0.0 || v == 1.0));
            if (spec.symmetric()) CHECK(std::abs(v - evaluate(spec, t, s)) < 1e-12);
        }
        CHECK(std::abs(evaluate(specs[4], s, s) - 1.0) < 1e-12);
        CHECK(std::abs(evaluate(specs[6], s, s) - 1.0) < 1e-12);
    }
}

TEST_CASE("similarity_matrix")
{
    std::vector<Sequence> a{seq("abc"), seq("bca"), seq("cab")};
    std::vector<Sequence> b{seq("ab"), seq("ca")};
    const auto spec = SimilaritySpec::of(SimilarityKind::JACCARD_LCS);
    auto m = similarity_matrix(a, b, spec);
    CHECK(m.rows == 3);
    CHECK(m.cols == 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(m(i, j) == jaccard_lcs(a[i], b[j]));

    auto sq = similarity_matrix(a, a, spec);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(sq(i, i) == 1.0);
        for (std::size_t j = 0; j < 3; ++j) CHECK(sq(i, j) == sq(j, i));
    }

    SUBCASE("directional kinds treat rows as data and columns as references")
    {
        auto sf1 = similarity_matrix(std::vector<Sequence>{seq("abcd")}, std::vector<Sequence>{seq("bd"), seq("db")},
                                     SimilaritySpec::of(SimilarityKind::SF1));
        CHECK(sf1(0, 0) == 1.0);
        CHECK(sf1(0, 1) == 0.0);
    }

    SUBCASE("schedule independence")
    {
        std::mt19937_64 rng(25);
        std::vector<Sequence> big;
        for (int i = 0; i < 40; ++i) big.push_back(oracle::random_sequence(rng, 1, 20, 5));
        auto one = similarity_matrix(big, big, SimilaritySpec::ssk(2, 0.7), 1);
        auto many = similarity_matrix(big, big, SimilaritySpec::ssk(2, 0.7), 7);
        CHECK(one.values == many.values);
    }

    SUBCASE("element errors carry their location")
    {
        std::vector<Sequence> with_empty{seq("ab"), seq("")};
        try {
            similarity_matrix(with_empty, with_empty, SimilaritySpec::of(SimilarityKind::LCS_MIN), 3);
            FAIL("expected an error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("(0, 1)") != std::string::npos);
        }
    }

    CHECK_THROWS_AS(similarity_matrix(std::vector<Sequence>{}, b, spec), std::invalid_argument);
}
