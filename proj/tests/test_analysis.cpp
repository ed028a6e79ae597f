// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sdfilter/analysis.hpp"
#include "sdfilter/errors.hpp"
#include "test_support.hpp"

using namespace sdfilter;
namespace t = sdfilter::testing;

namespace {

struct DilutionSetup {
    ToyEncoder plain{42};
    ConceptSet set = canonical_fixture(plain);
    std::vector<std::string> fillers;
    ToyEncoder encoder;

    explicit DilutionSetup(std::size_t n) : fillers(make_names(n)), encoder(42, t::orthonormal_lexicon(set, fillers)) {}

    static std::vector<std::string> make_names(std::size_t n) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back("filler" + std::to_string(i));
        return out;
    }
};

}  // namespace

TEST_CASE("dilution with orthonormal fillers follows 1/sqrt(n+1)") {
    const DilutionSetup s(30);
    const auto nude = *s.set.find_unsafe("nude");
    const auto curve = dilution_curve("nude", s.fillers, s.encoder, s.set, nude);
    REQUIRE(curve.points.size() == 31);
    for (const auto& p : curve.points) {
        CAPTURE(p.filler_count);
        CHECK(std::fabs(p.similarity - 1.0 / std::sqrt(double(p.filler_count) + 1.0)) <= 1e-5);
    }
    CHECK(curve.points[3].similarity == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(curve.points[0].text == "nude");
    CHECK(curve.points[2].text == "nude filler0 filler1");
    CHECK(curve.points[26].verdict_unsafe);
    CHECK_FALSE(curve.points[27].verdict_unsafe);
    REQUIRE(curve.first_safe());
    CHECK(*curve.first_safe() == 27);
}

TEST_CASE("dilution verdicts match check_image on the same text") {
    const DilutionSetup s(12);
    const auto sex = *s.set.find_unsafe("sex");
    const auto curve = dilution_curve("sex", s.fillers, s.encoder, s.set, sex);
    for (const auto& p : curve.points) {
        CHECK(p.verdict_unsafe == check_image(s.encoder.encode(p.text), s.set).is_unsafe);
    }
}

TEST_CASE("dilution with random toy fillers eventually evades the filter") {
    const ToyEncoder enc(42);
    const auto set = canonical_fixture(enc);
    std::vector<std::string> fillers;
    for (int i = 0; i < 30; ++i) fillers.push_back("benign" + std::to_string(i));
    const auto curve = dilution_curve("nude", fillers, enc, set, *set.find_unsafe("nude"));
    CHECK(curve.points.front().verdict_unsafe);
    REQUIRE(curve.first_safe());
    CHECK(*curve.first_safe() <= 30);
    CHECK(curve.points.back().similarity == doctest::Approx(1.0 / std::sqrt(31.0)).epsilon(0.3));
}

TEST_CASE("dilution limits and errors") {
    const DilutionSetup s(5);
    const auto nude = *s.set.find_unsafe("nude");
    CHECK(dilution_curve("nude", s.fillers, s.encoder, s.set, nude, 0).points.size() == 1);
    CHECK(dilution_curve("nude", s.fillers, s.encoder, s.set, nude, 3).points.size() == 4);
    CHECK(dilution_curve("nude", s.fillers, s.encoder, s.set, nude, 30).points.size() == 6);
    CHECK_THROWS_AS(dilution_curve("nude", s.fillers, s.encoder, s.set, 17), ParameterError);
    CHECK_THROWS_AS(dilution_curve("", s.fillers, s.encoder, s.set, nude), EncoderError);

    const auto curve = dilution_curve("nude", s.fillers, s.encoder, s.set, nude, 2);
    CHECK_FALSE(curve.first_safe());
    const auto text = format_dilution_curve(curve, s.set);
    CHECK(text.find("nude") != std::string::npos);
}

TEST_CASE("corpus labels") {
    const auto a = parse_corpus_label("img7:safe", 0);
    CHECK(a.id == "img7");
    CHECK_FALSE(a.labeled_unsafe);
    const auto b = parse_corpus_label("run:3:unsafe", 1);
    CHECK(b.id == "run:3");
    CHECK(b.labeled_unsafe);
    CHECK_THROWS_AS(parse_corpus_label("img7", 2), LabelError);
    CHECK_THROWS_AS(parse_corpus_label(":safe", 2), LabelError);
    CHECK_THROWS_AS(parse_corpus_label("img7:maybe", 2), LabelError);
    try {
        parse_corpus_label("x:bad", 4);
    } catch (const LabelError& e) {
        CHECK(e.row() == 4);
    }
}

TEST_CASE("corpus tallies are exact ratios") {
    const ToyEncoder enc(42);
    const auto set = canonical_fixture(enc);
    const auto nsfw = *set.find_unsafe("nsfw");

    SUBCASE("8 of 15 safe rows flagged") {
        const auto corpus = t::over_threshold_corpus(set, nsfw, 15, 8);
        const auto stats = eval_corpus(corpus, set);
        CHECK(stats.n_total == 15);
        CHECK(stats.n_flagged == 8);
        CHECK(stats.false_positive_rate == Ratio{8, 15});
        CHECK(*stats.false_positive_rate.value() == doctest::Approx(8.0 / 15.0));
        CHECK_FALSE(stats.false_negative_rate.defined());
        CHECK_FALSE(stats.false_negative_rate.value());
        CHECK(stats.per_concept_trigger_counts[nsfw] == 8);
        const auto text = format_corpus_stats(stats, set);
        CHECK(text.find("(8/15)") != std::string::npos);
        CHECK(text.find("undefined (0/0, no unsafe rows)") != std::string::npos);
    }
    SUBCASE("five safe rows far from every concept") {
        const auto stats = eval_corpus(t::over_threshold_corpus(set, nsfw, 5, 0), set);
        CHECK(stats.false_positive_rate == Ratio{0, 5});
        CHECK(*stats.false_positive_rate.value() == 0.0f);
    }
    SUBCASE("single row") {
        const auto stats = eval_corpus(t::over_threshold_corpus(set, nsfw, 1, 1), set);
        CHECK(stats.false_positive_rate == Ratio{1, 1});
    }
    SUBCASE("unsafe labels drive the false negative rate") {
        auto corpus = t::over_threshold_corpus(set, nsfw, 4, 2);
        EmbeddingFile relabeled(corpus.dim());
        for (std::size_t r = 0; r < corpus.size(); ++r) {
            relabeled.add_row("r" + std::to_string(r) + (r % 2 == 0 ? ":unsafe" : ":safe"), corpus.vector(r));
        }
        // rows 0,1 flagged; row 0 unsafe (hit), row 2 unsafe (missed), row 1 safe (false positive)
        const auto stats = eval_corpus(relabeled, set);
        CHECK(stats.n_labeled_unsafe == 2);
        CHECK(stats.false_negative_rate == Ratio{1, 2});
        CHECK(stats.false_positive_rate == Ratio{1, 2});
    }
}

TEST_CASE("corpus tallies ignore row order and thread count") {
    const ToyEncoder enc(42);
    const auto set = canonical_fixture(enc);
    const auto corpus = t::over_threshold_corpus(set, *set.find_unsafe("porn"), 15, 8);
    const auto reference = eval_corpus(corpus, set, 1);

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(order.begin(), order.end(), rng);
        EmbeddingFile shuffled(corpus.dim());
        for (auto r : order) shuffled.add_row(corpus.label(r), corpus.vector(r));
        const auto stats = eval_corpus(shuffled, set, 3);
        CHECK(stats.false_positive_rate == reference.false_positive_rate);
        CHECK(stats.per_concept_trigger_counts == reference.per_concept_trigger_counts);
        CHECK(stats.n_flagged == reference.n_flagged);
    }
}

TEST_CASE("corpus errors") {
    const ToyEncoder enc(42);
    const auto set = canonical_fixture(enc);
    CHECK_THROWS_AS(eval_corpus(EmbeddingFile(768), set), EmptyCorpusError);
    EmbeddingFile small(2);
    small.add_row("a:safe", EmbeddingVector({1.0f, 0.0f}));
    CHECK_THROWS_AS(eval_corpus(small, set), DimensionError);
    EmbeddingFile bad(768);
    std::vector<float> v(768, 0.0f);
    v[0] = 1.0f;
    bad.add_row("a:safe", v);
    bad.add_row("unlabeled", v);
    CHECK_THROWS_AS(eval_corpus(bad, set), LabelError);
}
