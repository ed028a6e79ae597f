// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "sdfilter/errors.hpp"
#include "sdfilter/safety_filter.hpp"
#include "test_support.hpp"

using namespace sdfilter;
namespace t = sdfilter::testing;

namespace {

const ConceptSet& fixture() {
    static const ToyEncoder enc(42);
    static const ConceptSet set = canonical_fixture(enc);
    return set;
}

std::size_t index_of(const ConceptSet& set, std::string_view label) {
    const auto i = set.find_unsafe(label);
    REQUIRE(i.has_value());
    return *i;
}

// normalize(alpha * concept + noise): lands near thresholds often enough to
// exercise both verdicts.
EmbeddingVector mixture(std::mt19937_64& rng, const ConceptSet& set) {
    std::uniform_int_distribution<std::size_t> pick(0, set.unsafe().size() + set.special_care().size() - 1);
    std::uniform_real_distribution<double> weight(0.0, 0.35);
    const std::size_t k = pick(rng);
    const auto& c = k < set.unsafe().size() ? set.unsafe()[k] : set.special_care()[k - set.unsafe().size()];
    auto noise = t::unit(t::gaussian(rng, set.dim()));
    const double a = weight(rng);
    const double b = std::sqrt(1.0 - a * a);
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = a * c.embedding[i] + b * noise[i];
    return t::to_embedding(t::unit(noise));
}

}  // namespace

TEST_CASE("image equal to a concept embedding triggers that concept") {
    const auto& set = fixture();
    const auto s = index_of(set, "sexual");
    const auto v = check_image(set.unsafe()[s].embedding, set);
    CHECK(v.is_unsafe);
    CHECK(std::fabs(v.unsafe_scores[s] - 1.0f) <= 1e-6f);
    CHECK(std::find(v.triggered_concepts.begin(), v.triggered_concepts.end(), s) !=
          v.triggered_concepts.end());
    CHECK(v.unsafe_scores.size() == 17);
    CHECK(v.special_scores.size() == 3);
}

TEST_CASE("image orthogonal to every concept is safe") {
    const auto& set = fixture();
    std::vector<t::Vec> concepts;
    for (const auto& c : set.unsafe()) concepts.push_back(t::to_double(c.embedding.values()));
    for (const auto& c : set.special_care()) concepts.push_back(t::to_double(c.embedding.values()));
    const auto basis = t::gram_schmidt(concepts);
    std::mt19937_64 rng(3);
    const auto img = t::to_embedding(t::orthogonalize(t::gaussian(rng, 768), basis));
    const auto v = check_image(img, set);
    CHECK_FALSE(v.is_unsafe);
    CHECK(v.adjustment_applied == 0.0f);
    for (float s : v.unsafe_scores) CHECK(std::fabs(s) <= 1e-6f);
    for (float s : v.special_scores) CHECK(std::fabs(s) <= 1e-6f);
}

TEST_CASE("special-care match lowers every unsafe threshold by the adjustment") {
    const auto& set = fixture();
    const auto sexual = index_of(set, "sexual");
    const auto img = t::to_embedding(t::frame_image(set, set.unsafe()[sexual].embedding.values(),
                                                    set.special_care()[0].embedding.values(), 0.175, 0.21));
    const auto v = check_image(img, set);
    CHECK(std::fabs(v.unsafe_scores[sexual] - 0.175f) <= 1e-6f);
    CHECK(std::fabs(v.special_scores[0] - 0.21f) <= 1e-6f);
    CHECK(v.special_triggered[0]);
    CHECK(v.adjustment_applied == 0.01f);
    CHECK(effective_threshold(v, set, sexual) == doctest::Approx(0.17));
    CHECK(v.is_unsafe);
    CHECK(v.triggered_concepts == std::vector<std::size_t>{sexual});

    const auto plain = check_image(img, set.with_adjustment(0.0f));
    CHECK_FALSE(plain.is_unsafe);
    CHECK(plain.adjustment_applied == 0.0f);
    CHECK(plain.special_triggered[0]);

    const auto text = explain_verdict(plain, set.with_adjustment(0.0f));
    CHECK(text.find("adjustment inactive (special-care young girl fired") != std::string::npos);
}

TEST_CASE("verdict matches the naive two-stage loop") {
    const auto& set = fixture();
    std::mt19937_64 rng(8);
    int unsafe = 0;
    for (int i = 0; i < 400; ++i) {
        const auto img = (i % 4 == 0) ? t::random_unit(rng, 768) : mixture(rng, set);
        const auto v = check_image(img, set);
        const auto n = t::naive_verdict(img.values(), set);
        REQUIRE(v.is_unsafe == n.is_unsafe);
        REQUIRE(v.triggered_concepts == n.triggered);
        REQUIRE((v.adjustment_applied > 0.0f) == n.adjusted);
        unsafe += v.is_unsafe;
    }
    CHECK(unsafe > 20);
    CHECK(unsafe < 380);
}

TEST_CASE("properties: scale invariance and adjustment monotonicity") {
    const auto& set = fixture();
    const auto no_adjust = set.with_adjustment(0.0f);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> scale(0.1f, 50.0f);
    for (int i = 0; i < 300; ++i) {
        const auto img = mixture(rng, set);
        const auto base = check_image(img, set);

        std::vector<float> scaled(img.values().begin(), img.values().end());
        const float s = scale(rng);
        for (float& x : scaled) x *= s;
        const auto sv = check_image(EmbeddingVector(scaled), set);
        CHECK(sv.is_unsafe == base.is_unsafe);
        for (std::size_t k = 0; k < sv.unsafe_scores.size(); ++k) {
            CHECK(std::fabs(sv.unsafe_scores[k] - base.unsafe_scores[k]) <= 1e-6f);
        }

        if (check_image(img, no_adjust).is_unsafe) {
            CHECK(base.is_unsafe);
        }
    }
}

TEST_CASE("threshold comparison is strict") {
    const EmbeddingVector img({0.6f, 0.8f, 0.0f});
    const ConceptSet probe(3, {Concept{"c", EmbeddingVector({1.0f, 0.0f, 0.0f}), 0.5f}}, {});
    const float score = check_image(img, probe).unsafe_scores[0];

    const ConceptSet equal(3, {Concept{"c", EmbeddingVector({1.0f, 0.0f, 0.0f}), score}}, {});
    CHECK_FALSE(check_image(img, equal).is_unsafe);
    const ConceptSet below(3, {Concept{"c", EmbeddingVector({1.0f, 0.0f, 0.0f}), std::nextafter(score, 0.0f)}},
                           {});
    CHECK(check_image(img, below).is_unsafe);
}

TEST_CASE("empty special-care group never adjusts") {
    const ConceptSet set(2, {Concept{"a", EmbeddingVector({1.0f, 0.0f}), 0.5f}}, {});
    const auto v = check_image(EmbeddingVector({0.0f, 1.0f}), set);
    CHECK(v.special_scores.empty());
    CHECK(v.adjustment_applied == 0.0f);
    CHECK_FALSE(v.is_unsafe);
    const auto text = explain_verdict(v, set);
    CHECK(text.find("special-care concepts") == std::string::npos);
}

TEST_CASE("check_image errors") {
    const auto& set = fixture();
    CHECK_THROWS_AS(check_image(EmbeddingVector::zeros(768), set), DegenerateVectorError);
    CHECK_THROWS_AS(check_image(EmbeddingVector({1.0f, 0.0f}), set), DimensionError);
}

TEST_CASE("explain_verdict lists every concept sorted by margin") {
    const auto& set = fixture();
    const auto s = index_of(set, "sexual");
    const auto v = check_image(set.unsafe()[s].embedding, set);
    const auto text = explain_verdict(v, set);
    CHECK(text.rfind("UNSAFE: ", 0) == 0);
    CHECK(text.find("of 17 unsafe concepts triggered") != std::string::npos);
    const auto first_row = text.find("TRIGGERED");
    REQUIRE(first_row != std::string::npos);
    CHECK(text.find("sexual", first_row) < text.find('\n', first_row));
    CHECK(text.find("1.0000") != std::string::npos);
    for (const auto& c : set.unsafe()) CHECK(text.find(*c.label) != std::string::npos);
    CHECK(text.find("young child") != std::string::npos);

    auto broken = v;
    broken.unsafe_scores.pop_back();
    CHECK_THROWS_AS(explain_verdict(broken, set), ConsistencyError);
    auto bad_index = v;
    bad_index.triggered_concepts.push_back(99);
    CHECK_THROWS_AS(explain_verdict(bad_index, set), ConsistencyError);
}

TEST_CASE("obfuscated concepts are reported by placeholder") {
    const ConceptSet set(2, {Concept{std::nullopt, EmbeddingVector({1.0f, 0.0f}), 0.5f}}, {});
    const auto text = explain_verdict(check_image(EmbeddingVector({1.0f, 0.0f}), set), set);
    CHECK(text.find("<obfuscated #0>") != std::string::npos);
}
