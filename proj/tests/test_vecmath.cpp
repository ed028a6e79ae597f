// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "sdfilter/errors.hpp"
#include "sdfilter/simd/kernels.hpp"
#include "sdfilter/vecmath.hpp"
#include "test_support.hpp"

using namespace sdfilter;
using sdfilter::testing::random_unit;

namespace {

EmbeddingVector basis(std::size_t dim, std::size_t i, float scale = 1.0f) {
    std::vector<float> v(dim, 0.0f);
    v[i] = scale;
    return EmbeddingVector(std::move(v));
}

// Runs body once per available SIMD backend, restoring the original afterwards.
template <typename Fn>
void for_each_backend(Fn&& body) {
    const auto original = simd::active_backend();
    for (auto b : simd::available_backends()) {
        REQUIRE(simd::set_active_backend(b));
        CAPTURE(simd::backend_name(b));
        body();
    }
    simd::set_active_backend(original);
}

}  // namespace

TEST_CASE("EmbeddingVector rejects empty and non-finite input") {
    CHECK_THROWS_AS(EmbeddingVector(std::vector<float>{}), DimensionError);
    CHECK_THROWS_AS(EmbeddingVector({1.0f, std::numeric_limits<float>::quiet_NaN()}), NonFiniteError);
    CHECK_THROWS_AS(EmbeddingVector({std::numeric_limits<float>::infinity()}), NonFiniteError);
    CHECK(EmbeddingVector::zeros(768).dim() == 768);
}

TEST_CASE("cosine_similarity examples") {
    for_each_backend([] {
        std::mt19937_64 rng(1);
        const auto v = random_unit(rng, 768);
        CHECK(std::fabs(cosine_similarity(v, v) - 1.0f) <= 1e-6f);

        CHECK(cosine_similarity(basis(768, 0), basis(768, 1)) == 0.0f);

        std::vector<float> a(768, 0.0f);
        a[0] = 0.6f;
        a[1] = 0.8f;
        CHECK(std::fabs(cosine_similarity(EmbeddingVector(a), basis(768, 0)) - 0.6f) <= 1e-6f);
    });
}

TEST_CASE("cosine_similarity errors") {
    CHECK_THROWS_AS(cosine_similarity(basis(3, 0), basis(4, 0)), DimensionError);
    CHECK_THROWS_AS(cosine_similarity(EmbeddingVector::zeros(3), basis(3, 0)), DegenerateVectorError);
    CHECK_THROWS_AS(cosine_similarity(basis(3, 0), EmbeddingVector::zeros(3)), DegenerateVectorError);
}

TEST_CASE("cosine_similarity is clamped to [-1, 1]") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
        const auto v = random_unit(rng, 37);
        std::vector<float> scaled(v.values().begin(), v.values().end());
        for (float& x : scaled) x *= 3.7f;
        const float c = cosine_similarity(v, EmbeddingVector(scaled));
        CHECK(c <= 1.0f);
        std::vector<float> neg(v.values().begin(), v.values().end());
        for (float& x : neg) x = -x;
        CHECK(cosine_similarity(v, EmbeddingVector(neg)) >= -1.0f);
    }
}

TEST_CASE("cosine_similarity properties: symmetry and scale invariance") {
    for_each_backend([] {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<float> scale(0.01f, 100.0f);
        for (int i = 0; i < 300; ++i) {
            const auto a = random_unit(rng, 768);
            const auto b = random_unit(rng, 768);
            CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));

            const float s = scale(rng);
            std::vector<float> sa(a.values().begin(), a.values().end());
            for (float& x : sa) x *= s;
            CHECK(std::fabs(cosine_similarity(a, EmbeddingVector(sa)) - 1.0f) <= 1e-6f);
        }
    });
}

TEST_CASE("normalize examples and idempotence") {
    std::vector<float> v(768, 0.0f);
    v[0] = 3.0f;
    v[1] = 4.0f;
    const auto n = normalize(EmbeddingVector(v));
    CHECK(n[0] == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(n[1] == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(n[2] == 0.0f);

    CHECK_THROWS_AS(normalize(EmbeddingVector::zeros(768)), DegenerateVectorError);

    std::mt19937_64 rng(4);
    std::normal_distribution<float> nd(0.0f, 5.0f);
    for (int i = 0; i < 200; ++i) {
        std::vector<float> raw(129);
        for (float& x : raw) x = nd(rng);
        const auto once = normalize(EmbeddingVector(raw));
        const auto twice = normalize(once);
        CHECK(std::fabs(norm(once) - 1.0f) <= 1e-6f);
        for (std::size_t k = 0; k < raw.size(); ++k) {
            CHECK(std::fabs(once[k] - twice[k]) <= 1e-6f);
        }
    }
}

TEST_CASE("batch_similarity examples") {
    const std::vector<EmbeddingVector> e{basis(768, 0), basis(768, 1)};
    const auto m = batch_similarity(e, e);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 2);
    CHECK(m(0, 0) == 1.0f);
    CHECK(m(1, 1) == 1.0f);
    CHECK(m(0, 1) == 0.0f);
    CHECK(m(1, 0) == 0.0f);

    std::mt19937_64 rng(5);
    const std::vector<EmbeddingVector> q{random_unit(rng, 768)};
    const std::vector<EmbeddingVector> t{random_unit(rng, 768)};
    const auto one = batch_similarity(q, t);
    REQUIRE(one.rows() == 1);
    REQUIRE(one.cols() == 1);
    CHECK(one(0, 0) == cosine_similarity(q[0], t[0]));
}

TEST_CASE("batch_similarity matches a naive double loop (100 x 20)") {
    // Oracle: scalar double-precision loop over pairs, independent of the kernels.
    std::mt19937_64 rng(6);
    std::vector<EmbeddingVector> queries, targets;
    for (int i = 0; i < 100; ++i) queries.push_back(random_unit(rng, 768));
    for (int j = 0; j < 20; ++j) targets.push_back(random_unit(rng, 768));

    for_each_backend([&] {
        const auto m = batch_similarity(queries, targets);
        for (std::size_t i = 0; i < queries.size(); ++i) {
            for (std::size_t j = 0; j < targets.size(); ++j) {
                const double expect = sdfilter::testing::ref_cosine(queries[i].values(), targets[j].values());
                CHECK(std::fabs(m(i, j) - expect) <= 1e-6);
            }
        }
    });
}

TEST_CASE("batch_similarity is independent of chunking and thread count") {
    std::mt19937_64 rng(7);
    std::vector<EmbeddingVector> queries, targets;
    for (int i = 0; i < 9; ++i) queries.push_back(random_unit(rng, 96));
    for (int j = 0; j < 203; ++j) targets.push_back(random_unit(rng, 96));

    for_each_backend([&] {
        const auto reference = batch_similarity(queries, targets, {1, 1u << 20});
        for (unsigned threads : {1u, 2u, 3u, 8u}) {
            for (std::size_t chunk : {1u, 4u, 7u, 64u, 1000u}) {
                const auto m = batch_similarity(queries, targets, {threads, chunk});
                for (std::size_t i = 0; i < queries.size(); ++i) {
                    REQUIRE(std::memcmp(m.row(i).data(), reference.row(i).data(),
                                        targets.size() * sizeof(float)) == 0);
                }
            }
        }
        // And every entry equals the pairwise function exactly.
        for (std::size_t i = 0; i < queries.size(); ++i) {
            for (std::size_t j = 0; j < targets.size(); ++j) {
                REQUIRE(reference(i, j) == cosine_similarity(queries[i], targets[j]));
            }
        }
    });
}

TEST_CASE("batch_similarity errors") {
    const std::vector<EmbeddingVector> a{basis(4, 0)};
    const std::vector<EmbeddingVector> b{basis(5, 0)};
    CHECK_THROWS_AS(batch_similarity(a, b), DimensionError);
    const std::vector<EmbeddingVector> z{EmbeddingVector::zeros(4)};
    CHECK_THROWS_AS(batch_similarity(a, z), DegenerateVectorError);
}

TEST_CASE("EmbeddingMatrix bookkeeping") {
    EmbeddingMatrix m(3);
    CHECK(m.empty());
    m.push_back(basis(3, 2));
    CHECK(m.rows() == 1);
    CHECK(m.row_vector(0) == basis(3, 2));
    CHECK_THROWS_AS(m.push_back(basis(4, 0)), DimensionError);
    CHECK_THROWS_AS(EmbeddingMatrix(0), DimensionError);
    CHECK_THROWS_AS(EmbeddingMatrix(3, std::vector<float>(7)), DimensionError);
}
