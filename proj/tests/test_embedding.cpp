// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "skillalign/embedding.hpp"
#include "skillalign/errors.hpp"
#include "skillalign/hash.hpp"

using namespace skillalign;

TEST_CASE("cosine identities") {
    EmbeddingVector v{0.3, -1.2, 4.5};
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine({1, 0}, {0, 1}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cosine({1, 1}, {1, 0}) == doctest::Approx(0.707106781186547).epsilon(1e-12));
    CHECK_THROWS_AS(cosine({1, 2}, {1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(cosine({0, 0}, {1, 2}), ValidationError);
}

TEST_CASE("cosine symmetry and scale invariance") {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        EmbeddingVector a(6), b(6);
        for (auto& x : a) x = rng.next_symmetric();
        for (auto& x : b) x = rng.next_symmetric();
        CHECK(cosine(a, b) == cosine(b, a));
        EmbeddingVector scaled = a;
        double c = 0.5 + 3.0 * std::abs(rng.next_symmetric());
        for (auto& x : scaled) x *= c;
        CHECK(cosine(scaled, b) == doctest::Approx(cosine(a, b)).epsilon(1e-9));
        CHECK(cosine(a, b) >= -1.0);
        CHECK(cosine(a, b) <= 1.0);
    }
}

TEST_CASE("mock embedding provider is a pure function of the text") {
    MockEmbeddingProvider provider(8);
    auto first = provider.embed({"analyze data", "write reports"});
    auto second = provider.embed({"analyze data", "write reports"});
    REQUIRE(first.size() == 2);
    CHECK(first[0] == second[0]);
    CHECK(first[1] == second[1]);
    CHECK(first[0] != first[1]);
    CHECK(first[0].size() == 8);
    CHECK(provider.fingerprint() == "mock:8");
}

TEST_CASE("embed_taxonomy builds a store and re-runs byte-identically") {
    testutil::TempDir tmp("store");
    MockEmbeddingProvider provider(8);
    SkillTaxonomy taxonomy = testutil::toy_taxonomy();
    EmbeddingStore store = EmbeddingStore::build(provider, taxonomy);
    REQUIRE(store.size() == 3);
    CHECK(store.dim() == 8);
    CHECK(store.fingerprint() == "mock:8");
    CHECK(store.ids() == std::vector<std::string>{"T1", "T2", "T3"});

    store.save(tmp.file("a.tsv"));
    EmbeddingStore::build(provider, taxonomy).save(tmp.file("b.tsv"));
    CHECK(testutil::read_file(tmp.file("a.tsv")) == testutil::read_file(tmp.file("b.tsv")));

    EmbeddingStore loaded = EmbeddingStore::load(tmp.file("a.tsv"));
    CHECK(loaded.size() == 3);
    CHECK(loaded.dim() == 8);
    CHECK(loaded.fingerprint() == "mock:8");
    CHECK(loaded.find("T2") != nullptr);
}

namespace {

// provider returning fewer vectors than texts
class ShortProvider : public EmbeddingProvider {
public:
    std::string name() const override { return "short"; }
    std::size_t dim() const override { return 4; }
    std::string fingerprint() const override { return "short:4"; }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        std::vector<EmbeddingVector> out(texts.size() > 1 ? texts.size() - 1 : texts.size(),
                                         EmbeddingVector(4, 0.5));
        return out;
    }
};

}  // namespace

TEST_CASE("embed_taxonomy rejects a length-mismatched provider reply") {
    ShortProvider provider;
    SkillTaxonomy taxonomy = testutil::toy_taxonomy();
    CHECK_THROWS_WITH_AS(EmbeddingStore::build(provider, taxonomy), doctest::Contains("2 vectors"),
                         ProviderError);
}

namespace {

// fails transiently a fixed number of times, then behaves like the mock
class FlakyEmbedder : public EmbeddingProvider {
public:
    explicit FlakyEmbedder(int failures) : remaining_(failures) {}
    std::string name() const override { return "flaky"; }
    std::size_t dim() const override { return inner_.dim(); }
    std::string fingerprint() const override { return inner_.fingerprint(); }
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        ++calls_;
        if (remaining_-- > 0) throw ProviderError("flaky embedder", true);
        return inner_.embed(texts);
    }
    int calls() const { return calls_; }

private:
    MockEmbeddingProvider inner_{8};
    int remaining_;
    int calls_ = 0;
};

}  // namespace

TEST_CASE("embed_taxonomy retries transient provider failures") {
    SkillTaxonomy taxonomy = testutil::toy_taxonomy();
    FlakyEmbedder twice(2);
    EmbeddingStore store = EmbeddingStore::build(twice, taxonomy);
    CHECK(store.size() == 3);
    CHECK(twice.calls() == 3);

    FlakyEmbedder hopeless(10);
    CHECK_THROWS_AS(EmbeddingStore::build(hopeless, taxonomy, /*max_retries=*/2), ProviderError);
    CHECK(hopeless.calls() == 3);  // initial + 2 retries
}

namespace {

EmbeddingStore random_store(std::size_t count, std::size_t dim, SplitMix64& rng,
                            double duplicate_fraction = 0.0) {
    std::vector<Skill> skills;
    std::vector<EmbeddingVector> vectors;
    for (std::size_t i = 0; i < count; ++i) {
        skills.push_back({"S" + std::to_string(i), "skill " + std::to_string(i)});
        if (duplicate_fraction > 0.0 && i > 0 &&
            (rng.next() % 1000) < static_cast<std::uint64_t>(duplicate_fraction * 1000)) {
            vectors.push_back(vectors[rng.next_below(i)]);  // forced cosine tie
            continue;
        }
        EmbeddingVector v(dim);
        for (auto& x : v) x = rng.next_symmetric();
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
        vectors.push_back(std::move(v));
    }

    // route through the provider interface so the store keeps taxonomy order
    class FixedProvider : public EmbeddingProvider {
    public:
        FixedProvider(std::vector<EmbeddingVector> vectors, std::size_t dim)
            : vectors_(std::move(vectors)), dim_(dim) {}
        std::string name() const override { return "fixed"; }
        std::size_t dim() const override { return dim_; }
        std::string fingerprint() const override { return "fixed:" + std::to_string(dim_); }
        std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
            std::vector<EmbeddingVector> out;
            for (const auto& t : texts) {
                std::size_t index = std::stoul(t.substr(6));
                out.push_back(vectors_[index]);
            }
            return out;
        }

    private:
        std::vector<EmbeddingVector> vectors_;
        std::size_t dim_;
    };
    FixedProvider provider(vectors, dim);
    return EmbeddingStore::build(provider, SkillTaxonomy::from_skills(std::move(skills)));
}

// independent full-sort oracle: score everything, stable-sort descending
std::vector<ScoredSkill> brute_force_rank(const EmbeddingStore& store, const EmbeddingVector& query,
                                          std::size_t k) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < store.size(); ++i)
        scored.emplace_back(cosine(query, store.vectors()[i]), i);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<ScoredSkill> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back({store.ids()[scored[i].second], scored[i].first});
    return out;
}

}  // namespace

TEST_CASE("rank_skills_embedding contracts") {
    SplitMix64 rng(11);
    EmbeddingStore store = random_store(25, 8, rng);

    // doc vector equal to a stored vector ranks that skill first at 1.0
    EmbeddingVector query = store.vectors()[7];
    auto top = rank_skills_embedding(store, query, 3);
    CHECK(top[0].skill_id == store.ids()[7]);
    CHECK(top[0].score == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(rank_skills_embedding(store, query, store.size()).size() == store.size());
    CHECK_THROWS_AS(rank_skills_embedding(store, query, store.size() + 1), ValidationError);
    CHECK_THROWS_AS(rank_skills_embedding(store, EmbeddingVector{1.0, 2.0}, 3), ValidationError);
}

TEST_CASE("rank_skills_embedding equals the brute-force oracle, ties included") {
    SplitMix64 rng(1234);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t count = 5 + rng.next_below(120);
        std::size_t dim = 4 + rng.next_below(12);
        EmbeddingStore store = random_store(count, dim, rng, /*duplicate_fraction=*/0.2);
        EmbeddingVector query(dim);
        for (auto& x : query) x = rng.next_symmetric();
        if (std::all_of(query.begin(), query.end(), [](double x) { return x == 0.0; })) query[0] = 1.0;
        std::size_t k = 1 + rng.next_below(count);

        auto fast = rank_skills_embedding(store, query, k);
        auto oracle = brute_force_rank(store, query, k);
        REQUIRE(fast.size() == oracle.size());
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(fast[i].skill_id == oracle[i].skill_id);
            CHECK(fast[i].score == oracle[i].score);
        }
    }
}

TEST_CASE("retrieve_candidates pool size and degenerate store") {
    SplitMix64 rng(5);
    EmbeddingStore big = random_store(60, 8, rng);
    EmbeddingVector query = big.vectors()[0];
    auto retrieved = retrieve_candidates(big, query);
    CHECK(retrieved.candidates.size() == 20);
    CHECK_FALSE(retrieved.degenerate);
    // prefix of the full ranking
    auto full = rank_skills_embedding(big, query, big.size());
    for (std::size_t i = 0; i < retrieved.candidates.size(); ++i)
        CHECK(retrieved.candidates[i].skill_id == full[i].skill_id);

    EmbeddingStore exactly20 = random_store(20, 8, rng);
    auto boundary = retrieve_candidates(exactly20, exactly20.vectors()[3]);
    CHECK(boundary.candidates.size() == 20);
    CHECK_FALSE(boundary.degenerate);

    EmbeddingStore small = random_store(10, 8, rng);
    auto degenerate = retrieve_candidates(small, small.vectors()[0]);
    CHECK(degenerate.candidates.size() == 10);
    CHECK(degenerate.degenerate);
}

TEST_CASE("validate_store_covers names the first missing skill") {
    MockEmbeddingProvider provider(4);
    SkillTaxonomy small = SkillTaxonomy::from_skills({{"T1", "analyze data"}});
    EmbeddingStore store = EmbeddingStore::build(provider, small);
    CHECK_NOTHROW(validate_store_covers(store, small));
    SkillTaxonomy grown =
        SkillTaxonomy::from_skills({{"T1", "analyze data"}, {"T9", "newly added skill"}});
    CHECK_THROWS_WITH_AS(validate_store_covers(store, grown), doctest::Contains("T9"), ValidationError);
}

TEST_CASE("store rejects whitespace ids and malformed files") {
    MockEmbeddingProvider provider(4);
    SkillTaxonomy bad = SkillTaxonomy::from_skills({{"has space", "description"}});
    CHECK_THROWS_AS(EmbeddingStore::build(provider, bad), ValidationError);

    testutil::TempDir tmp("badstore");
    testutil::write_file(tmp.file("bad.tsv"), "dim=3 fingerprint=x\nS1 0.5 0.25\n");
    CHECK_THROWS_WITH_AS(EmbeddingStore::load(tmp.file("bad.tsv")), doctest::Contains("2 values"),
                         ValidationError);
}
