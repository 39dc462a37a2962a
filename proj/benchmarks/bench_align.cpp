// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "skillalign/embedding.hpp"
#include "skillalign/hash.hpp"
#include "skillalign/judge.hpp"
#include "skillalign/lexical.hpp"
#include "skillalign/llm.hpp"
#include "skillalign/metrics.hpp"

using namespace skillalign;

namespace {

SkillTaxonomy synthetic_taxonomy(std::size_t count) {
    static const char* words[] = {"analyze",  "data",    "reports", "design",  "maintain", "develop",
                                  "evaluate", "teach",   "operate", "document", "plan",    "inspect",
                                  "monitor",  "prepare", "review",  "test",    "write",   "advise"};
    std::vector<Skill> skills;
    SplitMix64 rng(1);
    for (std::size_t i = 0; i < count; ++i) {
        std::string description;
        for (int w = 0; w < 6; ++w) {
            if (w) description += ' ';
            description += words[rng.next_below(std::size(words))];
        }
        skills.push_back({"S" + std::to_string(i), description});
    }
    return SkillTaxonomy::from_skills(std::move(skills));
}

EmbeddingStore synthetic_store(std::size_t count, std::size_t dim) {
    MockEmbeddingProvider provider(dim);
    return EmbeddingStore::build(provider, synthetic_taxonomy(count));
}

}  // namespace

static void BM_RankSkillsEmbedding(benchmark::State& state) {
    std::size_t count = static_cast<std::size_t>(state.range(0));
    std::size_t dim = static_cast<std::size_t>(state.range(1));
    EmbeddingStore store = synthetic_store(count, dim);
    SplitMix64 rng(2);
    EmbeddingVector query(dim);
    for (auto& x : query) x = rng.next_symmetric();
    for (auto _ : state) {
        benchmark::DoNotOptimize(rank_skills_embedding(store, query, 20));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}
BENCHMARK(BM_RankSkillsEmbedding)->Args({2070, 8})->Args({2070, 64})->Args({10000, 64});

static void BM_LexicalRank(benchmark::State& state) {
    std::size_t count = static_cast<std::size_t>(state.range(0));
    SkillTaxonomy taxonomy = synthetic_taxonomy(count);
    BackgroundFrequencies bg;
    bg.total_token_count = 1000000;
    LexicalModel model = LexicalModel::build(taxonomy, bg);
    CurriculumDocument doc;
    doc.id = "B";
    doc.text =
        "Students analyze data and write reports. The course covers how to design studies, "
        "maintain records, develop plans, evaluate outcomes and document results across projects.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.rank(doc, 10));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}
BENCHMARK(BM_LexicalRank)->Arg(2070)->Arg(10000);

static void BM_Ndcg(benchmark::State& state) {
    SplitMix64 rng(3);
    std::vector<ScoreVector> vectors;
    for (int i = 0; i < 256; ++i) {
        ScoreVector v;
        for (int j = 0; j < 10; ++j) v.push_back(1 + static_cast<int>(rng.next_below(5)));
        vectors.push_back(std::move(v));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(ndcg(vectors[i++ & 255]));
    }
}
BENCHMARK(BM_Ndcg);

static void BM_CalibrationApply(benchmark::State& state) {
    SplitMix64 rng(4);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 500; ++i) {
        double x = 1.0 + 2.0 * (0.5 + 0.5 * rng.next_symmetric());
        pairs.emplace_back(x, std::min(5.0, std::max(1.0, std::round(2.0 * x - 1.0))));
    }
    CalibrationModel model = CalibrationModel::fit(pairs);
    double x = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.apply(x));
        x += 0.001;
        if (x > 3.0) x = 1.0;
    }
}
BENCHMARK(BM_CalibrationApply);

static void BM_ParseSkillResponse(benchmark::State& state) {
    SkillTaxonomy taxonomy = synthetic_taxonomy(2070);
    SkillMatcher matcher(taxonomy);
    std::string response;
    for (int i = 0; i < 10; ++i) response += std::to_string(i + 1) + ". S" + std::to_string(i * 111) + "\n";
    for (auto _ : state) {
        benchmark::DoNotOptimize(matcher.parse(response, 10));
    }
}
BENCHMARK(BM_ParseSkillResponse);

static void BM_SkillMatcherBuild(benchmark::State& state) {
    SkillTaxonomy taxonomy = synthetic_taxonomy(2070);
    for (auto _ : state) {
        SkillMatcher matcher(taxonomy);
        benchmark::DoNotOptimize(&matcher);
    }
}
BENCHMARK(BM_SkillMatcherBuild);

static void BM_Sha256Prompt(benchmark::State& state) {
    std::string prompt(8192, 'p');
    for (auto _ : state) {
        benchmark::DoNotOptimize(sha256_hex(prompt));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(prompt.size()));
}
BENCHMARK(BM_Sha256Prompt);

BENCHMARK_MAIN();
