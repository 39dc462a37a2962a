// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <set>

#include "helpers.hpp"
#include "skillalign/extract.hpp"
#include "skillalign/hash.hpp"

using namespace skillalign;
using testutil::TempDir;

namespace {

struct Fixture {
    SkillTaxonomy taxonomy = testutil::toy_taxonomy();
    BackgroundFrequencies background = testutil::toy_background();
    LexicalModel lexical = LexicalModel::build(taxonomy, background);
    MockEmbeddingProvider embedder{8};
    EmbeddingStore store = EmbeddingStore::build(embedder, taxonomy);
    MockChatProvider chat{true};

    ExtractDeps deps() {
        ExtractDeps d;
        d.lexical = &lexical;
        d.store = &store;
        d.embedder = &embedder;
        d.chat = &chat;
        d.taxonomy = &taxonomy;
        d.epoch = 0;
        d.retry = {1, 1, 2};
        return d;
    }

    Corpus corpus(std::size_t n) const {
        Corpus c;
        for (std::size_t i = 0; i < n; ++i)
            c.documents.push_back(testutil::make_document(
                "C" + std::to_string(i), DocType::SyllabusDescription,
                "Course " + std::to_string(i) + ": students analyze data and write reports."));
        return c;
    }
};

}  // namespace

TEST_CASE("extract_skills tfidf matches the lexical ranking") {
    Fixture f;
    auto doc = testutil::make_document("C1", DocType::SyllabusDescription, "Analyze financial data trends");
    ExtractionRecord r = extract_skills({StrategyKind::Tfidf, ""}, doc, f.deps(), 3);
    CHECK(r.status == "ok");
    REQUIRE(r.skills.size() == 3);
    auto expected = f.lexical.rank(doc, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(r.skills[i] == expected[i].skill_id);
        CHECK(r.scores[i] == expected[i].score);
    }
    CHECK(r.k == 3);
    CHECK(r.prompt_sha256.empty());
}

TEST_CASE("extract_skills embed ranks by cosine against the store") {
    Fixture f;
    auto doc = testutil::make_document("C1", DocType::SyllabusDescription, "Analyze financial data trends");
    ExtractionRecord r = extract_skills({StrategyKind::Embed, ""}, doc, f.deps(), 2);
    auto doc_vec = f.embedder.embed({doc.text})[0];
    auto expected = rank_skills_embedding(f.store, doc_vec, 2);
    REQUIRE(r.skills.size() == 2);
    CHECK(r.skills[0] == expected[0].skill_id);
    CHECK(r.skills[1] == expected[1].skill_id);
}

TEST_CASE("extract_skills rag echoes the mock's candidate selection") {
    Fixture f;
    auto doc = testutil::make_document("C1", DocType::SyllabusOutcomes, "Teach data analysis methods");
    ExtractionRecord r = extract_skills({StrategyKind::Rag, "gpt"}, doc, f.deps(), 2);
    CHECK(r.status == "ok");
    REQUIRE(r.skills.size() == 2);
    for (const auto& id : r.skills) CHECK(f.taxonomy.find(id) != nullptr);
    CHECK_FALSE(r.prompt_sha256.empty());
    // deterministic under the mock
    ExtractionRecord again = extract_skills({StrategyKind::Rag, "gpt"}, doc, f.deps(), 2);
    CHECK(again.skills == r.skills);
    CHECK(again.prompt_sha256 == r.prompt_sha256);
}

TEST_CASE("extract_skills rag with an echoing mock returns the first k candidates") {
    Fixture f;
    auto doc = testutil::make_document("C1", DocType::SyllabusOutcomes, "Teach data analysis methods");
    // reproduce the retrieval the strategy will perform, then pin a fixture
    // that echoes the first k candidate ids verbatim
    auto doc_vec = f.embedder.embed({doc.text})[0];
    auto retrieved = retrieve_candidates(f.store, doc_vec);
    Prompt prompt = build_rag_prompt(doc, retrieved.candidates, f.taxonomy, 2);
    std::string echo = "1. " + retrieved.candidates[0].skill_id + "\n2. " + retrieved.candidates[1].skill_id;
    MockChatProvider echo_mock(false);
    echo_mock.add_fixture(prompt_sha256(prompt), echo);

    ExtractDeps deps = f.deps();
    deps.chat = &echo_mock;
    ExtractionRecord r = extract_skills({StrategyKind::Rag, "gpt"}, doc, deps, 2);
    REQUIRE(r.skills.size() == 2);
    CHECK(r.skills[0] == retrieved.candidates[0].skill_id);
    CHECK(r.skills[1] == retrieved.candidates[1].skill_id);
}

TEST_CASE("extract_skills zero-shot short output raises, and strict retry re-asks") {
    Fixture f;
    auto doc = testutil::make_document("C1", DocType::SyllabusDescription, "A course.");
    Prompt p = build_zero_shot_prompt(doc, f.taxonomy, 3);

    MockChatProvider short_mock(false);
    short_mock.add_fixture(prompt_sha256(p), "1. T1\n2. T2");  // only 2 of 3
    ExtractDeps deps = f.deps();
    deps.chat = &short_mock;
    CHECK_THROWS_AS(extract_skills({StrategyKind::ZeroShot, "gpt"}, doc, deps, 3), ShortOutputError);

    // --strict-retry issues one corrective follow-up; the synthesizing mock
    // answers the follow-up prompt with a full list
    MockChatProvider retry_mock(true);
    retry_mock.add_fixture(prompt_sha256(p), "1. T1\n2. T2");
    deps.chat = &retry_mock;
    deps.strict_retry = true;
    ExtractionRecord r = extract_skills({StrategyKind::ZeroShot, "gpt"}, doc, deps, 3);
    CHECK(r.skills.size() == 3);
}

TEST_CASE("extract_skills validates strategy dependencies") {
    Fixture f;
    auto doc = testutil::make_document("C1", DocType::SyllabusDescription, "text");
    ExtractDeps none;
    CHECK_THROWS_AS(extract_skills({StrategyKind::Tfidf, ""}, doc, none, 2), ConfigError);
    CHECK_THROWS_AS(extract_skills({StrategyKind::ZeroShot, ""}, doc, f.deps(), 2), ConfigError);

    // document embedder must live in the same embedding space as the store
    MockEmbeddingProvider other(16);
    ExtractDeps mismatched = f.deps();
    mismatched.embedder = &other;
    CHECK_THROWS_WITH_AS(extract_skills({StrategyKind::Embed, ""}, doc, mismatched, 2),
                         doctest::Contains("does not match the store"), ConfigError);
    CHECK_THROWS_WITH_AS(extract_skills({StrategyKind::Rag, "gpt"}, doc, mismatched, 2),
                         doctest::Contains("does not match the store"), ConfigError);
}

TEST_CASE("ledger record JSON round-trip") {
    ExtractionRecord r;
    r.strategy = {StrategyKind::Rag, "gpt"};
    r.document_id = "C7";
    r.doc_type = DocType::SyllabusCombined;
    r.k = 2;
    r.skills = {"T1", "T3"};
    r.prompt_sha256 = "abc123";
    r.timestamp = 17;
    std::string line = to_json_line(r);
    auto parsed = parse_ledger_line(line);
    REQUIRE(parsed.has_value());
    CHECK(parsed->strategy.kind == StrategyKind::Rag);
    CHECK(parsed->strategy.model == "gpt");
    CHECK(parsed->document_id == "C7");
    CHECK(parsed->doc_type == DocType::SyllabusCombined);
    CHECK(parsed->skills == r.skills);
    CHECK(parsed->timestamp == 17);
    CHECK(parsed->status == "ok");
    CHECK_FALSE(parse_ledger_line("{\"not\": \"a record\"}").has_value());
    CHECK_FALSE(parse_ledger_line("garbage").has_value());
}

TEST_CASE("run_matrix executes the full matrix and is idempotent") {
    Fixture f;
    TempDir tmp("matrix");
    Corpus corpus = f.corpus(4);
    std::vector<Strategy> strategies = {{StrategyKind::Tfidf, ""},
                                        {StrategyKind::Embed, ""},
                                        {StrategyKind::ZeroShot, "gpt"},
                                        {StrategyKind::Rag, "gpt"}};
    std::string ledger = tmp.file("ledger.jsonl");

    MatrixReport first = run_matrix(corpus, strategies, f.deps(), 2, ledger);
    CHECK(first.done == 16);
    CHECK(first.failed == 0);
    CHECK(first.skipped == 0);
    CHECK(load_ledger(ledger).records.size() == 16);

    MatrixReport second = run_matrix(corpus, strategies, f.deps(), 2, ledger);
    CHECK(second.done == 0);
    CHECK(second.skipped == 16);

    // 15 of 16 present: exactly one executes on resume
    auto loaded = load_ledger(ledger);
    std::ofstream out(ledger, std::ios::binary | std::ios::trunc);
    for (std::size_t i = 0; i + 1 < loaded.records.size(); ++i)
        out << to_json_line(loaded.records[i]) << '\n';
    out.close();
    MatrixReport third = run_matrix(corpus, strategies, f.deps(), 2, ledger);
    CHECK(third.done == 1);
    CHECK(third.skipped == 15);
}

TEST_CASE("run_matrix covers the ten-method evaluation matrix") {
    Fixture f;
    TempDir tmp("tenway");
    Corpus corpus = f.corpus(20);
    std::vector<Strategy> strategies = {{StrategyKind::Tfidf, ""},       {StrategyKind::Embed, ""},
                                        {StrategyKind::ZeroShot, "gpt"}, {StrategyKind::ZeroShot, "llama"},
                                        {StrategyKind::ZeroShot, "claude"}, {StrategyKind::ZeroShot, "gemini"},
                                        {StrategyKind::Rag, "gpt"},      {StrategyKind::Rag, "llama"},
                                        {StrategyKind::Rag, "claude"},   {StrategyKind::Rag, "gemini"}};
    std::string ledger = tmp.file("ledger.jsonl");
    MatrixReport report = run_matrix(corpus, strategies, f.deps(), 2, ledger, false, 2);
    CHECK(report.done == 200);  // |corpus| x |strategies|
    auto records = load_ledger(ledger).records;
    REQUIRE(records.size() == 200);
    std::set<std::string> labels;
    for (const auto& r : records) {
        labels.insert(r.strategy.label());
        CHECK(r.skills.size() == 2);
    }
    CHECK(labels.size() == 10);
}

TEST_CASE("run_matrix ledgers are byte-identical across runs and worker counts") {
    Fixture f;
    TempDir tmp("det");
    Corpus corpus = f.corpus(5);
    std::vector<Strategy> strategies = {{StrategyKind::Tfidf, ""}, {StrategyKind::Rag, "gpt"}};

    run_matrix(corpus, strategies, f.deps(), 2, tmp.file("w1.jsonl"), false, 1);
    run_matrix(corpus, strategies, f.deps(), 2, tmp.file("w4.jsonl"), false, 4);
    run_matrix(corpus, strategies, f.deps(), 2, tmp.file("w1b.jsonl"), false, 1);
    std::string w1 = testutil::read_file(tmp.file("w1.jsonl"));
    CHECK(w1 == testutil::read_file(tmp.file("w4.jsonl")));
    CHECK(w1 == testutil::read_file(tmp.file("w1b.jsonl")));
}

TEST_CASE("run_matrix drops a truncated final line and resumes to identical bytes") {
    Fixture f;
    TempDir tmp("trunc");
    Corpus corpus = f.corpus(3);
    std::vector<Strategy> strategies = {{StrategyKind::Tfidf, ""}};
    std::string full_path = tmp.file("full.jsonl");
    run_matrix(corpus, strategies, f.deps(), 2, full_path);
    std::string full = testutil::read_file(full_path);

    // cut the ledger mid-record, as a kill mid-write would
    std::size_t first_nl = full.find('\n');
    std::string truncated = full.substr(0, first_nl + 1 + 25);
    std::string resumed_path = tmp.file("resume.jsonl");
    testutil::write_file(resumed_path, truncated);

    auto loaded = load_ledger(resumed_path);
    CHECK(loaded.truncated_tail);
    CHECK(loaded.records.size() == 1);

    MatrixReport report = run_matrix(corpus, strategies, f.deps(), 2, resumed_path);
    CHECK(report.done == 2);
    CHECK(report.skipped == 1);
    CHECK(testutil::read_file(resumed_path) == full);
}

TEST_CASE("load_ledger rejects corruption that is not a truncated tail") {
    Fixture f;
    TempDir tmp("midcorrupt");
    Corpus corpus = f.corpus(3);
    std::string path = tmp.file("ledger.jsonl");
    run_matrix(corpus, {{StrategyKind::Tfidf, ""}}, f.deps(), 2, path);
    std::string full = testutil::read_file(path);
    std::size_t first_nl = full.find('\n');
    std::string corrupted = full.substr(0, first_nl + 1) + "garbage line\n" + full.substr(first_nl + 1);
    testutil::write_file(path, corrupted);
    CHECK_THROWS_WITH_AS(load_ledger(path), doctest::Contains("mid-file"), ValidationError);
}

TEST_CASE("run_matrix records failures and retries them only on request") {
    Fixture f;
    TempDir tmp("fail");
    Corpus corpus = f.corpus(2);
    Prompt p0 = build_zero_shot_prompt(corpus.documents[0], f.taxonomy, 2);

    // first document's prompt returns garbage, second synthesizes fine
    MockChatProvider flaky(true);
    flaky.add_fixture(prompt_sha256(p0), "no skills here");
    ExtractDeps deps = f.deps();
    deps.chat = &flaky;
    std::vector<Strategy> strategies = {{StrategyKind::ZeroShot, "gpt"}};
    std::string ledger = tmp.file("ledger.jsonl");

    MatrixReport report = run_matrix(corpus, strategies, deps, 2, ledger);
    CHECK(report.done == 1);
    CHECK(report.failed == 1);
    auto records = load_ledger(ledger).records;
    REQUIRE(records.size() == 2);
    CHECK(records[0].status == "failed");
    CHECK(records[0].skills.empty());
    CHECK(records[0].error.find("short output") != std::string::npos);

    // failed pairs are skipped by default
    MatrixReport rerun = run_matrix(corpus, strategies, deps, 2, ledger);
    CHECK(rerun.done == 0);
    CHECK(rerun.failed == 0);
    CHECK(rerun.skipped == 2);

    // --retry-failed re-executes them (still failing here, appended again)
    MatrixReport retried = run_matrix(corpus, strategies, deps, 2, ledger, /*retry_failed=*/true);
    CHECK(retried.failed == 1);
    CHECK(retried.skipped == 1);
}

TEST_CASE("run_matrix rejects a mixed-K resume") {
    Fixture f;
    TempDir tmp("mixedk");
    Corpus corpus = f.corpus(2);
    std::vector<Strategy> strategies = {{StrategyKind::Tfidf, ""}};
    run_matrix(corpus, strategies, f.deps(), 2, tmp.file("ledger.jsonl"));
    CHECK_THROWS_WITH_AS(run_matrix(corpus, strategies, f.deps(), 3, tmp.file("ledger.jsonl")),
                         doctest::Contains("k="), ValidationError);
}

TEST_CASE("strategy labels and parsing") {
    CHECK(Strategy{StrategyKind::Tfidf, ""}.label() == "tfidf");
    CHECK(Strategy{StrategyKind::Rag, "gpt"}.label() == "rag:gpt");
    CHECK(strategy_kind_from_string("zero-shot") == StrategyKind::ZeroShot);
    CHECK(strategy_kind_from_string("zero_shot") == StrategyKind::ZeroShot);
    CHECK_THROWS_AS(strategy_kind_from_string("bm25"), ValidationError);
}
