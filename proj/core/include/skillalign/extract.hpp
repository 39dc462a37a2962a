// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillalign/corpus.hpp"
#include "skillalign/embedding.hpp"
#include "skillalign/lexical.hpp"
#include "skillalign/llm.hpp"

namespace skillalign {

enum class StrategyKind { Tfidf, Embed, ZeroShot, Rag };

std::string to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(std::string_view s);  // accepts zero-shot / zero_shot

/// One of the alignment methods of the evaluation matrix. LLM strategies
/// carry the model id; tfidf/embed leave it empty.
struct Strategy {
    StrategyKind kind = StrategyKind::Tfidf;
    std::string model;

    std::string label() const;  // "tfidf", "rag:gpt", ...
};

bool operator==(const Strategy& a, const Strategy& b);

/// One ledger record: a completed (or failed) extraction of K ranked skills
/// for one (strategy, document, doc_type).
struct ExtractionRecord {
    Strategy strategy;
    std::string document_id;
    DocType doc_type = DocType::SyllabusDescription;
    std::size_t k = 0;
    std::vector<std::string> skills;  // exactly k for ok records
    std::vector<double> scores;       // alignment scores, tfidf/embed only
    std::string prompt_sha256;        // llm strategies only
    std::int64_t timestamp = 0;
    std::string status = "ok";  // "ok" | "failed"
    std::string error;
};

std::string ledger_key(const Strategy& strategy, std::string_view document_id, DocType doc_type);
std::string to_json_line(const ExtractionRecord& record);
std::optional<ExtractionRecord> parse_ledger_line(std::string_view line);

/// Reads a ledger, tolerating (and reporting) a truncated final line.
struct LoadedLedger {
    std::vector<ExtractionRecord> records;
    std::size_t valid_bytes = 0;  // offset just past the last valid record
    bool truncated_tail = false;
};
LoadedLedger load_ledger(const std::string& path);

/// Everything extract_skills may need; which fields are required depends on
/// the strategy kind.
struct ExtractDeps {
    const LexicalModel* lexical = nullptr;        // tfidf
    const EmbeddingStore* store = nullptr;        // embed, rag
    EmbeddingProvider* embedder = nullptr;        // embed, rag (document vectors)
    ChatProvider* chat = nullptr;                 // zero_shot, rag
    const SkillTaxonomy* taxonomy = nullptr;      // zero_shot, rag
    const SkillMatcher* matcher = nullptr;        // optional prebuilt response matcher
    const PromptTemplates* templates = nullptr;   // defaults to builtin()
    RetryPolicy retry;
    RateLimiter* limiter = nullptr;
    AuditLog* audit = nullptr;
    bool strict_retry = false;   // re-ask once on short output
    std::int64_t epoch = -1;     // fixed record timestamp; -1 = wall clock
};

/// Runs one strategy on one document and normalizes the result into an
/// ExtractionRecord with exactly k ranked skills.
ExtractionRecord extract_skills(const Strategy& strategy, const CurriculumDocument& document,
                                const ExtractDeps& deps, std::size_t k);

struct MatrixReport {
    std::size_t done = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
};

/// Executes |corpus| x |strategies| extractions, appending each record to the
/// ledger as it completes. Pairs already present are skipped, so an
/// interrupted matrix resumes where it stopped; failures are recorded and
/// retried only when retry_failed is set. Records are committed in task
/// order regardless of worker count, so ledgers are byte-stable.
MatrixReport run_matrix(const Corpus& corpus, const std::vector<Strategy>& strategies,
                        const ExtractDeps& deps, std::size_t k, const std::string& ledger_path,
                        bool retry_failed = false, unsigned workers = 1);

}  // namespace skillalign
