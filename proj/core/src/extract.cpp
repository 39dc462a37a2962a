// SPDX-License-Identifier: Apache-2.0
#include "skillalign/extract.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "ordered_commit.hpp"
#include "skillalign/hash.hpp"

namespace skillalign {

using nlohmann::json;

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Tfidf: return "tfidf";
        case StrategyKind::Embed: return "embed";
        case StrategyKind::ZeroShot: return "zero_shot";
        case StrategyKind::Rag: return "rag";
    }
    return "?";
}

StrategyKind strategy_kind_from_string(std::string_view s) {
    if (s == "tfidf") return StrategyKind::Tfidf;
    if (s == "embed") return StrategyKind::Embed;
    if (s == "zero_shot" || s == "zero-shot") return StrategyKind::ZeroShot;
    if (s == "rag") return StrategyKind::Rag;
    throw ValidationError("unknown strategy '" + std::string(s) +
                          "' (allowed: tfidf, embed, zero-shot, rag)");
}

std::string Strategy::label() const {
    if (model.empty()) return to_string(kind);
    return to_string(kind) + ":" + model;
}

bool operator==(const Strategy& a, const Strategy& b) {
    return a.kind == b.kind && a.model == b.model;
}

std::string ledger_key(const Strategy& strategy, std::string_view document_id, DocType doc_type) {
    return strategy.label() + '\x1f' + std::string(document_id) + '\x1f' + to_string(doc_type);
}

std::string to_json_line(const ExtractionRecord& r) {
    json j;
    j["strategy"] = to_string(r.strategy.kind);
    j["model"] = r.strategy.model;
    j["document_id"] = r.document_id;
    j["doc_type"] = to_string(r.doc_type);
    j["k"] = r.k;
    j["skills"] = r.skills;
    if (!r.scores.empty()) j["scores"] = r.scores;
    if (!r.prompt_sha256.empty()) j["prompt_sha256"] = r.prompt_sha256;
    j["timestamp"] = r.timestamp;
    j["status"] = r.status;
    if (!r.error.empty()) j["error"] = r.error;
    return j.dump();
}

std::optional<ExtractionRecord> parse_ledger_line(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        ExtractionRecord r;
        r.strategy.kind = strategy_kind_from_string(j.at("strategy").get<std::string>());
        r.strategy.model = j.at("model").get<std::string>();
        r.document_id = j.at("document_id").get<std::string>();
        r.doc_type = doc_type_from_string(j.at("doc_type").get<std::string>());
        r.k = j.at("k").get<std::size_t>();
        r.skills = j.at("skills").get<std::vector<std::string>>();
        if (j.contains("scores")) r.scores = j["scores"].get<std::vector<double>>();
        if (j.contains("prompt_sha256")) r.prompt_sha256 = j["prompt_sha256"].get<std::string>();
        r.timestamp = j.at("timestamp").get<std::int64_t>();
        r.status = j.at("status").get<std::string>();
        if (j.contains("error")) r.error = j["error"].get<std::string>();
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

LoadedLedger load_ledger(const std::string& path) {
    LoadedLedger loaded;
    std::ifstream in(path, std::ios::binary);
    if (!in) return loaded;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        bool had_newline = !in.eof();
        std::size_t consumed = line.size() + (had_newline ? 1 : 0);
        if (line.empty()) {
            offset += consumed;
            continue;
        }
        auto record = parse_ledger_line(line);
        if (record && had_newline) {
            loaded.records.push_back(std::move(*record));
            offset += consumed;
            loaded.valid_bytes = offset;
            continue;
        }
        // Only the final line may be bad: an interrupted append leaves an
        // unterminated or partial record there, which resume drops.
        bool is_last = !had_newline || in.peek() == EOF;
        if (is_last) {
            loaded.truncated_tail = true;
            return loaded;
        }
        throw ValidationError("ledger " + path + ": corrupt record mid-file at byte offset " +
                              std::to_string(offset));
    }
    return loaded;
}

namespace {

std::int64_t record_timestamp(std::int64_t epoch) {
    if (epoch >= 0) return epoch;
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

ExtractionRecord extract_with_llm(const Strategy& strategy, const CurriculumDocument& document,
                                  const ExtractDeps& deps, std::size_t k) {
    if (!deps.chat || !deps.taxonomy)
        throw ConfigError("extract " + strategy.label() + ": chat provider and taxonomy required");
    const PromptTemplates& templates = deps.templates ? *deps.templates : PromptTemplates::builtin();

    Prompt prompt;
    if (strategy.kind == StrategyKind::ZeroShot) {
        prompt = build_zero_shot_prompt(templates, document, *deps.taxonomy, k);
    } else {
        if (!deps.store || !deps.embedder)
            throw ConfigError("extract rag: embedding store and provider required");
        if (deps.embedder->fingerprint() != deps.store->fingerprint())
            throw ConfigError("extract rag: document embedder (" + deps.embedder->fingerprint() +
                              ") does not match the store (" + deps.store->fingerprint() + ")");
        auto doc_vec = deps.embedder->embed({document.text}).at(0);
        auto retrieved = retrieve_candidates(*deps.store, doc_vec);
        prompt = build_rag_prompt(templates, document, retrieved.candidates, *deps.taxonomy, k);
    }

    ChatRequest request{strategy.model, prompt.system_text, prompt.user_text};
    ChatResponse response = call_with_retry(*deps.chat, request, deps.retry, deps.limiter, deps.audit);

    std::optional<SkillMatcher> local_matcher;
    const SkillMatcher& matcher =
        deps.matcher ? *deps.matcher : local_matcher.emplace(*deps.taxonomy);

    ParsedSkillList parsed;
    try {
        parsed = matcher.parse(response.text, k);
    } catch (const ShortOutputError& e) {
        if (!deps.strict_retry) throw;
        // one corrective re-ask, then give up
        ChatRequest retry_request = request;
        retry_request.user_text +=
            "\n\nYour previous reply resolved only " + std::to_string(e.partial().skill_ids.size()) +
            " valid skill ids. Answer again with exactly " + std::to_string(k) +
            " ids taken verbatim from the list above.";
        ChatResponse second = call_with_retry(*deps.chat, retry_request, deps.retry, deps.limiter, deps.audit);
        parsed = matcher.parse(second.text, k);
    }

    ExtractionRecord record;
    record.strategy = strategy;
    record.document_id = document.id;
    record.doc_type = document.doc_type;
    record.k = k;
    record.skills = parsed.skill_ids;
    record.prompt_sha256 = prompt_sha256(prompt);
    record.timestamp = record_timestamp(deps.epoch);
    return record;
}

}  // namespace

ExtractionRecord extract_skills(const Strategy& strategy, const CurriculumDocument& document,
                                const ExtractDeps& deps, std::size_t k) {
    switch (strategy.kind) {
        case StrategyKind::Tfidf: {
            if (!deps.lexical) throw ConfigError("extract tfidf: lexical model required");
            auto ranked = deps.lexical->rank(document, k);
            ExtractionRecord record;
            record.strategy = strategy;
            record.document_id = document.id;
            record.doc_type = document.doc_type;
            record.k = k;
            for (auto& s : ranked) {
                record.skills.push_back(std::move(s.skill_id));
                record.scores.push_back(s.score);
            }
            record.timestamp = record_timestamp(deps.epoch);
            return record;
        }
        case StrategyKind::Embed: {
            if (!deps.store || !deps.embedder)
                throw ConfigError("extract embed: embedding store and provider required");
            if (deps.embedder->fingerprint() != deps.store->fingerprint())
                throw ConfigError("extract embed: document embedder (" + deps.embedder->fingerprint() +
                                  ") does not match the store (" + deps.store->fingerprint() + ")");
            auto doc_vec = deps.embedder->embed({document.text}).at(0);
            auto ranked = rank_skills_embedding(*deps.store, doc_vec, k);
            ExtractionRecord record;
            record.strategy = strategy;
            record.document_id = document.id;
            record.doc_type = document.doc_type;
            record.k = k;
            for (auto& s : ranked) {
                record.skills.push_back(std::move(s.skill_id));
                record.scores.push_back(s.score);
            }
            record.timestamp = record_timestamp(deps.epoch);
            return record;
        }
        case StrategyKind::ZeroShot:
        case StrategyKind::Rag:
            if (strategy.model.empty())
                throw ConfigError("extract " + to_string(strategy.kind) + ": model id required");
            return extract_with_llm(strategy, document, deps, k);
    }
    throw ConfigError("extract: unknown strategy kind");
}

MatrixReport run_matrix(const Corpus& corpus, const std::vector<Strategy>& strategies,
                        const ExtractDeps& deps, std::size_t k, const std::string& ledger_path,
                        bool retry_failed, unsigned workers) {
    LoadedLedger existing = load_ledger(ledger_path);
    if (existing.truncated_tail)
        std::filesystem::resize_file(ledger_path, existing.valid_bytes);
    std::unordered_map<std::string, const ExtractionRecord*> done;
    for (const auto& r : existing.records) {
        if (r.status == "ok" && r.k != k)
            throw ValidationError("ledger " + ledger_path + ": existing records use k=" +
                                  std::to_string(r.k) + ", requested k=" + std::to_string(k));
        done[ledger_key(r.strategy, r.document_id, r.doc_type)] = &r;
    }

    struct Task {
        const CurriculumDocument* document;
        const Strategy* strategy;
    };
    std::vector<Task> todo;
    MatrixReport report;
    for (const auto& document : corpus.documents) {
        for (const auto& strategy : strategies) {
            auto it = done.find(ledger_key(strategy, document.id, document.doc_type));
            if (it != done.end() && (it->second->status == "ok" || !retry_failed)) {
                ++report.skipped;
                continue;
            }
            todo.push_back({&document, &strategy});
        }
    }
    if (todo.empty()) return report;

    // share one response matcher across the whole matrix
    std::optional<SkillMatcher> matcher;
    ExtractDeps task_deps = deps;
    if (!task_deps.matcher && task_deps.taxonomy) {
        matcher.emplace(*task_deps.taxonomy);
        task_deps.matcher = &*matcher;
    }

    std::ofstream out(ledger_path, std::ios::binary | std::ios::app);
    if (!out) throw ValidationError("cannot open ledger for writing: " + ledger_path);

    // test hook: per-task delay so interruption tests can land mid-matrix
    int task_delay_ms = 0;
    if (const char* delay = std::getenv("SKILLALIGN_TEST_TASK_DELAY_MS")) task_delay_ms = std::atoi(delay);

    auto run_task = [&](const Task& task) -> ExtractionRecord {
        if (task_delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(task_delay_ms));
        try {
            return extract_skills(*task.strategy, *task.document, task_deps, k);
        } catch (const std::exception& e) {
            ExtractionRecord failed;
            failed.strategy = *task.strategy;
            failed.document_id = task.document->id;
            failed.doc_type = task.document->doc_type;
            failed.k = k;
            failed.timestamp = record_timestamp(deps.epoch);
            failed.status = "failed";
            failed.error = e.what();
            return failed;
        }
    };

    // Committing in task order keeps the ledger a prefix of the
    // deterministic full ledger at any kill point.
    detail::ordered_parallel_run<ExtractionRecord>(
        todo.size(), std::max(1u, workers), [&](std::size_t index) { return run_task(todo[index]); },
        [&](std::size_t, const ExtractionRecord& r) {
            out << to_json_line(r) << '\n';
            out.flush();
            if (r.status == "ok") ++report.done;
            else ++report.failed;
        });
    return report;
}

}  // namespace skillalign
