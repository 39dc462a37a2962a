// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "ordered_commit.hpp"
#include "skillalign/csv.hpp"
#include "skillalign/errors.hpp"
#include "skillalign/judge.hpp"

namespace skillalign {

using nlohmann::json;

HumanBenchmark load_benchmark(const std::string& path) {
    auto rows = read_csv_file(path);
    std::erase_if(rows, [](const CsvRow& r) {
        return !r.fields.empty() && !r.fields[0].empty() && r.fields[0][0] == '#';
    });
    if (rows.empty()) throw ValidationError("benchmark " + path + ": empty file");
    const std::vector<std::string> expected = {"document_id", "doc_type", "strategy", "skill_id", "score"};
    if (rows.front().fields != expected)
        throw ValidationError("benchmark " + path +
                              ": expected header document_id,doc_type,strategy,skill_id,score");
    HumanBenchmark benchmark;
    std::set<std::tuple<std::string, DocType, std::string, std::string>> seen;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.fields.size() != 5)
            throw ValidationError("benchmark " + path + ": malformed row at line " + std::to_string(row.line));
        BenchmarkRecord r;
        r.document_id = row.fields[0];
        r.doc_type = doc_type_from_string(row.fields[1]);
        r.strategy = row.fields[2];
        r.skill_id = row.fields[3];
        r.score = std::stoi(row.fields[4]);
        if (r.score < 1 || r.score > 5)
            throw ValidationError("benchmark " + path + ": score " + row.fields[4] + " outside 1..5 at line " +
                                  std::to_string(row.line));
        if (!seen.insert({r.document_id, r.doc_type, r.strategy, r.skill_id}).second)
            throw ValidationError("benchmark " + path + ": duplicate key at line " + std::to_string(row.line) +
                                  " (" + r.document_id + ", " + to_string(r.doc_type) + ", " + r.strategy +
                                  ", " + r.skill_id + ")");
        benchmark.records.push_back(std::move(r));
    }
    return benchmark;
}

void save_benchmark(const HumanBenchmark& benchmark, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << "document_id,doc_type,strategy,skill_id,score\n";
    for (const auto& r : benchmark.records) {
        out << csv_join({r.document_id, to_string(r.doc_type), r.strategy, r.skill_id,
                         std::to_string(r.score)})
            << '\n';
    }
}

EnsembleScore ensemble_score(const JudgePanel& panel, const CurriculumDocument& document,
                             const Skill& skill) {
    if (panel.members.empty()) throw ConfigError("ensemble_score: no judges configured");
    const PromptTemplates& templates = panel.templates ? *panel.templates : PromptTemplates::builtin();
    const Rubric& rubric = panel.rubric ? *panel.rubric : Rubric::default_rubric();
    const std::vector<JudgeExemplar>& exemplars =
        panel.exemplars ? *panel.exemplars : default_judge_exemplars();

    EnsembleScore result;
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& member : panel.members) {
        Prompt prompt = build_judge_prompt(templates, document, skill, rubric, exemplars);
        ChatRequest request{member.model, prompt.system_text, prompt.user_text};
        std::optional<int> score;
        try {
            ChatResponse response = call_with_retry(*member.provider, request, panel.retry, panel.limiter,
                                                    panel.audit);
            score = parse_judge_response(response.text);
        } catch (const UnparseableScoreError&) {
            score = std::nullopt;
        } catch (const ProviderError&) {
            score = std::nullopt;
        }
        if (score) {
            sum += *score;
            ++counted;
        }
        result.judge_scores.push_back(score);
    }
    if (counted > 0) result.mean = sum / static_cast<double>(counted);
    return result;
}

namespace {

json optional_to_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }
json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <typename T>
std::optional<T> optional_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

}  // namespace

std::string to_json_line(const EnsembleRecord& r) {
    json j;
    j["document_id"] = r.document_id;
    j["doc_type"] = to_string(r.doc_type);
    j["strategy"] = r.strategy;
    j["skill_id"] = r.skill_id;
    json scores = json::array();
    for (const auto& s : r.judge_scores) scores.push_back(optional_to_json(s));
    j["judge_scores"] = scores;
    j["ensemble_mean"] = optional_to_json(r.mean);
    return j.dump();
}

std::optional<EnsembleRecord> parse_ensemble_line(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        EnsembleRecord r;
        r.document_id = j.at("document_id").get<std::string>();
        r.doc_type = doc_type_from_string(j.at("doc_type").get<std::string>());
        r.strategy = j.at("strategy").get<std::string>();
        r.skill_id = j.at("skill_id").get<std::string>();
        for (const auto& s : j.at("judge_scores")) r.judge_scores.push_back(optional_from_json<int>(s));
        r.mean = optional_from_json<double>(j.at("ensemble_mean"));
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<EnsembleRecord> load_ensemble_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::vector<EnsembleRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto record = parse_ensemble_line(line);
        if (!record)
            throw ValidationError("ensemble file " + path + ": invalid record at line " +
                                  std::to_string(lineno));
        records.push_back(std::move(*record));
    }
    return records;
}

std::vector<std::pair<double, double>> calibration_pairs(const HumanBenchmark& benchmark,
                                                         const std::vector<EnsembleRecord>& ensembles) {
    std::unordered_map<std::string, double> means;
    for (const auto& e : ensembles) {
        if (!e.mean) continue;
        means[e.document_id + '\x1f' + to_string(e.doc_type) + '\x1f' + e.strategy + '\x1f' + e.skill_id] =
            *e.mean;
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : benchmark.records) {
        auto it = means.find(r.document_id + '\x1f' + to_string(r.doc_type) + '\x1f' + r.strategy + '\x1f' +
                             r.skill_id);
        if (it == means.end()) continue;
        pairs.emplace_back(it->second, static_cast<double>(r.score));
    }
    return pairs;
}

std::string to_json_line(const ScoredRecord& r) {
    json j;
    j["strategy"] = to_string(r.strategy.kind);
    j["model"] = r.strategy.model;
    j["document_id"] = r.document_id;
    j["doc_type"] = to_string(r.doc_type);
    j["k"] = r.k;
    j["skills"] = r.skills;
    json judges = json::array(), means = json::array(), calibrated = json::array(), rounded = json::array();
    for (const auto& e : r.entries) {
        json scores = json::array();
        for (const auto& s : e.judge_scores) scores.push_back(optional_to_json(s));
        judges.push_back(scores);
        means.push_back(optional_to_json(e.ensemble_mean));
        calibrated.push_back(optional_to_json(e.calibrated));
        rounded.push_back(optional_to_json(e.rounded));
    }
    j["judge_scores"] = judges;
    j["ensemble_mean"] = means;
    j["calibrated"] = calibrated;
    j["rounded"] = rounded;
    j["timestamp"] = r.timestamp;
    return j.dump();
}

std::optional<ScoredRecord> parse_scored_line(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        ScoredRecord r;
        r.strategy.kind = strategy_kind_from_string(j.at("strategy").get<std::string>());
        r.strategy.model = j.at("model").get<std::string>();
        r.document_id = j.at("document_id").get<std::string>();
        r.doc_type = doc_type_from_string(j.at("doc_type").get<std::string>());
        r.k = j.at("k").get<std::size_t>();
        r.skills = j.at("skills").get<std::vector<std::string>>();
        const auto& judges = j.at("judge_scores");
        const auto& means = j.at("ensemble_mean");
        const auto& calibrated = j.at("calibrated");
        const auto& rounded = j.at("rounded");
        for (std::size_t i = 0; i < r.skills.size(); ++i) {
            ScoredSkillEntry e;
            for (const auto& s : judges.at(i)) e.judge_scores.push_back(optional_from_json<int>(s));
            e.ensemble_mean = optional_from_json<double>(means.at(i));
            e.calibrated = optional_from_json<double>(calibrated.at(i));
            e.rounded = optional_from_json<int>(rounded.at(i));
            r.entries.push_back(std::move(e));
        }
        r.timestamp = j.at("timestamp").get<std::int64_t>();
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

LoadedScoredLedger load_scored_ledger(const std::string& path) {
    LoadedScoredLedger loaded;
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
        auto record = parse_scored_line(line);
        if (record && had_newline) {
            loaded.records.push_back(std::move(*record));
            offset += consumed;
            loaded.valid_bytes = offset;
            continue;
        }
        bool is_last = !had_newline || in.peek() == EOF;
        if (is_last) {
            loaded.truncated_tail = true;
            return loaded;
        }
        throw ValidationError("scored ledger " + path + ": corrupt record mid-file at byte offset " +
                              std::to_string(offset));
    }
    return loaded;
}

ScoreLedgerReport score_ledger(const std::string& ledger_path, const Corpus& corpus,
                               const SkillTaxonomy& taxonomy, const JudgePanel& panel,
                               const CalibrationModel& calibration, const std::string& scored_path,
                               unsigned workers, std::int64_t epoch) {
    if (panel.members.empty()) throw ConfigError("score_ledger: no judges configured");
    LoadedLedger ledger = load_ledger(ledger_path);
    LoadedScoredLedger existing = load_scored_ledger(scored_path);
    if (existing.truncated_tail) std::filesystem::resize_file(scored_path, existing.valid_bytes);

    std::set<std::string> done;
    for (const auto& r : existing.records) done.insert(ledger_key(r.strategy, r.document_id, r.doc_type));

    std::unordered_map<std::string, const CurriculumDocument*> documents;
    for (const auto& d : corpus.documents) documents[d.id + '\x1f' + to_string(d.doc_type)] = &d;

    ScoreLedgerReport report;
    std::vector<const ExtractionRecord*> todo;
    for (const auto& r : ledger.records) {
        if (r.status != "ok") continue;
        if (done.count(ledger_key(r.strategy, r.document_id, r.doc_type))) {
            ++report.skipped;
            continue;
        }
        if (!documents.count(r.document_id + '\x1f' + to_string(r.doc_type)))
            throw ValidationError("score_ledger: ledger references document (" + r.document_id + ", " +
                                  to_string(r.doc_type) + ") absent from the corpus");
        todo.push_back(&r);
    }
    if (todo.empty()) return report;

    std::ofstream out(scored_path, std::ios::binary | std::ios::app);
    if (!out) throw ValidationError("cannot open scored ledger for writing: " + scored_path);

    auto score_run = [&](std::size_t index) {
        const ExtractionRecord& run = *todo[index];
        const CurriculumDocument& document = *documents[run.document_id + '\x1f' + to_string(run.doc_type)];
        ScoredRecord scored;
        scored.strategy = run.strategy;
        scored.document_id = run.document_id;
        scored.doc_type = run.doc_type;
        scored.k = run.k;
        scored.skills = run.skills;
        scored.timestamp = epoch >= 0 ? epoch
                                      : std::chrono::duration_cast<std::chrono::seconds>(
                                            std::chrono::system_clock::now().time_since_epoch())
                                            .count();
        for (const auto& skill_id : run.skills) {
            const Skill* skill = taxonomy.find(skill_id);
            ScoredSkillEntry entry;
            if (skill) {
                EnsembleScore ensemble = ensemble_score(panel, document, *skill);
                entry.judge_scores = ensemble.judge_scores;
                entry.ensemble_mean = ensemble.mean;
                if (ensemble.mean) {
                    auto [continuous, rounded] = calibration.apply(*ensemble.mean);
                    entry.calibrated = continuous;
                    entry.rounded = rounded;
                }
            }
            scored.entries.push_back(std::move(entry));
        }
        return scored;
    };

    detail::ordered_parallel_run<ScoredRecord>(
        todo.size(), std::max(1u, workers), score_run, [&](std::size_t, const ScoredRecord& r) {
            out << to_json_line(r) << '\n';
            out.flush();
            ++report.done;
            for (const auto& e : r.entries)
                if (!e.rounded) ++report.unscored_skills;
        });
    return report;
}

}  // namespace skillalign
