// SPDX-License-Identifier: Apache-2.0
#include "skillalign/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "skillalign/judge.hpp"
#include "skillalign/metrics.hpp"
#include "skillalign/providers.hpp"

namespace skillalign {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const fs::path& base, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return p.string();
    return (base / p).lexically_normal().string();
}

StrategySpec parse_strategy_spec(const json& j) {
    StrategySpec spec;
    spec.kind = strategy_kind_from_string(j.at("kind").get<std::string>());
    spec.provider = j.value("provider", "mock");
    spec.model = j.value("model", "");
    if ((spec.kind == StrategyKind::ZeroShot || spec.kind == StrategyKind::Rag) && spec.model.empty())
        throw ConfigError("pipeline config: strategy " + to_string(spec.kind) + " requires a model id");
    return spec;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open pipeline config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("pipeline config " + path + ": " + e.what());
    }
    fs::path base = fs::path(path).parent_path();

    PipelineConfig config;
    try {
        config.taxonomy_path = resolve(base, j.at("taxonomy").get<std::string>());
        config.corpus_path = resolve(base, j.at("corpus").get<std::string>());
        config.background_path = resolve(base, j.at("background").get<std::string>());
        config.benchmark_path = resolve(base, j.at("benchmark").get<std::string>());
        config.out_dir = resolve(base, j.at("out_dir").get<std::string>());
        config.providers_path = resolve(base, j.value("providers", ""));
        config.prompts_dir = resolve(base, j.value("prompts_dir", ""));
        config.embedding_provider = j.value("embedding_provider", "mock");
        config.k = j.value("k", std::size_t{10});
        config.seed = j.value("seed", std::uint64_t{0});
        config.epoch = j.value("epoch", std::int64_t{-1});
        config.workers = j.value("workers", 1u);
        if (j.contains("sample")) {
            config.sample_n = j["sample"].value("n", std::size_t{0});
            config.strata_keys = j["sample"].value("strata", std::vector<std::string>{});
        }
        for (const auto& s : j.value("strategies", json::array()))
            config.strategies.push_back(parse_strategy_spec(s));
        for (const auto& s : j.value("judges", json::array())) {
            StrategySpec judge;
            judge.provider = s.value("provider", "mock");
            judge.model = s.at("model").get<std::string>();
            config.judges.push_back(judge);
        }
    } catch (const json::exception& e) {
        throw ConfigError("pipeline config " + path + ": " + e.what());
    }
    if (config.k == 0) throw ConfigError("pipeline config: k must be >= 1");
    if (config.strategies.empty()) throw ConfigError("pipeline config: no strategies configured");
    if (config.judges.empty()) throw ConfigError("pipeline config: no judges configured");
    for (const std::string* p : {&config.taxonomy_path, &config.corpus_path, &config.background_path,
                                 &config.benchmark_path}) {
        if (!fs::exists(*p)) throw ConfigError("pipeline config: missing input file " + *p);
    }
    if (!config.providers_path.empty() && !fs::exists(config.providers_path))
        throw ConfigError("pipeline config: missing provider config " + config.providers_path);
    return config;
}

PipelineResult run_pipeline(const PipelineConfig& config, std::ostream& log) {
    PipelineResult result;
    auto stage = [&](const std::string& name, const std::string& outcome, const std::string& detail = "") {
        result.stages.push_back({name, outcome, detail});
        log << "  [" << outcome << "] " << name << (detail.empty() ? "" : "  (" + detail + ")") << '\n';
    };
    std::string current_stage = "setup";
    try {
        fs::create_directories(config.out_dir);
        fs::path out(config.out_dir);
        std::string sample_path = (out / "sample.jsonl").string();
        std::string store_path = (out / "store.tsv").string();
        std::string ledger_path = (out / "ledger.jsonl").string();
        std::string ensemble_path = (out / "ensemble.jsonl").string();
        std::string calibration_path = (out / "calibration.json").string();
        std::string scored_path = (out / "scored.jsonl").string();
        std::string audit_path = (out / "audit.jsonl").string();

        ProviderSet providers =
            config.providers_path.empty() ? ProviderSet::mocks() : ProviderSet::load(config.providers_path);
        PromptTemplates templates =
            config.prompts_dir.empty() ? PromptTemplates::builtin() : PromptTemplates::load_dir(config.prompts_dir);
        AuditLog audit(audit_path);

        // validate
        current_stage = "validate";
        SkillTaxonomy taxonomy = load_taxonomy(config.taxonomy_path);
        Corpus corpus = load_corpus(config.corpus_path);
        BackgroundFrequencies background = load_background_frequencies(config.background_path);
        HumanBenchmark benchmark = load_benchmark(config.benchmark_path);
        stage("validate", "done",
              std::to_string(taxonomy.size()) + " skills, " + std::to_string(corpus.size()) + " documents, " +
                  std::to_string(benchmark.records.size()) + " benchmark rows");

        // sample
        current_stage = "sample";
        Corpus working;
        if (config.sample_n == 0) {
            working = corpus;
            stage("sample", "skipped", "no sampling requested");
        } else if (fs::exists(sample_path)) {
            working = load_corpus(sample_path);
            stage("sample", "skipped", "exists: " + sample_path);
        } else {
            working = stratified_sample(corpus, config.sample_n, config.strata_keys, config.seed);
            save_corpus(working, sample_path);
            stage("sample", "done", std::to_string(working.size()) + " documents");
        }
        if (config.sample_n != 0) result.artifacts.emplace_back("sample", sample_path);

        // embed
        current_stage = "embed";
        EmbeddingProvider& embedder = providers.embedding(config.embedding_provider);
        if (fs::exists(store_path)) {
            stage("embed", "skipped", "exists: " + store_path);
        } else {
            EmbeddingStore store = EmbeddingStore::build(embedder, taxonomy);
            store.save(store_path);
            stage("embed", "done", std::to_string(store.size()) + " vectors, " + store.fingerprint());
        }
        EmbeddingStore store = EmbeddingStore::load(store_path);
        validate_store_covers(store, taxonomy);
        result.artifacts.emplace_back("store", store_path);

        // extract
        current_stage = "extract";
        LexicalModel lexical = LexicalModel::build(taxonomy, background);
        MatrixReport matrix_total;
        for (const auto& spec : config.strategies) {
            Strategy strategy{spec.kind, spec.model};
            ExtractDeps deps;
            deps.lexical = &lexical;
            deps.store = &store;
            deps.embedder = &embedder;
            deps.taxonomy = &taxonomy;
            deps.templates = &templates;
            deps.epoch = config.epoch;
            deps.audit = &audit;
            if (spec.kind == StrategyKind::ZeroShot || spec.kind == StrategyKind::Rag) {
                deps.chat = &providers.chat(spec.provider);
                deps.limiter = providers.limiter(spec.provider);
            }
            MatrixReport r = run_matrix(working, {strategy}, deps, config.k, ledger_path,
                                        /*retry_failed=*/false, config.workers);
            matrix_total.done += r.done;
            matrix_total.failed += r.failed;
            matrix_total.skipped += r.skipped;
        }
        stage("extract", matrix_total.done + matrix_total.failed == 0 ? "skipped" : "done",
              std::to_string(matrix_total.done) + " done, " + std::to_string(matrix_total.failed) +
                  " failed, " + std::to_string(matrix_total.skipped) + " skipped");
        result.artifacts.emplace_back("ledger", ledger_path);

        // judge panel shared by ensemble + scoring
        JudgePanel panel;
        for (const auto& spec : config.judges) {
            panel.members.push_back({&providers.chat(spec.provider), spec.model});
            if (!panel.limiter) panel.limiter = providers.limiter(spec.provider);
        }
        panel.templates = &templates;
        panel.audit = &audit;

        // ensemble over the human benchmark
        current_stage = "ensemble";
        if (fs::exists(ensemble_path)) {
            stage("ensemble", "skipped", "exists: " + ensemble_path);
        } else {
            std::unordered_map<std::string, const CurriculumDocument*> documents;
            for (const auto& d : corpus.documents) documents[d.id + '\x1f' + to_string(d.doc_type)] = &d;
            std::ofstream ensemble_out(ensemble_path, std::ios::binary | std::ios::trunc);
            std::size_t scored = 0;
            for (const auto& r : benchmark.records) {
                auto doc = documents.find(r.document_id + '\x1f' + to_string(r.doc_type));
                const Skill* skill = taxonomy.find(r.skill_id);
                if (doc == documents.end() || !skill)
                    throw ValidationError("benchmark row references unknown document or skill (" +
                                          r.document_id + ", " + r.skill_id + ")");
                EnsembleScore ensemble = ensemble_score(panel, *doc->second, *skill);
                EnsembleRecord record{r.document_id, r.doc_type, r.strategy, r.skill_id,
                                      ensemble.judge_scores, ensemble.mean};
                ensemble_out << to_json_line(record) << '\n';
                ++scored;
            }
            stage("ensemble", "done", std::to_string(scored) + " benchmark items judged");
        }
        result.artifacts.emplace_back("ensemble", ensemble_path);

        // calibrate
        current_stage = "calibrate";
        if (fs::exists(calibration_path)) {
            stage("calibrate", "skipped", "exists: " + calibration_path);
        } else {
            auto pairs = calibration_pairs(benchmark, load_ensemble_file(ensemble_path));
            CalibrationModel model = CalibrationModel::fit(pairs);
            model.save(calibration_path);
            ValidationReport validation = validate_calibration(pairs, 0.8, 10, config.seed);
            char detail[160];
            std::snprintf(detail, sizeof(detail),
                          "%zu pairs, holdout accuracy %.3f, fold accuracy %.3f +/- %.3f", pairs.size(),
                          validation.holdout.accuracy, validation.fold_accuracy_mean,
                          validation.fold_accuracy_stddev);
            stage("calibrate", "done", detail);
        }
        CalibrationModel calibration = CalibrationModel::load(calibration_path);
        result.artifacts.emplace_back("calibration", calibration_path);

        // score
        current_stage = "score";
        ScoreLedgerReport score_report = score_ledger(ledger_path, working, taxonomy, panel, calibration,
                                                      scored_path, config.workers, config.epoch);
        stage("score", score_report.done == 0 ? "skipped" : "done",
              std::to_string(score_report.done) + " runs scored, " + std::to_string(score_report.skipped) +
                  " skipped, " + std::to_string(score_report.unscored_skills) + " skills unscored");
        result.artifacts.emplace_back("scored", scored_path);

        // report
        current_stage = "report";
        std::string overall_md = (out / "report_overall.md").string();
        std::string overall_csv = (out / "report_overall.csv").string();
        std::string by_type_md = (out / "report_by_doctype.md").string();
        std::string plotdata_path = (out / "plotdata.json").string();
        if (fs::exists(overall_md) && fs::exists(overall_csv) && fs::exists(by_type_md) &&
            fs::exists(plotdata_path)) {
            stage("report", "skipped", "exists");
        } else {
            auto scored_records = load_scored_ledger(scored_path).records;
            ReportTable overall = aggregate(scored_records, /*group_by_doc_type=*/false);
            ReportTable by_type = aggregate(scored_records, /*group_by_doc_type=*/true);
            auto write = [](const std::string& path, const std::string& content) {
                std::ofstream f(path, std::ios::binary | std::ios::trunc);
                f << content;
            };
            write(overall_md, render_markdown(overall));
            write(overall_csv, render_csv(overall));
            write(by_type_md, render_markdown(by_type));
            write(plotdata_path, render_plotdata(by_type));
            stage("report", "done");
        }
        result.artifacts.emplace_back("report_overall_md", overall_md);
        result.artifacts.emplace_back("report_overall_csv", overall_csv);
        result.artifacts.emplace_back("report_by_doctype_md", by_type_md);
        result.artifacts.emplace_back("plotdata", plotdata_path);

        if (matrix_total.failed > 0 || score_report.failed > 0) {
            result.exit_code = kExitPartial;
            result.error = "completed with recorded failures; re-run with --retry-failed to retry them";
        }
    } catch (const ConfigError& e) {
        result.exit_code = kExitConfigError;
        result.error = std::string("config error: ") + e.what();
        log << "pipeline failed in stage '" << current_stage << "': " << e.what() << '\n';
    } catch (const std::exception& e) {
        result.exit_code = kExitStageFailure;
        result.error = "stage '" + current_stage + "' failed: " + e.what() +
                       " (fix the input or delete the stage's artifact in " + config.out_dir + " and re-run)";
        log << "pipeline failed in stage '" << current_stage << "': " << e.what() << '\n';
    }
    return result;
}

}  // namespace skillalign
