// SPDX-License-Identifier: Apache-2.0
//
// skillalign: extract top-K workforce skills from curriculum documents with
// four alignment strategies, judge extraction quality with a calibrated
// ensemble of LLM judges, and aggregate the calibrated scores into ranking
// metrics by strategy and document type.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "skillalign/judge.hpp"
#include "skillalign/metrics.hpp"
#include "skillalign/pipeline.hpp"
#include "skillalign/providers.hpp"

using namespace skillalign;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool json = false;
    std::string config;  // pipeline config; also usable as `pipeline --config`
};

void emit(const GlobalOpts& opts, const json& summary, const std::string& human) {
    if (opts.json) std::cout << summary.dump(2) << '\n';
    else std::cout << human;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << content;
}

struct JudgesConfig {
    ProviderSet providers;
    std::vector<std::pair<std::string, std::string>> members;  // provider, model
};

JudgesConfig load_judges_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open judges config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("judges config " + path + ": " + e.what());
    }
    JudgesConfig config;
    std::string providers_path = j.value("providers", "");
    if (!providers_path.empty()) {
        fs::path p(providers_path);
        if (p.is_relative()) p = fs::path(path).parent_path() / p;
        config.providers = ProviderSet::load(p.string());
    } else {
        config.providers = ProviderSet::mocks();
    }
    for (const auto& m : j.at("judges"))
        config.members.emplace_back(m.value("provider", "mock"), m.at("model").get<std::string>());
    if (config.members.empty()) throw ConfigError("judges config " + path + ": no judges listed");
    return config;
}

// Two accepted shapes: the benchmark CSV (scores joined on their keys) or a
// bare list of integers, one per line.
std::vector<int> load_rating_file(const std::string& path) {
    std::string head;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ValidationError("cannot open file: " + path);
        std::getline(in, head);
    }
    if (head.rfind("document_id,", 0) == 0) {
        HumanBenchmark b = load_benchmark(path);
        std::vector<int> scores;
        scores.reserve(b.records.size());
        for (const auto& r : b.records) scores.push_back(r.score);
        return scores;
    }
    std::ifstream in(path, std::ios::binary);
    std::vector<int> scores;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        try {
            scores.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw ValidationError("ratings " + path + ": not an integer at line " + std::to_string(lineno));
        }
    }
    return scores;
}

// Aligns two benchmark exports by (document, doc_type, strategy, skill) when
// both are CSV; otherwise pairs line-by-line.
std::pair<std::vector<int>, std::vector<int>> load_rating_pair(const std::string& path_a,
                                                               const std::string& path_b) {
    auto is_benchmark = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::string head;
        std::getline(in, head);
        return head.rfind("document_id,", 0) == 0;
    };
    if (is_benchmark(path_a) && is_benchmark(path_b)) {
        HumanBenchmark a = load_benchmark(path_a), b = load_benchmark(path_b);
        std::map<std::string, int> b_scores;
        for (const auto& r : b.records)
            b_scores[r.document_id + '\x1f' + to_string(r.doc_type) + '\x1f' + r.strategy + '\x1f' +
                     r.skill_id] = r.score;
        std::vector<int> va, vb;
        for (const auto& r : a.records) {
            auto it = b_scores.find(r.document_id + '\x1f' + to_string(r.doc_type) + '\x1f' + r.strategy +
                                    '\x1f' + r.skill_id);
            if (it == b_scores.end()) continue;
            va.push_back(r.score);
            vb.push_back(it->second);
        }
        return {va, vb};
    }
    return {load_rating_file(path_a), load_rating_file(path_b)};
}

json agreement_to_json(const AgreementReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return json{{"n_items", r.n_items},
                {"accuracy", r.accuracy},
                {"cohen_kappa", opt(r.cohen_kappa)},
                {"weighted_kappa", opt(r.weighted_kappa)},
                {"krippendorff_alpha", opt(r.krippendorff_alpha)},
                {"icc", opt(r.icc)}};
}

std::string agreement_to_text(const AgreementReport& r) {
    auto opt = [](const std::optional<double>& v) {
        if (!v) return std::string("undefined");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", *v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "n_items:             " << r.n_items << '\n';
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.4f", r.accuracy);
    out << "accuracy:            " << acc << '\n';
    out << "cohen_kappa:         " << opt(r.cohen_kappa) << '\n';
    out << "weighted_kappa:      " << opt(r.weighted_kappa) << '\n';
    out << "krippendorff_alpha:  " << opt(r.krippendorff_alpha) << '\n';
    out << "icc(2,1):            " << opt(r.icc) << '\n';
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skill extraction and evaluation toolkit"};
    app.require_subcommand(1);
    GlobalOpts global;
    app.add_option("--seed", global.seed, "seed for every randomized step")->capture_default_str();
    app.add_flag("--json", global.json, "machine-readable JSON summaries");
    app.add_option("--config", global.config, "pipeline config JSON (used by the pipeline subcommand)");

    std::function<int()> action;

    // ---- corpus ----
    auto* corpus_cmd = app.add_subcommand("corpus", "validate and sample curriculum corpora");
    corpus_cmd->require_subcommand(1);
    {
        auto* validate = corpus_cmd->add_subcommand("validate", "validate a corpus file");
        auto opts = std::make_shared<std::pair<std::string, std::string>>();
        validate->add_option("path", opts->first, "corpus file (JSON lines)")->required();
        validate->add_option("--taxonomy", opts->second, "also validate a taxonomy CSV");
        validate->callback([&action, opts, &global] {
            action = [opts, &global] {
                Corpus corpus = load_corpus(opts->first);
                json summary{{"corpus", opts->first}, {"documents", corpus.size()}};
                std::string human = "corpus ok: " + std::to_string(corpus.size()) + " documents\n";
                if (!opts->second.empty()) {
                    SkillTaxonomy taxonomy = load_taxonomy(opts->second);
                    summary["skills"] = taxonomy.size();
                    human += "taxonomy ok: " + std::to_string(taxonomy.size()) + " skills\n";
                }
                emit(global, summary, human);
                return kExitOk;
            };
        });
    }
    {
        auto* sample = corpus_cmd->add_subcommand("sample", "seeded stratified sampling");
        struct SampleOpts {
            std::string path, out, strata;
            std::size_t n = 0;
        };
        auto opts = std::make_shared<SampleOpts>();
        sample->add_option("path", opts->path, "corpus file")->required();
        sample->add_option("--n", opts->n, "sample size")->required();
        sample->add_option("--strata", opts->strata, "comma-separated strata keys (subject,length_bucket,source)");
        sample->add_option("--out", opts->out, "output corpus file")->required();
        sample->callback([&action, opts, &global] {
            action = [opts, &global] {
                Corpus corpus = load_corpus(opts->path);
                std::vector<std::string> keys;
                std::stringstream ss(opts->strata);
                std::string key;
                while (std::getline(ss, key, ','))
                    if (!key.empty()) keys.push_back(key);
                Corpus sampled = stratified_sample(corpus, opts->n, keys, global.seed);
                save_corpus(sampled, opts->out);
                emit(global,
                     json{{"sampled", sampled.size()}, {"out", opts->out}, {"seed", global.seed}},
                     "sampled " + std::to_string(sampled.size()) + " documents -> " + opts->out + "\n");
                return kExitOk;
            };
        });
    }

    // ---- embed ----
    {
        auto* embed = app.add_subcommand("embed", "embed the skill taxonomy into a vector store");
        struct EmbedOpts {
            std::string taxonomy, provider = "mock", providers, out;
        };
        auto opts = std::make_shared<EmbedOpts>();
        embed->add_option("--taxonomy", opts->taxonomy, "taxonomy CSV")->required();
        embed->add_option("--provider", opts->provider, "embedding provider name")->capture_default_str();
        embed->add_option("--providers", opts->providers, "provider config JSON");
        embed->add_option("--out", opts->out, "output store file")->required();
        embed->callback([&action, opts, &global] {
            action = [opts, &global] {
                SkillTaxonomy taxonomy = load_taxonomy(opts->taxonomy);
                ProviderSet providers =
                    opts->providers.empty() ? ProviderSet::mocks() : ProviderSet::load(opts->providers);
                EmbeddingStore store = EmbeddingStore::build(providers.embedding(opts->provider), taxonomy);
                store.save(opts->out);
                emit(global,
                     json{{"vectors", store.size()}, {"dim", store.dim()},
                          {"fingerprint", store.fingerprint()}, {"out", opts->out}},
                     "embedded " + std::to_string(store.size()) + " skills (dim " +
                         std::to_string(store.dim()) + ", " + store.fingerprint() + ") -> " + opts->out + "\n");
                return kExitOk;
            };
        });
    }

    // ---- extract ----
    {
        auto* extract = app.add_subcommand("extract", "run one alignment strategy over a corpus");
        struct ExtractOpts {
            std::string strategy, model, provider = "mock", embed_provider = "mock";
            std::string corpus, taxonomy, background, store, out;
            std::string providers, prompts;
            std::size_t k = 10;
            unsigned workers = 1;
            std::int64_t epoch = -1;
            bool resume = false, retry_failed = false, strict_retry = false;
        };
        auto opts = std::make_shared<ExtractOpts>();
        extract->add_option("--strategy", opts->strategy, "tfidf | embed | zero-shot | rag")->required();
        extract->add_option("--model", opts->model, "model id for LLM strategies");
        extract->add_option("--provider", opts->provider, "chat provider name")->capture_default_str();
        extract->add_option("--embed-provider", opts->embed_provider, "embedding provider for document vectors")
            ->capture_default_str();
        extract->add_option("--corpus", opts->corpus, "corpus file")->required();
        extract->add_option("--taxonomy", opts->taxonomy, "taxonomy CSV")->required();
        extract->add_option("--background", opts->background, "background frequencies (tfidf)");
        extract->add_option("--store", opts->store, "embedding store (embed/rag)");
        extract->add_option("--k", opts->k, "skills per document")->capture_default_str();
        extract->add_option("--out", opts->out, "ledger file")->required();
        extract->add_option("--workers", opts->workers, "parallel workers")->capture_default_str();
        extract->add_option("--epoch", opts->epoch, "fixed record timestamp (unix seconds)");
        extract->add_option("--providers", opts->providers, "provider config JSON");
        extract->add_option("--prompts", opts->prompts, "prompt template directory");
        extract->add_flag("--resume", opts->resume, "continue an interrupted ledger");
        extract->add_flag("--retry-failed", opts->retry_failed, "re-run pairs recorded as failed");
        extract->add_flag("--strict-retry", opts->strict_retry, "re-ask once on short model output");
        extract->callback([&action, opts, &global] {
            action = [opts, &global] {
                if (!opts->resume && !opts->retry_failed && fs::exists(opts->out) &&
                    fs::file_size(opts->out) > 0)
                    throw ConfigError("ledger " + opts->out + " already exists; pass --resume to continue");
                Strategy strategy{strategy_kind_from_string(opts->strategy), opts->model};
                Corpus corpus = load_corpus(opts->corpus);
                SkillTaxonomy taxonomy = load_taxonomy(opts->taxonomy);
                ProviderSet providers =
                    opts->providers.empty() ? ProviderSet::mocks() : ProviderSet::load(opts->providers);
                PromptTemplates templates = opts->prompts.empty() ? PromptTemplates::builtin()
                                                                  : PromptTemplates::load_dir(opts->prompts);

                std::optional<LexicalModel> lexical;
                std::optional<EmbeddingStore> store;
                ExtractDeps deps;
                deps.taxonomy = &taxonomy;
                deps.templates = &templates;
                deps.epoch = opts->epoch;
                deps.strict_retry = opts->strict_retry;
                AuditLog audit(opts->out + ".audit.jsonl");
                deps.audit = &audit;
                if (strategy.kind == StrategyKind::Tfidf) {
                    if (opts->background.empty())
                        throw ConfigError("extract tfidf: --background required");
                    lexical.emplace(LexicalModel::build(taxonomy, load_background_frequencies(opts->background)));
                    deps.lexical = &*lexical;
                }
                if (strategy.kind == StrategyKind::Embed || strategy.kind == StrategyKind::Rag) {
                    if (opts->store.empty()) throw ConfigError("extract: --store required for this strategy");
                    store.emplace(EmbeddingStore::load(opts->store));
                    validate_store_covers(*store, taxonomy);
                    deps.store = &*store;
                    deps.embedder = &providers.embedding(opts->embed_provider);
                }
                if (strategy.kind == StrategyKind::ZeroShot || strategy.kind == StrategyKind::Rag) {
                    deps.chat = &providers.chat(opts->provider);
                    deps.limiter = providers.limiter(opts->provider);
                }
                MatrixReport report = run_matrix(corpus, {strategy}, deps, opts->k, opts->out,
                                                 opts->retry_failed, opts->workers);
                emit(global,
                     json{{"strategy", strategy.label()}, {"done", report.done}, {"failed", report.failed},
                          {"skipped", report.skipped}, {"ledger", opts->out}},
                     strategy.label() + ": " + std::to_string(report.done) + " done, " +
                         std::to_string(report.failed) + " failed, " + std::to_string(report.skipped) +
                         " skipped -> " + opts->out + "\n");
                return report.failed > 0 ? kExitPartial : kExitOk;
            };
        });
    }

    // ---- judge ----
    auto* judge_cmd = app.add_subcommand("judge", "ensemble judging, calibration, agreement");
    judge_cmd->require_subcommand(1);
    {
        auto* ensemble = judge_cmd->add_subcommand("ensemble", "judge the human-benchmark items");
        struct EnsembleOpts {
            std::string benchmark, corpus, taxonomy, judges, out, prompts;
        };
        auto opts = std::make_shared<EnsembleOpts>();
        ensemble->add_option("--benchmark", opts->benchmark, "human benchmark CSV")->required();
        ensemble->add_option("--corpus", opts->corpus, "corpus file")->required();
        ensemble->add_option("--taxonomy", opts->taxonomy, "taxonomy CSV")->required();
        ensemble->add_option("--judges", opts->judges, "judges config JSON")->required();
        ensemble->add_option("--out", opts->out, "output ensemble JSONL")->required();
        ensemble->add_option("--prompts", opts->prompts, "prompt template directory");
        ensemble->callback([&action, opts, &global] {
            action = [opts, &global] {
                HumanBenchmark benchmark = load_benchmark(opts->benchmark);
                Corpus corpus = load_corpus(opts->corpus);
                SkillTaxonomy taxonomy = load_taxonomy(opts->taxonomy);
                JudgesConfig judges = load_judges_config(opts->judges);
                PromptTemplates templates = opts->prompts.empty() ? PromptTemplates::builtin()
                                                                  : PromptTemplates::load_dir(opts->prompts);
                JudgePanel panel;
                for (auto& [provider, model] : judges.members)
                    panel.members.push_back({&judges.providers.chat(provider), model});
                panel.templates = &templates;

                std::unordered_map<std::string, const CurriculumDocument*> documents;
                for (const auto& d : corpus.documents)
                    documents[d.id + '\x1f' + to_string(d.doc_type)] = &d;
                std::ofstream out(opts->out, std::ios::binary | std::ios::trunc);
                if (!out) throw ValidationError("cannot open file for writing: " + opts->out);
                std::size_t scored = 0, unscored = 0;
                for (const auto& r : benchmark.records) {
                    auto doc = documents.find(r.document_id + '\x1f' + to_string(r.doc_type));
                    const Skill* skill = taxonomy.find(r.skill_id);
                    if (doc == documents.end() || !skill)
                        throw ValidationError("benchmark row references unknown document or skill (" +
                                              r.document_id + ", " + r.skill_id + ")");
                    EnsembleScore score = ensemble_score(panel, *doc->second, *skill);
                    if (!score.mean) ++unscored;
                    else ++scored;
                    out << to_json_line(EnsembleRecord{r.document_id, r.doc_type, r.strategy, r.skill_id,
                                                       score.judge_scores, score.mean})
                        << '\n';
                }
                emit(global, json{{"scored", scored}, {"unscored", unscored}, {"out", opts->out}},
                     "judged " + std::to_string(scored) + " benchmark items (" + std::to_string(unscored) +
                         " unscorable) -> " + opts->out + "\n");
                return kExitOk;
            };
        });
    }
    {
        auto* calibrate = judge_cmd->add_subcommand("calibrate", "fit the score calibration model");
        struct CalibrateOpts {
            std::string benchmark, ensemble, out;
        };
        auto opts = std::make_shared<CalibrateOpts>();
        calibrate->add_option("--benchmark", opts->benchmark, "human benchmark CSV")->required();
        calibrate->add_option("--ensemble", opts->ensemble, "ensemble scores JSONL")->required();
        calibrate->add_option("--out", opts->out, "output model file")->required();
        calibrate->callback([&action, opts, &global] {
            action = [opts, &global] {
                HumanBenchmark benchmark = load_benchmark(opts->benchmark);
                auto pairs = calibration_pairs(benchmark, load_ensemble_file(opts->ensemble));
                CalibrationModel model = CalibrationModel::fit(pairs);
                model.save(opts->out);
                ValidationReport validation = validate_calibration(pairs, 0.8, 10, global.seed);
                json summary{{"pairs", pairs.size()},
                             {"slope", model.slope()},
                             {"intercept", model.intercept()},
                             {"knots", model.knots().size()},
                             {"fingerprint", model.fingerprint()},
                             {"holdout", agreement_to_json(validation.holdout)},
                             {"fold_accuracy_mean", validation.fold_accuracy_mean},
                             {"fold_accuracy_stddev", validation.fold_accuracy_stddev},
                             {"out", opts->out}};
                std::ostringstream human;
                human << "fitted calibration on " << pairs.size() << " pairs -> " << opts->out << "\n"
                      << "hold-out agreement:\n"
                      << agreement_to_text(validation.holdout);
                char folds[96];
                std::snprintf(folds, sizeof(folds), "fold accuracy: %.3f +/- %.3f\n",
                              validation.fold_accuracy_mean, validation.fold_accuracy_stddev);
                human << folds;
                emit(global, summary, human.str());
                return kExitOk;
            };
        });
    }
    {
        auto* score = judge_cmd->add_subcommand("score", "judge and calibrate an extraction ledger");
        struct ScoreOpts {
            std::string ledger, judges, calibration, out, corpus, taxonomy, prompts;
            unsigned workers = 1;
            std::int64_t epoch = -1;
        };
        auto opts = std::make_shared<ScoreOpts>();
        score->add_option("--ledger", opts->ledger, "extraction ledger JSONL")->required();
        score->add_option("--judges", opts->judges, "judges config JSON")->required();
        score->add_option("--calibration", opts->calibration, "calibration model file")->required();
        score->add_option("--out", opts->out, "scored ledger JSONL")->required();
        score->add_option("--corpus", opts->corpus, "corpus file")->required();
        score->add_option("--taxonomy", opts->taxonomy, "taxonomy CSV")->required();
        score->add_option("--prompts", opts->prompts, "prompt template directory");
        score->add_option("--workers", opts->workers, "parallel workers")->capture_default_str();
        score->add_option("--epoch", opts->epoch, "fixed record timestamp (unix seconds)");
        score->callback([&action, opts, &global] {
            action = [opts, &global] {
                Corpus corpus = load_corpus(opts->corpus);
                SkillTaxonomy taxonomy = load_taxonomy(opts->taxonomy);
                JudgesConfig judges = load_judges_config(opts->judges);
                PromptTemplates templates = opts->prompts.empty() ? PromptTemplates::builtin()
                                                                  : PromptTemplates::load_dir(opts->prompts);
                JudgePanel panel;
                for (auto& [provider, model] : judges.members)
                    panel.members.push_back({&judges.providers.chat(provider), model});
                panel.templates = &templates;
                CalibrationModel calibration = CalibrationModel::load(opts->calibration);
                ScoreLedgerReport report = score_ledger(opts->ledger, corpus, taxonomy, panel, calibration,
                                                        opts->out, opts->workers, opts->epoch);
                emit(global,
                     json{{"done", report.done}, {"skipped", report.skipped},
                          {"unscored_skills", report.unscored_skills}, {"out", opts->out}},
                     "scored " + std::to_string(report.done) + " runs (" + std::to_string(report.skipped) +
                         " skipped, " + std::to_string(report.unscored_skills) + " skills unscored) -> " +
                         opts->out + "\n");
                return kExitOk;
            };
        });
    }
    {
        auto* agreement = judge_cmd->add_subcommand("agreement", "inter-rater agreement statistics");
        auto opts = std::make_shared<std::pair<std::string, std::string>>();
        agreement->add_option("--a", opts->first, "ratings file (benchmark CSV or one integer per line)")
            ->required();
        agreement->add_option("--b", opts->second, "ratings file")->required();
        agreement->callback([&action, opts, &global] {
            action = [opts, &global] {
                auto [a, b] = load_rating_pair(opts->first, opts->second);
                AgreementReport report = agreement_statistics(a, b);
                emit(global, agreement_to_json(report), agreement_to_text(report));
                return kExitOk;
            };
        });
    }

    // ---- report ----
    {
        auto* report_cmd = app.add_subcommand("report", "aggregate a scored ledger into metric tables");
        struct ReportOpts {
            std::string scored, group_by, format = "markdown", out;
            bool micro = false;
        };
        auto opts = std::make_shared<ReportOpts>();
        report_cmd->add_option("--scored", opts->scored, "scored ledger JSONL")->required();
        report_cmd->add_option("--group-by", opts->group_by, "doc_type to add per-type grouping");
        report_cmd->add_option("--format", opts->format, "markdown | csv | plotdata")->capture_default_str();
        report_cmd->add_option("--out", opts->out, "output file (stdout when omitted)");
        report_cmd->add_flag("--micro", opts->micro, "micro-average precisions and mean");
        report_cmd->callback([&action, opts, &global] {
            action = [opts, &global] {
                if (!opts->group_by.empty() && opts->group_by != "doc_type")
                    throw ConfigError("--group-by accepts only 'doc_type'");
                auto records = load_scored_ledger(opts->scored).records;
                ReportTable table = aggregate(records, !opts->group_by.empty(),
                                              opts->micro ? Averaging::Micro : Averaging::Macro);
                std::string rendered = render_report(table, report_format_from_string(opts->format));
                if (opts->out.empty()) {
                    std::cout << rendered;
                } else {
                    write_text_file(opts->out, rendered);
                    emit(global, json{{"rows", table.rows.size()}, {"out", opts->out}},
                         "wrote " + std::to_string(table.rows.size()) + " metric rows -> " + opts->out + "\n");
                }
                return kExitOk;
            };
        });
    }

    // ---- pipeline ----
    {
        auto* pipeline_cmd = app.add_subcommand("pipeline", "run the full chain with resumption");
        auto opts = std::make_shared<std::string>();
        pipeline_cmd->add_option("--config", *opts, "pipeline config JSON");
        pipeline_cmd->callback([&action, opts, &global] {
            action = [opts, &global] {
                if (opts->empty()) *opts = global.config;
                if (opts->empty()) throw ConfigError("pipeline: --config required");
                PipelineConfig config = PipelineConfig::load(*opts);
                if (global.seed != 0) config.seed = global.seed;
                std::ostream& log = global.json ? std::cerr : std::cout;
                log << "pipeline (" << *opts << "):\n";
                PipelineResult result = run_pipeline(config, log);
                if (global.json) {
                    json stages = json::array();
                    for (const auto& s : result.stages)
                        stages.push_back({{"name", s.name}, {"outcome", s.outcome}, {"detail", s.detail}});
                    json artifacts = json::object();
                    for (const auto& [label, path] : result.artifacts) artifacts[label] = path;
                    std::cout << json{{"exit_code", result.exit_code},
                                      {"stages", stages},
                                      {"artifacts", artifacts},
                                      {"error", result.error}}
                                     .dump(2)
                              << '\n';
                } else {
                    for (const auto& [label, path] : result.artifacts)
                        std::cout << "  " << label << ": " << path << '\n';
                    if (!result.error.empty()) std::cout << result.error << '\n';
                }
                return result.exit_code;
            };
        });
    }

    // let --seed/--json/--config appear after subcommand names too
    std::function<void(CLI::App*)> enable_fallthrough = [&enable_fallthrough](CLI::App* cmd) {
        cmd->fallthrough();
        for (CLI::App* sub : cmd->get_subcommands([](const CLI::App*) { return true; }))
            enable_fallthrough(sub);
    };
    enable_fallthrough(&app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        return action ? action() : kExitConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitStageFailure;
    }
}
