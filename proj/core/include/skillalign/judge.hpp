// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skillalign/corpus.hpp"
#include "skillalign/extract.hpp"
#include "skillalign/llm.hpp"
#include "skillalign/prompts.hpp"

namespace skillalign {

/// One human rubric score for an extracted skill.
struct BenchmarkRecord {
    std::string document_id;
    DocType doc_type = DocType::SyllabusDescription;
    std::string strategy;  // free-form label; carried for bookkeeping
    std::string skill_id;
    int score = 0;  // 1..5
};

struct HumanBenchmark {
    std::vector<BenchmarkRecord> records;
};

/// CSV with header document_id,doc_type,strategy,skill_id,score.
HumanBenchmark load_benchmark(const std::string& path);
void save_benchmark(const HumanBenchmark& benchmark, const std::string& path);

/// Per-judge raw scores plus their mean over the non-excluded judges.
struct EnsembleScore {
    std::vector<std::optional<int>> judge_scores;  // nullopt = unparseable, excluded
    std::optional<double> mean;                    // nullopt = every judge excluded
};

/// The judge models scoring independently, plus everything needed to build
/// their prompts.
struct JudgePanel {
    struct Member {
        ChatProvider* provider = nullptr;
        std::string model;
    };
    std::vector<Member> members;
    const PromptTemplates* templates = nullptr;  // defaults to builtin()
    const Rubric* rubric = nullptr;              // defaults to default_rubric()
    const std::vector<JudgeExemplar>* exemplars = nullptr;
    RetryPolicy retry;
    RateLimiter* limiter = nullptr;
    AuditLog* audit = nullptr;
};

/// Scores one (document, skill) pair with every panel member and averages
/// the parseable scores. Unparseable judges are excluded; when all are, the
/// returned mean is empty and the caller flags the skill unscored.
EnsembleScore ensemble_score(const JudgePanel& panel, const CurriculumDocument& document,
                             const Skill& skill);

/// Two-stage map from ensemble means to the human score scale: ordinary
/// least squares of human on ensemble mean, then an empirical-CDF match that
/// quantile-maps regression outputs onto the human score distribution via
/// piecewise-linear interpolation between order-statistic knots.
class CalibrationModel {
public:
    /// pairs are (ensemble mean, human score). Needs >= 10 pairs, a
    /// non-constant predictor, and a positive fitted slope.
    static CalibrationModel fit(const std::vector<std::pair<double, double>>& pairs);

    double slope() const { return slope_; }
    double intercept() const { return intercept_; }
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }
    const std::string& fingerprint() const { return fingerprint_; }

    /// (continuous, rounded): quantile_map(slope*x + intercept) clamped to
    /// [1,5]; rounded is half-up to the nearest integer in 1..5. Outside the
    /// knot range the map continues linearly with unit slope before clamping.
    std::pair<double, int> apply(double ensemble_mean) const;

    void save(const std::string& path) const;
    static CalibrationModel load(const std::string& path);

private:
    double slope_ = 1.0;
    double intercept_ = 0.0;
    std::vector<std::pair<double, double>> knots_;  // strictly increasing x
    std::string fingerprint_;
};

/// Agreement statistics between two raters on the 1..5 rubric scale.
/// Statistics whose denominators vanish (all-constant data) are reported as
/// undefined rather than 0.
struct AgreementReport {
    double accuracy = 0.0;
    std::optional<double> cohen_kappa;
    std::optional<double> weighted_kappa;      // quadratic weights
    std::optional<double> krippendorff_alpha;  // ordinal metric
    std::optional<double> icc;                 // ICC(2,1), absolute agreement
    std::size_t n_items = 0;
};

AgreementReport agreement_statistics(const std::vector<int>& ratings_a, const std::vector<int>& ratings_b);

/// Seeded 80/20 split; 10-fold cross-validation on the training 80% for fold
/// stability; the final report compares rounded calibrated scores against
/// human scores on the untouched 20%.
struct ValidationReport {
    AgreementReport holdout;
    std::vector<double> fold_accuracy;
    double fold_accuracy_mean = 0.0;
    double fold_accuracy_stddev = 0.0;
};

ValidationReport validate_calibration(const std::vector<std::pair<double, double>>& pairs,
                                      double train_fraction = 0.8, std::size_t folds = 10,
                                      std::uint64_t seed = 0);

/// One judged benchmark item; the file format exchanged between
/// `judge ensemble` and `judge calibrate`.
struct EnsembleRecord {
    std::string document_id;
    DocType doc_type = DocType::SyllabusDescription;
    std::string strategy;
    std::string skill_id;
    std::vector<std::optional<int>> judge_scores;
    std::optional<double> mean;
};

std::string to_json_line(const EnsembleRecord& record);
std::optional<EnsembleRecord> parse_ensemble_line(std::string_view line);
std::vector<EnsembleRecord> load_ensemble_file(const std::string& path);

/// Joins benchmark rows with ensemble records on (document, doc_type,
/// strategy, skill) and returns (ensemble mean, human score) pairs for
/// fitting; rows without a scored ensemble partner are dropped.
std::vector<std::pair<double, double>> calibration_pairs(const HumanBenchmark& benchmark,
                                                         const std::vector<EnsembleRecord>& ensembles);

/// One skill's judging outcome inside a scored run.
struct ScoredSkillEntry {
    std::vector<std::optional<int>> judge_scores;
    std::optional<double> ensemble_mean;
    std::optional<double> calibrated;
    std::optional<int> rounded;  // 1..5; empty = unscored
};

/// A fully judged extraction run; entries align with skills.
struct ScoredRecord {
    Strategy strategy;
    std::string document_id;
    DocType doc_type = DocType::SyllabusDescription;
    std::size_t k = 0;
    std::vector<std::string> skills;
    std::vector<ScoredSkillEntry> entries;
    std::int64_t timestamp = 0;
};

std::string to_json_line(const ScoredRecord& record);
std::optional<ScoredRecord> parse_scored_line(std::string_view line);

struct LoadedScoredLedger {
    std::vector<ScoredRecord> records;
    std::size_t valid_bytes = 0;
    bool truncated_tail = false;
};
LoadedScoredLedger load_scored_ledger(const std::string& path);

struct ScoreLedgerReport {
    std::size_t done = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;           // runs that could not be scored at all
    std::size_t unscored_skills = 0;  // skills flagged unscored inside done runs
};

/// Judges every ok run in the extraction ledger and appends calibrated
/// per-skill scores to the scored ledger. Resumable and order-stable the
/// same way run_matrix is.
ScoreLedgerReport score_ledger(const std::string& ledger_path, const Corpus& corpus,
                               const SkillTaxonomy& taxonomy, const JudgePanel& panel,
                               const CalibrationModel& calibration, const std::string& scored_path,
                               unsigned workers = 1, std::int64_t epoch = -1);

}  // namespace skillalign
